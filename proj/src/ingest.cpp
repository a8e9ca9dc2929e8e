#include "hiercheck/ingest.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "hiercheck/chain_io.hpp"
#include "hiercheck/errors.hpp"

namespace hiercheck {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) out.push_back(trim(f));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_real(const std::string& f, const std::string& where) {
    double v = 0.0;
    const auto r = std::from_chars(f.data(), f.data() + f.size(), v);
    if (f.empty() || r.ec != std::errc() || r.ptr != f.data() + f.size() || !std::isfinite(v)) {
        throw ValidationError(fmt::format("{}: '{}' is not a finite number", where, f));
    }
    return v;
}

std::uint64_t parse_count(const std::string& f, const std::string& where) {
    std::uint64_t v = 0;
    const auto r = std::from_chars(f.data(), f.data() + f.size(), v);
    if (f.empty() || r.ec != std::errc() || r.ptr != f.data() + f.size()) {
        throw ValidationError(fmt::format("{}: '{}' is not a nonnegative integer", where, f));
    }
    return v;
}

}  // namespace

Dataset ingest_dataset(std::istream& in, ModelKind model, const std::string& source) {
    const bool normal = model == ModelKind::NormalHier;
    const std::vector<std::string> expected =
        normal ? std::vector<std::string>{"group", "value"} : std::vector<std::string>{"unit", "successes", "trials"};

    std::vector<std::string> labels;
    std::map<std::string, std::size_t> index;
    std::vector<std::vector<double>> groups;
    std::vector<BinomialUnit> units;

    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty() || line.front() == '#') continue;
        const std::string where = fmt::format("{}:{}", source, line_no);
        const auto fields = split(line);
        if (!have_header) {
            if (fields != expected) {
                throw ValidationError(fmt::format("{}: expected header '{}' for model {}", where,
                                                  fmt::join(expected, ","), to_string(model)));
            }
            have_header = true;
            continue;
        }
        if (fields.size() != expected.size()) {
            throw ValidationError(
                fmt::format("{}: malformed row, expected {} fields, found {}", where, expected.size(), fields.size()));
        }
        if (fields[0].empty()) throw ValidationError(where + ": empty label");
        if (normal) {
            const double v = parse_real(fields[1], where);
            auto [it, inserted] = index.try_emplace(fields[0], groups.size());
            if (inserted) {
                labels.push_back(fields[0]);
                groups.emplace_back();
            }
            groups[it->second].push_back(v);
        } else {
            const std::uint64_t x = parse_count(fields[1], where);
            const std::uint64_t n = parse_count(fields[2], where);
            if (n == 0) throw ValidationError(where + ": trials must be positive");
            if (x > n) throw ValidationError(fmt::format("{}: successes {} exceed trials {}", where, x, n));
            if (!index.try_emplace(fields[0], units.size()).second) {
                throw ValidationError(where + ": duplicate unit '" + fields[0] + "'");
            }
            units.push_back({fields[0], x, n});
        }
    }
    if (in.bad()) throw IoError(source + ": read error");
    if (!have_header) throw ValidationError(source + ": missing header line");
    if (normal) {
        if (groups.empty()) throw ValidationError(source + ": no observations");
        return GroupedNormalData(std::move(groups), std::move(labels));
    }
    if (units.empty()) throw ValidationError(source + ": no units");
    return BetaBinomialData(std::move(units));
}

Dataset ingest_dataset(const std::filesystem::path& path, ModelKind model) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    return ingest_dataset(in, model, path.string());
}

void write_dataset(std::ostream& out, const Dataset& data, const nlohmann::json& header) {
    if (!header.is_null()) out << "# " << header.dump() << '\n';
    if (const auto* d = std::get_if<GroupedNormalData>(&data)) {
        out << "group,value\n";
        for (std::size_t i = 0; i < d->group_count(); ++i) {
            const std::string label = d->labels().empty() ? std::to_string(i + 1) : d->labels()[i];
            for (double v : d->group(i)) out << label << ',' << format_number(v) << '\n';
        }
    } else {
        const auto& b = std::get<BetaBinomialData>(data);
        out << "unit,successes,trials\n";
        for (const auto& u : b.units()) out << u.label << ',' << u.successes << ',' << u.trials << '\n';
    }
}

void write_dataset(const std::filesystem::path& path, const Dataset& data, const nlohmann::json& header) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    write_dataset(out, data, header);
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string dataset_fingerprint(const Dataset& data) {
    return std::visit([](const auto& d) { return fingerprint(d); }, data);
}

}  // namespace hiercheck
