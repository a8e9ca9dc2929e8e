#include "hiercheck/chain_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "hiercheck/errors.hpp"

namespace hiercheck {

using nlohmann::json;

json to_json(const PriorSpec& prior) {
    json j;
    j["kind"] = to_string(prior.kind);
    if (prior.is_truncated()) j["a"] = prior.a;
    j["hyper"] = json::object();
    for (const auto& [k, v] : prior.hyper) j["hyper"][k] = v;
    if (!prior.known_group_sigma2.empty()) j["known_group_sigma2"] = prior.known_group_sigma2;
    if (prior.kind == PriorKind::TruncatedJeffreysBetaBinom) {
        j["plugin"] = prior.plugin ? prior.plugin_name : std::string("stand-in (alpha+beta)^(-5/2)");
    }
    return j;
}

PriorSpec prior_from_json(const json& j) {
    PriorSpec p;
    p.kind = parse_prior_kind(j.at("kind").get<std::string>());
    p.a = p.kind == PriorKind::TruncatedJeffreysBetaBinom ? 1e-3 : 1e6;
    if (j.contains("a")) p.a = j.at("a").get<double>();
    if (j.contains("hyper")) {
        for (const auto& [k, v] : j.at("hyper").items()) p.hyper[k] = v.get<double>();
    }
    if (j.contains("known_group_sigma2")) p.known_group_sigma2 = j.at("known_group_sigma2").get<std::vector<double>>();
    return p;
}

json to_json(const ChainConfig& config) {
    json j;
    j["iterations"] = config.iterations;
    j["burn_in"] = config.burn_in;
    j["thin"] = config.thin;
    j["seed"] = config.seed;
    j["step_sizes"] = json::object();
    for (const auto& [k, v] : config.step_sizes) j["step_sizes"][k] = v;
    return j;
}

ChainConfig chain_config_from_json(const json& j) {
    ChainConfig c;
    c.iterations = j.value("iterations", c.iterations);
    c.burn_in = j.value("burn_in", c.burn_in);
    c.thin = j.value("thin", c.thin);
    c.seed = j.value("seed", c.seed);
    if (j.contains("step_sizes")) {
        for (const auto& [k, v] : j.at("step_sizes").items()) c.step_sizes[k] = v.get<double>();
    }
    return c;
}

std::string config_hash(const json& config) {
    const std::string dump = config.dump();
    return fnv1a_hex({reinterpret_cast<const unsigned char*>(dump.data()), dump.size()});
}

json csv_header(const std::string& operation, std::uint64_t seed, const json& config, json extra) {
    json h = std::move(extra);
    h["operation"] = operation;
    h["seed"] = seed;
    h["config"] = config;
    h["config_hash"] = config_hash(config);
    return h;
}

std::string format_number(double x) { return fmt::format("{}", x); }

void write_csv(std::ostream& out, const CsvTable& table) {
    if (!table.header.is_null()) out << "# " << table.header.dump() << '\n';
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c) out << ',';
        out << table.columns[c];
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << ',';
            out << format_number(row[c]);
        }
        out << '\n';
    }
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    write_csv(out, table);
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    bool have_columns = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            if (table.header.is_null()) {
                try {
                    table.header = json::parse(line.substr(1));
                } catch (const json::parse_error&) {
                    throw ValidationError(fmt::format("{}:{}: malformed JSON header", path.string(), line_no));
                }
            }
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (!have_columns) {
            table.columns = fields;
            have_columns = true;
            continue;
        }
        if (fields.size() != table.columns.size()) {
            throw ValidationError(fmt::format("{}:{}: expected {} fields, found {}", path.string(), line_no,
                                              table.columns.size(), fields.size()));
        }
        std::vector<double> row;
        for (const auto& f : fields) {
            double v = 0.0;
            const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
            if (res.ec != std::errc() || res.ptr != f.data() + f.size()) {
                throw ValidationError(fmt::format("{}:{}: '{}' is not a number", path.string(), line_no, f));
            }
            row.push_back(v);
        }
        table.rows.push_back(std::move(row));
    }
    if (!have_columns) throw ValidationError(path.string() + ": no column header");
    return table;
}

CsvTable draws_table(const PosteriorDraws& draws, const std::string& operation) {
    json config = {{"prior", to_json(draws.prior)}, {"chain", to_json(draws.config)}, {"model", to_string(draws.model)}};
    json extra = {{"model", to_string(draws.model)},
                  {"data_fingerprint", draws.data_fingerprint},
                  {"acceptance_rates", draws.acceptance_rates},
                  {"step_sizes", draws.step_sizes},
                  {"warnings", draws.warnings}};
    CsvTable table;
    table.header = csv_header(operation, draws.config.seed, config, std::move(extra));
    table.columns = column_names(draws);
    table.rows.reserve(draws.size());
    if (draws.model == ModelKind::NormalHier) {
        for (const auto& d : draws.normal) table.rows.push_back(flatten(d));
    } else {
        for (const auto& d : draws.betabinom) table.rows.push_back(flatten(d));
    }
    return table;
}

void write_draws_csv(const std::filesystem::path& path, const PosteriorDraws& draws, const std::string& operation) {
    write_csv(path, draws_table(draws, operation));
}

PosteriorDraws read_draws_csv(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path);
    if (table.header.is_null()) throw ValidationError(path.string() + ": draws CSV lacks its JSON header");
    PosteriorDraws draws;
    const auto& cfg = table.header.at("config");
    draws.model = parse_model_kind(table.header.at("model").get<std::string>());
    draws.prior = prior_from_json(cfg.at("prior"));
    draws.config = chain_config_from_json(cfg.at("chain"));
    draws.data_fingerprint = table.header.value("data_fingerprint", std::string());
    if (table.header.contains("acceptance_rates")) {
        draws.acceptance_rates = table.header.at("acceptance_rates").get<std::map<std::string, double>>();
    }
    if (table.header.contains("warnings")) draws.warnings = table.header.at("warnings").get<std::vector<std::string>>();

    const auto& cols = table.columns;
    auto count_prefix = [&](const std::string& prefix) {
        std::size_t n = 0;
        for (const auto& c : cols) {
            if (c.rfind(prefix, 0) == 0) ++n;
        }
        return n;
    };
    if (draws.model == ModelKind::NormalHier) {
        const std::size_t groups = count_prefix("theta_");
        const std::size_t sigmas = cols.size() - groups - 2;
        if (groups == 0 || sigmas == 0) throw ValidationError(path.string() + ": unexpected draw columns");
        for (const auto& row : table.rows) {
            NormalHierParams p;
            p.theta.assign(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(groups));
            p.mu = row[groups];
            p.tau2 = row[groups + 1];
            p.sigma2.assign(row.begin() + static_cast<std::ptrdiff_t>(groups + 2), row.end());
            draws.normal.push_back(std::move(p));
        }
    } else {
        const std::size_t units = count_prefix("p_");
        if (units == 0 || cols.size() != units + 2) throw ValidationError(path.string() + ": unexpected draw columns");
        for (const auto& row : table.rows) {
            BetaBinomialParams p;
            p.p.assign(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(units));
            p.alpha = row[units];
            p.beta = row[units + 1];
            draws.betabinom.push_back(std::move(p));
        }
    }
    return draws;
}

}  // namespace hiercheck
