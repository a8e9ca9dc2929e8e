#include "hiercheck/run_check.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include <fmt/format.h>

#include "hiercheck/chain_io.hpp"
#include "hiercheck/errors.hpp"
#include "hiercheck/order_stat_bounds.hpp"
#include "hiercheck/pivotal.hpp"
#include "hiercheck/plot.hpp"
#include "hiercheck/random.hpp"

namespace hiercheck {

namespace {

constexpr std::uint64_t kQQStream = 0x7171706c6f7473ULL;

CsvTable qq_table(const std::vector<QQPoint>& qq, const nlohmann::json& header) {
    CsvTable t;
    t.header = header;
    t.columns = {"theoretical", "empirical"};
    for (const auto& p : qq) t.rows.push_back({p.theoretical, p.empirical});
    return t;
}

}  // namespace

void RunConfig::validate() const {
    prior.validate();
    chain.validate();
    if (prior.is_normal_kind() != (model == ModelKind::NormalHier)) {
        throw ValidationError("prior " + to_string(prior.kind) + " does not match model " + to_string(model));
    }
    if (out_dir.empty()) throw ValidationError("an output directory is required");
    if (histogram_bins == 0) throw ValidationError("histogram bins must be positive");
    if (chain.retained_count() == 0) throw ValidationError("chain retains no draws");
    if (fix_k && (*fix_k == 0 || *fix_k > chain.retained_count())) {
        throw ValidationError(fmt::format("--fix-k must lie in [1, {}]", chain.retained_count()));
    }
    if (statistic && model != ModelKind::NormalHier) {
        throw ValidationError("test statistics apply to the normal-hier model only");
    }
}

PosteriorDraws fit_dataset(const Dataset& data, const PriorSpec& prior, const ChainConfig& chain) {
    if (const auto* d = std::get_if<GroupedNormalData>(&data)) return gibbs_normal_hier(*d, prior, chain);
    return mcmc_betabinom(std::get<BetaBinomialData>(data), prior, chain);
}

nlohmann::json to_json(const ChainSummary& summary) {
    nlohmann::json params = nlohmann::json::array();
    for (const auto& p : summary.parameters) {
        params.push_back(
            {{"name", p.name}, {"mean", p.mean}, {"sd", p.sd}, {"ess", p.ess}, {"degenerate", p.degenerate}});
    }
    return {{"draws", summary.draws},
            {"parameters", params},
            {"acceptance_rates", summary.acceptance_rates},
            {"warnings", summary.warnings}};
}

std::vector<std::size_t> select_qq_draws(std::size_t available, std::size_t wanted, std::uint64_t seed) {
    wanted = std::min(wanted, available);
    std::vector<std::size_t> chosen;
    Rng rng(seed, kQQStream);
    while (chosen.size() < wanted) {
        const auto idx = static_cast<std::size_t>(rng.below(available));
        if (std::find(chosen.begin(), chosen.end(), idx) == chosen.end()) chosen.push_back(idx);
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << j.dump(2) << '\n';
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

RunReport run_check(const RunConfig& config) {
    config.validate();
    const Dataset data = ingest_dataset(config.data_path, config.model);
    const bool normal = config.model == ModelKind::NormalHier;
    if (normal && std::get<GroupedNormalData>(data).group_count() < 3) {
        throw ValidationError("check: Shapiro-Wilk diagnostics need at least 3 groups");
    }
    if (normal && config.statistic) config.statistic->validate(std::get<GroupedNormalData>(data).group_sizes());

    std::error_code ec;
    std::filesystem::create_directories(config.out_dir, ec);
    if (ec) throw IoError("cannot create '" + config.out_dir.string() + "': " + ec.message());

    RunReport report;
    auto path = [&](const std::string& name) {
        report.files.push_back(name);
        return config.out_dir / name;
    };

    const PosteriorDraws draws = fit_dataset(data, config.prior, config.chain);
    const CsvTable table = draws_table(draws, "check");
    const nlohmann::json run_config = table.header.at("config");
    write_csv(path("draws.csv"), table);

    // Pivotal QQ documents for a few randomly chosen draws.
    nlohmann::json qq_files = nlohmann::json::array();
    for (std::size_t idx : select_qq_draws(draws.size(), config.qq_draws, config.chain.seed)) {
        const PivotalSample sample = normal ? group_level_residuals(draws.normal[idx], idx)
                                            : beta_pit(draws.betabinom[idx], idx);
        const auto qq = qq_data(sample);
        const nlohmann::json header = csv_header(
            "check", config.chain.seed, run_config,
            {{"draw", idx}, {"pivot", normal ? "E" : "zeta"}, {"reference", to_string(sample.reference)}});
        write_csv(path(fmt::format("pivots_qq_{}.csv", idx)), qq_table(qq, header));
        if (config.plots) {
            render_plot(qq_document(qq, fmt::format("{} pivots, draw {}", normal ? "E" : "zeta", idx),
                                    to_string(sample.reference) + " quantile", "sorted pivot"),
                        path(fmt::format("pivots_qq_{}.svg", idx)));
        }
        qq_files.push_back(idx);
    }

    const PValueSeries series = normal ? sw_pvalue_series(draws, std::get<GroupedNormalData>(data))
                                       : max_pit_pvalue_series(draws);
    {
        CsvTable t;
        t.header = csv_header("check", config.chain.seed, run_config, {{"statistic", series.statistic}});
        t.columns = {"p"};
        for (double p : series.values) t.rows.push_back({p});
        write_csv(path("pvalues.csv"), t);
    }
    if (config.plots) {
        render_plot(histogram_document(series.values, series.statistic + " p-values", config.histogram_bins),
                    path("pvalues_hist.svg"));
    }

    const PValueBoundReport bound = joint_pvalue_bound(series, config.fix_k);
    nlohmann::json bound_json = to_json(bound);
    bound_json["statistic"] = series.statistic;
    write_json(path("bound.json"), bound_json);

    if (!normal && config.plots) {
        std::vector<double> u_max;
        for (std::size_t m = 0; m < draws.size(); ++m) {
            u_max.push_back(max_uniform_pit(beta_pit(draws.betabinom[m], m)).u_max.value());
        }
        const std::size_t units = std::get<BetaBinomialData>(data).unit_count();
        render_plot(qq_document(max_stat_qq(u_max, units), fmt::format("largest PIT, F(x) = x^{}", units),
                                "expected order statistic", "sorted largest PIT"),
                    path("maxstat_qq.svg"));
    }

    nlohmann::json summary;
    summary["operation"] = "check";
    summary["model"] = to_string(config.model);
    summary["data_fingerprint"] = dataset_fingerprint(data);
    summary["config"] = run_config;
    summary["config_hash"] = config_hash(run_config);
    summary["seed"] = config.chain.seed;
    summary["chain"] = to_json(chain_summary(draws));
    summary["qq_draws"] = qq_files;
    const double n = static_cast<double>(series.values.size());
    summary["pvalues"] = {{"statistic", series.statistic},
                          {"count", series.values.size()},
                          {"mean", std::accumulate(series.values.begin(), series.values.end(), 0.0) / n},
                          {"fraction_below_0.05",
                           static_cast<double>(std::count_if(series.values.begin(), series.values.end(),
                                                             [](double p) { return p <= 0.05; })) /
                               n}};
    summary["bound"] = {{"overall_bound", bound.overall_bound},
                        {"k_star", bound.k_star},
                        {"post_hoc_minimum", true}};
    if (bound.fixed) summary["bound"]["fixed"] = {{"k", bound.fixed->k}, {"bound", bound.fixed->bound}};
    if (normal && config.statistic) {
        const auto& d = std::get<GroupedNormalData>(data);
        summary["posterior_predictive"] = {{"statistic", config.statistic->name()},
                                           {"t_obs", statistic_value(d, *config.statistic)},
                                           {"p", posterior_predictive_pvalue(d, *config.statistic, draws).value()}};
    }
    report.files.push_back("summary.json");
    summary["files"] = report.files;
    write_json(config.out_dir / "summary.json", summary);
    report.summary = std::move(summary);
    return report;
}

}  // namespace hiercheck
