#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hiercheck/ingest.hpp"
#include "hiercheck/models.hpp"
#include "hiercheck/partial_posterior.hpp"
#include "hiercheck/samplers.hpp"

namespace hiercheck {

struct RunConfig {
    std::filesystem::path data_path;
    ModelKind model = ModelKind::NormalHier;
    PriorSpec prior;
    ChainConfig chain;
    /// Normal model only: adds a posterior-predictive p-value to the summary.
    std::optional<TestStatistic> statistic;
    std::filesystem::path out_dir;
    bool plots = true;
    /// Pre-registered order statistic for the bound report.
    std::optional<std::size_t> fix_k;
    /// Number of randomly chosen draws that get a pivotal QQ plot.
    std::size_t qq_draws = 3;
    std::size_t histogram_bins = 20;

    void validate() const;
};

struct RunReport {
    /// Bundle files, relative to the output directory, in creation order.
    std::vector<std::string> files;
    nlohmann::json summary;
};

/// Fits the model to a dataset with the given prior and chain settings.
[[nodiscard]] PosteriorDraws fit_dataset(const Dataset& data, const PriorSpec& prior, const ChainConfig& chain);

/// Parameter means, standard deviations, ESS, acceptance rates and warnings.
[[nodiscard]] nlohmann::json to_json(const ChainSummary& summary);

/// Draw indices (0-based, ascending) that receive pivotal QQ plots; seeded by the chain seed.
[[nodiscard]] std::vector<std::size_t> select_qq_draws(std::size_t available, std::size_t wanted, std::uint64_t seed);

/**
 * @brief Fit, pivotal diagnostics and bound report for one dataset.
 *
 * Writes draws.csv, pivots_qq_<draw>.csv/.svg, pvalues.csv, pvalues_hist.svg,
 * bound.json and summary.json (plus maxstat_qq.svg for the beta-binomial model).
 * The normal model uses Shapiro-Wilk p-values of E, the beta-binomial model upper-tail
 * max-PIT p-values. SVG files are skipped when plots are off.
 */
RunReport run_check(const RunConfig& config);

/// Writes JSON with a trailing newline; throws IoError on failure.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace hiercheck
