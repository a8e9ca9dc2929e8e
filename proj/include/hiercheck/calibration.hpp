#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hiercheck/goodness_of_fit.hpp"
#include "hiercheck/models.hpp"
#include "hiercheck/partial_posterior.hpp"
#include "hiercheck/samplers.hpp"

namespace hiercheck {

enum class CalibrationMethod { PivotalSW, PivotalMax, PartialPosterior, PosteriorPredictive, PriorPredictive };

[[nodiscard]] std::string to_string(CalibrationMethod method);
[[nodiscard]] CalibrationMethod parse_calibration_method(const std::string& name);

/// Data-generating hyperparameters used when they are not drawn from the prior.
struct FixedHyperparameters {
    double mu = 0.0;
    double tau2 = 1.0;
    double sigma2 = 1.0;
    double alpha = 2.0;
    double beta = 5.0;
};

/**
 * @brief Null-model Monte Carlo setup.
 *
 * `group_size` is the per-group sample size for the normal model and the number of
 * trials per unit for the beta-binomial model. With `draw_hyperparameters` the
 * hyperparameters come from `prior`, which must then be proper; otherwise `fixed`
 * is used and `prior` only drives the fits.
 */
struct CalibrationConfig {
    ModelKind model = ModelKind::NormalHier;
    std::size_t groups = 5;
    std::size_t group_size = 8;
    bool draw_hyperparameters = true;
    FixedHyperparameters fixed;
    PriorSpec prior = PriorSpec::proper_normal();
    std::size_t replicates = 2000;
    std::vector<CalibrationMethod> methods{CalibrationMethod::PivotalSW};
    TestStatistic statistic = TestStatistic::max_group_mean();
    ChainConfig chain;
    std::uint64_t seed = 1;
    /// Worker threads for replicates; 0 uses the hardware count.
    std::size_t threads = 0;

    void validate() const;
};

/// One simulated dataset with the parameters that generated it.
struct NullReplicate {
    std::optional<GroupedNormalData> normal_data;
    NormalHierParams normal_truth;
    std::optional<BetaBinomialData> betabinom_data;
    BetaBinomialParams betabinom_truth;
};

/// Deterministic in (config.seed, replicate).
[[nodiscard]] NullReplicate simulate_null_dataset(const CalibrationConfig& config, std::size_t replicate);

/// Chain seed used for a replicate's fits.
[[nodiscard]] std::uint64_t replicate_chain_seed(const CalibrationConfig& config, std::size_t replicate);

struct MethodCalibration {
    CalibrationMethod method = CalibrationMethod::PivotalSW;
    std::vector<double> pvalues;
    double ks_distance = 0.0;
    Probability ks_p{1.0};
    /// 1% critical distance for this many p-values.
    double ks_critical = 0.0;
    /// Fewer than two p-values: the KS distance carries no information.
    bool ks_degenerate = false;
    double rejection_rate = 0.0;
    /// Sample variance of the p-values (NaN when degenerate); 1/12 under uniformity.
    double variance = 0.0;

    [[nodiscard]] bool passes_ks() const noexcept { return !ks_degenerate && ks_distance < ks_critical; }
};

struct CalibrationReport {
    CalibrationConfig config;
    std::vector<MethodCalibration> methods;
    std::size_t excluded = 0;
    std::vector<std::string> exclusion_reasons;

    [[nodiscard]] const MethodCalibration& at(CalibrationMethod method) const;
};

/**
 * @brief Runs every requested method on every replicate.
 *
 * A replicate whose sampler fails is excluded from all methods and counted. More than
 * 1% exclusions raise SamplerError.
 */
[[nodiscard]] CalibrationReport calibration_study(const CalibrationConfig& config);

/// Pooled single-draw pivots: E (normal) or zeta and u_max^n (beta-binomial).
struct PivotStudy {
    std::vector<double> group_residuals;
    std::vector<double> pit_values;
    std::vector<double> max_cdf_values;
    std::size_t excluded = 0;
};

/// Fits each null replicate and keeps the last retained draw's pivots.
[[nodiscard]] PivotStudy pivot_study(const CalibrationConfig& config);

[[nodiscard]] nlohmann::json to_json(const CalibrationReport& report);
/// One column per method, one row per retained replicate.
void write_calibration_csv(const std::filesystem::path& path, const CalibrationReport& report);

}  // namespace hiercheck
