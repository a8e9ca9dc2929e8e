#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hiercheck/models.hpp"
#include "hiercheck/samplers.hpp"
#include "hiercheck/special_functions.hpp"

namespace hiercheck {

/**
 * @brief A scalar summary t(x) of grouped normal data.
 *
 * Textual forms: "group-mean:<i>" (1-based group number), "max-group-mean",
 * "min-group-mean" and "within-group-variance:<i>". The last one is the sample
 * variance of group i; its sampling density involves sigma2 only, so with sigma2
 * fixed it is constant in the remaining parameters (an ancillary surrogate).
 *
 * Tail convention: large values are surprising, except for min-group-mean where
 * the p-value is P(T <= t_obs).
 */
struct TestStatistic {
    enum class Kind { GroupMean, MaxGroupMean, MinGroupMean, WithinGroupVariance };

    Kind kind = Kind::MaxGroupMean;
    /// Zero-based group index for the per-group kinds.
    std::size_t group = 0;

    static TestStatistic group_mean(std::size_t index) { return {Kind::GroupMean, index}; }
    static TestStatistic max_group_mean() { return {Kind::MaxGroupMean, 0}; }
    static TestStatistic min_group_mean() { return {Kind::MinGroupMean, 0}; }
    static TestStatistic within_group_variance(std::size_t index) { return {Kind::WithinGroupVariance, index}; }

    [[nodiscard]] static TestStatistic parse(const std::string& text);
    [[nodiscard]] std::string name() const;
    [[nodiscard]] bool lower_tail() const noexcept { return kind == Kind::MinGroupMean; }
    /// Throws ValidationError when the group index is out of range or the group is too small.
    void validate(std::span<const std::size_t> group_sizes) const;
};

[[nodiscard]] double statistic_value(const GroupedNormalData& data, const TestStatistic& stat);

/// Exact log sampling density of the statistic at t given the parameters.
[[nodiscard]] double statistic_logdensity(double t, const NormalHierParams& params, const TestStatistic& stat,
                                          std::span<const std::size_t> group_sizes);

/// P(T >= t | params), or P(T <= t | params) for min-group-mean.
[[nodiscard]] double statistic_tail(double t, const NormalHierParams& params, const TestStatistic& stat,
                                    std::span<const std::size_t> group_sizes);

/// Mean tail probability over a set of parameter draws.
[[nodiscard]] Probability average_tail(double t, std::span<const NormalHierParams> draws, const TestStatistic& stat,
                                       std::span<const std::size_t> group_sizes);

/**
 * @brief Heuristic guard against a non-integrable partial posterior.
 *
 * The chain is cut into windows of `window` sweeps. When the maximum of
 * -log f(t_obs | theta) in `consecutive` successive windows exceeds the first
 * window's maximum by more than `growth` log units, sampling aborts with
 * ImproprietyError.
 */
struct ImproprietyMonitor {
    std::size_t window = 1000;
    double growth = 50.0;
    std::size_t consecutive = 3;
};

struct PartialPosteriorDraws {
    std::vector<NormalHierParams> draws;
    TestStatistic statistic;
    double t_obs = 0.0;
    /// Post-burn-in acceptance rate per block and their mean under "overall".
    std::map<std::string, double> acceptance_rates;
    std::map<std::string, double> step_sizes;
    std::vector<std::string> warnings;
};

/**
 * @brief Random-walk Metropolis on the partial posterior
 * f(x | theta) pi(theta) / f(t_obs | theta).
 *
 * Blocks: each theta_i, mu, log tau2 and log sigma2 (fixed or known components are
 * skipped). Step sizes start from the config (keys "theta", "mu", "log_tau2",
 * "log_sigma2") or data-based defaults, are tuned toward 40% acceptance during
 * burn-in, and are frozen afterwards.
 */
[[nodiscard]] PartialPosteriorDraws sample_partial_posterior(const GroupedNormalData& data, double t_obs,
                                                             const TestStatistic& stat, const PriorSpec& prior,
                                                             const ChainConfig& config,
                                                             const ImproprietyMonitor& monitor = {});

[[nodiscard]] Probability partial_posterior_pvalue(const GroupedNormalData& data, const TestStatistic& stat,
                                                   const PriorSpec& prior, const ChainConfig& config);
/// Same, at an explicit observed value; infinite t_obs returns the limiting tail without sampling.
[[nodiscard]] Probability partial_posterior_pvalue(const GroupedNormalData& data, double t_obs,
                                                   const TestStatistic& stat, const PriorSpec& prior,
                                                   const ChainConfig& config);

[[nodiscard]] Probability posterior_predictive_pvalue(const GroupedNormalData& data, const TestStatistic& stat,
                                                      const PosteriorDraws& draws);
[[nodiscard]] Probability posterior_predictive_pvalue(const GroupedNormalData& data, double t_obs,
                                                      const TestStatistic& stat, const PosteriorDraws& draws);

/// Tail average over config.retained_count() prior draws. Requires the proper-normal prior.
[[nodiscard]] Probability prior_predictive_pvalue(const GroupedNormalData& data, const TestStatistic& stat,
                                                  const PriorSpec& prior, const ChainConfig& config);
[[nodiscard]] Probability prior_predictive_pvalue(const GroupedNormalData& data, double t_obs,
                                                  const TestStatistic& stat, const PriorSpec& prior,
                                                  const ChainConfig& config);

}  // namespace hiercheck
