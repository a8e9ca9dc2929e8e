#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hiercheck/models.hpp"
#include "hiercheck/samplers.hpp"
#include "hiercheck/shapiro_wilk.hpp"
#include "hiercheck/special_functions.hpp"

namespace hiercheck {

enum class Reference { StdNormal, Uniform };

[[nodiscard]] std::string to_string(Reference ref);

/// Pivotal residuals or PIT uniforms computed from one posterior draw.
struct PivotalSample {
    std::size_t draw_index = 0;
    std::vector<double> values;
    Reference reference = Reference::StdNormal;
};

struct PValueSeries {
    std::string statistic;
    std::vector<double> values;
};

struct QQPoint {
    double theoretical;
    double empirical;
};

/// (y_ij - theta_i) / sigma_i in group-major order.
[[nodiscard]] PivotalSample within_group_residuals(const GroupedNormalData& data, const NormalHierParams& params,
                                                   std::size_t draw_index = 0);

/// (theta_i - mu) / tau per group.
[[nodiscard]] PivotalSample group_level_residuals(const NormalHierParams& params, std::size_t draw_index = 0);

/**
 * @brief Standardized observed group means (ybar_i - mu) / sqrt(tau2 + sigma_i^2 / n_i).
 *
 * Alternative reading of "group mean residuals"; standard normal under the model
 * when evaluated at the true hyperparameters, but not a posterior pivot.
 */
[[nodiscard]] PivotalSample standardized_group_means(const GroupedNormalData& data, const NormalHierParams& params,
                                                     std::size_t draw_index = 0);

/// zeta_i = I(p_i; alpha, beta), uniform reference.
[[nodiscard]] PivotalSample beta_pit(const BetaBinomialParams& params, std::size_t draw_index = 0);

/// Sorted sample against reference quantiles at plotting_positions(n).
[[nodiscard]] std::vector<QQPoint> qq_data(const PivotalSample& sample);

/// Shapiro-Wilk p-value of the E residuals of every retained draw.
[[nodiscard]] PValueSeries sw_pvalue_series(const PosteriorDraws& draws, const GroupedNormalData& data);

struct MaxPit {
    Probability u_max;
    /// u_max^n, the CDF of the largest of n uniforms.
    Probability cdf_value;
    /// 1 - u_max^n.
    Probability upper_tail_p;
};

[[nodiscard]] MaxPit max_uniform_pit(const PivotalSample& sample);

/// Upper-tail max-PIT p-value of every retained draw.
[[nodiscard]] PValueSeries max_pit_pvalue_series(const PosteriorDraws& draws);

/// Sorted u_max values against q = position^(1/n), the quantiles of F(x) = x^n.
[[nodiscard]] std::vector<QQPoint> max_stat_qq(std::span<const double> u_max_series, std::size_t n);

}  // namespace hiercheck
