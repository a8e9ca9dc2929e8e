#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "hiercheck/pivotal.hpp"
#include "hiercheck/special_functions.hpp"

namespace hiercheck {

/**
 * @brief Upper bound on P(U_(k) <= u) for J identically distributed uniforms under any
 * dependence: min(1, J u / k).
 */
[[nodiscard]] Probability dependent_orderstat_bound(std::size_t J, std::size_t k, double u);

struct BoundPoint {
    std::size_t k;
    double u_k;
    double bound;
};

struct PValueBoundReport {
    std::size_t J = 0;
    std::vector<BoundPoint> curve;
    /// Minimum over k. This is a post-hoc minimum; it carries no multiplicity adjustment.
    double overall_bound = 1.0;
    std::size_t k_star = 0;
    /// Bound at an order statistic fixed before looking at the data, when requested.
    std::optional<BoundPoint> fixed;
};

/// Sorted series, the per-k bound curve and its minimum (smallest k on ties).
[[nodiscard]] PValueBoundReport joint_pvalue_bound(std::span<const double> series,
                                                   std::optional<std::size_t> fixed_k = std::nullopt);
[[nodiscard]] inline PValueBoundReport joint_pvalue_bound(const PValueSeries& series,
                                                          std::optional<std::size_t> fixed_k = std::nullopt) {
    return joint_pvalue_bound(series.values, fixed_k);
}

/// {J, overall_bound, k_star, curve: [[k, u_k, bound_k], ...]} plus "fixed_k" when set.
[[nodiscard]] nlohmann::json to_json(const PValueBoundReport& report);

enum class CopulaKind { Independent, EquicorrelatedGaussian, Comonotone };

struct Copula {
    CopulaKind kind = CopulaKind::Independent;
    /// Common correlation for the Gaussian copula, in [0, 1).
    double rho = 0.0;
};

struct BoundCell {
    std::size_t k;
    double u;
    double empirical;
    double bound;
    /// Binomial standard error sqrt(b (1 - b) / R) at the bound.
    double standard_error;
    bool violated;
};

struct BoundValidityTable {
    Copula copula;
    std::size_t J = 0;
    std::size_t replicates = 0;
    std::vector<BoundCell> cells;
    [[nodiscard]] std::size_t violations() const;
};

struct BoundGrid {
    std::vector<std::size_t> ks;  ///< empty: {1, 2, J/4, J/2, J}
    std::vector<double> us{0.001, 0.005, 0.01, 0.025, 0.05, 0.1, 0.2, 0.5};
};

/**
 * @brief Monte Carlo check that empirical P(U_(k) <= u) never exceeds the bound by more
 * than three binomial standard errors, for a chosen dependence scenario.
 */
[[nodiscard]] BoundValidityTable bound_validity_study(const Copula& copula, std::size_t J, std::size_t replicates,
                                                      std::uint64_t seed, const BoundGrid& grid = {});

}  // namespace hiercheck
