#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "hiercheck/models.hpp"
#include "hiercheck/random.hpp"

namespace hiercheck {

/// Draws (theta, mu, tau2, sigma2) from a proper normal prior. Fixed components are honored.
[[nodiscard]] NormalHierParams draw_normal_hier_prior(const PriorSpec& prior, std::size_t groups, Rng& rng);

/// Draws (p, alpha, beta) from a proper beta-binomial prior. Fixed components are honored.
[[nodiscard]] BetaBinomialParams draw_betabinom_prior(const PriorSpec& prior, std::size_t units, Rng& rng);

/// theta_i given (mu, tau2), keeping the hyperparameters.
void draw_group_means(NormalHierParams& params, Rng& rng);
/// p_i given (alpha, beta).
void draw_unit_rates(BetaBinomialParams& params, Rng& rng);

[[nodiscard]] GroupedNormalData simulate_normal_data(const NormalHierParams& params,
                                                     std::span<const std::size_t> group_sizes, Rng& rng);
[[nodiscard]] BetaBinomialData simulate_betabinom_data(const BetaBinomialParams& params,
                                                       std::span<const std::uint64_t> trials, Rng& rng);

}  // namespace hiercheck
