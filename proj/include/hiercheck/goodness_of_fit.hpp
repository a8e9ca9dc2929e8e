#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include "hiercheck/special_functions.hpp"

namespace hiercheck {

struct KsResult {
    /// Kolmogorov-Smirnov distance sup |F_n - F|.
    double distance = 0.0;
    /// Asymptotic p-value with Stephens' small-sample correction.
    Probability p{1.0};
    /// Effective sample size used for the p-value (n, or nm/(n+m) for two samples).
    double effective_n = 0.0;
};

/// Survival function of the Kolmogorov distribution, P(K > lambda).
[[nodiscard]] double kolmogorov_sf(double lambda);

/// Distance below which a sample of effective size n passes at level alpha (alpha in {0.01, 0.05, 0.10}).
[[nodiscard]] double ks_critical_value(double effective_n, double alpha = 0.01);

[[nodiscard]] KsResult ks_test(std::span<const double> sample, const std::function<double(double)>& cdf);
[[nodiscard]] KsResult ks_test_uniform(std::span<const double> sample);
[[nodiscard]] KsResult ks_test_std_normal(std::span<const double> sample);
[[nodiscard]] KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Unbiased sample variance.
[[nodiscard]] double sample_variance(std::span<const double> x);
[[nodiscard]] double sample_mean(std::span<const double> x);

}  // namespace hiercheck
