#pragma once

#include <cstddef>
#include <vector>

namespace hiercheck {

/**
 * @brief A value in [0, 1]: p-values, CDF evaluations and PIT uniforms.
 *
 * Construction validates the range; arithmetic happens on the underlying double.
 */
class Probability {
public:
    constexpr Probability() = default;
    explicit Probability(double value);

    [[nodiscard]] constexpr double value() const noexcept { return value_; }
    constexpr operator double() const noexcept { return value_; }  // NOLINT(google-explicit-constructor)

    friend constexpr bool operator==(Probability, Probability) = default;

private:
    double value_ = 0.0;
};

/// Standard normal CDF. Throws ValidationError on non-finite input.
[[nodiscard]] Probability std_normal_cdf(double x);

/// Upper tail 1 - Phi(x), accurate far into the right tail. Accepts +-infinity.
[[nodiscard]] double std_normal_upper_tail(double x) noexcept;

/// log of the standard normal density.
[[nodiscard]] double std_normal_logpdf(double x) noexcept;

/**
 * @brief Inverse of the standard normal CDF for 0 < p < 1.
 *
 * Wichura's AS 241 rational approximation refined by safeguarded Newton steps
 * until |Phi(x) - p| <= 1e-12 (relative to min(p, 1 - p) in the tails).
 */
[[nodiscard]] double std_normal_quantile(double p);

/// log B(a, b) via lgamma.
[[nodiscard]] double log_beta_function(double a, double b);

/**
 * @brief Regularized incomplete beta I_x(a, b), i.e. the Beta(a, b) CDF at x.
 *
 * Continued fraction (modified Lentz) with the symmetry switch at
 * x = (a + 1) / (a + b + 2).
 */
[[nodiscard]] Probability regularized_incomplete_beta(double x, double alpha, double beta);

/// log density of Beta(alpha, beta) at x in (0, 1).
[[nodiscard]] double beta_logpdf(double x, double alpha, double beta);

/// Beta(alpha, beta) quantile: bracketed bisection with Newton refinement.
[[nodiscard]] double beta_quantile(double p, double alpha, double beta);

/// Plotting positions (i - 0.5) / n for i = 1..n.
[[nodiscard]] std::vector<double> plotting_positions(std::size_t n);

/// Generalized plotting positions (i - offset) / (n + 1 - 2 offset); offset 0.5 gives the default.
[[nodiscard]] std::vector<double> plotting_positions(std::size_t n, double offset);

// Regularized incomplete gamma functions. Used for truncated inverse-gamma
// full conditionals and the chi-square tail of the within-group variance.
[[nodiscard]] double regularized_gamma_p(double shape, double x);
[[nodiscard]] double regularized_gamma_q(double shape, double x);

/// Gamma(shape, 1) quantile of the lower-tail probability p.
[[nodiscard]] double gamma_quantile(double p, double shape);

}  // namespace hiercheck
