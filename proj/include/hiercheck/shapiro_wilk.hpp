#pragma once

#include <span>

#include "hiercheck/special_functions.hpp"

namespace hiercheck {

struct ShapiroWilkResult {
    double w = 1.0;
    /// Upper-tail normality p-value (small W -> small p).
    Probability p;
};

/**
 * @brief Shapiro-Wilk W test with Royston's (1995, AS R94) coefficient and p-value
 * approximations. Valid for 3 <= n <= 5000.
 *
 * Ties are handled by a stable sort, so equal values keep their input order.
 * Throws ValidationError for n out of range or a sample with zero range.
 */
[[nodiscard]] ShapiroWilkResult shapiro_wilk(std::span<const double> sample);

}  // namespace hiercheck
