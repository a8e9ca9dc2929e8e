#include "hiercheck/shapiro_wilk.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "hiercheck/errors.hpp"

namespace hiercheck {

namespace {

// Royston (1995), Applied Statistics 44(4), algorithm AS R94, "swilk".
// Polynomial coefficients are transcribed from the published routine.
constexpr std::array<double, 6> kC1{0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
constexpr std::array<double, 6> kC2{0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
constexpr std::array<double, 4> kC3{0.5440, -0.39978, 0.025054, -6.714e-4};
constexpr std::array<double, 4> kC4{1.3822, -0.77857, 0.062767, -0.0020322};
constexpr std::array<double, 4> kC5{-1.5861, -0.31082, -0.083751, 0.0038915};
constexpr std::array<double, 3> kC6{-0.4803, -0.082676, 0.0030302};
constexpr std::array<double, 2> kG{-2.273, 0.459};

constexpr double kSmall = 1e-19;

template <std::size_t N>
double poly(const std::array<double, N>& c, double x) {
    double result = 0.0;
    for (std::size_t i = N; i-- > 0;) result = result * x + c[i];
    return result;
}

// Coefficients a_1..a_{n/2} for the lower half of the order statistics (a_1 largest).
std::vector<double> coefficients(std::size_t n) {
    const std::size_t half = n / 2;
    std::vector<double> a(half);
    if (n == 3) {
        a[0] = std::sqrt(0.5);
        return a;
    }
    const double an = static_cast<double>(n);
    std::vector<double> m(half);
    double summ2 = 0.0;
    for (std::size_t i = 0; i < half; ++i) {
        m[i] = std_normal_quantile((static_cast<double>(i + 1) - 0.375) / (an + 0.25));
        summ2 += m[i] * m[i];
    }
    summ2 *= 2.0;
    const double ssumm2 = std::sqrt(summ2);
    const double rsn = 1.0 / std::sqrt(an);
    const double a1 = poly(kC1, rsn) - m[0] / ssumm2;

    std::size_t first_scaled;
    double fac;
    if (n > 5) {
        first_scaled = 2;
        const double a2 = -m[1] / ssumm2 + poly(kC2, rsn);
        fac = std::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) /
                        (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
        a[1] = a2;
    } else {
        first_scaled = 1;
        fac = std::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
    }
    a[0] = a1;
    for (std::size_t i = first_scaled; i < half; ++i) a[i] = -m[i] / fac;
    return a;
}

}  // namespace

ShapiroWilkResult shapiro_wilk(std::span<const double> sample) {
    const std::size_t n = sample.size();
    if (n < 3 || n > 5000) throw ValidationError("shapiro_wilk: sample size must lie in [3, 5000]");
    std::vector<double> x(sample.begin(), sample.end());
    for (double v : x) {
        if (!std::isfinite(v)) throw ValidationError("shapiro_wilk: non-finite sample value");
    }
    std::stable_sort(x.begin(), x.end());
    const double range = x.back() - x.front();
    if (range < kSmall) throw ValidationError("shapiro_wilk: sample has zero variance");

    const std::vector<double> a = coefficients(n);
    // Full antisymmetric coefficient vector: -a_1, -a_2, ..., +a_2, +a_1.
    std::vector<double> coef(n, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        coef[i] = -a[i];
        coef[n - 1 - i] = a[i];
    }

    // W as the squared correlation between scaled data and coefficients; 1 - W is
    // formed directly to avoid cancellation near W = 1.
    const double dn = static_cast<double>(n);
    double sx = 0.0;
    double sa = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i] / range;
        sa += coef[i];
    }
    sx /= dn;
    sa /= dn;
    double ssa = 0.0;
    double ssx = 0.0;
    double sax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double asa = coef[i] - sa;
        const double xsx = x[i] / range - sx;
        ssa += asa * asa;
        ssx += xsx * xsx;
        sax += asa * xsx;
    }
    const double ssassx = std::sqrt(ssa * ssx);
    const double w1 = std::max(0.0, (ssassx - sax) * (ssassx + sax) / (ssa * ssx));
    const double w = 1.0 - w1;

    if (n == 3) {
        // Exact null distribution for n = 3.
        constexpr double kSixOverPi = 1.90985931710274;
        constexpr double kAsinSqrtThreeQuarters = 1.04719755119660;
        const double pw = kSixOverPi * (std::asin(std::sqrt(w)) - kAsinSqrtThreeQuarters);
        return {w, Probability(std::clamp(pw, 0.0, 1.0))};
    }
    if (w1 <= 0.0) return {w, Probability(1.0)};

    double y = std::log(w1);
    double mean;
    double sd;
    if (n <= 11) {
        const double gamma = poly(kG, dn);
        if (y >= gamma) return {w, Probability(1e-99)};
        y = -std::log(gamma - y);
        mean = poly(kC3, dn);
        sd = std::exp(poly(kC4, dn));
    } else {
        const double ln = std::log(dn);
        mean = poly(kC5, ln);
        sd = std::exp(poly(kC6, ln));
    }
    return {w, Probability(std::clamp(std_normal_upper_tail((y - mean) / sd), 0.0, 1.0))};
}

}  // namespace hiercheck
