#include "hiercheck/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "hiercheck/errors.hpp"

namespace hiercheck {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) {
        throw ValidationError(std::string(what) + ": argument must be finite");
    }
}

void require_shapes(double alpha, double beta, const char* what) {
    if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
        throw ValidationError(std::string(what) + ": shape parameters must be positive and finite");
    }
}

// Wichura (1988), algorithm AS 241 (PPND16), for 0 < p <= 0.5.
double ppnd16_lower(double p) {
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                     6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                   1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
                 1.3314166789178437745e+2) * r + 3.3871328727963666080e0) /
               (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                     3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
                   5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
                 4.2313330701600911252e+1) * r + 1.0);
    }
    double r = std::sqrt(-std::log(p));
    double x;
    if (r <= 5.0) {
        r -= 1.6;
        x = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
    } else {
        r -= 5.0;
        x = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
    }
    return -x;
}

double lower_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIter = 20000;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    return h;
}

double incomplete_beta_raw(double x, double a, double b) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_front = a * std::log(x) + b * std::log1p(-x) - log_beta_function(a, b);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return std::exp(log_front) * beta_continued_fraction(a, b, x) / a;
    }
    return 1.0 - std::exp(log_front) * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double gamma_series(double a, double x) {
    double sum = 1.0 / a;
    double term = sum;
    double ap = a;
    for (int n = 0; n < 100000; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_continued_fraction(double a, double x) {
    constexpr double kTiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 100000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

Probability::Probability(double value) : value_(value) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw ValidationError("probability must lie in [0, 1], got " + std::to_string(value));
    }
}

Probability std_normal_cdf(double x) {
    require_finite(x, "std_normal_cdf");
    return Probability(lower_cdf(x));
}

double std_normal_upper_tail(double x) noexcept { return 0.5 * std::erfc(x * kInvSqrt2); }

double std_normal_logpdf(double x) noexcept { return -0.5 * x * x - kLogSqrt2Pi; }

double std_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw ValidationError("std_normal_quantile: p must lie strictly inside (0, 1)");
    }
    if (p > 0.5) return -std_normal_quantile(1.0 - p);

    double x = ppnd16_lower(p);
    // Newton polish on the lower tail; the tolerance is relative so deep tails stay accurate.
    for (int i = 0; i < 8; ++i) {
        const double err = lower_cdf(x) - p;
        if (err == 0.0) break;
        const double dens = std::exp(std_normal_logpdf(x));
        if (!(dens > 0.0)) break;
        const double step = err / dens;
        x -= step;
        if (std::fabs(step) <= 1e-16 * std::max(1.0, std::fabs(x))) break;
    }
    return x;
}

double log_beta_function(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

Probability regularized_incomplete_beta(double x, double alpha, double beta) {
    require_shapes(alpha, beta, "regularized_incomplete_beta");
    if (!(x >= 0.0 && x <= 1.0)) {
        throw ValidationError("regularized_incomplete_beta: x must lie in [0, 1]");
    }
    return Probability(std::clamp(incomplete_beta_raw(x, alpha, beta), 0.0, 1.0));
}

double beta_logpdf(double x, double alpha, double beta) {
    require_shapes(alpha, beta, "beta_logpdf");
    if (!(x > 0.0 && x < 1.0)) {
        throw ValidationError("beta_logpdf: x must lie in (0, 1)");
    }
    return (alpha - 1.0) * std::log(x) + (beta - 1.0) * std::log1p(-x) -
           log_beta_function(alpha, beta);
}

double beta_quantile(double p, double alpha, double beta) {
    require_shapes(alpha, beta, "beta_quantile");
    if (!(p > 0.0 && p < 1.0)) {
        throw ValidationError("beta_quantile: p must lie strictly inside (0, 1)");
    }
    double lo = 0.0;
    double hi = 1.0;
    double x = std::clamp(alpha / (alpha + beta), 1e-12, 1.0 - 1e-12);
    const double log_b = log_beta_function(alpha, beta);
    for (int iter = 0; iter < 2000; ++iter) {
        const double err = incomplete_beta_raw(x, alpha, beta) - p;
        if (std::fabs(err) <= 1e-14) break;
        if (err < 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        const double log_dens =
            (alpha - 1.0) * std::log(x) + (beta - 1.0) * std::log1p(-x) - log_b;
        double next = x - err / std::exp(log_dens);
        if (!std::isfinite(next) || next <= lo || next >= hi) {
            next = 0.5 * (lo + hi);
        }
        if (next == x || hi - lo <= std::numeric_limits<double>::min()) break;
        x = next;
    }
    return x;
}

std::vector<double> plotting_positions(std::size_t n) { return plotting_positions(n, 0.5); }

std::vector<double> plotting_positions(std::size_t n, double offset) {
    if (n == 0) throw ValidationError("plotting_positions: n must be at least 1");
    if (!(offset >= 0.0 && offset < 1.0)) {
        throw ValidationError("plotting_positions: offset must lie in [0, 1)");
    }
    std::vector<double> out(n);
    const double denom = static_cast<double>(n) + 1.0 - 2.0 * offset;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = (static_cast<double>(i + 1) - offset) / denom;
    }
    return out;
}

double regularized_gamma_p(double shape, double x) {
    if (!(shape > 0.0)) throw ValidationError("regularized_gamma_p: shape must be positive");
    if (x <= 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    if (x < shape + 1.0) return gamma_series(shape, x);
    return 1.0 - gamma_continued_fraction(shape, x);
}

double regularized_gamma_q(double shape, double x) {
    if (!(shape > 0.0)) throw ValidationError("regularized_gamma_q: shape must be positive");
    if (x <= 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    if (x < shape + 1.0) return 1.0 - gamma_series(shape, x);
    return gamma_continued_fraction(shape, x);
}

double gamma_quantile(double p, double shape) {
    if (!(shape > 0.0)) throw ValidationError("gamma_quantile: shape must be positive");
    if (!(p > 0.0 && p < 1.0)) {
        throw ValidationError("gamma_quantile: p must lie strictly inside (0, 1)");
    }
    // Lower half: Newton on log P against y = log x, which stays well scaled for tiny p.
    // Upper half: Newton on Q against x. Both keep a bisection bracket.
    const bool lower = p < 0.5;
    const double target = lower ? std::log(p) : 1.0 - p;
    const double z = std_normal_quantile(p);
    const double c = 1.0 / (9.0 * shape);
    const double wh = 1.0 - c + z * std::sqrt(c);
    double y = wh > 0.05 ? std::log(shape) + 3.0 * std::log(wh)
                         : (std::log(p) + std::lgamma(shape + 1.0)) / shape;  // small-x series start
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 500; ++iter) {
        const double x = std::exp(y);
        const double log_dens = (shape - 1.0) * y - x - std::lgamma(shape);
        double err = 0.0;
        double slope = 0.0;
        if (lower) {
            const double cdf = regularized_gamma_p(shape, x);
            if (cdf <= 0.0) {
                lo = y;
                y = std::isinf(hi) ? y + 1.0 : 0.5 * (y + hi);
                continue;
            }
            err = std::log(cdf) - target;
            slope = std::exp(log_dens + y - std::log(cdf));
        } else {
            err = target - regularized_gamma_q(shape, x);
            slope = std::exp(log_dens + y);
        }
        if (err == 0.0) break;
        if (err < 0.0) {
            lo = y;
        } else {
            hi = y;
        }
        double next = y - err / slope;
        if (!std::isfinite(next) || next <= lo || next >= hi) {
            if (std::isinf(lo)) {
                next = y - 1.0;
            } else if (std::isinf(hi)) {
                next = y + 1.0;
            } else {
                next = 0.5 * (lo + hi);
            }
        }
        if (std::fabs(next - y) <= 1e-15 * std::max(1.0, std::fabs(y))) {
            y = next;
            break;
        }
        y = next;
    }
    return std::exp(y);
}

}  // namespace hiercheck
