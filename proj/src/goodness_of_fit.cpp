#include "hiercheck/goodness_of_fit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "hiercheck/errors.hpp"

namespace hiercheck {

namespace {

double stephens_factor(double n) { return std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n); }

KsResult finish(double distance, double n) {
    KsResult r;
    r.distance = distance;
    r.effective_n = n;
    r.p = Probability(std::clamp(kolmogorov_sf(stephens_factor(n) * distance), 0.0, 1.0));
    return r;
}

std::vector<double> sorted_finite(std::span<const double> x, const char* what) {
    if (x.empty()) throw ValidationError(std::string(what) + ": empty sample");
    std::vector<double> v(x.begin(), x.end());
    for (double d : v) {
        if (std::isnan(d)) throw ValidationError(std::string(what) + ": sample contains NaN");
    }
    std::sort(v.begin(), v.end());
    return v;
}

}  // namespace

double kolmogorov_sf(double lambda) {
    if (!(lambda > 0.0)) return 1.0;
    if (lambda < 1.18) {
        // Jacobi theta form, converges fast for small lambda.
        const double y = std::exp(-1.23370055013616983 / (lambda * lambda));  // pi^2 / 8
        const double cdf = 2.50662827463100050 / lambda *
                           (y + std::pow(y, 9.0) + std::pow(y, 25.0) + std::pow(y, 49.0));
        return std::clamp(1.0 - cdf, 0.0, 1.0);
    }
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += sign * term;
        if (term < 1e-17) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_critical_value(double effective_n, double alpha) {
    if (!(effective_n > 0.0)) throw ValidationError("ks_critical_value: n must be positive");
    double c = 0.0;
    if (alpha == 0.01) {
        c = 1.628;
    } else if (alpha == 0.05) {
        c = 1.358;
    } else if (alpha == 0.10) {
        c = 1.224;
    } else {
        throw ValidationError("ks_critical_value: alpha must be 0.01, 0.05 or 0.10");
    }
    return c / stephens_factor(effective_n);
}

KsResult ks_test(std::span<const double> sample, const std::function<double(double)>& cdf) {
    const auto v = sorted_finite(sample, "ks_test");
    const double n = static_cast<double>(v.size());
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double f = cdf(v[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return finish(d, n);
}

KsResult ks_test_uniform(std::span<const double> sample) {
    return ks_test(sample, [](double x) { return std::clamp(x, 0.0, 1.0); });
}

KsResult ks_test_std_normal(std::span<const double> sample) {
    return ks_test(sample, [](double x) {
        if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
        return std_normal_cdf(x).value();
    });
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
    const auto x = sorted_finite(a, "ks_two_sample");
    const auto y = sorted_finite(b, "ks_two_sample");
    const double n = static_cast<double>(x.size());
    const double m = static_cast<double>(y.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double t = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == t) ++i;
        while (j < y.size() && y[j] == t) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
    }
    return finish(d, n * m / (n + m));
}

double sample_mean(std::span<const double> x) {
    if (x.empty()) throw ValidationError("sample_mean: empty sample");
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
    if (x.size() < 2) throw ValidationError("sample_variance: need at least 2 values");
    const double m = sample_mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return ss / static_cast<double>(x.size() - 1);
}

}  // namespace hiercheck
