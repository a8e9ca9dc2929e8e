#include "hiercheck/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hiercheck/errors.hpp"
#include "hiercheck/special_functions.hpp"

namespace hiercheck {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr int kRejectionTries = 8;
}  // namespace

std::uint64_t mix64(std::uint64_t x) noexcept {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) noexcept
    : key_(mix64(mix64(seed + kGolden) ^ mix64(stream * kGolden + 0x632BE59BD9B4E019ULL))) {}

Rng::result_type Rng::operator()() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * kGolden);
}

Rng Rng::substream(std::uint64_t id) const noexcept {
    return Rng(mix64(key_ ^ mix64(id + 0xD1B54A32D192ED03ULL)), 0, 0);
}

double Rng::uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() noexcept {
    // Box-Muller, one variate per call.
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::gamma(double shape) noexcept {
    if (shape < 1.0) {
        const double u = uniform();
        return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x;
        double v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double Rng::beta(double a, double b) noexcept {
    const double x = gamma(a);
    const double y = gamma(b);
    if (x + y > 0.0) return x / (x + y);
    // Both shapes tiny and both gammas underflowed: fall back on the limiting Bernoulli.
    return uniform() < a / (a + b) ? 1.0 - 1e-300 : 1e-300;
}

std::uint64_t Rng::binomial(std::uint64_t trials, double p) noexcept {
    std::uint64_t successes = 0;
    for (std::uint64_t i = 0; i < trials; ++i) {
        if (uniform() < p) ++successes;
    }
    return successes;
}

__extension__ using Uint128 = unsigned __int128;

std::uint64_t Rng::below(std::uint64_t n) noexcept {
    // Lemire's multiply-shift; the bias is < n / 2^64.
    return static_cast<std::uint64_t>((static_cast<Uint128>((*this)()) * n) >> 64);
}

double truncated_normal(Rng& rng, double mean, double sd, double lo, double hi) {
    if (!(lo < hi)) throw SamplerError("truncated_normal: empty interval");
    for (int i = 0; i < kRejectionTries; ++i) {
        const double x = rng.normal(mean, sd);
        if (x > lo && x < hi) return x;
    }
    const double zlo = (lo - mean) / sd;
    const double zhi = (hi - mean) / sd;
    // Work in whichever tail keeps the CDF differences well conditioned.
    const bool flip = zlo > 0.0;
    const double a = flip ? -zhi : zlo;
    const double b = flip ? -zlo : zhi;
    const double pa = 0.5 * std::erfc(-a / std::numbers::sqrt2);
    const double pb = 0.5 * std::erfc(-b / std::numbers::sqrt2);
    if (!(pb > pa)) {
        throw SamplerError("truncation box contains no posterior mass (normal full conditional)");
    }
    const double u = pa + rng.uniform() * (pb - pa);
    double z = std_normal_quantile(std::clamp(u, 1e-300, 1.0 - 1e-16));
    z = std::clamp(z, a, b);
    const double x = mean + sd * (flip ? -z : z);
    if (x <= lo) return std::nextafter(lo, hi);
    if (x >= hi) return std::nextafter(hi, lo);
    return x;
}

double truncated_inverse_gamma(Rng& rng, double shape, double scale, double lo, double hi) {
    if (!(lo < hi)) throw SamplerError("truncated_inverse_gamma: empty interval");
    if (!(shape > 0.0) || !(scale > 0.0)) {
        throw SamplerError("truncated_inverse_gamma: shape and scale must be positive");
    }
    for (int i = 0; i < kRejectionTries; ++i) {
        const double g = rng.gamma(shape);
        const double x = scale / g;
        if (x > lo && x < hi) return x;
    }
    // 1/x ~ Gamma(shape, rate = scale); the box maps to (scale/hi, scale/lo) on the gamma scale.
    const double glo = scale / hi;
    const double ghi = scale / lo;
    double g = 0.0;
    const double p_hi = regularized_gamma_p(shape, ghi);
    if (p_hi <= 0.5) {
        // Both ends in the lower tail: invert P directly so tiny masses keep their precision.
        const double p_lo = regularized_gamma_p(shape, glo);
        if (!(p_hi > p_lo)) {
            throw SamplerError("truncation box contains no posterior mass (inverse-gamma full conditional)");
        }
        g = gamma_quantile(p_lo + rng.uniform() * (p_hi - p_lo), shape);
    } else {
        const double q_lo = regularized_gamma_q(shape, glo);  // mass above glo
        const double q_hi = regularized_gamma_q(shape, ghi);  // mass above ghi
        if (!(q_lo > q_hi)) {
            throw SamplerError("truncation box contains no posterior mass (inverse-gamma full conditional)");
        }
        const double q = q_hi + rng.uniform() * (q_lo - q_hi);
        g = gamma_quantile(std::clamp(1.0 - q, 1e-300, 1.0 - 1e-16), shape);
    }
    g = std::clamp(g, glo, ghi);
    // Keep the draw inside the open interval after rounding.
    const double x = scale / g;
    if (x <= lo) return std::nextafter(lo, hi);
    if (x >= hi) return std::nextafter(hi, lo);
    return x;
}

}  // namespace hiercheck
