#pragma once

#include <cstdint>
#include <limits>

namespace hiercheck {

/**
 * @brief Counter-based 64-bit generator (SplitMix64 finalizer over a keyed counter).
 *
 * Output i of stream (seed, stream) is mix64(key + (i + 1) * golden), with the key
 * derived from both identifiers. Any draw is a pure function of (seed, stream, i), so
 * per-block and per-replicate substreams stay reproducible regardless of thread
 * schedules. Satisfies UniformRandomBitGenerator.
 */
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

    /// Independent stream keyed by this generator's key and `id`. Does not advance *this.
    [[nodiscard]] Rng substream(std::uint64_t id) const noexcept;

    [[nodiscard]] std::uint64_t key() const noexcept { return key_; }
    [[nodiscard]] std::uint64_t counter() const noexcept { return counter_; }

    /// Uniform on the open interval (0, 1).
    double uniform() noexcept;
    double normal() noexcept;
    double normal(double mean, double sd) noexcept { return mean + sd * normal(); }
    /// Gamma(shape, scale = 1), Marsaglia-Tsang.
    double gamma(double shape) noexcept;
    double beta(double a, double b) noexcept;
    std::uint64_t binomial(std::uint64_t trials, double p) noexcept;
    /// Index uniformly in [0, n).
    std::uint64_t below(std::uint64_t n) noexcept;

private:
    Rng(std::uint64_t key, std::uint64_t counter, int) noexcept : key_(key), counter_(counter) {}

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

[[nodiscard]] std::uint64_t mix64(std::uint64_t x) noexcept;

/// Normal(mean, sd) restricted to (lo, hi); rejection first, exact inverse-CDF fallback.
double truncated_normal(Rng& rng, double mean, double sd, double lo, double hi);

/**
 * @brief Inverse-gamma(shape, scale) restricted to (lo, hi).
 *
 * Untruncated draws are tried a few times and accepted when inside the box; otherwise
 * the draw comes from the exact inverse CDF of the truncated law. Both branches
 * produce exact truncated draws. Throws SamplerError when the box carries no mass.
 */
double truncated_inverse_gamma(Rng& rng, double shape, double scale, double lo, double hi);

}  // namespace hiercheck
