#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "hiercheck/errors.hpp"
#include "hiercheck/goodness_of_fit.hpp"
#include "hiercheck/random.hpp"

using namespace hiercheck;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("Kolmogorov survival function matches reference values", "[gof]") {
    CHECK_THAT(kolmogorov_sf(0.3), WithinRel(0.9999906941986655, 1e-10));
    CHECK_THAT(kolmogorov_sf(0.5), WithinRel(0.9639452436648751, 1e-10));
    CHECK_THAT(kolmogorov_sf(1.0), WithinRel(0.26999967167735456, 1e-10));
    CHECK_THAT(kolmogorov_sf(1.18), WithinRel(0.1234538094297657, 1e-10));
    CHECK_THAT(kolmogorov_sf(1.628), WithinRel(0.009975522431181053, 1e-9));
    CHECK_THAT(kolmogorov_sf(2.5), WithinRel(7.453306344157342e-06, 1e-8));
    CHECK(kolmogorov_sf(0.0) == 1.0);
}

TEST_CASE("KS distances match reference values", "[gof]") {
    const std::vector<double> u{0.05, 0.12, 0.33, 0.41, 0.58, 0.6, 0.77, 0.91};
    const auto ru = ks_test_uniform(u);
    CHECK_THAT(ru.distance, WithinAbs(0.15000000000000002, 1e-14));
    CHECK(ru.effective_n == 8.0);

    const std::vector<double> z{-1.2, -0.3, 0.1, 0.4, 0.45, 1.9, 2.2};
    CHECK_THAT(ks_test_std_normal(z).distance, WithinAbs(0.25699772589828385, 1e-12));

    const std::vector<double> a{0.1, 0.4, 0.5, 0.9, 1.3};
    const std::vector<double> b{0.2, 0.25, 0.7, 1.1, 1.6, 2.0, 2.4};
    const auto r2 = ks_two_sample(a, b);
    CHECK_THAT(r2.distance, WithinAbs(0.42857142857142855, 1e-14));
    CHECK_THAT(r2.effective_n, WithinAbs(35.0 / 12.0, 1e-14));
}

TEST_CASE("critical values follow the corrected asymptotic form", "[gof]") {
    const double n = 2000.0;
    const double root = std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n);
    CHECK_THAT(ks_critical_value(n, 0.01), WithinAbs(1.628 / root, 1e-15));
    CHECK_THAT(ks_critical_value(n, 0.05), WithinAbs(1.358 / root, 1e-15));
    CHECK_THAT(ks_critical_value(n, 0.10), WithinAbs(1.224 / root, 1e-15));
    CHECK_THROWS_AS(ks_critical_value(n, 0.02), ValidationError);
}

TEST_CASE("KS p-values are roughly uniform under the null", "[gof]") {
    Rng rng(61, 0);
    const std::size_t reps = 2000;
    std::size_t rejections = 0;
    for (std::size_t r = 0; r < reps; ++r) {
        std::vector<double> x(50);
        for (auto& v : x) v = rng.uniform();
        if (ks_test_uniform(x).p.value() <= 0.05) ++rejections;
    }
    const double rate = static_cast<double>(rejections) / reps;
    CHECK_THAT(rate, WithinAbs(0.05, 3.0 * std::sqrt(0.05 * 0.95 / reps)));
}

TEST_CASE("KS detects a shifted sample", "[gof]") {
    Rng rng(62, 0);
    std::vector<double> x(500);
    for (auto& v : x) v = rng.normal() + 0.5;
    const auto r = ks_test_std_normal(x);
    CHECK(r.p.value() < 1e-6);
    CHECK(r.distance > ks_critical_value(500.0));
}

TEST_CASE("sample moments", "[gof]") {
    const std::vector<double> x{1.0, 2.0, 4.0, 7.0};
    CHECK(sample_mean(x) == 3.5);
    CHECK_THAT(sample_variance(x), WithinAbs(7.0, 1e-14));
    CHECK_THROWS_AS(ks_test_uniform(std::vector<double>{}), ValidationError);
}
