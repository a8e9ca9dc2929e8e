#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "hiercheck/errors.hpp"
#include "hiercheck/order_stat_bounds.hpp"
#include "hiercheck/random.hpp"

using namespace hiercheck;
using Catch::Matchers::WithinAbs;

TEST_CASE("bound arithmetic on a three-element series", "[bounds]") {
    const std::vector<double> series{0.9, 0.001, 0.5};
    const auto r = joint_pvalue_bound(series, 2);
    CHECK(r.J == 3);
    CHECK_THAT(r.overall_bound, WithinAbs(0.003, 1e-15));
    CHECK(r.k_star == 1);
    REQUIRE(r.curve.size() == 3);
    CHECK_THAT(r.curve[1].bound, WithinAbs(0.75, 1e-15));
    CHECK_THAT(r.curve[2].bound, WithinAbs(0.9, 1e-15));
    REQUIRE(r.fixed.has_value());
    CHECK(r.fixed->k == 2);
    CHECK_THAT(r.fixed->bound, WithinAbs(0.75, 1e-15));

    const auto j = to_json(r);
    CHECK(j.at("k_star") == 1);
    CHECK(j.at("curve").size() == 3);
    CHECK(j.at("fixed_k").at("k") == 2);
}

TEST_CASE("the bound is capped at one and ties pick the smallest k", "[bounds]") {
    CHECK(dependent_orderstat_bound(10, 1, 0.5).value() == 1.0);
    const std::vector<double> flat{0.2, 0.4};
    const auto r = joint_pvalue_bound(flat);
    // 2*0.2/1 = 0.4 and 2*0.4/2 = 0.4.
    CHECK(r.k_star == 1);
    CHECK_THAT(r.overall_bound, WithinAbs(0.4, 1e-15));
}

TEST_CASE("invalid bound inputs are rejected", "[bounds]") {
    CHECK_THROWS_AS(dependent_orderstat_bound(5, 0, 0.1), ValidationError);
    CHECK_THROWS_AS(dependent_orderstat_bound(5, 6, 0.1), ValidationError);
    CHECK_THROWS_AS(dependent_orderstat_bound(5, 2, 1.5), ValidationError);
    CHECK_THROWS_AS(joint_pvalue_bound(std::vector<double>{}), ValidationError);
    CHECK_THROWS_AS(joint_pvalue_bound(std::vector<double>{0.2, -0.1}), ValidationError);
    CHECK_THROWS_AS(joint_pvalue_bound(std::vector<double>{0.2, 0.3}, 3), ValidationError);
}

TEST_CASE("the k = 1 bound is attained by a rotated-uniform construction", "[bounds]") {
    // U_j = frac(V + j/J): the minimum is below u < 1/J with probability exactly J u.
    const std::size_t J = 10;
    const std::size_t reps = 40000;
    const double u = 0.02;
    Rng rng(51, 0);
    std::size_t hits = 0;
    for (std::size_t r = 0; r < reps; ++r) {
        const double v = rng.uniform();
        double m = 1.0;
        for (std::size_t j = 0; j < J; ++j) m = std::min(m, std::fmod(v + static_cast<double>(j) / J, 1.0));
        if (m <= u) ++hits;
    }
    const double b = dependent_orderstat_bound(J, 1, u).value();
    const double rate = static_cast<double>(hits) / reps;
    CHECK_THAT(rate, WithinAbs(b, 3.0 * std::sqrt(b * (1.0 - b) / reps)));
}

TEST_CASE("bound validity under three dependence scenarios", "[bounds]") {
    for (const Copula c : {Copula{CopulaKind::Independent, 0.0}, Copula{CopulaKind::EquicorrelatedGaussian, 0.6},
                           Copula{CopulaKind::Comonotone, 0.0}}) {
        const auto t = bound_validity_study(c, 20, 3000, 52);
        CHECK(t.J == 20);
        CHECK(t.replicates == 3000);
        CHECK(t.cells.size() == 5 * 8);
        CHECK(t.violations() == 0);
    }
}

TEST_CASE("comonotone uniforms have P(U_(k) <= u) = u", "[bounds]") {
    BoundGrid grid;
    grid.ks = {1, 5};
    grid.us = {0.1, 0.5};
    const auto t = bound_validity_study({CopulaKind::Comonotone, 0.0}, 5, 20000, 53, grid);
    for (const auto& cell : t.cells) {
        CHECK_THAT(cell.empirical, WithinAbs(cell.u, 3.0 * std::sqrt(cell.u * (1.0 - cell.u) / 20000)));
    }
}

TEST_CASE("validity study rejects bad configurations", "[bounds]") {
    CHECK_THROWS_AS(bound_validity_study({CopulaKind::Independent, 0.0}, 0, 10, 1), ValidationError);
    CHECK_THROWS_AS(bound_validity_study({CopulaKind::EquicorrelatedGaussian, 1.0}, 5, 10, 1), ValidationError);
    BoundGrid grid;
    grid.ks = {6};
    CHECK_THROWS_AS(bound_validity_study({CopulaKind::Independent, 0.0}, 5, 10, 1, grid), ValidationError);
}
