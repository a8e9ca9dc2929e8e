#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "hiercheck/errors.hpp"
#include "hiercheck/pivotal.hpp"

using namespace hiercheck;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("max PIT of twelve uniforms", "[pivotal]") {
    PivotalSample s;
    s.reference = Reference::Uniform;
    s.values.assign(12, 0.3);
    s.values[4] = 0.9;
    const auto m = max_uniform_pit(s);
    CHECK(m.u_max.value() == 0.9);
    CHECK_THAT(m.cdf_value.value(), WithinAbs(0.28243, 1e-5));
    CHECK_THAT(m.upper_tail_p.value(), WithinAbs(1.0 - 0.282429536481, 1e-9));
}

TEST_CASE("group and within-group residuals", "[pivotal]") {
    NormalHierParams p;
    p.theta = {1.0, 3.0, -1.0};
    p.mu = 1.0;
    p.tau2 = 4.0;
    p.sigma2 = {0.25};
    const auto e = group_level_residuals(p, 7);
    CHECK(e.draw_index == 7);
    CHECK(e.reference == Reference::StdNormal);
    REQUIRE(e.values.size() == 3);
    CHECK_THAT(e.values[0], WithinAbs(0.0, 1e-15));
    CHECK_THAT(e.values[1], WithinAbs(1.0, 1e-15));
    CHECK_THAT(e.values[2], WithinAbs(-1.0, 1e-15));

    const GroupedNormalData data(std::vector<std::vector<double>>{{1.5, 0.5}, {3.0}, {-2.0, -1.0}});
    const auto r = within_group_residuals(data, p);
    const std::vector<double> expected{1.0, -1.0, 0.0, -2.0, 0.0};
    REQUIRE(r.values.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) CHECK_THAT(r.values[i], WithinAbs(expected[i], 1e-14));

    const auto g = standardized_group_means(data, p);
    CHECK_THAT(g.values[0], WithinAbs(0.0, 1e-14));
    CHECK_THAT(g.values[1], WithinAbs(2.0 / std::sqrt(4.25), 1e-14));
    CHECK_THAT(g.values[2], WithinAbs(-2.5 / std::sqrt(4.125), 1e-14));
}

TEST_CASE("beta PIT is the regularized incomplete beta", "[pivotal]") {
    BetaBinomialParams p;
    p.alpha = 1.0;
    p.beta = 1.0;
    p.p = {0.2, 0.7};
    const auto z = beta_pit(p);
    CHECK(z.reference == Reference::Uniform);
    CHECK_THAT(z.values[0], WithinAbs(0.2, 1e-14));
    CHECK_THAT(z.values[1], WithinAbs(0.7, 1e-14));
    p.alpha = 2.0;
    p.beta = 1.0;
    CHECK_THAT(beta_pit(p).values[0], WithinAbs(0.04, 1e-14));
}

TEST_CASE("QQ data sorts the sample against reference quantiles", "[pivotal]") {
    PivotalSample s;
    s.reference = Reference::Uniform;
    s.values = {0.9, 0.1, 0.5, 0.3};
    const auto qq = qq_data(s);
    REQUIRE(qq.size() == 4);
    const std::vector<double> theo{0.125, 0.375, 0.625, 0.875};
    const std::vector<double> emp{0.1, 0.3, 0.5, 0.9};
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK_THAT(qq[i].theoretical, WithinAbs(theo[i], 1e-15));
        CHECK(qq[i].empirical == emp[i]);
    }
    s.reference = Reference::StdNormal;
    const auto qn = qq_data(s);
    CHECK_THAT(qn[0].theoretical, WithinRel(-1.1503493803760079, 1e-12));
    CHECK_THAT(qn[0].theoretical, WithinAbs(-qn[3].theoretical, 1e-14));
}

TEST_CASE("max-stat QQ uses quantiles of x^n", "[pivotal]") {
    const std::vector<double> u{0.99, 0.8, 0.95};
    const auto qq = max_stat_qq(u, 5);
    REQUIRE(qq.size() == 3);
    CHECK(qq[0].empirical == 0.8);
    CHECK(qq[2].empirical == 0.99);
    CHECK_THAT(qq[0].theoretical, WithinAbs(std::pow(1.0 / 6.0, 0.2), 1e-14));
    CHECK_THAT(qq[1].theoretical, WithinAbs(std::pow(0.5, 0.2), 1e-14));
}

TEST_CASE("p-value series cover every retained draw", "[pivotal]") {
    const GroupedNormalData data(std::vector<std::vector<double>>{{0.1, 0.3}, {1.2, 0.8}, {-0.5, 0.0}, {2.0, 2.4}});
    ChainConfig cfg;
    cfg.iterations = 300;
    cfg.burn_in = 100;
    const auto draws = gibbs_normal_hier(data, PriorSpec::proper_normal(), cfg);
    const auto sw = sw_pvalue_series(draws, data);
    REQUIRE(sw.values.size() == draws.size());
    for (double p : sw.values) {
        REQUIRE(p >= 0.0);
        REQUIRE(p <= 1.0);
    }

    const BetaBinomialData bb({{"a", 2, 10}, {"b", 5, 10}, {"c", 9, 10}});
    const auto bdraws = mcmc_betabinom(bb, PriorSpec::proper_betabinom(), cfg);
    const auto mx = max_pit_pvalue_series(bdraws);
    REQUIRE(mx.values.size() == bdraws.size());
    const auto& d0 = bdraws.betabinom.front();
    const auto m = max_uniform_pit(beta_pit(d0));
    CHECK(mx.values.front() == m.upper_tail_p.value());
}
