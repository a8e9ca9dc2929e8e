#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "hiercheck/errors.hpp"
#include "hiercheck/models.hpp"

using namespace hiercheck;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("grouped data caches means and sums of squares") {
    const GroupedNormalData d({{1.0, 2.0, 3.0}, {5.0}});
    CHECK(d.group_count() == 2);
    CHECK(d.total_count() == 4);
    CHECK(d.group_mean(0) == 2.0);
    CHECK(d.within_ss(0) == 2.0);
    CHECK(d.within_ss(1) == 0.0);
    CHECK(d.labels() == std::vector<std::string>{"1", "2"});
    CHECK_THROWS_AS(GroupedNormalData({}), ValidationError);
    CHECK_THROWS_AS(GroupedNormalData(std::vector<std::vector<double>>{{1.0}, {}}), ValidationError);
    CHECK_THROWS_AS(GroupedNormalData({{1.0, NAN}}), ValidationError);
}

TEST_CASE("binomial data validation") {
    CHECK_NOTHROW(BetaBinomialData({{"a", 3, 10}}));
    CHECK_THROWS_AS(BetaBinomialData({{"a", 11, 10}}), ValidationError);
    CHECK_THROWS_AS(BetaBinomialData({{"a", 0, 0}}), ValidationError);
    CHECK_THROWS_AS(BetaBinomialData({}), ValidationError);
}

TEST_CASE("parameter invariants") {
    NormalHierParams p{{0.0, 1.0}, 0.0, 1.0, {1.0}};
    CHECK_NOTHROW(validate(p, 2));
    CHECK_THROWS_AS(validate(p, 3), ValidationError);
    p.tau2 = 0.0;
    CHECK_THROWS_AS(validate(p, 2), ValidationError);
    BetaBinomialParams b{{0.2, 1.0}, 1.0, 1.0};
    CHECK_THROWS_AS(validate(b, 2), ValidationError);
}

TEST_CASE("truncation box is normalized whichever way a is given") {
    const auto p1 = PriorSpec::truncated_improper_normal(1e6).box();
    const auto p2 = PriorSpec::truncated_improper_normal(1e-6).box();
    CHECK(p1.lo == p2.lo);
    CHECK(p1.hi == p2.hi);
    CHECK(p1.lo == 1e-6);
    CHECK(p1.hi == 1e6);
    CHECK_THROWS_AS(PriorSpec::truncated_improper_normal(1.0).box(), ValidationError);
    CHECK_THROWS_AS(PriorSpec::truncated_jeffreys(-2.0).validate(), ValidationError);
    CHECK_FALSE(Box{1.0, 2.0}.contains(1.0));
}

TEST_CASE("model and prior kind names round-trip") {
    for (auto k : {ModelKind::NormalHier, ModelKind::BetaBinom}) CHECK(parse_model_kind(to_string(k)) == k);
    for (auto k : {PriorKind::ProperNormal, PriorKind::TruncatedImproperNormal, PriorKind::TruncatedJeffreysBetaBinom,
                   PriorKind::ProperBetaBinom}) {
        CHECK(parse_prior_kind(to_string(k)) == k);
    }
    CHECK_THROWS_AS(parse_model_kind("poisson"), ValidationError);
}

TEST_CASE("beta-binomial log-likelihood matches the oracle") {
    // x log p + (n - x) log(1 - p) + log Beta(p; a, b), binomial coefficient omitted.
    const BetaBinomialData d({{"u", 3, 10}});
    const BetaBinomialParams p{{0.3}, 2.0, 5.0};
    CHECK_THAT(loglik_betabinom(d, p), WithinAbs(-5.3381182189676448, 1e-12));
}

TEST_CASE("normal log-likelihood is the sum of normal log densities") {
    const GroupedNormalData d({{0.5, -1.0}, {2.0}});
    const NormalHierParams p{{0.0, 1.0}, 0.0, 1.0, {2.0}};
    double expected = 0.0;
    for (auto [y, t] : {std::pair{0.5, 0.0}, {-1.0, 0.0}, {2.0, 1.0}}) {
        expected += -0.5 * std::log(2 * std::numbers::pi * 2.0) - (y - t) * (y - t) / 4.0;
    }
    CHECK_THAT(loglik_normal_hier(d, p), WithinRel(expected, 1e-14));
}

TEST_CASE("log priors return log-zero outside the support") {
    const auto trunc = PriorSpec::truncated_improper_normal(100.0);
    NormalHierParams p{{0.0}, 0.0, 1.0, {1.0}};
    CHECK(std::isfinite(logprior_normal_hier(p, trunc)));
    p.tau2 = 200.0;
    CHECK(logprior_normal_hier(p, trunc) == kLogZero);
    p.tau2 = 1.0;
    p.mu = -150.0;
    CHECK(logprior_normal_hier(p, trunc) == kLogZero);

    const auto jeff = PriorSpec::truncated_jeffreys(1e-3);
    CHECK(logprior_betabinom({{0.5}, 2.0, 3.0}, jeff) == standin_jeffreys_log_density(2.0, 3.0));
    CHECK(logprior_betabinom({{0.5}, 2000.0, 3.0}, jeff) == kLogZero);
    CHECK(logprior_betabinom({{0.5}, 1e-4, 3.0}, jeff) == kLogZero);
    CHECK_THROWS_AS(logprior_betabinom({{0.5}, 2.0, 3.0}, trunc), ValidationError);
}

TEST_CASE("truncated-improper prior kernel") {
    // pi(sigma2) ~ 1/sigma2, pi(tau2) ~ 1/tau, mu flat.
    const auto prior = PriorSpec::truncated_improper_normal();
    const NormalHierParams a{{0.0}, 0.0, 1.0, {1.0}};
    const NormalHierParams b{{0.0}, 3.0, 4.0, {2.0}};
    CHECK_THAT(logprior_normal_hier(b, prior) - logprior_normal_hier(a, prior),
               WithinAbs(-std::log(2.0) - 0.5 * std::log(4.0), 1e-14));
}

TEST_CASE("plug-in Jeffreys density is used when supplied") {
    auto prior = PriorSpec::truncated_jeffreys();
    prior.plugin = [](double a, double b) { return -a - b; };
    CHECK(logprior_betabinom({{0.5}, 2.0, 3.0}, prior) == -5.0);
}

TEST_CASE("fingerprints are stable and content sensitive") {
    const GroupedNormalData a({{1.0, 2.0}});
    const GroupedNormalData b({{1.0, 2.0}});
    const GroupedNormalData c({{1.0, 2.5}});
    CHECK(fingerprint(a) == fingerprint(b));
    CHECK(fingerprint(a) != fingerprint(c));
    CHECK(fingerprint(a).size() == 16);
}
