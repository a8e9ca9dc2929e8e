#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <vector>

#include "../support/geweke.hpp"
#include "hiercheck/chain_io.hpp"
#include "hiercheck/errors.hpp"
#include "hiercheck/samplers.hpp"

using namespace hiercheck;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double mean(const std::vector<double>& x) { return testing::mean_of(x); }

double variance(const std::vector<double>& x) {
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return ss / static_cast<double>(x.size() - 1);
}

GroupedNormalData small_normal_data() {
    return GroupedNormalData({{1.2, 0.4, 2.1, 1.7}, {-0.3, 0.5, 0.1}, {2.8, 3.1, 2.2, 2.5, 3.6}, {0.9, 1.1}});
}

}  // namespace

TEST_CASE("normal sampler matches the conjugate single-group posterior", "[samplers]") {
    // y = 2, theta ~ N(0, 1), sigma2 = 1: theta | y ~ N(1, 1/2).
    const GroupedNormalData data(std::vector<std::vector<double>>{{2.0}});
    const auto prior = PriorSpec::proper_normal({{"mu_fixed", 0.0}, {"tau2_fixed", 1.0}, {"sigma2_fixed", 1.0}});
    ChainConfig cfg;
    cfg.iterations = 101000;
    cfg.burn_in = 1000;
    cfg.seed = 11;
    const auto draws = gibbs_normal_hier(data, prior, cfg);
    REQUIRE(draws.size() == 100000);
    std::vector<double> theta;
    for (const auto& d : draws.normal) theta.push_back(d.theta[0]);
    const double se = std::sqrt(0.5 / 1e5);
    CHECK_THAT(mean(theta), WithinAbs(1.0, 3.0 * se));
    CHECK_THAT(variance(theta), WithinAbs(0.5, 3.0 * 0.5 * std::sqrt(2.0 / 1e5)));
    for (const auto& d : draws.normal) {
        REQUIRE(d.mu == 0.0);
        REQUIRE(d.tau2 == 1.0);
        REQUIRE(d.sigma2.front() == 1.0);
    }
}

TEST_CASE("beta-binomial sampler matches the conjugate binomial posterior", "[samplers]") {
    // x = 3 of 10 with a uniform prior: p | x ~ Beta(4, 8).
    const BetaBinomialData data({{"a", 3, 10}});
    const auto prior = PriorSpec::proper_betabinom({{"alpha_fixed", 1.0}, {"beta_fixed", 1.0}});
    ChainConfig cfg;
    cfg.iterations = 101000;
    cfg.burn_in = 1000;
    cfg.seed = 12;
    const auto draws = mcmc_betabinom(data, prior, cfg);
    std::vector<double> p;
    for (const auto& d : draws.betabinom) p.push_back(d.p[0]);
    const double var = 4.0 * 8.0 / (12.0 * 12.0 * 13.0);
    CHECK_THAT(mean(p), WithinAbs(1.0 / 3.0, 3.0 * std::sqrt(var / 1e5)));
    CHECK_THAT(variance(p), WithinRel(var, 0.03));
}

TEST_CASE("Geweke joint-distribution test passes for the normal sampler", "[samplers][geweke]") {
    testing::NormalGewekeSetup setup;
    setup.generating_prior = PriorSpec::proper_normal({{"mu_var", 4.0}, {"tau2_shape", 6.0}, {"tau2_scale", 5.0}});
    setup.sampler_prior = setup.generating_prior;
    setup.sizes = {3, 5, 4};
    setup.marginal_draws = 40000;
    setup.successive_draws = 80000;
    setup.seed = 21;
    for (const auto& s : testing::geweke_normal(setup)) {
        INFO(s.name << " z = " << s.z);
        CHECK(std::abs(s.z) < 4.0);
    }
}

TEST_CASE("Geweke test detects a sampler whose prior differs from the generating prior", "[samplers][geweke]") {
    testing::NormalGewekeSetup setup;
    setup.generating_prior = PriorSpec::proper_normal({{"mu_var", 4.0}});
    setup.sampler_prior = PriorSpec::proper_normal({{"mu_var", 4.0}, {"mu_mean", 1.5}});
    setup.sizes = {3, 5, 4};
    setup.marginal_draws = 20000;
    setup.successive_draws = 40000;
    setup.seed = 22;
    double worst = 0.0;
    for (const auto& s : testing::geweke_normal(setup)) worst = std::max(worst, std::abs(s.z));
    CHECK(worst > 6.0);
}

TEST_CASE("Geweke joint-distribution test passes for the beta-binomial sampler", "[samplers][geweke]") {
    testing::BetaGewekeSetup setup;
    setup.prior = PriorSpec::proper_betabinom();
    setup.trials = {10, 6, 12, 8, 10};
    setup.marginal_draws = 40000;
    setup.successive_draws = 150000;
    setup.seed = 23;
    for (const auto& s : testing::geweke_betabinom(setup)) {
        INFO(s.name << " z = " << s.z);
        CHECK(std::abs(s.z) < 4.0);
    }
}

TEST_CASE("same seed gives identical chains, different seeds differ", "[samplers]") {
    const auto data = small_normal_data();
    const auto prior = PriorSpec::truncated_improper_normal();
    ChainConfig cfg;
    cfg.iterations = 800;
    cfg.burn_in = 100;
    cfg.thin = 3;
    cfg.seed = 5;
    const auto a = gibbs_normal_hier(data, prior, cfg);
    const auto b = gibbs_normal_hier(data, prior, cfg);
    CHECK(a.normal == b.normal);
    CHECK(a.size() == cfg.retained_count());
    cfg.seed = 6;
    const auto c = gibbs_normal_hier(data, prior, cfg);
    CHECK_FALSE(a.normal == c.normal);

    const BetaBinomialData bb({{"1", 3, 10}, {"2", 5, 12}, {"3", 1, 9}, {"4", 7, 11}});
    ChainConfig bcfg;
    bcfg.iterations = 600;
    bcfg.burn_in = 200;
    const auto x = mcmc_betabinom(bb, PriorSpec::truncated_jeffreys(), bcfg);
    const auto y = mcmc_betabinom(bb, PriorSpec::truncated_jeffreys(), bcfg);
    CHECK(x.betabinom == y.betabinom);
}

TEST_CASE("truncated improper draws stay inside the box", "[samplers]") {
    const auto data = small_normal_data();
    const auto prior = PriorSpec::truncated_improper_normal(100.0);
    ChainConfig cfg;
    cfg.iterations = 3000;
    cfg.burn_in = 500;
    const auto draws = gibbs_normal_hier(data, prior, cfg);
    for (const auto& d : draws.normal) {
        REQUIRE(std::abs(d.mu) < 100.0);
        REQUIRE(d.tau2 > 0.01);
        REQUIRE(d.tau2 < 100.0);
        REQUIRE(d.sigma2.front() > 0.01);
        REQUIRE(d.sigma2.front() < 100.0);
    }
}

TEST_CASE("a single group with the truncated prior uses the slice update", "[samplers]") {
    const GroupedNormalData data(std::vector<std::vector<double>>{{0.3, 1.1, -0.4, 0.8}});
    ChainConfig cfg;
    cfg.iterations = 2000;
    cfg.burn_in = 200;
    const auto draws = gibbs_normal_hier(data, PriorSpec::truncated_improper_normal(50.0), cfg);
    REQUIRE(draws.size() == 1800);
    for (const auto& d : draws.normal) {
        REQUIRE(d.tau2 > 1.0 / 50.0);
        REQUIRE(d.tau2 < 50.0);
    }
}

TEST_CASE("known per-group variances are kept fixed", "[samplers]") {
    const auto data = small_normal_data();
    auto prior = PriorSpec::proper_normal();
    prior.known_group_sigma2 = {0.5, 1.0, 2.0, 0.25};
    ChainConfig cfg;
    cfg.iterations = 500;
    cfg.burn_in = 100;
    const auto draws = gibbs_normal_hier(data, prior, cfg);
    for (const auto& d : draws.normal) REQUIRE(d.sigma2 == prior.known_group_sigma2);
}

TEST_CASE("a zero step size is reported as stagnation", "[samplers]") {
    const BetaBinomialData bb({{"1", 3, 10}, {"2", 5, 12}, {"3", 1, 9}});
    ChainConfig cfg;
    cfg.iterations = 400;
    cfg.burn_in = 100;
    cfg.step_sizes["log_alpha"] = 0.0;
    const auto draws = mcmc_betabinom(bb, PriorSpec::truncated_jeffreys(), cfg);
    bool found = false;
    for (const auto& w : draws.warnings) found = found || w.find("stagnation") != std::string::npos;
    CHECK(found);
    const auto summary = chain_summary(draws);
    for (const auto& p : summary.parameters) {
        if (p.name == "alpha") {
            CHECK(p.degenerate);
            CHECK(p.ess == 300.0);
        }
    }
}

TEST_CASE("beta-binomial steps adapt toward the target acceptance rate", "[samplers]") {
    const BetaBinomialData bb({{"1", 3, 10}, {"2", 5, 12}, {"3", 1, 9}, {"4", 6, 10}, {"5", 2, 8}});
    ChainConfig cfg;
    cfg.iterations = 6000;
    cfg.burn_in = 2000;
    cfg.step_sizes["log_alpha"] = 20.0;
    const auto draws = mcmc_betabinom(bb, PriorSpec::proper_betabinom(), cfg);
    CHECK(draws.step_sizes.at("log_alpha") < 20.0);
    CHECK_THAT(draws.acceptance_rates.at("log_alpha"), WithinAbs(0.4, 0.15));
}

TEST_CASE("chain config validation", "[samplers]") {
    ChainConfig cfg;
    cfg.burn_in = cfg.iterations;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = {};
    cfg.thin = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = {};
    cfg.step_sizes["mu"] = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = {};
    cfg.iterations = 10;
    cfg.burn_in = 3;
    cfg.thin = 3;
    CHECK(cfg.retained_count() == 3);
}

TEST_CASE("effective sample size of iid and AR(1) chains", "[samplers]") {
    Rng rng(31, 0);
    const std::size_t n = 20000;
    std::vector<double> iid(n);
    for (auto& v : iid) v = rng.normal();
    CHECK_THAT(effective_sample_size(iid), WithinRel(static_cast<double>(n), 0.1));

    const double rho = 0.9;
    std::vector<double> ar(n);
    ar[0] = rng.normal() / std::sqrt(1.0 - rho * rho);
    for (std::size_t t = 1; t < n; ++t) ar[t] = rho * ar[t - 1] + rng.normal();
    const double expected = static_cast<double>(n) * (1.0 - rho) / (1.0 + rho);
    CHECK_THAT(effective_sample_size(ar), WithinRel(expected, 0.2));

    const std::vector<double> empty;
    CHECK_THROWS_AS(effective_sample_size(empty), ValidationError);
}

TEST_CASE("draws round-trip through CSV", "[samplers][io]") {
    const auto data = small_normal_data();
    ChainConfig cfg;
    cfg.iterations = 300;
    cfg.burn_in = 100;
    cfg.seed = 9;
    const auto draws = gibbs_normal_hier(data, PriorSpec::truncated_improper_normal(), cfg);
    const auto path = std::filesystem::temp_directory_path() / "hiercheck_draws_roundtrip.csv";
    write_draws_csv(path, draws, "fit");
    const auto back = read_draws_csv(path);
    std::filesystem::remove(path);
    REQUIRE(back.size() == draws.size());
    CHECK(back.normal == draws.normal);
    CHECK(back.config.seed == 9);
    CHECK(back.prior.kind == PriorKind::TruncatedImproperNormal);
}
