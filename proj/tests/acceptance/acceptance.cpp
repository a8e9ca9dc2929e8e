// Acceptance criteria 1-9. One PASS/FAIL line per criterion; exit status 1 when any fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "hiercheck/calibration.hpp"
#include "hiercheck/goodness_of_fit.hpp"
#include "hiercheck/order_stat_bounds.hpp"
#include "hiercheck/partial_posterior.hpp"
#include "hiercheck/pivotal.hpp"
#include "hiercheck/random.hpp"
#include "hiercheck/samplers.hpp"
#include "hiercheck/shapiro_wilk.hpp"
#include "support/geweke.hpp"

using namespace hiercheck;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void require(bool ok, const std::string& what) {
        pass = pass && ok;
        notes.push_back((ok ? "" : "FAILED ") + what);
    }
};

struct SwReference {
    std::size_t n;
    double w;
    double p;
    std::vector<double> values;
};

const std::vector<SwReference> kSwReferences = {
#include "oracles/shapiro_wilk_reference.inc"
};

std::string ks_note(const std::string& label, const KsResult& ks, double critical) {
    return fmt::format("{}: D = {:.5f}, 1% critical {:.5f}, p = {:.4f}, n = {}", label, ks.distance, critical,
                       ks.p.value(), static_cast<std::size_t>(ks.effective_n));
}

CalibrationConfig null_normal_config() {
    CalibrationConfig c;
    c.model = ModelKind::NormalHier;
    c.groups = 5;
    c.group_size = 8;
    c.prior = PriorSpec::proper_normal();
    c.replicates = 2000;
    c.chain.iterations = 2000;
    c.chain.burn_in = 1000;
    c.seed = 20240601;
    return c;
}

CalibrationConfig null_beta_config() {
    CalibrationConfig c;
    c.model = ModelKind::BetaBinom;
    c.groups = 12;
    c.group_size = 20;
    c.prior = PriorSpec::proper_betabinom();
    c.methods = {CalibrationMethod::PivotalMax};
    c.replicates = 2000;
    c.chain.iterations = 3000;
    c.chain.burn_in = 2000;
    c.seed = 20240602;
    return c;
}

Outcome criterion_1() {
    Outcome o;
    const auto study = pivot_study(null_normal_config());
    const auto ks = ks_test_std_normal(study.group_residuals);
    const double crit = ks_critical_value(ks.effective_n, 0.01);
    o.require(study.group_residuals.size() == 2000 * 5, fmt::format("{} pooled E values", study.group_residuals.size()));
    o.require(ks.distance < crit, ks_note("pooled E vs N(0,1)", ks, crit));
    return o;
}

PivotStudy& beta_pivots() {
    static PivotStudy study = pivot_study(null_beta_config());
    return study;
}

Outcome criterion_2() {
    Outcome o;
    const auto& study = beta_pivots();
    const auto ks = ks_test_uniform(study.pit_values);
    const double crit = ks_critical_value(ks.effective_n, 0.01);
    o.require(study.pit_values.size() + 12 * study.excluded == 2000 * 12,
              fmt::format("{} pooled zeta values, {} excluded replicates", study.pit_values.size(), study.excluded));
    o.require(ks.distance < crit, ks_note("pooled zeta vs U(0,1)", ks, crit));
    return o;
}

Outcome criterion_3() {
    Outcome o;
    const auto& study = beta_pivots();
    const auto ks = ks_test_uniform(study.max_cdf_values);
    const double crit = ks_critical_value(ks.effective_n, 0.01);
    o.require(ks.distance < crit, ks_note("pooled u_max^12 vs U(0,1)", ks, crit));
    PivotalSample s;
    s.reference = Reference::Uniform;
    s.values.assign(12, 0.5);
    s.values[0] = 0.9;
    const double f = max_uniform_pit(s).cdf_value.value();
    o.require(std::abs(f - 0.28243) <= 1e-5, fmt::format("F(0.9) with n = 12 is {:.8f} (target 0.28243 +- 1e-5)", f));
    return o;
}

Outcome criterion_4() {
    Outcome o;
    const std::vector<double> series{0.001, 0.5, 0.9};
    const double b = joint_pvalue_bound(series).overall_bound;
    o.require(b == 0.003, fmt::format("bound of (0.001, 0.5, 0.9) = {}", b));
    const std::vector<std::pair<std::string, Copula>> scenarios{
        {"independent", {CopulaKind::Independent, 0.0}},
        {"equicorrelated rho = 0.5", {CopulaKind::EquicorrelatedGaussian, 0.5}},
        {"comonotone", {CopulaKind::Comonotone, 0.0}},
    };
    for (const auto& [name, copula] : scenarios) {
        const auto t = bound_validity_study(copula, 20, 10000, 4040);
        double worst = -1.0;
        for (const auto& c : t.cells) {
            if (c.standard_error > 0.0) worst = std::max(worst, (c.empirical - c.bound) / c.standard_error);
        }
        o.require(t.violations() == 0,
                  fmt::format("{}: {} of {} cells violate, largest excess {:.2f} SE", name, t.violations(),
                              t.cells.size(), worst));
    }
    return o;
}

std::vector<double> coordinate(const std::vector<NormalHierParams>& draws, bool mu, std::size_t thin = 1) {
    std::vector<double> out;
    for (std::size_t i = 0; i < draws.size(); i += thin) out.push_back(mu ? draws[i].mu : draws[i].theta[0]);
    return out;
}

Outcome criterion_5() {
    Outcome o;
    // One group of three observations, sigma2 = tau2 = 1, mu ~ N(0, 1).
    const GroupedNormalData data(std::vector<std::vector<double>>{{2.5, 1.5, 3.1}});
    const auto prior =
        PriorSpec::proper_normal({{"mu_mean", 0.0}, {"mu_var", 1.0}, {"tau2_fixed", 1.0}, {"sigma2_fixed", 1.0}});
    ChainConfig cfg;
    cfg.iterations = 202000;
    cfg.burn_in = 2000;
    cfg.seed = 5050;

    const auto mean_stat = TestStatistic::group_mean(0);
    const auto suff = sample_partial_posterior(data, statistic_value(data, mean_stat), mean_stat, prior, cfg);
    // Prior moments: theta ~ N(0, 2), mu ~ N(0, 1).
    for (bool mu : {false, true}) {
        const auto x = coordinate(suff.draws, mu);
        std::vector<double> sq;
        for (double v : x) sq.push_back(v * v);
        const double m1 = testing::mean_of(x);
        const double m2 = testing::mean_of(sq);
        const double se1 = std::sqrt(testing::batch_means_variance(x));
        const double se2 = std::sqrt(testing::batch_means_variance(sq));
        const double target2 = mu ? 1.0 : 2.0;
        const std::string name = mu ? "mu" : "theta";
        o.require(std::abs(m1) <= 3.0 * se1, fmt::format("sufficient t: E[{}] = {:.4f} vs 0 (3 SE = {:.4f})", name, m1, 3.0 * se1));
        o.require(std::abs(m2 - target2) <= 3.0 * se2,
                  fmt::format("sufficient t: E[{}^2] = {:.4f} vs {} (3 SE = {:.4f})", name, m2, target2, 3.0 * se2));
    }

    const auto var_stat = TestStatistic::within_group_variance(0);
    cfg.seed = 5051;
    const auto anc = sample_partial_posterior(data, statistic_value(data, var_stat), var_stat, prior, cfg);
    cfg.seed = 5052;
    const auto full = gibbs_normal_hier(data, prior, cfg);
    for (bool mu : {false, true}) {
        const auto a = coordinate(anc.draws, mu, 100);
        const auto b = coordinate(full.normal, mu, 100);
        const auto ks = ks_two_sample(a, b);
        const double crit = ks_critical_value(ks.effective_n, 0.01);
        o.require(ks.p.value() > 0.01, ks_note(std::string("ancillary t, ") + (mu ? "mu" : "theta") +
                                                   " vs full posterior (thinned 1/100)",
                                               ks, crit));
    }
    return o;
}

Outcome criterion_6() {
    Outcome o;
    auto c = null_normal_config();
    c.methods = {CalibrationMethod::PriorPredictive, CalibrationMethod::PosteriorPredictive,
                 CalibrationMethod::PartialPosterior};
    c.statistic = TestStatistic::max_group_mean();
    c.chain.iterations = 3000;
    c.chain.burn_in = 1000;
    c.seed = 6060;
    const auto report = calibration_study(c);
    o.notes.push_back(fmt::format("statistic {}, {} excluded replicates", c.statistic.name(), report.excluded));
    const auto& prior = report.at(CalibrationMethod::PriorPredictive);
    const auto& post = report.at(CalibrationMethod::PosteriorPredictive);
    const auto& partial = report.at(CalibrationMethod::PartialPosterior);
    o.require(prior.passes_ks(), fmt::format("prior-predictive: D = {:.5f} < {:.5f}, variance {:.5f}", prior.ks_distance,
                                             prior.ks_critical, prior.variance));
    o.require(!post.passes_ks() && post.variance < 1.0 / 12.0,
              fmt::format("posterior-predictive: D = {:.5f} vs {:.5f}, variance {:.5f} (1/12 = {:.5f})", post.ks_distance,
                          post.ks_critical, post.variance, 1.0 / 12.0));
    o.require(partial.rejection_rate >= 0.03 && partial.rejection_rate <= 0.10,
              fmt::format("partial-posterior: rejection rate at 0.05 = {:.4f} (band [0.03, 0.10]), D = {:.5f}, "
                          "variance {:.5f}",
                          partial.rejection_rate, partial.ks_distance, partial.variance));
    return o;
}

Outcome criterion_7() {
    Outcome o;
    ChainConfig cfg;
    cfg.iterations = 101000;
    cfg.burn_in = 1000;
    cfg.seed = 7070;
    {
        const GroupedNormalData data(std::vector<std::vector<double>>{{2.0}});
        const auto prior = PriorSpec::proper_normal({{"mu_fixed", 0.0}, {"tau2_fixed", 1.0}, {"sigma2_fixed", 1.0}});
        const auto draws = gibbs_normal_hier(data, prior, cfg);
        const auto x = coordinate(draws.normal, false);
        std::vector<double> sq;
        for (double v : x) sq.push_back((v - 1.0) * (v - 1.0));
        const double m = testing::mean_of(x);
        const double v = testing::mean_of(sq);
        const double se_m = std::sqrt(testing::batch_means_variance(x));
        const double se_v = std::sqrt(testing::batch_means_variance(sq));
        o.require(std::abs(m - 1.0) <= 3.0 * se_m, fmt::format("normal toy mean {:.5f} vs 1 (3 SE = {:.5f})", m, 3.0 * se_m));
        o.require(std::abs(v - 0.5) <= 3.0 * se_v, fmt::format("normal toy variance {:.5f} vs 0.5 (3 SE = {:.5f})", v, 3.0 * se_v));
    }
    {
        const BetaBinomialData data({{"toy", 3, 10}});
        const auto prior = PriorSpec::proper_betabinom({{"alpha_fixed", 1.0}, {"beta_fixed", 1.0}});
        const auto draws = mcmc_betabinom(data, prior, cfg);
        std::vector<double> p;
        for (const auto& d : draws.betabinom) p.push_back(d.p[0]);
        const double m = testing::mean_of(p);
        const double se = std::sqrt(testing::batch_means_variance(p));
        o.require(std::abs(m - 1.0 / 3.0) <= 3.0 * se,
                  fmt::format("binomial toy mean {:.5f} vs 1/3 (3 SE = {:.5f})", m, 3.0 * se));
    }
    {
        testing::NormalGewekeSetup setup;
        setup.generating_prior =
            PriorSpec::proper_normal({{"mu_var", 4.0}, {"tau2_shape", 6.0}, {"tau2_scale", 5.0}});
        setup.sampler_prior = setup.generating_prior;
        setup.sizes = {3, 5, 4};
        setup.marginal_draws = 100000;
        setup.successive_draws = 100000;
        setup.seed = 7071;
        std::string zs;
        bool ok = true;
        for (const auto& s : testing::geweke_normal(setup)) {
            if (s.name == "mu" || s.name == "mu^2" || s.name == "tau2" || s.name == "tau2^2") {
                ok = ok && std::abs(s.z) <= 3.0;
                zs += fmt::format(" {} {:+.2f}", s.name, s.z);
            }
        }
        o.require(ok, "Geweke normal sampler, z:" + zs);
    }
    {
        testing::BetaGewekeSetup setup;
        setup.prior = PriorSpec::proper_betabinom();
        setup.trials = {10, 6, 12, 8, 10};
        setup.marginal_draws = 100000;
        setup.successive_draws = 100000;
        setup.seed = 7072;
        std::string zs;
        bool ok = true;
        for (const auto& s : testing::geweke_betabinom(setup)) {
            if (s.name == "alpha" || s.name == "alpha^2" || s.name == "beta" || s.name == "beta^2") {
                ok = ok && std::abs(s.z) <= 3.0;
                zs += fmt::format(" {} {:+.2f}", s.name, s.z);
            }
        }
        o.require(ok, "Geweke beta-binomial sampler, z:" + zs);
    }
    return o;
}

Outcome criterion_8() {
    Outcome o;
    const auto w1 = shapiro_wilk(std::vector<double>{-1.0, 0.0, 1.0}).w;
    o.require(w1 == 1.0, fmt::format("W(-1, 0, 1) = {:.17g}", w1));

    Rng rng(8080, 0);
    bool affine = true;
    for (std::size_t n : {3u, 5u, 10u, 25u, 200u}) {
        std::vector<double> x(n);
        for (auto& v : x) v = rng.normal();
        // Power-of-two scales and shifts that keep every term exact.
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) y[i] = 8.0 * x[i];
        const auto a = shapiro_wilk(x);
        const auto b = shapiro_wilk(y);
        affine = affine && a.w == b.w && a.p.value() == b.p.value();
        std::vector<double> z(n);
        for (std::size_t i = 0; i < n; ++i) z[i] = 3.7 + 2.9 * x[i];
        const auto c = shapiro_wilk(z);
        affine = affine && std::abs(a.w - c.w) <= 1e-12 && std::abs(a.p.value() - c.p.value()) <= 1e-12;
    }
    o.require(affine, "affine invariance (bitwise for scale 8, within 1e-12 for 3.7 + 2.9 x)");

    std::vector<double> pvals;
    for (std::size_t r = 0; r < 10000; ++r) {
        std::vector<double> x(10);
        for (auto& v : x) v = rng.normal();
        pvals.push_back(shapiro_wilk(x).p.value());
    }
    const auto ks = ks_test_uniform(pvals);
    const double crit = ks_critical_value(ks.effective_n, 0.01);
    o.require(ks.distance < crit, ks_note("null p-values, n = 10", ks, crit));

    double worst_w = 0.0;
    double worst_p = 0.0;
    for (const auto& ref : kSwReferences) {
        const auto r = shapiro_wilk(ref.values);
        worst_w = std::max(worst_w, std::abs(r.w - ref.w));
        worst_p = std::max(worst_p, std::abs(r.p.value() - ref.p));
    }
    o.require(kSwReferences.size() == 50 && worst_w <= 1e-4 && worst_p <= 1e-4,
              fmt::format("{} reference samples: max |dW| = {:.2e}, max |dp| = {:.2e}", kSwReferences.size(), worst_w,
                          worst_p));
    return o;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
    }
    return out;
}

int run(const std::string& cli, const std::string& args, const fs::path& stdout_file) {
    const std::string cmd = "\"" + cli + "\" " + args + " >\"" + stdout_file.string() + "\" 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome criterion_9(const std::string& cli) {
    Outcome o;
    const fs::path root = fs::temp_directory_path() / "hiercheck_acceptance_determinism";
    fs::remove_all(root);
    fs::create_directories(root / "inputs");
    const fs::path in = root / "inputs";
    if (run(cli, "simulate --groups 6 --group-size 8 --prior proper --seed 3 --out " + (in / "normal.csv").string(),
            in / "sim.out") != 0 ||
        run(cli,
            "simulate --model beta-binom --groups 12 --group-size 20 --prior proper --seed 4 --out " +
                (in / "beta.csv").string(),
            in / "simb.out") != 0) {
        o.require(false, "could not simulate input datasets");
        return o;
    }
    std::ofstream(in / "p.csv") << "p\n0.12\n0.5\n0.33\n0.91\n0.07\n";

    const std::string normal = " --data " + (in / "normal.csv").string();
    const std::string beta = " --data " + (in / "beta.csv").string() + " --model beta-binom";
    const std::string chain = " --iters 3000 --burn-in 1000 --seed 11";
    const std::vector<std::pair<std::string, std::string>> commands{
        {"simulate", "simulate --groups 5 --group-size 8 --prior proper --seed 9 --out {out}/sim.csv"},
        {"fit", "fit" + normal + chain + " --out {out}"},
        {"fit beta-binom", "fit" + beta + chain + " --out {out}"},
        {"check", "check" + normal + chain + " --statistic max-group-mean --fix-k 100 --out {out}"},
        {"check beta-binom", "check" + beta + chain + " --out {out}"},
        {"ppp", "ppp" + normal + chain + " --prior proper --statistic max-group-mean --out {out}"},
        {"postpred", "postpred" + normal + chain + " --statistic group-mean:2 --out {out}"},
        {"priorpred", "priorpred" + normal + chain + " --prior proper --statistic min-group-mean --out {out}"},
        {"calibrate", "calibrate --prior proper --replicates 40 --iters 600 --burn-in 200 --threads 2 --methods "
                      "pivotal-SW,prior-predictive,posterior-predictive,partial-posterior --out {out}"},
        {"plot", "plot --input " + (in / "p.csv").string() + " --kind histogram --bins 5 --out {out}/h.svg"},
    };
    for (std::size_t c = 0; c < commands.size(); ++c) {
        const auto& [name, pattern] = commands[c];
        std::map<std::string, std::string> bundles[2];
        bool ok = true;
        for (int rep = 0; rep < 2; ++rep) {
            // Identical inputs include the output directory, which some commands echo.
            const fs::path out = root / fmt::format("cmd{}", c);
            fs::remove_all(out);
            fs::create_directories(out);
            std::string args = pattern;
            for (auto pos = args.find("{out}"); pos != std::string::npos; pos = args.find("{out}")) {
                args.replace(pos, 5, out.string());
            }
            const fs::path log = root / fmt::format("stdout{}_{}.txt", c, rep);
            ok = ok && run(cli, args, log) == 0;
            bundles[rep] = snapshot(out);
            bundles[rep]["<stdout>"] = slurp(log);
        }
        const bool same = ok && bundles[0] == bundles[1] && bundles[0].size() > 1;
        o.require(same, fmt::format("{}: {} outputs {}", name, bundles[0].size(), same ? "identical" : "differ or failed"));
    }
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    std::string cli;
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--cli") cli = argv[i + 1];
    }
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"pivot normality of E", criterion_1},
        {"PIT uniformity of zeta", criterion_2},
        {"largest-PIT law F(x) = x^12", criterion_3},
        {"dependent order-statistic bound", criterion_4},
        {"partial posterior sufficiency and ancillarity limits", criterion_5},
        {"finite-sample uniformity ordering", criterion_6},
        {"sampler correctness oracles", criterion_7},
        {"Shapiro-Wilk", criterion_8},
        {"CLI determinism", [&] {
             if (cli.empty()) {
                 Outcome o;
                 o.require(false, "no --cli path given");
                 return o;
             }
             return criterion_9(cli);
         }},
    };
    bool all = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        all = all && o.pass;
        std::cout << fmt::format("criterion {}: {} - {} ({:.1f} s)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first,
                                 secs);
        for (const auto& n : o.notes) std::cout << "    " << n << '\n';
        std::cout.flush();
    }
    return all ? 0 : 1;
}
