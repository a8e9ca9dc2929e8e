// Command-line front end: fit, check, p-values, calibration, simulation and plotting.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "hiercheck/calibration.hpp"
#include "hiercheck/chain_io.hpp"
#include "hiercheck/errors.hpp"
#include "hiercheck/ingest.hpp"
#include "hiercheck/partial_posterior.hpp"
#include "hiercheck/plot.hpp"
#include "hiercheck/run_check.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hiercheck;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitSampler = 3;
constexpr int kExitIo = 4;

const std::vector<std::string> kSubcommands = {"fit",      "check",     "ppp",      "postpred",
                                               "priorpred", "calibrate", "simulate", "plot"};

/// Options shared by the subcommands; unset values keep library defaults.
struct Options {
    std::string data;
    std::string model = "normal-hier";
    std::string prior = "truncated-improper";
    std::optional<double> a;
    std::size_t iters = 6000;
    std::size_t burn_in = 1000;
    std::size_t thin = 1;
    std::uint64_t seed = 1;
    std::string statistic;
    std::string out;
    std::string plots = "on";
    std::optional<std::size_t> fix_k;
    std::vector<std::string> hyper;
    std::vector<std::string> steps;
    std::size_t qq_draws = 3;
    std::size_t bins = 20;
    std::size_t threads = 0;
    // calibrate / simulate
    std::size_t groups = 5;
    std::size_t group_size = 8;
    std::size_t replicates = 2000;
    std::size_t replicate = 0;
    std::vector<std::string> methods{"pivotal-SW"};
    std::vector<std::string> fixed_hyper;
    // plot
    std::string input;
    std::string kind = "qq";
    std::string title;
};

std::map<std::string, double> parse_pairs(const std::vector<std::string>& items, const std::string& flag) {
    std::map<std::string, double> out;
    for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ValidationError(fmt::format("{} expects key=value, got '{}'", flag, item));
        }
        const std::string value = item.substr(eq + 1);
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(value, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (value.empty() || pos != value.size()) {
            throw ValidationError(fmt::format("{}: '{}' is not a number", flag, value));
        }
        out[item.substr(0, eq)] = v;
    }
    return out;
}

ModelKind model_of(const Options& o) { return parse_model_kind(o.model); }

PriorSpec prior_of(const Options& o) {
    const ModelKind model = model_of(o);
    const auto hyper = parse_pairs(o.hyper, "--hyper");
    PriorSpec p;
    if (o.prior == "proper") {
        p = model == ModelKind::NormalHier ? PriorSpec::proper_normal(hyper) : PriorSpec::proper_betabinom(hyper);
    } else if (o.prior == "truncated-improper") {
        p = model == ModelKind::NormalHier ? PriorSpec::truncated_improper_normal() : PriorSpec::truncated_jeffreys();
        p.hyper = hyper;
    } else {
        throw ValidationError("--prior must be proper or truncated-improper, got '" + o.prior + "'");
    }
    if (o.a) {
        if (p.is_proper()) throw ValidationError("--a applies to the truncated-improper prior only");
        p.a = *o.a;
    }
    p.validate();
    return p;
}

ChainConfig chain_of(const Options& o) {
    ChainConfig c;
    c.iterations = o.iters;
    c.burn_in = o.burn_in;
    c.thin = o.thin;
    c.seed = o.seed;
    c.step_sizes = parse_pairs(o.steps, "--step");
    c.validate();
    return c;
}

fs::path require_out(const Options& o) {
    if (o.out.empty()) throw ValidationError("--out is required");
    return o.out;
}

bool plots_on(const Options& o) {
    if (o.plots == "on") return true;
    if (o.plots == "off") return false;
    throw ValidationError("--plots must be on or off");
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
}

GroupedNormalData normal_data(const Options& o) {
    if (o.data.empty()) throw ValidationError("--data is required");
    if (model_of(o) != ModelKind::NormalHier) throw ValidationError("this command needs --model normal-hier");
    return std::get<GroupedNormalData>(ingest_dataset(o.data, ModelKind::NormalHier));
}

TestStatistic statistic_of(const Options& o) {
    if (o.statistic.empty()) throw ValidationError("--statistic is required");
    return TestStatistic::parse(o.statistic);
}

int cmd_fit(const Options& o) {
    if (o.data.empty()) throw ValidationError("--data is required");
    const PriorSpec prior = prior_of(o);
    const ChainConfig chain = chain_of(o);
    const fs::path out = require_out(o);
    const Dataset data = ingest_dataset(o.data, model_of(o));
    const PosteriorDraws draws = fit_dataset(data, prior, chain);
    ensure_dir(out);
    const CsvTable table = draws_table(draws, "fit");
    write_csv(out / "draws.csv", table);
    json summary = {{"operation", "fit"},
                    {"model", o.model},
                    {"data_fingerprint", dataset_fingerprint(data)},
                    {"config", table.header.at("config")},
                    {"config_hash", table.header.at("config_hash")},
                    {"seed", chain.seed},
                    {"chain", to_json(chain_summary(draws))}};
    write_json(out / "summary.json", summary);
    for (const auto& w : draws.warnings) std::cerr << "warning: " << w << '\n';
    std::cout << "wrote " << (out / "draws.csv").string() << " and " << (out / "summary.json").string() << '\n';
    return 0;
}

int cmd_check(const Options& o) {
    RunConfig rc;
    if (o.data.empty()) throw ValidationError("--data is required");
    rc.data_path = o.data;
    rc.model = model_of(o);
    rc.prior = prior_of(o);
    rc.chain = chain_of(o);
    if (!o.statistic.empty()) rc.statistic = statistic_of(o);
    rc.out_dir = require_out(o);
    rc.plots = plots_on(o);
    rc.fix_k = o.fix_k;
    rc.qq_draws = o.qq_draws;
    rc.histogram_bins = o.bins;
    const RunReport report = run_check(rc);
    for (const auto& w : report.summary.at("chain").at("warnings")) std::cerr << "warning: " << w.get<std::string>() << '\n';
    const auto& bound = report.summary.at("bound");
    std::cout << fmt::format("{} p-values: post-hoc bound {} at k = {}", report.summary.at("pvalues").at("statistic").get<std::string>(),
                             format_number(bound.at("overall_bound").get<double>()), bound.at("k_star").get<std::size_t>());
    if (bound.contains("fixed")) {
        std::cout << fmt::format(", pre-registered k = {}: {}", bound.at("fixed").at("k").get<std::size_t>(),
                                 format_number(bound.at("fixed").at("bound").get<double>()));
    }
    std::cout << '\n' << "wrote " << report.files.size() << " files to " << rc.out_dir.string() << '\n';
    return 0;
}

void emit_pvalue(const Options& o, const std::string& op, json result) {
    result["operation"] = op;
    if (!o.out.empty()) {
        const fs::path out(o.out);
        ensure_dir(out);
        write_json(out / (op + ".json"), result);
    }
    std::cout << result.dump(2) << '\n';
}

int cmd_ppp(const Options& o) {
    const auto data = normal_data(o);
    const auto stat = statistic_of(o);
    const PriorSpec prior = prior_of(o);
    const ChainConfig chain = chain_of(o);
    const double t_obs = statistic_value(data, stat);
    const auto pp = sample_partial_posterior(data, t_obs, stat, prior, chain);
    const Probability p = average_tail(t_obs, pp.draws, stat, data.group_sizes());
    for (const auto& w : pp.warnings) std::cerr << "warning: " << w << '\n';
    emit_pvalue(o, "ppp",
                {{"statistic", stat.name()},
                 {"t_obs", t_obs},
                 {"p", p.value()},
                 {"draws", pp.draws.size()},
                 {"acceptance_rates", pp.acceptance_rates},
                 {"step_sizes", pp.step_sizes},
                 {"warnings", pp.warnings},
                 {"prior", to_json(prior)},
                 {"chain", to_json(chain)},
                 {"data_fingerprint", fingerprint(data)}});
    return 0;
}

int cmd_postpred(const Options& o) {
    const auto data = normal_data(o);
    const auto stat = statistic_of(o);
    const PriorSpec prior = prior_of(o);
    const ChainConfig chain = chain_of(o);
    const PosteriorDraws draws = gibbs_normal_hier(data, prior, chain);
    const double t_obs = statistic_value(data, stat);
    emit_pvalue(o, "postpred",
                {{"statistic", stat.name()},
                 {"t_obs", t_obs},
                 {"p", posterior_predictive_pvalue(data, t_obs, stat, draws).value()},
                 {"draws", draws.size()},
                 {"prior", to_json(prior)},
                 {"chain", to_json(chain)},
                 {"data_fingerprint", fingerprint(data)}});
    return 0;
}

int cmd_priorpred(const Options& o) {
    const auto data = normal_data(o);
    const auto stat = statistic_of(o);
    const PriorSpec prior = prior_of(o);
    const ChainConfig chain = chain_of(o);
    const double t_obs = statistic_value(data, stat);
    emit_pvalue(o, "priorpred",
                {{"statistic", stat.name()},
                 {"t_obs", t_obs},
                 {"p", prior_predictive_pvalue(data, t_obs, stat, prior, chain).value()},
                 {"prior_draws", chain.retained_count()},
                 {"prior", to_json(prior)},
                 {"chain", to_json(chain)},
                 {"data_fingerprint", fingerprint(data)}});
    return 0;
}

CalibrationConfig calibration_of(const Options& o) {
    CalibrationConfig c;
    c.model = model_of(o);
    c.prior = prior_of(o);
    c.groups = o.groups;
    c.group_size = o.group_size;
    c.replicates = o.replicates;
    c.chain = chain_of(o);
    c.seed = o.seed;
    c.threads = o.threads;
    c.methods.clear();
    for (const auto& m : o.methods) c.methods.push_back(parse_calibration_method(m));
    if (!o.statistic.empty()) c.statistic = statistic_of(o);
    if (!o.fixed_hyper.empty()) {
        c.draw_hyperparameters = false;
        for (const auto& [k, v] : parse_pairs(o.fixed_hyper, "--fixed-hyper")) {
            if (k == "mu") {
                c.fixed.mu = v;
            } else if (k == "tau2") {
                c.fixed.tau2 = v;
            } else if (k == "sigma2") {
                c.fixed.sigma2 = v;
            } else if (k == "alpha") {
                c.fixed.alpha = v;
            } else if (k == "beta") {
                c.fixed.beta = v;
            } else {
                throw ValidationError("--fixed-hyper: unknown key '" + k + "'");
            }
        }
    }
    c.validate();
    return c;
}

int cmd_calibrate(const Options& o) {
    const CalibrationConfig config = calibration_of(o);
    const fs::path out = require_out(o);
    const bool plots = plots_on(o);
    const CalibrationReport report = calibration_study(config);
    ensure_dir(out);
    const json j = to_json(report);
    write_json(out / "calibration.json", j);
    write_calibration_csv(out / "calibration_pvalues.csv", report);
    if (plots) {
        for (const auto& m : report.methods) {
            if (m.pvalues.empty()) continue;
            render_plot(histogram_document(m.pvalues, to_string(m.method) + " null p-values", o.bins),
                        out / fmt::format("calibration_hist_{}.svg", to_string(m.method)));
        }
    }
    for (const auto& m : report.methods) {
        std::cout << fmt::format("{:<22} KS distance {:.4f} (1% critical {:.4f}{}), rejection rate at 0.05 {:.4f}\n",
                                 to_string(m.method), m.ks_distance, m.ks_critical,
                                 m.ks_degenerate ? ", degenerate" : "", m.rejection_rate);
    }
    if (report.excluded) std::cerr << "excluded replicates: " << report.excluded << '\n';
    return 0;
}

int cmd_simulate(const Options& o) {
    Options local = o;
    local.replicates = o.replicate + 1;
    local.methods = {"pivotal-max"};
    CalibrationConfig config = calibration_of(local);
    const NullReplicate rep = simulate_null_dataset(config, o.replicate);
    json truth;
    Dataset data = rep.normal_data ? Dataset(*rep.normal_data) : Dataset(*rep.betabinom_data);
    if (rep.normal_data) {
        truth = {{"theta", rep.normal_truth.theta},
                 {"mu", rep.normal_truth.mu},
                 {"tau2", rep.normal_truth.tau2},
                 {"sigma2", rep.normal_truth.sigma2}};
    } else {
        truth = {{"p", rep.betabinom_truth.p}, {"alpha", rep.betabinom_truth.alpha}, {"beta", rep.betabinom_truth.beta}};
    }
    json cfg = {{"model", o.model},
                {"groups", config.groups},
                {"group_size", config.group_size},
                {"draw_hyperparameters", config.draw_hyperparameters},
                {"prior", to_json(config.prior)},
                {"replicate", o.replicate}};
    const json header = csv_header("simulate", config.seed, cfg, {{"truth", truth}});
    if (o.out.empty() || o.out == "-") {
        write_dataset(std::cout, data, header);
    } else {
        write_dataset(fs::path(o.out), data, header);
    }
    return 0;
}

int cmd_plot(const Options& o) {
    if (o.input.empty()) throw ValidationError("--input is required");
    if (o.out.empty()) throw ValidationError("--out is required");
    const CsvTable table = read_csv(o.input);
    PlotDocument doc;
    if (o.kind == "qq") {
        if (table.columns.size() != 2) throw ValidationError("qq plot input needs two columns (theoretical, empirical)");
        std::vector<QQPoint> pts;
        for (const auto& r : table.rows) pts.push_back({r[0], r[1]});
        doc = qq_document(std::move(pts), o.title.empty() ? "QQ plot" : o.title, table.columns[0], table.columns[1]);
    } else if (o.kind == "histogram") {
        std::vector<double> values;
        for (const auto& r : table.rows) values.push_back(r.at(0));
        doc = histogram_document(std::move(values), o.title.empty() ? table.columns.at(0) : o.title, o.bins);
    } else {
        throw ValidationError("--kind must be qq or histogram");
    }
    render_plot(doc, o.out);
    return 0;
}

/// Expands a flat JSON config into command-line arguments for keys not given explicitly.
std::vector<std::string> apply_config(std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty()) return args;
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");
    json cfg;
    try {
        cfg = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("config '" + path + "': " + e.what());
    }
    if (!cfg.is_object()) throw ValidationError("config '" + path + "' must be a JSON object");

    auto given = [&](const std::string& key) {
        const std::string flag = "--" + key;
        for (const auto& a : args) {
            if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
        }
        return false;
    };
    auto scalar = [&](const std::string& key, const json& v) -> std::string {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
        if (v.is_number()) return format_number(v.get<double>());
        if (v.is_boolean()) return v.get<bool>() ? "on" : "off";
        throw ValidationError("config key '" + key + "' must be a scalar");
    };

    std::vector<std::string> extra;
    for (const auto& [key, value] : cfg.items()) {
        if (key == "config" || given(key)) continue;
        if (value.is_object()) {
            for (const auto& [k, v] : value.items()) {
                extra.push_back("--" + key);
                extra.push_back(k + "=" + scalar(key, v));
            }
        } else if (value.is_array()) {
            for (const auto& v : value) {
                extra.push_back("--" + key);
                extra.push_back(scalar(key, v));
            }
        } else {
            extra.push_back("--" + key);
            extra.push_back(scalar(key, value));
        }
    }
    auto sub = std::find_if(args.begin() + 1, args.end(),
                            [](const std::string& a) { return std::find(kSubcommands.begin(), kSubcommands.end(), a) != kSubcommands.end(); });
    if (sub == args.end()) return args;
    args.insert(sub + 1, extra.begin(), extra.end());
    return args;
}

void add_common(CLI::App* app, Options& o, bool needs_data) {
    app->add_option("--config", "flat JSON config; explicit flags win");
    if (needs_data) app->add_option("--data", o.data, "dataset CSV");
    app->add_option("--model", o.model, "normal-hier or beta-binom")->capture_default_str();
    app->add_option("--prior", o.prior, "proper or truncated-improper")->capture_default_str();
    app->add_option("--a", o.a, "truncation bound of the improper prior");
    app->add_option("--hyper", o.hyper, "prior hyperparameter key=value (repeatable)");
    app->add_option("--iters", o.iters, "sweeps including burn-in")->capture_default_str();
    app->add_option("--burn-in", o.burn_in, "burn-in sweeps")->capture_default_str();
    app->add_option("--thin", o.thin, "thinning interval")->capture_default_str();
    app->add_option("--seed", o.seed, "random seed")->capture_default_str();
    app->add_option("--step", o.steps, "initial random-walk step block=value (repeatable)");
}

}  // namespace

int main(int argc, char** argv) {
    Options o;
    CLI::App app{"Diagnostics for the second-stage assumptions of hierarchical Bayesian models"};
    app.require_subcommand(1);

    auto* fit = app.add_subcommand("fit", "fit a model and write draws.csv and summary.json");
    add_common(fit, o, true);
    fit->add_option("--out", o.out, "output directory");

    auto* check = app.add_subcommand("check", "fit, pivotal diagnostics, p-value bound and plots");
    add_common(check, o, true);
    check->add_option("--out", o.out, "output directory");
    check->add_option("--statistic", o.statistic, "add a posterior-predictive p-value for this statistic");
    check->add_option("--plots", o.plots, "on or off")->capture_default_str();
    check->add_option("--fix-k", o.fix_k, "pre-registered order statistic for the bound");
    check->add_option("--qq-draws", o.qq_draws, "draws with pivotal QQ plots")->capture_default_str();
    check->add_option("--bins", o.bins, "histogram bins")->capture_default_str();

    const std::string stat_help = "group-mean:<i>, max-group-mean or min-group-mean";
    for (const auto* name : {"ppp", "postpred", "priorpred"}) {
        const std::string desc = std::string(name) == "ppp"        ? "partial posterior p-value"
                                 : std::string(name) == "postpred" ? "posterior predictive p-value"
                                                                   : "prior predictive p-value (proper prior)";
        auto* sub = app.add_subcommand(name, desc);
        add_common(sub, o, true);
        sub->add_option("--statistic", o.statistic, stat_help);
        sub->add_option("--out", o.out, "optional output directory for <command>.json");
    }

    auto* calibrate = app.add_subcommand("calibrate", "null-model calibration study of p-value methods");
    add_common(calibrate, o, false);
    calibrate->add_option("--groups", o.groups, "groups or units")->capture_default_str();
    calibrate->add_option("--group-size", o.group_size, "observations per group or trials per unit")
        ->capture_default_str();
    calibrate->add_option("--replicates", o.replicates, "null replicates")->capture_default_str();
    calibrate->add_option("--methods", o.methods, "pivotal-SW, pivotal-max, partial-posterior, "
                                                  "posterior-predictive, prior-predictive")
        ->delimiter(',');
    calibrate->add_option("--statistic", o.statistic, stat_help);
    calibrate->add_option("--fixed-hyper", o.fixed_hyper, "fix a data-generating hyperparameter key=value");
    calibrate->add_option("--threads", o.threads, "worker threads (0 = all cores)");
    calibrate->add_option("--out", o.out, "output directory");
    calibrate->add_option("--plots", o.plots, "on or off")->capture_default_str();
    calibrate->add_option("--bins", o.bins, "histogram bins")->capture_default_str();

    auto* simulate = app.add_subcommand("simulate", "simulate one null dataset in the ingest format");
    add_common(simulate, o, false);
    simulate->add_option("--groups", o.groups, "groups or units")->capture_default_str();
    simulate->add_option("--group-size", o.group_size, "observations per group or trials per unit")
        ->capture_default_str();
    simulate->add_option("--replicate", o.replicate, "replicate index")->capture_default_str();
    simulate->add_option("--fixed-hyper", o.fixed_hyper, "fix a data-generating hyperparameter key=value");
    simulate->add_option("--out", o.out, "output CSV (default stdout)");

    auto* plot = app.add_subcommand("plot", "render a QQ or histogram SVG from a CSV");
    plot->add_option("--config", "flat JSON config; explicit flags win");
    plot->add_option("--input", o.input, "two-column QQ CSV or one-column values CSV");
    plot->add_option("--kind", o.kind, "qq or histogram")->capture_default_str();
    plot->add_option("--title", o.title, "plot title");
    plot->add_option("--bins", o.bins, "histogram bins")->capture_default_str();
    plot->add_option("--out", o.out, "output SVG path");

    try {
        std::vector<std::string> args(argv, argv + argc);
        args = apply_config(std::move(args));
        std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
        app.parse(reversed);

        if (fit->parsed()) return cmd_fit(o);
        if (check->parsed()) return cmd_check(o);
        if (app.got_subcommand("ppp")) return cmd_ppp(o);
        if (app.got_subcommand("postpred")) return cmd_postpred(o);
        if (app.got_subcommand("priorpred")) return cmd_priorpred(o);
        if (calibrate->parsed()) return cmd_calibrate(o);
        if (simulate->parsed()) return cmd_simulate(o);
        if (plot->parsed()) return cmd_plot(o);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const SamplerError& e) {
        std::cerr << "sampler error: " << e.what() << '\n';
        return kExitSampler;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kExitValidation;
}
