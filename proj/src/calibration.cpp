#include "hiercheck/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include <fmt/format.h>

#include "hiercheck/chain_io.hpp"
#include "hiercheck/errors.hpp"
#include "hiercheck/parallel.hpp"
#include "hiercheck/pivotal.hpp"
#include "hiercheck/random.hpp"
#include "hiercheck/shapiro_wilk.hpp"
#include "hiercheck/simulate.hpp"

namespace hiercheck {

namespace {

constexpr std::uint64_t kDataStream = 0x6e756c6c64617461ULL;
constexpr std::uint64_t kChainStream = 0x636861696e736564ULL;

bool needs_full_fit(CalibrationMethod m) {
    return m == CalibrationMethod::PivotalSW || m == CalibrationMethod::PivotalMax ||
           m == CalibrationMethod::PosteriorPredictive;
}

double max_pit_pvalue(const PivotalSample& uniforms) { return max_uniform_pit(uniforms).upper_tail_p.value(); }

PivotalSample normal_uniforms(const PivotalSample& e) {
    PivotalSample u = e;
    u.reference = Reference::Uniform;
    for (auto& v : u.values) v = std_normal_cdf(v).value();
    return u;
}

ChainConfig replicate_chain(const CalibrationConfig& config, std::size_t r) {
    ChainConfig c = config.chain;
    c.seed = replicate_chain_seed(config, r);
    return c;
}

std::vector<double> run_replicate(const CalibrationConfig& config, std::size_t r) {
    const NullReplicate rep = simulate_null_dataset(config, r);
    const ChainConfig chain = replicate_chain(config, r);
    std::vector<double> out;
    out.reserve(config.methods.size());

    if (config.model == ModelKind::BetaBinom) {
        const PosteriorDraws draws = mcmc_betabinom(*rep.betabinom_data, config.prior, chain);
        if (draws.empty()) throw SamplerError("no retained draws");
        const PivotalSample zeta = beta_pit(draws.betabinom.back(), draws.size() - 1);
        // Validation leaves pivotal-max as the only method for this model.
        out.assign(config.methods.size(), max_pit_pvalue(zeta));
        return out;
    }

    const GroupedNormalData& data = *rep.normal_data;
    std::optional<PosteriorDraws> draws;
    if (std::any_of(config.methods.begin(), config.methods.end(), needs_full_fit)) {
        draws = gibbs_normal_hier(data, config.prior, chain);
        if (draws->empty()) throw SamplerError("no retained draws");
    }
    for (auto m : config.methods) {
        switch (m) {
            case CalibrationMethod::PivotalSW: {
                const PivotalSample e = group_level_residuals(draws->normal.back(), draws->size() - 1);
                out.push_back(shapiro_wilk(e.values).p.value());
                break;
            }
            case CalibrationMethod::PivotalMax: {
                const PivotalSample e = group_level_residuals(draws->normal.back(), draws->size() - 1);
                out.push_back(max_pit_pvalue(normal_uniforms(e)));
                break;
            }
            case CalibrationMethod::PartialPosterior:
                out.push_back(partial_posterior_pvalue(data, config.statistic, config.prior, chain).value());
                break;
            case CalibrationMethod::PosteriorPredictive:
                out.push_back(posterior_predictive_pvalue(data, config.statistic, *draws).value());
                break;
            case CalibrationMethod::PriorPredictive:
                out.push_back(prior_predictive_pvalue(data, config.statistic, config.prior, chain).value());
                break;
        }
    }
    return out;
}

MethodCalibration summarize(CalibrationMethod method, std::vector<double> pvalues) {
    MethodCalibration m;
    m.method = method;
    m.pvalues = std::move(pvalues);
    const std::size_t n = m.pvalues.size();
    if (n == 0) {
        m.ks_degenerate = true;
        m.variance = std::numeric_limits<double>::quiet_NaN();
        return m;
    }
    const KsResult ks = ks_test_uniform(m.pvalues);
    m.ks_distance = ks.distance;
    m.ks_p = ks.p;
    m.ks_critical = ks_critical_value(static_cast<double>(n));
    m.ks_degenerate = n < 2;
    m.rejection_rate = static_cast<double>(std::count_if(m.pvalues.begin(), m.pvalues.end(),
                                                         [](double p) { return p <= 0.05; })) /
                       static_cast<double>(n);
    m.variance = n < 2 ? std::numeric_limits<double>::quiet_NaN() : sample_variance(m.pvalues);
    return m;
}

nlohmann::json finite_or_null(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(); }

}  // namespace

std::string to_string(CalibrationMethod method) {
    switch (method) {
        case CalibrationMethod::PivotalSW: return "pivotal-SW";
        case CalibrationMethod::PivotalMax: return "pivotal-max";
        case CalibrationMethod::PartialPosterior: return "partial-posterior";
        case CalibrationMethod::PosteriorPredictive: return "posterior-predictive";
        case CalibrationMethod::PriorPredictive: return "prior-predictive";
    }
    return "unknown";
}

CalibrationMethod parse_calibration_method(const std::string& name) {
    for (auto m : {CalibrationMethod::PivotalSW, CalibrationMethod::PivotalMax, CalibrationMethod::PartialPosterior,
                   CalibrationMethod::PosteriorPredictive, CalibrationMethod::PriorPredictive}) {
        if (name == to_string(m)) return m;
    }
    throw ValidationError("unknown calibration method '" + name +
                          "' (expected pivotal-SW, pivotal-max, partial-posterior, posterior-predictive or "
                          "prior-predictive)");
}

void CalibrationConfig::validate() const {
    if (replicates < 1) throw ValidationError("calibration: replicates must be at least 1");
    if (methods.empty()) throw ValidationError("calibration: no methods requested");
    if (groups < 1) throw ValidationError("calibration: need at least one group");
    if (group_size < 1) throw ValidationError("calibration: group size must be positive");
    chain.validate();
    prior.validate();
    const bool normal = model == ModelKind::NormalHier;
    if (prior.is_normal_kind() != normal) {
        throw ValidationError("calibration: prior " + to_string(prior.kind) + " does not match model " +
                              to_string(model));
    }
    if (draw_hyperparameters && !prior.is_proper()) {
        throw UnsupportedPriorError("calibration: drawing hyperparameters needs a proper prior, got " +
                                    to_string(prior.kind));
    }
    if (!draw_hyperparameters) {
        if (normal && (!(fixed.tau2 > 0.0) || !(fixed.sigma2 > 0.0) || !std::isfinite(fixed.mu))) {
            throw ValidationError("calibration: fixed tau2 and sigma2 must be positive and mu finite");
        }
        if (!normal && (!(fixed.alpha > 0.0) || !(fixed.beta > 0.0))) {
            throw ValidationError("calibration: fixed alpha and beta must be positive");
        }
    }
    for (auto m : methods) {
        if (!normal && m != CalibrationMethod::PivotalMax) {
            throw ValidationError("calibration: method " + to_string(m) + " is not available for beta-binom");
        }
        if (m == CalibrationMethod::PivotalSW && groups < 3) {
            throw ValidationError("calibration: pivotal-SW needs at least 3 groups");
        }
    }
    if (normal) {
        std::vector<std::size_t> sizes(groups, group_size);
        statistic.validate(sizes);
    }
}

std::uint64_t replicate_chain_seed(const CalibrationConfig& config, std::size_t replicate) {
    Rng rng = Rng(config.seed, kChainStream).substream(replicate);
    return rng();
}

NullReplicate simulate_null_dataset(const CalibrationConfig& config, std::size_t replicate) {
    config.validate();
    if (replicate >= config.replicates) throw ValidationError("simulate_null_dataset: replicate out of range");
    Rng rng = Rng(config.seed, kDataStream).substream(replicate);
    NullReplicate out;
    if (config.model == ModelKind::NormalHier) {
        NormalHierParams truth;
        if (config.draw_hyperparameters) {
            truth = draw_normal_hier_prior(config.prior, config.groups, rng);
        } else {
            truth.mu = config.fixed.mu;
            truth.tau2 = config.fixed.tau2;
            truth.sigma2 = config.prior.known_group_sigma2.empty() ? std::vector<double>{config.fixed.sigma2}
                                                                   : config.prior.known_group_sigma2;
            truth.theta.resize(config.groups);
            draw_group_means(truth, rng);
        }
        const std::vector<std::size_t> sizes(config.groups, config.group_size);
        out.normal_data = simulate_normal_data(truth, sizes, rng);
        out.normal_truth = std::move(truth);
    } else {
        BetaBinomialParams truth;
        if (config.draw_hyperparameters) {
            truth = draw_betabinom_prior(config.prior, config.groups, rng);
        } else {
            truth.alpha = config.fixed.alpha;
            truth.beta = config.fixed.beta;
            truth.p.resize(config.groups);
            draw_unit_rates(truth, rng);
        }
        const std::vector<std::uint64_t> trials(config.groups, config.group_size);
        out.betabinom_data = simulate_betabinom_data(truth, trials, rng);
        out.betabinom_truth = std::move(truth);
    }
    return out;
}

const MethodCalibration& CalibrationReport::at(CalibrationMethod method) const {
    for (const auto& m : methods) {
        if (m.method == method) return m;
    }
    throw ValidationError("calibration report has no results for " + to_string(method));
}

CalibrationReport calibration_study(const CalibrationConfig& config) {
    config.validate();
    const std::size_t r_count = config.replicates;
    std::vector<std::vector<double>> results(r_count);
    std::vector<std::string> failures(r_count);
    parallel_for(
        r_count,
        [&](std::size_t r) {
            try {
                results[r] = run_replicate(config, r);
            } catch (const SamplerError& e) {
                failures[r] = fmt::format("replicate {}: {}", r, e.what());
            }
        },
        config.threads);

    CalibrationReport report;
    report.config = config;
    std::vector<std::vector<double>> per_method(config.methods.size());
    for (std::size_t r = 0; r < r_count; ++r) {
        if (!failures[r].empty()) {
            ++report.excluded;
            report.exclusion_reasons.push_back(failures[r]);
            continue;
        }
        for (std::size_t k = 0; k < config.methods.size(); ++k) per_method[k].push_back(results[r][k]);
    }
    if (static_cast<double>(report.excluded) > 0.01 * static_cast<double>(r_count)) {
        throw SamplerError(fmt::format("calibration: {} of {} replicates failed (limit 1%); first: {}",
                                       report.excluded, r_count, report.exclusion_reasons.front()));
    }
    for (std::size_t k = 0; k < config.methods.size(); ++k) {
        report.methods.push_back(summarize(config.methods[k], std::move(per_method[k])));
    }
    return report;
}

PivotStudy pivot_study(const CalibrationConfig& config) {
    config.validate();
    const std::size_t r_count = config.replicates;
    std::vector<std::optional<PivotStudy>> parts(r_count);
    parallel_for(
        r_count,
        [&](std::size_t r) {
            const NullReplicate rep = simulate_null_dataset(config, r);
            const ChainConfig chain = replicate_chain(config, r);
            PivotStudy part;
            try {
                if (config.model == ModelKind::NormalHier) {
                    const auto draws = gibbs_normal_hier(*rep.normal_data, config.prior, chain);
                    part.group_residuals = group_level_residuals(draws.normal.back()).values;
                } else {
                    const auto draws = mcmc_betabinom(*rep.betabinom_data, config.prior, chain);
                    const PivotalSample zeta = beta_pit(draws.betabinom.back());
                    part.pit_values = zeta.values;
                    part.max_cdf_values.push_back(max_uniform_pit(zeta).cdf_value.value());
                }
                parts[r] = std::move(part);
            } catch (const SamplerError&) {
            }
        },
        config.threads);
    PivotStudy out;
    for (auto& p : parts) {
        if (!p) {
            ++out.excluded;
            continue;
        }
        out.group_residuals.insert(out.group_residuals.end(), p->group_residuals.begin(), p->group_residuals.end());
        out.pit_values.insert(out.pit_values.end(), p->pit_values.begin(), p->pit_values.end());
        out.max_cdf_values.insert(out.max_cdf_values.end(), p->max_cdf_values.begin(), p->max_cdf_values.end());
    }
    return out;
}

nlohmann::json to_json(const CalibrationReport& report) {
    const auto& c = report.config;
    nlohmann::json cfg = {{"model", to_string(c.model)},
                          {"groups", c.groups},
                          {"group_size", c.group_size},
                          {"draw_hyperparameters", c.draw_hyperparameters},
                          {"prior", to_json(c.prior)},
                          {"replicates", c.replicates},
                          {"statistic", c.statistic.name()},
                          {"chain", to_json(c.chain)},
                          {"seed", c.seed}};
    if (!c.draw_hyperparameters) {
        cfg["fixed"] = c.model == ModelKind::NormalHier
                           ? nlohmann::json{{"mu", c.fixed.mu}, {"tau2", c.fixed.tau2}, {"sigma2", c.fixed.sigma2}}
                           : nlohmann::json{{"alpha", c.fixed.alpha}, {"beta", c.fixed.beta}};
    }
    nlohmann::json methods = nlohmann::json::array();
    for (const auto& m : report.methods) {
        methods.push_back({{"method", to_string(m.method)},
                           {"count", m.pvalues.size()},
                           {"ks_distance", m.ks_distance},
                           {"ks_p", m.ks_p.value()},
                           {"ks_critical_1pct", m.ks_critical},
                           {"ks_degenerate", m.ks_degenerate},
                           {"passes_ks_1pct", m.passes_ks()},
                           {"rejection_rate_05", m.rejection_rate},
                           {"variance", finite_or_null(m.variance)}});
    }
    return {{"config", cfg},
            {"config_hash", config_hash(cfg)},
            {"methods", methods},
            {"excluded", report.excluded},
            {"exclusion_reasons", report.exclusion_reasons}};
}

void write_calibration_csv(const std::filesystem::path& path, const CalibrationReport& report) {
    const nlohmann::json j = to_json(report);
    CsvTable table;
    table.header = csv_header("calibrate", report.config.seed, j.at("config"));
    const std::size_t rows = report.methods.empty() ? 0 : report.methods.front().pvalues.size();
    for (const auto& m : report.methods) table.columns.push_back(to_string(m.method));
    for (std::size_t r = 0; r < rows; ++r) {
        std::vector<double> row;
        for (const auto& m : report.methods) row.push_back(m.pvalues[r]);
        table.rows.push_back(std::move(row));
    }
    write_csv(path, table);
}

}  // namespace hiercheck
