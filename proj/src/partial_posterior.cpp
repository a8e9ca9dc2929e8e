#include "hiercheck/partial_posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "hiercheck/errors.hpp"
#include "hiercheck/parallel.hpp"
#include "hiercheck/random.hpp"
#include "hiercheck/simulate.hpp"

namespace hiercheck {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

// log Phi(z), accurate in the far lower tail where Phi underflows.
double log_ndtr(double z) {
    if (z == std::numeric_limits<double>::infinity()) return 0.0;
    if (z == -std::numeric_limits<double>::infinity()) return kLogZero;
    if (z > 0.0) return std::log1p(-0.5 * std::erfc(z / std::numbers::sqrt2));
    if (z > -35.0) return std::log(0.5 * std::erfc(-z / std::numbers::sqrt2));
    const double z2 = z * z;
    return -0.5 * z2 - std::log(-z) - kHalfLog2Pi + std::log1p(-1.0 / z2 + 3.0 / (z2 * z2));
}

double log_sum_exp(std::span<const double> v) {
    const double m = *std::max_element(v.begin(), v.end());
    if (m == kLogZero) return kLogZero;
    double acc = 0.0;
    for (double x : v) acc += std::exp(x - m);
    return m + std::log(acc);
}

std::size_t parse_group_number(const std::string& text, const std::string& digits) {
    std::size_t pos = 0;
    unsigned long long value = 0;
    try {
        value = std::stoull(digits, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (digits.empty() || pos != digits.size() || value == 0 || digits.front() == '-' || digits.front() == '+') {
        throw ValidationError("statistic '" + text + "': group number must be a positive integer");
    }
    return static_cast<std::size_t>(value - 1);
}

// Standard deviation of ybar_i given the parameters.
double mean_sd(const NormalHierParams& params, std::size_t i, std::span<const std::size_t> sizes) {
    return std::sqrt(params.sigma2_of(i) / static_cast<double>(sizes[i]));
}

void check_inputs(const NormalHierParams& params, const TestStatistic& stat, std::span<const std::size_t> sizes) {
    validate(params, sizes.size());
    stat.validate(sizes);
}

double sum_log_cdf(double t, const NormalHierParams& params, std::span<const std::size_t> sizes, bool upper) {
    double s = 0.0;
    for (std::size_t j = 0; j < sizes.size(); ++j) {
        const double z = (t - params.theta[j]) / mean_sd(params, j, sizes);
        s += log_ndtr(upper ? -z : z);
    }
    return s;
}

double limit_tail(double t_obs, const TestStatistic& stat) {
    const bool low = t_obs < 0.0;
    return stat.lower_tail() ? (low ? 0.0 : 1.0) : (low ? 1.0 : 0.0);
}

}  // namespace

TestStatistic TestStatistic::parse(const std::string& text) {
    if (text == "max-group-mean") return max_group_mean();
    if (text == "min-group-mean") return min_group_mean();
    for (const auto& [prefix, kind] : {std::pair{std::string("group-mean:"), Kind::GroupMean},
                                       std::pair{std::string("within-group-variance:"), Kind::WithinGroupVariance}}) {
        if (text.rfind(prefix, 0) == 0) return {kind, parse_group_number(text, text.substr(prefix.size()))};
    }
    throw ValidationError("unknown statistic '" + text +
                          "' (expected group-mean:<i>, max-group-mean, min-group-mean or within-group-variance:<i>)");
}

std::string TestStatistic::name() const {
    switch (kind) {
        case Kind::GroupMean: return fmt::format("group-mean:{}", group + 1);
        case Kind::MaxGroupMean: return "max-group-mean";
        case Kind::MinGroupMean: return "min-group-mean";
        case Kind::WithinGroupVariance: return fmt::format("within-group-variance:{}", group + 1);
    }
    return "unknown";
}

void TestStatistic::validate(std::span<const std::size_t> group_sizes) const {
    if (group_sizes.empty()) throw ValidationError("statistic: no groups");
    if (kind == Kind::GroupMean || kind == Kind::WithinGroupVariance) {
        if (group >= group_sizes.size()) {
            throw ValidationError(fmt::format("statistic {}: group index out of range (dataset has {} groups)", name(),
                                              group_sizes.size()));
        }
        if (kind == Kind::WithinGroupVariance && group_sizes[group] < 2) {
            throw ValidationError(fmt::format("statistic {}: group needs at least 2 observations", name()));
        }
    }
    for (std::size_t n : group_sizes) {
        if (n == 0) throw ValidationError("statistic: empty group");
    }
}

double statistic_value(const GroupedNormalData& data, const TestStatistic& stat) {
    stat.validate(data.group_sizes());
    const auto& means = data.group_means();
    switch (stat.kind) {
        case TestStatistic::Kind::GroupMean: return means[stat.group];
        case TestStatistic::Kind::MaxGroupMean: return *std::max_element(means.begin(), means.end());
        case TestStatistic::Kind::MinGroupMean: return *std::min_element(means.begin(), means.end());
        case TestStatistic::Kind::WithinGroupVariance:
            return data.within_ss(stat.group) / static_cast<double>(data.group_size(stat.group) - 1);
    }
    throw ValidationError("statistic: unknown kind");
}

double statistic_logdensity(double t, const NormalHierParams& params, const TestStatistic& stat,
                            std::span<const std::size_t> group_sizes) {
    check_inputs(params, stat, group_sizes);
    if (std::isnan(t)) throw ValidationError("statistic_logdensity: t is NaN");
    if (std::isinf(t)) return kLogZero;
    switch (stat.kind) {
        case TestStatistic::Kind::GroupMean: {
            const double sd = mean_sd(params, stat.group, group_sizes);
            const double z = (t - params.theta[stat.group]) / sd;
            return -0.5 * z * z - kHalfLog2Pi - std::log(sd);
        }
        case TestStatistic::Kind::MaxGroupMean:
        case TestStatistic::Kind::MinGroupMean: {
            // d/dt of prod Phi_j(t) (max) or of 1 - prod (1 - Phi_j(t)) (min).
            const bool is_min = stat.kind == TestStatistic::Kind::MinGroupMean;
            const std::size_t groups = group_sizes.size();
            std::vector<double> log_cdf(groups);
            std::vector<double> terms(groups);
            double total = 0.0;
            for (std::size_t j = 0; j < groups; ++j) {
                const double z = (t - params.theta[j]) / mean_sd(params, j, group_sizes);
                log_cdf[j] = log_ndtr(is_min ? -z : z);
                total += log_cdf[j];
            }
            for (std::size_t j = 0; j < groups; ++j) {
                const double sd = mean_sd(params, j, group_sizes);
                const double z = (t - params.theta[j]) / sd;
                terms[j] = -0.5 * z * z - kHalfLog2Pi - std::log(sd) + (total - log_cdf[j]);
            }
            return log_sum_exp(terms);
        }
        case TestStatistic::Kind::WithinGroupVariance: {
            if (!(t > 0.0)) return kLogZero;
            const double k = static_cast<double>(group_sizes[stat.group] - 1);
            const double scale = k / params.sigma2_of(stat.group);
            const double x = scale * t;
            return std::log(scale) + (0.5 * k - 1.0) * std::log(x) - 0.5 * x - 0.5 * k * std::numbers::ln2 -
                   std::lgamma(0.5 * k);
        }
    }
    throw ValidationError("statistic: unknown kind");
}

double statistic_tail(double t, const NormalHierParams& params, const TestStatistic& stat,
                      std::span<const std::size_t> group_sizes) {
    check_inputs(params, stat, group_sizes);
    if (std::isnan(t)) throw ValidationError("statistic_tail: t is NaN");
    if (std::isinf(t)) return limit_tail(t, stat);
    switch (stat.kind) {
        case TestStatistic::Kind::GroupMean: {
            const double z = (t - params.theta[stat.group]) / mean_sd(params, stat.group, group_sizes);
            return std_normal_upper_tail(z);
        }
        case TestStatistic::Kind::MaxGroupMean:
            return std::clamp(-std::expm1(sum_log_cdf(t, params, group_sizes, false)), 0.0, 1.0);
        case TestStatistic::Kind::MinGroupMean:
            return std::clamp(-std::expm1(sum_log_cdf(t, params, group_sizes, true)), 0.0, 1.0);
        case TestStatistic::Kind::WithinGroupVariance: {
            if (!(t > 0.0)) return 1.0;
            const double k = static_cast<double>(group_sizes[stat.group] - 1);
            return regularized_gamma_q(0.5 * k, 0.5 * k * t / params.sigma2_of(stat.group));
        }
    }
    throw ValidationError("statistic: unknown kind");
}

Probability average_tail(double t, std::span<const NormalHierParams> draws, const TestStatistic& stat,
                         std::span<const std::size_t> group_sizes) {
    if (draws.empty()) throw ValidationError("tail average: no draws");
    std::vector<double> tails(draws.size());
    parallel_for(draws.size(), [&](std::size_t m) { tails[m] = statistic_tail(t, draws[m], stat, group_sizes); });
    // Sequential sum keeps the result independent of the thread count.
    double acc = 0.0;
    for (double v : tails) acc += v;
    return Probability(std::clamp(acc / static_cast<double>(draws.size()), 0.0, 1.0));
}

PartialPosteriorDraws sample_partial_posterior(const GroupedNormalData& data, double t_obs, const TestStatistic& stat,
                                               const PriorSpec& prior, const ChainConfig& config,
                                               const ImproprietyMonitor& monitor) {
    config.validate();
    prior.validate();
    if (!prior.is_normal_kind()) throw UnsupportedPriorError("partial posterior: normal-model prior required");
    if (!std::isfinite(t_obs)) throw ValidationError("partial posterior: t_obs must be finite");
    if (monitor.window == 0 || monitor.consecutive == 0) throw ValidationError("impropriety monitor: bad settings");
    const std::vector<std::size_t> sizes = data.group_sizes();
    stat.validate(sizes);
    const std::size_t groups = data.group_count();

    const bool mu_free = !prior.fixed("mu");
    const bool tau_free = !prior.fixed("tau2");
    const bool sigma_free = prior.known_group_sigma2.empty() && !prior.fixed("sigma2");

    auto log_target = [&](const NormalHierParams& s, double& neg_log_stat) {
        if (!in_support(s, prior)) return kLogZero;
        double ll = 0.0;
        for (std::size_t i = 0; i < groups; ++i) {
            const double s2 = s.sigma2_of(i);
            const double n = static_cast<double>(sizes[i]);
            const double d = data.group_mean(i) - s.theta[i];
            ll += -0.5 * n * std::log(2.0 * std::numbers::pi * s2) - (data.within_ss(i) + n * d * d) / (2.0 * s2);
        }
        const double lp = logprior_normal_hier(s, prior);
        if (lp == kLogZero) return kLogZero;
        neg_log_stat = -statistic_logdensity(t_obs, s, stat, sizes);
        if (!std::isfinite(neg_log_stat)) {
            throw SamplerError(fmt::format("partial posterior: statistic density is zero at t_obs = {}", t_obs));
        }
        return ll + log_group_prior(s) + lp + neg_log_stat;
    };

    NormalHierParams state = NormalHierGibbs(data, prior, config.seed).initial_state();
    double neg_log_stat = 0.0;
    double current = log_target(state, neg_log_stat);
    if (!std::isfinite(current)) throw SamplerError("partial posterior: initial state has zero density");

    std::vector<StepAdapter> theta_steps;
    for (std::size_t i = 0; i < groups; ++i) {
        const double prec = static_cast<double>(sizes[i]) / state.sigma2_of(i) + 1.0 / state.tau2;
        theta_steps.emplace_back(config.step_or("theta", 2.4 * std::sqrt(1.0 / prec)));
    }
    StepAdapter mu_step(config.step_or("mu", 2.4 * std::sqrt(state.tau2 / static_cast<double>(groups))));
    StepAdapter tau_step(config.step_or("log_tau2", 0.5));
    StepAdapter sigma_step(config.step_or("log_sigma2", 0.5));

    Rng root(config.seed, 0x7061727469616cULL);
    Rng theta_rng = root.substream(1);
    Rng mu_rng = root.substream(2);
    Rng tau_rng = root.substream(3);
    Rng sigma_rng = root.substream(4);

    // Metropolis accept/reject for a proposal already written into `proposal`.
    NormalHierParams proposal = state;
    auto try_move = [&](Rng& rng, StepAdapter& adapter, bool adapting, double log_jacobian) {
        double nls = 0.0;
        const double cand = log_target(proposal, nls);
        const bool accept = cand != kLogZero && std::log(rng.uniform()) < cand - current + log_jacobian;
        if (accept) {
            state = proposal;
            current = cand;
            neg_log_stat = nls;
        } else {
            proposal = state;
        }
        adapter.record(accept, adapting);
    };

    PartialPosteriorDraws out;
    out.statistic = stat;
    out.t_obs = t_obs;
    out.draws.reserve(config.retained_count());

    double first_window_max = -std::numeric_limits<double>::infinity();
    double window_max = -std::numeric_limits<double>::infinity();
    std::size_t exceed_run = 0;

    for (std::size_t it = 0; it < config.iterations; ++it) {
        const bool adapting = it < config.burn_in;
        for (std::size_t i = 0; i < groups; ++i) {
            proposal.theta[i] = state.theta[i] + theta_steps[i].step() * theta_rng.normal();
            try_move(theta_rng, theta_steps[i], adapting, 0.0);
        }
        if (mu_free) {
            proposal.mu = state.mu + mu_step.step() * mu_rng.normal();
            try_move(mu_rng, mu_step, adapting, 0.0);
        }
        if (tau_free) {
            const double delta = tau_step.step() * tau_rng.normal();
            proposal.tau2 = state.tau2 * std::exp(delta);
            try_move(tau_rng, tau_step, adapting, delta);
        }
        if (sigma_free) {
            const double delta = sigma_step.step() * sigma_rng.normal();
            proposal.sigma2 = {state.sigma2.front() * std::exp(delta)};
            try_move(sigma_rng, sigma_step, adapting, delta);
        }

        window_max = std::max(window_max, neg_log_stat);
        if ((it + 1) % monitor.window == 0) {
            if (it + 1 == monitor.window) {
                first_window_max = window_max;
            } else if (window_max - first_window_max > monitor.growth) {
                if (++exceed_run >= monitor.consecutive) {
                    throw ImproprietyError(fmt::format(
                        "possible impropriety: -log f(t_obs | theta) grew by {:.1f} over the first window for {} "
                        "consecutive windows of {} sweeps (statistic {} may be nearly sufficient)",
                        window_max - first_window_max, exceed_run, monitor.window, stat.name()));
                }
            } else {
                exceed_run = 0;
            }
            window_max = -std::numeric_limits<double>::infinity();
        }
        if (config.retains(it)) out.draws.push_back(state);
    }

    double rate_sum = 0.0;
    std::size_t blocks = 0;
    auto report = [&](const std::string& name, const StepAdapter& a) {
        out.acceptance_rates[name] = a.acceptance_rate();
        out.step_sizes[name] = a.step();
        rate_sum += a.acceptance_rate();
        ++blocks;
        if (config.iterations > config.burn_in && a.acceptance_rate() < 0.02) {
            out.warnings.push_back(fmt::format("poor mixing: acceptance rate for {} is {:.3f}", name,
                                               a.acceptance_rate()));
        }
    };
    for (std::size_t i = 0; i < groups; ++i) report(fmt::format("theta_{}", i + 1), theta_steps[i]);
    if (mu_free) report("mu", mu_step);
    if (tau_free) report("log_tau2", tau_step);
    if (sigma_free) report("log_sigma2", sigma_step);
    out.acceptance_rates["overall"] = blocks ? rate_sum / static_cast<double>(blocks) : 0.0;
    return out;
}

Probability partial_posterior_pvalue(const GroupedNormalData& data, const TestStatistic& stat, const PriorSpec& prior,
                                     const ChainConfig& config) {
    return partial_posterior_pvalue(data, statistic_value(data, stat), stat, prior, config);
}

Probability partial_posterior_pvalue(const GroupedNormalData& data, double t_obs, const TestStatistic& stat,
                                     const PriorSpec& prior, const ChainConfig& config) {
    const std::vector<std::size_t> sizes = data.group_sizes();
    stat.validate(sizes);
    if (std::isnan(t_obs)) throw ValidationError("partial posterior p-value: t_obs is NaN");
    if (std::isinf(t_obs)) return Probability(limit_tail(t_obs, stat));
    const auto pp = sample_partial_posterior(data, t_obs, stat, prior, config);
    return average_tail(t_obs, pp.draws, stat, sizes);
}

Probability posterior_predictive_pvalue(const GroupedNormalData& data, const TestStatistic& stat,
                                        const PosteriorDraws& draws) {
    return posterior_predictive_pvalue(data, statistic_value(data, stat), stat, draws);
}

Probability posterior_predictive_pvalue(const GroupedNormalData& data, double t_obs, const TestStatistic& stat,
                                        const PosteriorDraws& draws) {
    if (draws.model != ModelKind::NormalHier) throw ValidationError("posterior predictive: normal-model draws required");
    if (draws.normal.empty()) throw ValidationError("posterior predictive: empty chain");
    if (std::isnan(t_obs)) throw ValidationError("posterior predictive p-value: t_obs is NaN");
    return average_tail(t_obs, draws.normal, stat, data.group_sizes());
}

Probability prior_predictive_pvalue(const GroupedNormalData& data, const TestStatistic& stat, const PriorSpec& prior,
                                    const ChainConfig& config) {
    return prior_predictive_pvalue(data, statistic_value(data, stat), stat, prior, config);
}

Probability prior_predictive_pvalue(const GroupedNormalData& data, double t_obs, const TestStatistic& stat,
                                    const PriorSpec& prior, const ChainConfig& config) {
    prior.validate();
    if (prior.kind != PriorKind::ProperNormal) {
        throw UnsupportedPriorError("prior predictive p-values need a proper prior; " + to_string(prior.kind) +
                                    " is improper");
    }
    config.validate();
    const std::vector<std::size_t> sizes = data.group_sizes();
    stat.validate(sizes);
    if (std::isnan(t_obs)) throw ValidationError("prior predictive p-value: t_obs is NaN");
    const std::size_t m = std::max<std::size_t>(config.retained_count(), 1);
    std::vector<NormalHierParams> draws(m);
    Rng root(config.seed, 0x7072696f72ULL);
    for (std::size_t k = 0; k < m; ++k) {
        Rng rng = root.substream(k);
        draws[k] = draw_normal_hier_prior(prior, data.group_count(), rng);
    }
    return average_tail(t_obs, draws, stat, sizes);
}

}  // namespace hiercheck
