#include "hiercheck/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "hiercheck/errors.hpp"
#include "hiercheck/special_functions.hpp"

namespace hiercheck {

namespace {

enum Stream : std::uint64_t { kThetaStream = 1, kMuStream, kTauStream, kSigmaStream, kPStream, kAlphaStream, kBetaStream };

double clamp_into(double x, const Box& box) {
    const double lo = box.lo * (1.0 + 1e-9);
    const double hi = box.hi * (1.0 - 1e-9);
    return std::clamp(x, lo, hi);
}

double sample_variance(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return ss / static_cast<double>(xs.size() - 1);
}

void require_normal_prior(const PriorSpec& prior) {
    prior.validate();
    if (!prior.is_normal_kind()) {
        throw ValidationError("normal-hier sampler requires a normal prior kind, got " + to_string(prior.kind));
    }
}

void require_betabinom_prior(const PriorSpec& prior) {
    prior.validate();
    if (prior.is_normal_kind()) {
        throw ValidationError("beta-binomial sampler requires a beta-binomial prior kind, got " +
                              to_string(prior.kind));
    }
}

}  // namespace

void ChainConfig::validate() const {
    if (iterations == 0) throw ValidationError("chain config: iterations must be positive");
    if (burn_in >= iterations) throw ValidationError("chain config: burn-in must be smaller than iterations");
    if (thin == 0) throw ValidationError("chain config: thin must be at least 1");
    for (const auto& [name, step] : step_sizes) {
        if (!(step >= 0.0) || !std::isfinite(step)) {
            throw ValidationError("chain config: step size '" + name + "' must be non-negative");
        }
    }
}

std::size_t ChainConfig::retained_count() const noexcept {
    if (burn_in >= iterations || thin == 0) return 0;
    return (iterations - burn_in + thin - 1) / thin;
}

bool ChainConfig::retains(std::size_t sweep) const noexcept {
    return sweep >= burn_in && (sweep - burn_in) % thin == 0;
}

double ChainConfig::step_or(const std::string& block, double fallback) const {
    auto it = step_sizes.find(block);
    return it == step_sizes.end() ? fallback : it->second;
}

std::vector<std::string> column_names(const PosteriorDraws& draws) {
    std::vector<std::string> names;
    if (draws.model == ModelKind::NormalHier) {
        if (draws.normal.empty()) return names;
        const auto& first = draws.normal.front();
        for (std::size_t i = 0; i < first.theta.size(); ++i) names.push_back(fmt::format("theta_{}", i + 1));
        names.emplace_back("mu");
        names.emplace_back("tau2");
        if (first.sigma2.size() == 1) {
            names.emplace_back("sigma2");
        } else {
            for (std::size_t i = 0; i < first.sigma2.size(); ++i) names.push_back(fmt::format("sigma2_{}", i + 1));
        }
    } else {
        if (draws.betabinom.empty()) return names;
        for (std::size_t i = 0; i < draws.betabinom.front().p.size(); ++i) names.push_back(fmt::format("p_{}", i + 1));
        names.emplace_back("alpha");
        names.emplace_back("beta");
    }
    return names;
}

std::vector<double> flatten(const NormalHierParams& params) {
    std::vector<double> row(params.theta);
    row.push_back(params.mu);
    row.push_back(params.tau2);
    row.insert(row.end(), params.sigma2.begin(), params.sigma2.end());
    return row;
}

std::vector<double> flatten(const BetaBinomialParams& params) {
    std::vector<double> row(params.p);
    row.push_back(params.alpha);
    row.push_back(params.beta);
    return row;
}

std::vector<double> column(const PosteriorDraws& draws, std::size_t index) {
    std::vector<double> out;
    out.reserve(draws.size());
    auto take = [&](const auto& seq) {
        for (const auto& d : seq) out.push_back(flatten(d).at(index));
    };
    if (draws.model == ModelKind::NormalHier) {
        take(draws.normal);
    } else {
        take(draws.betabinom);
    }
    return out;
}

void StepAdapter::record(bool accepted, bool adapting) {
    if (!adapting) {
        ++proposed_;
        if (accepted) ++accepted_;
        return;
    }
    ++batch_proposed_;
    if (accepted) ++batch_accepted_;
    if (batch_proposed_ == batch_) {
        const double rate = static_cast<double>(batch_accepted_) / static_cast<double>(batch_);
        const double gain = 1.0 / std::sqrt(1.0 + static_cast<double>(batches_) / 10.0);
        step_ *= std::exp(2.0 * gain * (rate - target_));
        ++batches_;
        batch_accepted_ = batch_proposed_ = 0;
    }
}

double StepAdapter::acceptance_rate() const noexcept {
    return proposed_ == 0 ? 0.0 : static_cast<double>(accepted_) / static_cast<double>(proposed_);
}

double slice_sample(const std::function<double(double)>& log_density, double x0, double lo, double hi,
                    double width, Rng& rng) {
    const double f0 = log_density(x0);
    if (!std::isfinite(f0)) throw SamplerError("slice sampler: starting point has zero density");
    const double level = f0 + std::log(rng.uniform());
    double left = x0 - width * rng.uniform();
    double right = left + width;
    for (int i = 0; i < 64 && left > lo && log_density(left) > level; ++i) left -= width;
    for (int i = 0; i < 64 && right < hi && log_density(right) > level; ++i) right += width;
    left = std::max(left, lo);
    right = std::min(right, hi);
    for (int i = 0; i < 2000; ++i) {
        const double x = left + rng.uniform() * (right - left);
        if (x > lo && x < hi && log_density(x) > level) return x;
        if (x < x0) {
            left = x;
        } else {
            right = x;
        }
    }
    throw SamplerError("slice sampler: shrinkage did not find a point inside the slice");
}

NormalHierGibbs::NormalHierGibbs(const GroupedNormalData& data, PriorSpec prior, std::uint64_t seed)
    : prior_(std::move(prior)),
      theta_rng_(seed, kThetaStream),
      mu_rng_(seed, kMuStream),
      tau_rng_(seed, kTauStream),
      sigma_rng_(seed, kSigmaStream) {
    require_normal_prior(prior_);
    const auto& known = prior_.known_group_sigma2;
    if (!known.empty() && known.size() != 1 && known.size() != data.group_count()) {
        throw ValidationError("known sigma2 must have one entry or one per group");
    }
    set_data(data);
}

void NormalHierGibbs::set_data(const GroupedNormalData& data) {
    sizes_.clear();
    for (auto n : data.group_sizes()) sizes_.push_back(static_cast<double>(n));
    means_ = data.group_means();
    within_ss_.clear();
    for (std::size_t i = 0; i < data.group_count(); ++i) within_ss_.push_back(data.within_ss(i));
}

NormalHierParams NormalHierGibbs::initial_state() const {
    NormalHierParams s;
    const std::size_t groups = means_.size();
    s.theta = means_;
    s.mu = std::accumulate(means_.begin(), means_.end(), 0.0) / static_cast<double>(groups);
    s.tau2 = sample_variance(means_);
    if (!(s.tau2 > 0.0)) s.tau2 = 1.0;
    double ss = std::accumulate(within_ss_.begin(), within_ss_.end(), 0.0);
    const double total = std::accumulate(sizes_.begin(), sizes_.end(), 0.0);
    double s2 = total > static_cast<double>(groups) ? ss / (total - static_cast<double>(groups)) : 1.0;
    if (!(s2 > 0.0)) s2 = 1.0;
    s.sigma2 = {s2};
    if (prior_.kind == PriorKind::TruncatedImproperNormal) {
        const Box box = prior_.box();
        s.mu = std::clamp(s.mu, -box.hi * (1.0 - 1e-9), box.hi * (1.0 - 1e-9));
        s.tau2 = clamp_into(s.tau2, box);
        s.sigma2 = {clamp_into(s2, box)};
    }
    if (auto v = prior_.fixed("mu")) s.mu = *v;
    if (auto v = prior_.fixed("tau2")) s.tau2 = *v;
    if (auto v = prior_.fixed("sigma2")) s.sigma2 = {*v};
    if (!prior_.known_group_sigma2.empty()) s.sigma2 = prior_.known_group_sigma2;
    return s;
}

void NormalHierGibbs::update_theta(NormalHierParams& s) {
    for (std::size_t i = 0; i < s.theta.size(); ++i) {
        const double s2 = s.sigma2_of(i);
        const double prec = sizes_[i] / s2 + 1.0 / s.tau2;
        const double mean = (sizes_[i] * means_[i] / s2 + s.mu / s.tau2) / prec;
        s.theta[i] = theta_rng_.normal(mean, std::sqrt(1.0 / prec));
    }
}

void NormalHierGibbs::update_mu(NormalHierParams& s) {
    if (prior_.fixed("mu")) return;
    const double groups = static_cast<double>(s.theta.size());
    const double sum = std::accumulate(s.theta.begin(), s.theta.end(), 0.0);
    if (prior_.kind == PriorKind::ProperNormal) {
        const double v0 = prior_.hyper_or("mu_var", 100.0);
        const double prec = groups / s.tau2 + 1.0 / v0;
        const double mean = (sum / s.tau2 + prior_.hyper_or("mu_mean", 0.0) / v0) / prec;
        s.mu = mu_rng_.normal(mean, std::sqrt(1.0 / prec));
        return;
    }
    const double bound = prior_.box().hi;
    s.mu = truncated_normal(mu_rng_, sum / groups, std::sqrt(s.tau2 / groups), -bound, bound);
}

void NormalHierGibbs::update_tau2(NormalHierParams& s) {
    if (prior_.fixed("tau2")) return;
    const double groups = static_cast<double>(s.theta.size());
    double ss = 0.0;
    for (double t : s.theta) ss += (t - s.mu) * (t - s.mu);
    if (prior_.kind == PriorKind::ProperNormal) {
        const double shape = prior_.hyper_or("tau2_shape", 3.0) + 0.5 * groups;
        const double scale = prior_.hyper_or("tau2_scale", 2.0) + 0.5 * ss;
        s.tau2 = scale / tau_rng_.gamma(shape);
        return;
    }
    // pi(tau2) ~ (tau2)^(-1/2) on the box: inverse-gamma kernel with shape (I - 1) / 2.
    const Box box = prior_.box();
    const double shape = 0.5 * (groups - 1.0);
    const double scale = 0.5 * ss;
    if (shape > 0.0 && scale > 0.0) {
        s.tau2 = truncated_inverse_gamma(tau_rng_, shape, scale, box.lo, box.hi);
        return;
    }
    // No closed inverse (single group): slice sample u = log tau2.
    auto log_density = [shape, scale](double u) { return -shape * u - scale * std::exp(-u); };
    const double u = slice_sample(log_density, std::log(s.tau2), std::log(box.lo), std::log(box.hi), 2.0, tau_rng_);
    s.tau2 = std::exp(u);
}

void NormalHierGibbs::update_sigma2(NormalHierParams& s) {
    if (!prior_.known_group_sigma2.empty() || prior_.fixed("sigma2")) return;
    double sse = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < s.theta.size(); ++i) {
        const double d = means_[i] - s.theta[i];
        sse += within_ss_[i] + sizes_[i] * d * d;
        total += sizes_[i];
    }
    if (prior_.kind == PriorKind::ProperNormal) {
        const double shape = prior_.hyper_or("sigma2_shape", 3.0) + 0.5 * total;
        const double scale = prior_.hyper_or("sigma2_scale", 2.0) + 0.5 * sse;
        s.sigma2 = {scale / sigma_rng_.gamma(shape)};
        return;
    }
    const Box box = prior_.box();
    s.sigma2 = {truncated_inverse_gamma(sigma_rng_, 0.5 * total, 0.5 * sse, box.lo, box.hi)};
}

void NormalHierGibbs::sweep(NormalHierParams& s) {
    update_theta(s);
    update_mu(s);
    update_tau2(s);
    update_sigma2(s);
}

BetaBinomialSampler::BetaBinomialSampler(const BetaBinomialData& data, PriorSpec prior, std::uint64_t seed,
                                         double step_log_alpha, double step_log_beta)
    : data_(data),
      prior_(std::move(prior)),
      p_rng_(seed, kPStream),
      alpha_rng_(seed, kAlphaStream),
      beta_rng_(seed, kBetaStream),
      alpha_step_(step_log_alpha),
      beta_step_(step_log_beta) {
    require_betabinom_prior(prior_);
}

void BetaBinomialSampler::set_data(const BetaBinomialData& data) { data_ = data; }

void BetaBinomialSampler::reset_acceptance() noexcept {
    alpha_step_.reset_counts();
    beta_step_.reset_counts();
}

BetaBinomialParams BetaBinomialSampler::initial_state() const {
    BetaBinomialParams s;
    for (const auto& u : data_.units()) {
        s.p.push_back((static_cast<double>(u.successes) + 0.5) / (static_cast<double>(u.trials) + 1.0));
    }
    s.alpha = 1.0;
    s.beta = 1.0;
    if (auto v = prior_.fixed("alpha")) s.alpha = *v;
    if (auto v = prior_.fixed("beta")) s.beta = *v;
    return s;
}

double BetaBinomialSampler::log_conditional(double alpha, double beta, double sum_log_p, double sum_log_1mp,
                                            std::size_t units) const {
    const double lp = logprior_betabinom(BetaBinomialParams{{}, alpha, beta}, prior_);
    if (lp == kLogZero) return kLogZero;
    return (alpha - 1.0) * sum_log_p + (beta - 1.0) * sum_log_1mp -
           static_cast<double>(units) * log_beta_function(alpha, beta) + lp;
}

void BetaBinomialSampler::sweep(BetaBinomialParams& s, bool adapting) {
    constexpr double kUpper = 1.0 - 0x1.0p-53;
    double sum_log_p = 0.0;
    double sum_log_1mp = 0.0;
    for (std::size_t i = 0; i < data_.unit_count(); ++i) {
        const auto& u = data_.unit(i);
        const double a = s.alpha + static_cast<double>(u.successes);
        const double b = s.beta + static_cast<double>(u.trials - u.successes);
        s.p[i] = std::clamp(p_rng_.beta(a, b), std::numeric_limits<double>::min(), kUpper);
        sum_log_p += std::log(s.p[i]);
        sum_log_1mp += std::log1p(-s.p[i]);
    }
    const std::size_t units = data_.unit_count();
    auto metropolis = [&](double& value, double other, bool is_alpha, Rng& rng, StepAdapter& adapter) {
        const double proposal = value * std::exp(adapter.step() * rng.normal());
        const double a_new = is_alpha ? proposal : other;
        const double b_new = is_alpha ? other : proposal;
        const double a_old = is_alpha ? value : other;
        const double b_old = is_alpha ? other : value;
        const double log_new = log_conditional(a_new, b_new, sum_log_p, sum_log_1mp, units);
        bool accepted = false;
        if (log_new != kLogZero) {
            const double log_old = log_conditional(a_old, b_old, sum_log_p, sum_log_1mp, units);
            // Jacobian of the log-scale walk.
            const double log_ratio = log_new - log_old + std::log(proposal) - std::log(value);
            accepted = std::log(rng.uniform()) < log_ratio;
        }
        if (accepted) value = proposal;
        adapter.record(accepted, adapting);
    };
    if (!prior_.fixed("alpha")) metropolis(s.alpha, s.beta, true, alpha_rng_, alpha_step_);
    if (!prior_.fixed("beta")) metropolis(s.beta, s.alpha, false, beta_rng_, beta_step_);
}

PosteriorDraws gibbs_normal_hier(const GroupedNormalData& data, const PriorSpec& prior, const ChainConfig& config) {
    config.validate();
    NormalHierGibbs sampler(data, prior, config.seed);
    PosteriorDraws out;
    out.model = ModelKind::NormalHier;
    out.prior = prior;
    out.config = config;
    out.data_fingerprint = fingerprint(data);
    out.normal.reserve(config.retained_count());
    NormalHierParams state = sampler.initial_state();
    for (std::size_t it = 0; it < config.iterations; ++it) {
        sampler.sweep(state);
        if (config.retains(it)) {
            if (!in_support(state, prior)) throw SamplerError("normal-hier sampler left the prior support");
            out.normal.push_back(state);
        }
    }
    return out;
}

PosteriorDraws mcmc_betabinom(const BetaBinomialData& data, const PriorSpec& prior, const ChainConfig& config) {
    config.validate();
    const double step_alpha = config.step_or("log_alpha", 0.5);
    const double step_beta = config.step_or("log_beta", 0.5);
    BetaBinomialSampler sampler(data, prior, config.seed, step_alpha, step_beta);
    PosteriorDraws out;
    out.model = ModelKind::BetaBinom;
    out.prior = prior;
    out.config = config;
    out.data_fingerprint = fingerprint(data);
    out.betabinom.reserve(config.retained_count());
    BetaBinomialParams state = sampler.initial_state();
    for (std::size_t it = 0; it < config.iterations; ++it) {
        if (it == config.burn_in) sampler.reset_acceptance();
        sampler.sweep(state, it < config.burn_in);
        if (config.retains(it)) {
            if (!in_support(state, prior)) throw SamplerError("beta-binomial sampler left the prior support");
            out.betabinom.push_back(state);
        }
    }
    auto report = [&](const std::string& block, const StepAdapter& adapter, bool fixed) {
        if (fixed) return;
        out.acceptance_rates[block] = adapter.acceptance_rate();
        out.step_sizes[block] = adapter.step();
        if (adapter.step() == 0.0) {
            out.warnings.push_back(fmt::format("stagnation: step size for {} is 0, the chain never moves", block));
        } else if (adapter.acceptance_rate() < 0.02) {
            out.warnings.push_back(fmt::format("poor mixing: acceptance rate for {} is {:.3f}", block,
                                               adapter.acceptance_rate()));
        }
    };
    report("log_alpha", sampler.alpha_adapter(), prior.fixed("alpha").has_value());
    report("log_beta", sampler.beta_adapter(), prior.fixed("beta").has_value());
    return out;
}

double effective_sample_size(std::span<const double> chain) {
    const std::size_t n = chain.size();
    if (n == 0) throw ValidationError("effective_sample_size: empty chain");
    if (n < 4) return static_cast<double>(n);
    const double mean = std::accumulate(chain.begin(), chain.end(), 0.0) / static_cast<double>(n);
    auto autocov = [&](std::size_t lag) {
        double acc = 0.0;
        for (std::size_t t = 0; t + lag < n; ++t) acc += (chain[t] - mean) * (chain[t + lag] - mean);
        return acc / static_cast<double>(n);
    };
    const double c0 = autocov(0);
    if (!(c0 > 0.0)) return static_cast<double>(n);
    double tau = -1.0;
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
        double gamma = (autocov(2 * k) + autocov(2 * k + 1)) / c0;
        if (gamma <= 0.0) break;
        gamma = std::min(gamma, previous);
        previous = gamma;
        tau += 2.0 * gamma;
    }
    tau = std::max(tau, 1.0 / std::log10(static_cast<double>(std::max<std::size_t>(n, 10))));
    return static_cast<double>(n) / tau;
}

ChainSummary chain_summary(const PosteriorDraws& draws) {
    if (draws.empty()) throw ValidationError("chain_summary: empty chain");
    ChainSummary summary;
    summary.draws = draws.size();
    summary.acceptance_rates = draws.acceptance_rates;
    summary.warnings = draws.warnings;
    const auto names = column_names(draws);
    for (std::size_t c = 0; c < names.size(); ++c) {
        const auto values = column(draws, c);
        ParameterSummary ps;
        ps.name = names[c];
        const double n = static_cast<double>(values.size());
        ps.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
        double ss = 0.0;
        for (double v : values) ss += (v - ps.mean) * (v - ps.mean);
        ps.sd = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
        ps.degenerate = !(ss > 0.0);
        ps.ess = ps.degenerate ? n : effective_sample_size(values);
        summary.parameters.push_back(std::move(ps));
    }
    return summary;
}

}  // namespace hiercheck
