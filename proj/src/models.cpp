#include "hiercheck/models.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numbers>

#include <fmt/format.h>

#include "hiercheck/errors.hpp"
#include "hiercheck/special_functions.hpp"

namespace hiercheck {

namespace {

constexpr double kLog2Pi = 1.83787706640934548356;

double normal_logpdf(double x, double mean, double var) {
    const double d = x - mean;
    return -0.5 * (kLog2Pi + std::log(var) + d * d / var);
}

double inverse_gamma_logpdf(double x, double shape, double scale) {
    return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - scale / x;
}

double gamma_logpdf(double x, double shape, double rate) {
    return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

void require_kind(const PriorSpec& prior, bool normal_model) {
    if (prior.is_normal_kind() != normal_model) {
        throw ValidationError(fmt::format("prior kind '{}' does not apply to the {} model",
                                          to_string(prior.kind),
                                          normal_model ? "normal-hier" : "beta-binom"));
    }
}

class Fnv1a {
public:
    void bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            hash_ ^= p[i];
            hash_ *= 0x100000001B3ULL;
        }
    }
    template <typename T>
    void value(const T& v) {
        bytes(&v, sizeof(T));
    }
    [[nodiscard]] std::string hex() const { return fmt::format("{:016x}", hash_); }

private:
    std::uint64_t hash_ = 0xCBF29CE484222325ULL;
};

}  // namespace

std::string to_string(ModelKind kind) {
    return kind == ModelKind::NormalHier ? "normal-hier" : "beta-binom";
}

ModelKind parse_model_kind(const std::string& name) {
    if (name == "normal-hier") return ModelKind::NormalHier;
    if (name == "beta-binom") return ModelKind::BetaBinom;
    throw ValidationError("unknown model kind '" + name + "' (expected normal-hier or beta-binom)");
}

GroupedNormalData::GroupedNormalData(std::vector<std::vector<double>> groups,
                                     std::vector<std::string> labels)
    : groups_(std::move(groups)), labels_(std::move(labels)) {
    if (groups_.empty()) throw ValidationError("grouped data: at least one group is required");
    if (labels_.empty()) {
        for (std::size_t i = 0; i < groups_.size(); ++i) labels_.push_back(std::to_string(i + 1));
    }
    if (labels_.size() != groups_.size()) {
        throw ValidationError("grouped data: label count does not match group count");
    }
    for (std::size_t i = 0; i < groups_.size(); ++i) {
        const auto& g = groups_[i];
        if (g.empty()) throw ValidationError("grouped data: group '" + labels_[i] + "' is empty");
        double sum = 0.0;
        for (double y : g) {
            if (!std::isfinite(y)) {
                throw ValidationError("grouped data: non-finite value in group '" + labels_[i] + "'");
            }
            sum += y;
        }
        const double mean = sum / static_cast<double>(g.size());
        double ss = 0.0;
        for (double y : g) ss += (y - mean) * (y - mean);
        means_.push_back(mean);
        within_ss_.push_back(ss);
        total_ += g.size();
    }
}

std::vector<std::size_t> GroupedNormalData::group_sizes() const {
    std::vector<std::size_t> sizes;
    sizes.reserve(groups_.size());
    for (const auto& g : groups_) sizes.push_back(g.size());
    return sizes;
}

BetaBinomialData::BetaBinomialData(std::vector<BinomialUnit> units) : units_(std::move(units)) {
    if (units_.empty()) throw ValidationError("beta-binomial data: at least one unit is required");
    for (std::size_t i = 0; i < units_.size(); ++i) {
        auto& u = units_[i];
        if (u.label.empty()) u.label = std::to_string(i + 1);
        if (u.trials == 0) {
            throw ValidationError("beta-binomial data: unit '" + u.label + "' has zero trials");
        }
        if (u.successes > u.trials) {
            throw ValidationError("beta-binomial data: unit '" + u.label +
                                  "' has more successes than trials");
        }
    }
}

void validate(const NormalHierParams& params, std::size_t group_count) {
    if (params.theta.size() != group_count) {
        throw ValidationError(fmt::format("normal-hier params: {} group means for {} groups",
                                          params.theta.size(), group_count));
    }
    if (params.sigma2.size() != 1 && params.sigma2.size() != group_count) {
        throw ValidationError("normal-hier params: sigma2 must have one entry or one per group");
    }
    if (!(params.tau2 > 0.0) || !std::isfinite(params.tau2)) {
        throw ValidationError("normal-hier params: tau2 must be positive");
    }
    for (double s : params.sigma2) {
        if (!(s > 0.0) || !std::isfinite(s)) {
            throw ValidationError("normal-hier params: sigma2 must be positive");
        }
    }
    if (!std::isfinite(params.mu) ||
        !std::all_of(params.theta.begin(), params.theta.end(), [](double t) { return std::isfinite(t); })) {
        throw ValidationError("normal-hier params: non-finite location parameter");
    }
}

void validate(const BetaBinomialParams& params, std::size_t unit_count) {
    if (params.p.size() != unit_count) {
        throw ValidationError(fmt::format("beta-binomial params: {} rates for {} units",
                                          params.p.size(), unit_count));
    }
    for (double p : params.p) {
        if (!(p > 0.0 && p < 1.0)) {
            throw ValidationError("beta-binomial params: rates must lie strictly inside (0, 1)");
        }
    }
    if (!(params.alpha > 0.0) || !(params.beta > 0.0) || !std::isfinite(params.alpha) ||
        !std::isfinite(params.beta)) {
        throw ValidationError("beta-binomial params: alpha and beta must be positive");
    }
}

std::string to_string(PriorKind kind) {
    switch (kind) {
        case PriorKind::ProperNormal: return "proper-normal";
        case PriorKind::TruncatedImproperNormal: return "truncated-improper-normal";
        case PriorKind::TruncatedJeffreysBetaBinom: return "truncated-jeffreys-betabinom";
        case PriorKind::ProperBetaBinom: return "proper-betabinom";
    }
    return "unknown";
}

PriorKind parse_prior_kind(const std::string& name) {
    for (auto kind : {PriorKind::ProperNormal, PriorKind::TruncatedImproperNormal,
                      PriorKind::TruncatedJeffreysBetaBinom, PriorKind::ProperBetaBinom}) {
        if (to_string(kind) == name) return kind;
    }
    throw ValidationError("unknown prior kind '" + name + "'");
}

PriorSpec PriorSpec::proper_normal(std::map<std::string, double> hyper) {
    PriorSpec p;
    p.kind = PriorKind::ProperNormal;
    p.hyper = std::move(hyper);
    return p;
}

PriorSpec PriorSpec::truncated_improper_normal(double a) {
    PriorSpec p;
    p.kind = PriorKind::TruncatedImproperNormal;
    p.a = a;
    return p;
}

PriorSpec PriorSpec::truncated_jeffreys(double a) {
    PriorSpec p;
    p.kind = PriorKind::TruncatedJeffreysBetaBinom;
    p.a = a;
    return p;
}

PriorSpec PriorSpec::proper_betabinom(std::map<std::string, double> hyper) {
    PriorSpec p;
    p.kind = PriorKind::ProperBetaBinom;
    p.hyper = std::move(hyper);
    return p;
}

Box PriorSpec::box() const {
    if (!(a > 0.0) || a == 1.0 || !std::isfinite(a)) {
        throw ValidationError("prior: truncation bound a must be positive, finite and different from 1");
    }
    return Box{std::min(a, 1.0 / a), std::max(a, 1.0 / a)};
}

bool PriorSpec::is_normal_kind() const noexcept {
    return kind == PriorKind::ProperNormal || kind == PriorKind::TruncatedImproperNormal;
}

bool PriorSpec::is_proper() const noexcept {
    return kind == PriorKind::ProperNormal || kind == PriorKind::ProperBetaBinom;
}

double PriorSpec::hyper_or(const std::string& name, double fallback) const {
    auto it = hyper.find(name);
    return it == hyper.end() ? fallback : it->second;
}

std::optional<double> PriorSpec::fixed(const std::string& component) const {
    auto it = hyper.find(component + "_fixed");
    if (it == hyper.end()) return std::nullopt;
    return it->second;
}

void PriorSpec::validate() const {
    if (is_truncated()) (void)box();
    for (const auto& [key, value] : hyper) {
        if (!std::isfinite(value)) throw ValidationError("prior: hyperparameter '" + key + "' is not finite");
    }
    auto positive = [this](const char* key, double fallback) {
        if (!(hyper_or(key, fallback) > 0.0)) {
            throw ValidationError(std::string("prior: hyperparameter '") + key + "' must be positive");
        }
    };
    if (kind == PriorKind::ProperNormal) {
        positive("mu_var", 100.0);
        positive("tau2_shape", 3.0);
        positive("tau2_scale", 2.0);
        positive("sigma2_shape", 3.0);
        positive("sigma2_scale", 2.0);
    }
    if (kind == PriorKind::ProperBetaBinom) {
        positive("alpha_shape", 2.0);
        positive("alpha_rate", 0.5);
        positive("beta_shape", 2.0);
        positive("beta_rate", 0.5);
    }
    for (const char* c : {"tau2", "sigma2", "alpha", "beta"}) {
        if (auto v = fixed(c); v && !(*v > 0.0)) {
            throw ValidationError(std::string("prior: fixed ") + c + " must be positive");
        }
    }
    for (double s : known_group_sigma2) {
        if (!(s > 0.0) || !std::isfinite(s)) throw ValidationError("prior: known sigma2 must be positive");
    }
}

double standin_jeffreys_log_density(double alpha, double beta) { return -2.5 * std::log(alpha + beta); }

double loglik_normal_hier(const GroupedNormalData& data, const NormalHierParams& params) {
    validate(params, data.group_count());
    double total = 0.0;
    for (std::size_t i = 0; i < data.group_count(); ++i) {
        const double s2 = params.sigma2_of(i);
        const double log_sd = 0.5 * std::log(s2);
        const double sd = std::sqrt(s2);
        for (double y : data.group(i)) {
            total += std_normal_logpdf((y - params.theta[i]) / sd) - log_sd;
        }
    }
    return total;
}

double log_group_prior(const NormalHierParams& params) {
    double total = 0.0;
    for (double t : params.theta) total += normal_logpdf(t, params.mu, params.tau2);
    return total;
}

bool in_support(const NormalHierParams& params, const PriorSpec& prior) {
    if (!(params.tau2 > 0.0)) return false;
    for (double s : params.sigma2) {
        if (!(s > 0.0)) return false;
    }
    if (prior.kind != PriorKind::TruncatedImproperNormal) return true;
    const Box box = prior.box();
    if (!(params.mu > -box.hi && params.mu < box.hi)) return false;
    if (!box.contains(params.tau2)) return false;
    if (prior.known_group_sigma2.empty()) {
        for (double s : params.sigma2) {
            if (!box.contains(s)) return false;
        }
    }
    return true;
}

double logprior_normal_hier(const NormalHierParams& params, const PriorSpec& prior) {
    require_kind(prior, true);
    if (!in_support(params, prior)) return kLogZero;
    const bool sigma_random = prior.known_group_sigma2.empty() && !prior.fixed("sigma2");
    double lp = 0.0;
    if (prior.kind == PriorKind::TruncatedImproperNormal) {
        // pi(mu) flat, pi(sigma2) ~ 1/sigma2, pi(tau2) ~ 1/tau.
        if (sigma_random) {
            for (double s : params.sigma2) lp -= std::log(s);
        }
        if (!prior.fixed("tau2")) lp -= 0.5 * std::log(params.tau2);
        return lp;
    }
    if (!prior.fixed("mu")) {
        lp += normal_logpdf(params.mu, prior.hyper_or("mu_mean", 0.0), prior.hyper_or("mu_var", 100.0));
    }
    if (!prior.fixed("tau2")) {
        lp += inverse_gamma_logpdf(params.tau2, prior.hyper_or("tau2_shape", 3.0),
                                   prior.hyper_or("tau2_scale", 2.0));
    }
    if (sigma_random) {
        for (double s : params.sigma2) {
            lp += inverse_gamma_logpdf(s, prior.hyper_or("sigma2_shape", 3.0),
                                       prior.hyper_or("sigma2_scale", 2.0));
        }
    }
    return lp;
}

double logjoint_normal_hier(const GroupedNormalData& data, const NormalHierParams& params,
                            const PriorSpec& prior) {
    const double lp = logprior_normal_hier(params, prior);
    if (lp == kLogZero) return kLogZero;
    return loglik_normal_hier(data, params) + log_group_prior(params) + lp;
}

double loglik_betabinom(const BetaBinomialData& data, const BetaBinomialParams& params) {
    validate(params, data.unit_count());
    double total = 0.0;
    for (std::size_t i = 0; i < data.unit_count(); ++i) {
        const auto& u = data.unit(i);
        const double p = params.p[i];
        total += static_cast<double>(u.successes) * std::log(p) +
                 static_cast<double>(u.trials - u.successes) * std::log1p(-p);
        total += beta_logpdf(p, params.alpha, params.beta);
    }
    return total;
}

bool in_support(const BetaBinomialParams& params, const PriorSpec& prior) {
    if (!(params.alpha > 0.0) || !(params.beta > 0.0)) return false;
    if (prior.kind != PriorKind::TruncatedJeffreysBetaBinom) return true;
    const Box box = prior.box();
    return box.contains(params.alpha) && box.contains(params.beta);
}

double logprior_betabinom(const BetaBinomialParams& params, const PriorSpec& prior) {
    require_kind(prior, false);
    if (!in_support(params, prior)) return kLogZero;
    if (prior.kind == PriorKind::TruncatedJeffreysBetaBinom) {
        return prior.plugin ? prior.plugin(params.alpha, params.beta)
                            : standin_jeffreys_log_density(params.alpha, params.beta);
    }
    double lp = 0.0;
    if (!prior.fixed("alpha")) {
        lp += gamma_logpdf(params.alpha, prior.hyper_or("alpha_shape", 2.0), prior.hyper_or("alpha_rate", 0.5));
    }
    if (!prior.fixed("beta")) {
        lp += gamma_logpdf(params.beta, prior.hyper_or("beta_shape", 2.0), prior.hyper_or("beta_rate", 0.5));
    }
    return lp;
}

std::string fnv1a_hex(std::span<const unsigned char> bytes) {
    Fnv1a h;
    h.bytes(bytes.data(), bytes.size());
    return h.hex();
}

std::string fingerprint(const GroupedNormalData& data) {
    Fnv1a h;
    for (const auto& g : data.groups()) {
        h.value(static_cast<std::uint64_t>(g.size()));
        for (double y : g) h.value(std::bit_cast<std::uint64_t>(y));
    }
    return h.hex();
}

std::string fingerprint(const BetaBinomialData& data) {
    Fnv1a h;
    for (const auto& u : data.units()) {
        h.value(u.successes);
        h.value(u.trials);
    }
    return h.hex();
}

}  // namespace hiercheck
