#include "hiercheck/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hiercheck/errors.hpp"

namespace hiercheck {

NormalHierParams draw_normal_hier_prior(const PriorSpec& prior, std::size_t groups, Rng& rng) {
    prior.validate();
    if (prior.kind != PriorKind::ProperNormal) {
        throw UnsupportedPriorError("prior draws require the proper-normal prior, got " + to_string(prior.kind));
    }
    NormalHierParams p;
    p.mu = prior.fixed("mu").value_or(0.0);
    if (!prior.fixed("mu")) {
        p.mu = rng.normal(prior.hyper_or("mu_mean", 0.0), std::sqrt(prior.hyper_or("mu_var", 100.0)));
    }
    if (auto v = prior.fixed("tau2")) {
        p.tau2 = *v;
    } else {
        p.tau2 = prior.hyper_or("tau2_scale", 2.0) / rng.gamma(prior.hyper_or("tau2_shape", 3.0));
    }
    if (!prior.known_group_sigma2.empty()) {
        p.sigma2 = prior.known_group_sigma2;
    } else if (auto v = prior.fixed("sigma2")) {
        p.sigma2 = {*v};
    } else {
        p.sigma2 = {prior.hyper_or("sigma2_scale", 2.0) / rng.gamma(prior.hyper_or("sigma2_shape", 3.0))};
    }
    p.theta.resize(groups);
    draw_group_means(p, rng);
    return p;
}

BetaBinomialParams draw_betabinom_prior(const PriorSpec& prior, std::size_t units, Rng& rng) {
    prior.validate();
    if (prior.kind != PriorKind::ProperBetaBinom) {
        throw UnsupportedPriorError("prior draws require the proper-betabinom prior, got " + to_string(prior.kind));
    }
    BetaBinomialParams p;
    if (auto v = prior.fixed("alpha")) {
        p.alpha = *v;
    } else {
        p.alpha = rng.gamma(prior.hyper_or("alpha_shape", 2.0)) / prior.hyper_or("alpha_rate", 0.5);
    }
    if (auto v = prior.fixed("beta")) {
        p.beta = *v;
    } else {
        p.beta = rng.gamma(prior.hyper_or("beta_shape", 2.0)) / prior.hyper_or("beta_rate", 0.5);
    }
    p.p.resize(units);
    draw_unit_rates(p, rng);
    return p;
}

void draw_group_means(NormalHierParams& params, Rng& rng) {
    if (!(params.tau2 > 0.0)) throw ValidationError("draw_group_means: tau2 must be positive");
    const double tau = std::sqrt(params.tau2);
    for (auto& t : params.theta) t = rng.normal(params.mu, tau);
}

void draw_unit_rates(BetaBinomialParams& params, Rng& rng) {
    for (auto& p : params.p) {
        p = std::clamp(rng.beta(params.alpha, params.beta), std::numeric_limits<double>::min(), 1.0 - 0x1.0p-53);
    }
}

GroupedNormalData simulate_normal_data(const NormalHierParams& params, std::span<const std::size_t> group_sizes,
                                       Rng& rng) {
    validate(params, group_sizes.size());
    std::vector<std::vector<double>> groups(group_sizes.size());
    for (std::size_t i = 0; i < group_sizes.size(); ++i) {
        const double sd = std::sqrt(params.sigma2_of(i));
        groups[i].resize(group_sizes[i]);
        for (auto& y : groups[i]) y = rng.normal(params.theta[i], sd);
    }
    return GroupedNormalData(std::move(groups));
}

BetaBinomialData simulate_betabinom_data(const BetaBinomialParams& params, std::span<const std::uint64_t> trials,
                                         Rng& rng) {
    if (params.p.size() != trials.size()) throw ValidationError("simulate_betabinom_data: size mismatch");
    std::vector<BinomialUnit> units;
    units.reserve(trials.size());
    for (std::size_t i = 0; i < trials.size(); ++i) {
        units.push_back({std::to_string(i + 1), rng.binomial(trials[i], params.p[i]), trials[i]});
    }
    return BetaBinomialData(std::move(units));
}

}  // namespace hiercheck
