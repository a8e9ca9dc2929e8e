#include "hiercheck/pivotal.hpp"

#include <algorithm>
#include <cmath>

#include "hiercheck/errors.hpp"

namespace hiercheck {

std::string to_string(Reference ref) { return ref == Reference::StdNormal ? "std-normal" : "uniform"; }

PivotalSample within_group_residuals(const GroupedNormalData& data, const NormalHierParams& params,
                                     std::size_t draw_index) {
    if (params.theta.size() != data.group_count()) {
        throw ValidationError("within_group_residuals: parameter and group counts differ");
    }
    PivotalSample out{draw_index, {}, Reference::StdNormal};
    out.values.reserve(data.total_count());
    for (std::size_t i = 0; i < data.group_count(); ++i) {
        const double s2 = params.sigma2_of(i);
        if (!(s2 > 0.0)) throw ValidationError("within_group_residuals: sigma must be positive");
        const double sd = std::sqrt(s2);
        for (double y : data.group(i)) out.values.push_back((y - params.theta[i]) / sd);
    }
    return out;
}

PivotalSample group_level_residuals(const NormalHierParams& params, std::size_t draw_index) {
    if (!(params.tau2 > 0.0)) throw ValidationError("group_level_residuals: tau must be positive");
    const double tau = std::sqrt(params.tau2);
    PivotalSample out{draw_index, {}, Reference::StdNormal};
    out.values.reserve(params.theta.size());
    for (double t : params.theta) out.values.push_back((t - params.mu) / tau);
    return out;
}

PivotalSample standardized_group_means(const GroupedNormalData& data, const NormalHierParams& params,
                                       std::size_t draw_index) {
    if (params.theta.size() != data.group_count()) {
        throw ValidationError("standardized_group_means: parameter and group counts differ");
    }
    PivotalSample out{draw_index, {}, Reference::StdNormal};
    for (std::size_t i = 0; i < data.group_count(); ++i) {
        const double var = params.tau2 + params.sigma2_of(i) / static_cast<double>(data.group_size(i));
        out.values.push_back((data.group_mean(i) - params.mu) / std::sqrt(var));
    }
    return out;
}

PivotalSample beta_pit(const BetaBinomialParams& params, std::size_t draw_index) {
    PivotalSample out{draw_index, {}, Reference::Uniform};
    out.values.reserve(params.p.size());
    for (double p : params.p) out.values.push_back(regularized_incomplete_beta(p, params.alpha, params.beta));
    return out;
}

std::vector<QQPoint> qq_data(const PivotalSample& sample) {
    if (sample.values.empty()) throw ValidationError("qq_data: empty sample");
    std::vector<double> sorted(sample.values);
    std::stable_sort(sorted.begin(), sorted.end());
    const auto positions = plotting_positions(sorted.size());
    std::vector<QQPoint> out;
    out.reserve(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double q = sample.reference == Reference::StdNormal ? std_normal_quantile(positions[i]) : positions[i];
        out.push_back({q, sorted[i]});
    }
    return out;
}

PValueSeries sw_pvalue_series(const PosteriorDraws& draws, const GroupedNormalData& data) {
    if (draws.model != ModelKind::NormalHier) {
        throw ValidationError("sw_pvalue_series: requires normal-hier draws");
    }
    if (data.group_count() < 3) throw ValidationError("sw_pvalue_series: at least 3 groups are required");
    PValueSeries series{"shapiro-wilk(E)", {}};
    series.values.reserve(draws.normal.size());
    for (std::size_t d = 0; d < draws.normal.size(); ++d) {
        series.values.push_back(shapiro_wilk(group_level_residuals(draws.normal[d], d).values).p);
    }
    return series;
}

MaxPit max_uniform_pit(const PivotalSample& sample) {
    if (sample.values.empty()) throw ValidationError("max_uniform_pit: empty sample");
    if (sample.reference != Reference::Uniform) {
        throw ValidationError("max_uniform_pit: sample must have a uniform reference");
    }
    const double u = *std::max_element(sample.values.begin(), sample.values.end());
    const double cdf = std::pow(u, static_cast<double>(sample.values.size()));
    return {Probability(u), Probability(cdf), Probability(1.0 - cdf)};
}

PValueSeries max_pit_pvalue_series(const PosteriorDraws& draws) {
    if (draws.model != ModelKind::BetaBinom) {
        throw ValidationError("max_pit_pvalue_series: requires beta-binomial draws");
    }
    PValueSeries series{"max-pit", {}};
    series.values.reserve(draws.betabinom.size());
    for (std::size_t d = 0; d < draws.betabinom.size(); ++d) {
        series.values.push_back(max_uniform_pit(beta_pit(draws.betabinom[d], d)).upper_tail_p);
    }
    return series;
}

std::vector<QQPoint> max_stat_qq(std::span<const double> u_max_series, std::size_t n) {
    if (u_max_series.empty()) throw ValidationError("max_stat_qq: empty series");
    if (n == 0) throw ValidationError("max_stat_qq: n must be at least 1");
    std::vector<double> sorted(u_max_series.begin(), u_max_series.end());
    std::stable_sort(sorted.begin(), sorted.end());
    const auto positions = plotting_positions(sorted.size());
    std::vector<QQPoint> out;
    out.reserve(sorted.size());
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < sorted.size(); ++i) out.push_back({std::pow(positions[i], inv_n), sorted[i]});
    return out;
}

}  // namespace hiercheck
