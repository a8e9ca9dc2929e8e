#include "hiercheck/order_stat_bounds.hpp"

#include <algorithm>
#include <cmath>

#include "hiercheck/errors.hpp"
#include "hiercheck/parallel.hpp"
#include "hiercheck/random.hpp"

namespace hiercheck {

Probability dependent_orderstat_bound(std::size_t J, std::size_t k, double u) {
    if (k < 1 || k > J) throw ValidationError("dependent_orderstat_bound: k must lie in [1, J]");
    if (!(u >= 0.0 && u <= 1.0)) throw ValidationError("dependent_orderstat_bound: u must lie in [0, 1]");
    return Probability(std::min(1.0, static_cast<double>(J) * u / static_cast<double>(k)));
}

PValueBoundReport joint_pvalue_bound(std::span<const double> series, std::optional<std::size_t> fixed_k) {
    if (series.empty()) throw ValidationError("joint_pvalue_bound: empty series");
    std::vector<double> sorted(series.begin(), series.end());
    for (double v : sorted) {
        if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("joint_pvalue_bound: entries must lie in [0, 1]");
    }
    std::sort(sorted.begin(), sorted.end());
    PValueBoundReport report;
    report.J = sorted.size();
    report.curve.reserve(sorted.size());
    for (std::size_t k = 1; k <= sorted.size(); ++k) {
        const double b = dependent_orderstat_bound(report.J, k, sorted[k - 1]);
        report.curve.push_back({k, sorted[k - 1], b});
        if (k == 1 || b < report.overall_bound) {
            report.overall_bound = b;
            report.k_star = k;
        }
    }
    if (fixed_k) {
        if (*fixed_k < 1 || *fixed_k > report.J) {
            throw ValidationError("joint_pvalue_bound: fixed k must lie in [1, J]");
        }
        report.fixed = report.curve[*fixed_k - 1];
    }
    return report;
}

nlohmann::json to_json(const PValueBoundReport& report) {
    nlohmann::json j;
    j["J"] = report.J;
    j["overall_bound"] = report.overall_bound;
    j["k_star"] = report.k_star;
    auto curve = nlohmann::json::array();
    for (const auto& p : report.curve) curve.push_back({p.k, p.u_k, p.bound});
    j["curve"] = std::move(curve);
    if (report.fixed) {
        j["fixed_k"] = {{"k", report.fixed->k}, {"u_k", report.fixed->u_k}, {"bound", report.fixed->bound}};
    }
    return j;
}

std::size_t BoundValidityTable::violations() const {
    return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const BoundCell& c) { return c.violated; }));
}

BoundValidityTable bound_validity_study(const Copula& copula, std::size_t J, std::size_t replicates,
                                        std::uint64_t seed, const BoundGrid& grid) {
    if (J == 0 || replicates == 0) throw ValidationError("bound_validity_study: J and replicates must be positive");
    if (copula.kind == CopulaKind::EquicorrelatedGaussian && !(copula.rho >= 0.0 && copula.rho < 1.0)) {
        throw ValidationError("bound_validity_study: rho must lie in [0, 1)");
    }
    std::vector<std::size_t> ks = grid.ks;
    if (ks.empty()) ks = {1, 2, std::max<std::size_t>(1, J / 4), std::max<std::size_t>(1, J / 2), J};
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    for (auto k : ks) {
        if (k < 1 || k > J) throw ValidationError("bound_validity_study: grid k outside [1, J]");
    }

    // order_stats[r * ks.size() + j] = U_(ks[j]) in replicate r.
    std::vector<double> order_stats(replicates * ks.size());
    const Rng root(seed);
    parallel_for(replicates, [&](std::size_t r) {
        Rng rng = root.substream(r);
        std::vector<double> u(J);
        switch (copula.kind) {
            case CopulaKind::Independent:
                for (auto& v : u) v = rng.uniform();
                break;
            case CopulaKind::EquicorrelatedGaussian: {
                const double common = rng.normal();
                const double a = std::sqrt(copula.rho);
                const double b = std::sqrt(1.0 - copula.rho);
                for (auto& v : u) v = std_normal_cdf(a * common + b * rng.normal());
                break;
            }
            case CopulaKind::Comonotone:
                std::fill(u.begin(), u.end(), rng.uniform());
                break;
        }
        std::sort(u.begin(), u.end());
        for (std::size_t j = 0; j < ks.size(); ++j) order_stats[r * ks.size() + j] = u[ks[j] - 1];
    });

    BoundValidityTable table{copula, J, replicates, {}};
    const double R = static_cast<double>(replicates);
    for (std::size_t j = 0; j < ks.size(); ++j) {
        for (double u : grid.us) {
            std::size_t hits = 0;
            for (std::size_t r = 0; r < replicates; ++r) {
                if (order_stats[r * ks.size() + j] <= u) ++hits;
            }
            const double empirical = static_cast<double>(hits) / R;
            const double bound = dependent_orderstat_bound(J, ks[j], u);
            const double se = std::sqrt(bound * (1.0 - bound) / R);
            table.cells.push_back({ks[j], u, empirical, bound, se, empirical > bound + 3.0 * se});
        }
    }
    return table;
}

}  // namespace hiercheck
