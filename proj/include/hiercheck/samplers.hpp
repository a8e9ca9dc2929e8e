#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hiercheck/models.hpp"
#include "hiercheck/random.hpp"

namespace hiercheck {

/**
 * @brief Chain length, thinning and seeding for one MCMC run.
 *
 * `iterations` counts all sweeps including burn-in. Draws are retained at sweeps
 * burn_in, burn_in + thin, ... Step sizes are keyed by block name ("log_alpha",
 * "log_beta", "theta", "mu", "log_tau2", "log_sigma2"); missing entries use defaults.
 */
struct ChainConfig {
    std::size_t iterations = 6000;
    std::size_t burn_in = 1000;
    std::size_t thin = 1;
    std::uint64_t seed = 1;
    std::map<std::string, double> step_sizes;

    void validate() const;
    [[nodiscard]] std::size_t retained_count() const noexcept;
    [[nodiscard]] bool retains(std::size_t sweep) const noexcept;
    [[nodiscard]] double step_or(const std::string& block, double fallback) const;
};

/// Draws from one model fit. Exactly one of the two draw vectors is populated.
struct PosteriorDraws {
    ModelKind model = ModelKind::NormalHier;
    std::vector<NormalHierParams> normal;
    std::vector<BetaBinomialParams> betabinom;
    /// Post-burn-in acceptance rate per Metropolis block.
    std::map<std::string, double> acceptance_rates;
    /// Step sizes in force after burn-in adaptation.
    std::map<std::string, double> step_sizes;
    std::vector<std::string> warnings;
    PriorSpec prior;
    ChainConfig config;
    std::string data_fingerprint;

    [[nodiscard]] std::size_t size() const noexcept {
        return model == ModelKind::NormalHier ? normal.size() : betabinom.size();
    }
    [[nodiscard]] bool empty() const noexcept { return size() == 0; }
};

/// Column names of the flattened draw record, e.g. theta_1..theta_I, mu, tau2, sigma2.
[[nodiscard]] std::vector<std::string> column_names(const PosteriorDraws& draws);
[[nodiscard]] std::vector<double> flatten(const NormalHierParams& params);
[[nodiscard]] std::vector<double> flatten(const BetaBinomialParams& params);
/// Values of one named column across the chain.
[[nodiscard]] std::vector<double> column(const PosteriorDraws& draws, std::size_t index);

/// Batch-wise Robbins-Monro style tuning of a random-walk scale toward a target rate.
class StepAdapter {
public:
    explicit StepAdapter(double step, double target = 0.4, std::size_t batch = 50)
        : step_(step), target_(target), batch_(batch) {}

    [[nodiscard]] double step() const noexcept { return step_; }
    void record(bool accepted, bool adapting);
    [[nodiscard]] double acceptance_rate() const noexcept;
    void reset_counts() noexcept { accepted_ = proposed_ = 0; }

private:
    double step_;
    double target_;
    std::size_t batch_;
    std::size_t batch_accepted_ = 0;
    std::size_t batch_proposed_ = 0;
    std::size_t batches_ = 0;
    std::size_t accepted_ = 0;
    std::size_t proposed_ = 0;
};

/**
 * @brief Univariate slice sampler (stepping out, shrinkage) for a log density on (lo, hi).
 * Throws SamplerError when no point with finite density is found.
 */
double slice_sample(const std::function<double(double)>& log_density, double x0, double lo, double hi,
                    double width, Rng& rng);

/**
 * @brief Gibbs sweeps for the normal-normal model.
 *
 * theta_i and mu come from exact normal full conditionals, sigma2 and tau2 from
 * inverse-gamma full conditionals; every conditional is restricted to the prior box
 * for the truncated-improper kind. Each block draws from its own substream.
 */
class NormalHierGibbs {
public:
    NormalHierGibbs(const GroupedNormalData& data, PriorSpec prior, std::uint64_t seed);

    [[nodiscard]] NormalHierParams initial_state() const;
    void sweep(NormalHierParams& state);
    /// Replaces the data; used by joint-distribution tests that resample data between sweeps.
    void set_data(const GroupedNormalData& data);

    void update_theta(NormalHierParams& state);
    void update_mu(NormalHierParams& state);
    void update_tau2(NormalHierParams& state);
    void update_sigma2(NormalHierParams& state);

    [[nodiscard]] const PriorSpec& prior() const noexcept { return prior_; }

private:
    PriorSpec prior_;
    std::vector<double> sizes_;
    std::vector<double> means_;
    std::vector<double> within_ss_;
    Rng theta_rng_;
    Rng mu_rng_;
    Rng tau_rng_;
    Rng sigma_rng_;
};

/**
 * @brief Metropolis-within-Gibbs for the beta-binomial model.
 *
 * p_i from Beta(alpha + x_i, beta + n_i - x_i); alpha and beta by separate random-walk
 * Metropolis steps on the log scale, rejected outside the truncation box.
 */
class BetaBinomialSampler {
public:
    BetaBinomialSampler(const BetaBinomialData& data, PriorSpec prior, std::uint64_t seed,
                        double step_log_alpha = 0.5, double step_log_beta = 0.5);

    [[nodiscard]] BetaBinomialParams initial_state() const;
    void sweep(BetaBinomialParams& state, bool adapting = false);
    void set_data(const BetaBinomialData& data);

    [[nodiscard]] const StepAdapter& alpha_adapter() const noexcept { return alpha_step_; }
    [[nodiscard]] const StepAdapter& beta_adapter() const noexcept { return beta_step_; }
    void reset_acceptance() noexcept;

private:
    [[nodiscard]] double log_conditional(double alpha, double beta, double sum_log_p,
                                         double sum_log_1mp, std::size_t units) const;

    BetaBinomialData data_;
    PriorSpec prior_;
    Rng p_rng_;
    Rng alpha_rng_;
    Rng beta_rng_;
    StepAdapter alpha_step_;
    StepAdapter beta_step_;
};

[[nodiscard]] PosteriorDraws gibbs_normal_hier(const GroupedNormalData& data, const PriorSpec& prior,
                                               const ChainConfig& config);

[[nodiscard]] PosteriorDraws mcmc_betabinom(const BetaBinomialData& data, const PriorSpec& prior,
                                            const ChainConfig& config);

struct ParameterSummary {
    std::string name;
    double mean = 0.0;
    double sd = 0.0;
    double ess = 0.0;
    /// Zero variance: ESS is reported as the chain length.
    bool degenerate = false;
};

struct ChainSummary {
    std::size_t draws = 0;
    std::vector<ParameterSummary> parameters;
    std::map<std::string, double> acceptance_rates;
    std::vector<std::string> warnings;
};

[[nodiscard]] ChainSummary chain_summary(const PosteriorDraws& draws);

/// Autocorrelation-based ESS using Geyer's initial monotone sequence estimator.
[[nodiscard]] double effective_sample_size(std::span<const double> chain);

}  // namespace hiercheck
