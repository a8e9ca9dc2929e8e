#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hiercheck {

/// The "log-zero" sentinel returned outside a prior's support.
inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

enum class ModelKind { NormalHier, BetaBinom };

[[nodiscard]] std::string to_string(ModelKind kind);
[[nodiscard]] ModelKind parse_model_kind(const std::string& name);

/**
 * @brief Observations y_ij arranged by group.
 *
 * Group means and within-group sums of squares are cached at construction.
 */
class GroupedNormalData {
public:
    explicit GroupedNormalData(std::vector<std::vector<double>> groups,
                               std::vector<std::string> labels = {});

    [[nodiscard]] std::size_t group_count() const noexcept { return groups_.size(); }
    [[nodiscard]] std::span<const double> group(std::size_t i) const { return groups_.at(i); }
    [[nodiscard]] const std::vector<std::vector<double>>& groups() const noexcept { return groups_; }
    [[nodiscard]] const std::vector<std::string>& labels() const noexcept { return labels_; }

    [[nodiscard]] std::size_t group_size(std::size_t i) const { return groups_.at(i).size(); }
    [[nodiscard]] std::vector<std::size_t> group_sizes() const;
    [[nodiscard]] double group_mean(std::size_t i) const { return means_.at(i); }
    [[nodiscard]] const std::vector<double>& group_means() const noexcept { return means_; }
    /// Sum over j of (y_ij - ybar_i)^2.
    [[nodiscard]] double within_ss(std::size_t i) const { return within_ss_.at(i); }
    [[nodiscard]] std::size_t total_count() const noexcept { return total_; }

private:
    std::vector<std::vector<double>> groups_;
    std::vector<std::string> labels_;
    std::vector<double> means_;
    std::vector<double> within_ss_;
    std::size_t total_ = 0;
};

struct BinomialUnit {
    std::string label;
    std::uint64_t successes = 0;
    std::uint64_t trials = 0;
};

class BetaBinomialData {
public:
    explicit BetaBinomialData(std::vector<BinomialUnit> units);

    [[nodiscard]] std::size_t unit_count() const noexcept { return units_.size(); }
    [[nodiscard]] const BinomialUnit& unit(std::size_t i) const { return units_.at(i); }
    [[nodiscard]] const std::vector<BinomialUnit>& units() const noexcept { return units_; }

private:
    std::vector<BinomialUnit> units_;
};

/// Parameters of the normal-normal model. sigma2 holds one shared value or one per group.
struct NormalHierParams {
    std::vector<double> theta;
    double mu = 0.0;
    double tau2 = 1.0;
    std::vector<double> sigma2{1.0};

    [[nodiscard]] double sigma2_of(std::size_t group) const {
        return sigma2.size() == 1 ? sigma2.front() : sigma2.at(group);
    }
    friend bool operator==(const NormalHierParams&, const NormalHierParams&) = default;
};

struct BetaBinomialParams {
    std::vector<double> p;
    double alpha = 1.0;
    double beta = 1.0;

    friend bool operator==(const BetaBinomialParams&, const BetaBinomialParams&) = default;
};

void validate(const NormalHierParams& params, std::size_t group_count);
void validate(const BetaBinomialParams& params, std::size_t unit_count);

enum class PriorKind {
    ProperNormal,
    TruncatedImproperNormal,
    TruncatedJeffreysBetaBinom,
    ProperBetaBinom,
};

[[nodiscard]] std::string to_string(PriorKind kind);
[[nodiscard]] PriorKind parse_prior_kind(const std::string& name);

/// Open interval (lo, hi).
struct Box {
    double lo;
    double hi;
    [[nodiscard]] bool contains(double x) const noexcept { return x > lo && x < hi; }
};

/**
 * @brief Prior configuration for either model.
 *
 * Truncated kinds use the bound `a`; the box is normalized to (min(a, 1/a), max(a, 1/a)),
 * so a = 1e6 and a = 1e-6 describe the same box. For the normal model the location mu
 * is restricted to (-A, A) with A = max(a, 1/a).
 *
 * Hyperparameters (all optional, defaults in parentheses):
 *  - proper-normal: mu_mean (0), mu_var (100), tau2_shape (3), tau2_scale (2),
 *    sigma2_shape (3), sigma2_scale (2), the last four inverse-gamma.
 *  - proper-betabinom: alpha_shape (2), alpha_rate (0.5), beta_shape (2), beta_rate (0.5).
 *  - any kind: mu_fixed, tau2_fixed, sigma2_fixed, alpha_fixed, beta_fixed pin a
 *    component at the given value (point mass).
 */
struct PriorSpec {
    using PlugInDensity = std::function<double(double alpha, double beta)>;

    PriorKind kind = PriorKind::TruncatedImproperNormal;
    double a = 1e6;
    std::map<std::string, double> hyper;
    /// Known per-group observation variances; when set, sigma2 is not sampled.
    std::vector<double> known_group_sigma2;
    /// log pi(alpha, beta) up to a constant, for the truncated Jeffreys kind.
    PlugInDensity plugin;
    std::string plugin_name = "stand-in (alpha+beta)^(-5/2)";

    static PriorSpec proper_normal(std::map<std::string, double> hyper = {});
    static PriorSpec truncated_improper_normal(double a = 1e6);
    static PriorSpec truncated_jeffreys(double a = 1e-3);
    static PriorSpec proper_betabinom(std::map<std::string, double> hyper = {});

    [[nodiscard]] Box box() const;
    [[nodiscard]] bool is_normal_kind() const noexcept;
    [[nodiscard]] bool is_proper() const noexcept;
    [[nodiscard]] bool is_truncated() const noexcept { return !is_proper(); }
    [[nodiscard]] double hyper_or(const std::string& name, double fallback) const;
    [[nodiscard]] std::optional<double> fixed(const std::string& component) const;
    /// Throws ValidationError when the configuration is unusable.
    void validate() const;
};

/// Default stand-in for the Jeffreys-type hyperprior: log (alpha + beta)^(-5/2).
[[nodiscard]] double standin_jeffreys_log_density(double alpha, double beta);

[[nodiscard]] double loglik_normal_hier(const GroupedNormalData& data, const NormalHierParams& params);
/// Sum over groups of log N(theta_i; mu, tau2).
[[nodiscard]] double log_group_prior(const NormalHierParams& params);
[[nodiscard]] double logprior_normal_hier(const NormalHierParams& params, const PriorSpec& prior);
/// Likelihood plus both prior stages; kLogZero outside the support.
[[nodiscard]] double logjoint_normal_hier(const GroupedNormalData& data, const NormalHierParams& params,
                                         const PriorSpec& prior);

[[nodiscard]] double loglik_betabinom(const BetaBinomialData& data, const BetaBinomialParams& params);
[[nodiscard]] double logprior_betabinom(const BetaBinomialParams& params, const PriorSpec& prior);

[[nodiscard]] bool in_support(const NormalHierParams& params, const PriorSpec& prior);
[[nodiscard]] bool in_support(const BetaBinomialParams& params, const PriorSpec& prior);

/// Hex FNV-1a digest of the dataset contents.
[[nodiscard]] std::string fingerprint(const GroupedNormalData& data);
[[nodiscard]] std::string fingerprint(const BetaBinomialData& data);
[[nodiscard]] std::string fnv1a_hex(std::span<const unsigned char> bytes);

}  // namespace hiercheck
