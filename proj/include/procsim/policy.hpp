#pragma once

#include "procsim/core.hpp"
#include "procsim/outcome.hpp"
#include "procsim/signals.hpp"
#include "procsim/stochastic.hpp"

#include <Eigen/Core>

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace procsim {

/// Converts an outcome vector (all components are costs) into one number.
struct UtilityWeights {
    Vec3 w{0.5, 0.25, 0.25};

    double cost(const Vec3& y) const { return w.dot(y); }
    double utility(const Vec3& y) const { return -cost(y); }
    void validate() const;
};

/// Read access to the true outcome law, handed only to the oracle.
struct OracleView {
    const OutcomeModel* model = nullptr;
    const HistoryLedger* ledger = nullptr;
    UtilityWeights weights;
};

struct DecisionContext {
    Day day = 1;
    ProductId product;
    const RequestRef* request = nullptr;
    Eigen::Vector2d covariates{1.0, 0.0};     // (1, seasonal signal)
    const FeatureContext* features = nullptr; // registry-backed context for utility models
    const OracleView* oracle = nullptr;
};

/// Supplier-selection policy. `choose` must leave the policy untouched;
/// `observe` and `end_of_day` are the only mutators.
class SupplierPolicy {
  public:
    virtual ~SupplierPolicy() = default;
    virtual std::string name() const = 0;
    virtual SupplierId choose(const DecisionContext& ctx, std::span<const SupplierId> arms,
                              RandomStream& rng) const = 0;
    virtual void observe(const DecisionContext& /*ctx*/, SupplierId /*arm*/, const OutcomeRecord& /*y*/) {}
    virtual void end_of_day() {}
};

/// Index of the largest value; ties go to the first (smallest arm id).
std::size_t argmax_first(std::span<const double> values);

SupplierId choose_fixed(SupplierId fixed, std::span<const SupplierId> arms);
SupplierId choose_random(std::span<const SupplierId> arms, RandomStream& rng);

// --- conjugate Gaussian regression ------------------------------------------

struct Gaussian2 {
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    Eigen::Matrix2d cov = Eigen::Matrix2d::Identity();
};

/// Normal prior, normal likelihood with known noise variance:
///   S_n = (S_0^-1 + X^T X / s2)^-1,  m_n = S_n (S_0^-1 m_0 + X^T y / s2)
Gaussian2 bayes_update(const Gaussian2& prior, const Eigen::MatrixX2d& design, const Eigen::VectorXd& response,
                       double noise_variance);

/// One scalar-response regression kept in information form.
class BayesianLinearRegression {
  public:
    BayesianLinearRegression(const Gaussian2& prior, double noise_variance);

    void add(const Eigen::Vector2d& x, double y);
    const Gaussian2& posterior() const { return posterior_; }
    const Eigen::Matrix2d& cov_factor() const { return factor_; }
    std::size_t observations() const { return n_; }
    Eigen::Vector2d draw(RandomStream& rng) const;

  private:
    void refresh();

    Eigen::Matrix2d precision_;
    Eigen::Vector2d information_;
    double noise_variance_;
    Gaussian2 posterior_;
    Eigen::Matrix2d factor_;
    std::size_t n_ = 0;
};

struct BanditHyperparameters {
    double prior_variance = 70.0;
    Vec3 noise_variances{25.0, 4.0, 4.0};
};

/// One regression per (product, supplier, outcome component), each over
/// (1, seasonal). Observations wait in a buffer until `flush`.
class BanditState {
  public:
    BanditState(std::size_t n_products, std::size_t n_suppliers, const BanditHyperparameters& hyper);

    const BayesianLinearRegression& model(ProductId p, SupplierId s, int component) const;
    void observe(ProductId p, SupplierId s, const Eigen::Vector2d& x, const Vec3& y);
    void flush();
    std::size_t pending() const { return pending_.size(); }
    std::size_t parameter_count() const { return models_.size() * 2; }
    /// Posterior predictive draw of the outcome means for one arm.
    Vec3 sample_means(ProductId p, SupplierId s, const Eigen::Vector2d& x, RandomStream& rng) const;

  private:
    std::size_t index(ProductId p, SupplierId s, int component) const;

    struct Pending {
        ProductId product;
        SupplierId supplier;
        Eigen::Vector2d x;
        Vec3 y;
    };
    std::size_t n_products_;
    std::size_t n_suppliers_;
    std::vector<BayesianLinearRegression> models_;
    std::vector<Pending> pending_;
};

SupplierId thompson_choose(const BanditState& state, const UtilityWeights& weights, const Eigen::Vector2d& x,
                           ProductId product, std::span<const SupplierId> arms, RandomStream& rng);

/// Deterministic choice from a fixed parameter vector laid out like the
/// bandit's: index ((p * S + s) * 3 + component) * 2 + {0 intercept, 1 seasonal}.
SupplierId choose_static_utility(const Eigen::VectorXd& theta, std::size_t n_suppliers, const UtilityWeights& weights,
                                 const Eigen::Vector2d& x, ProductId product, std::span<const SupplierId> arms);

struct OracleChoice {
    SupplierId arm;
    double value = 0.0;  // expected weighted cost of the chosen arm
};

OracleChoice oracle_choice(const OutcomeModel& model, ProductId product, Day day, const HistoryLedger& ledger,
                           std::span<const SupplierId> arms, const UtilityWeights& weights);

// --- policies ------------------------------------------------------------------

class FixedPolicy final : public SupplierPolicy {
  public:
    explicit FixedPolicy(SupplierId s) : supplier_(s) {}
    std::string name() const override { return "fixed-" + std::to_string(supplier_.value); }
    SupplierId choose(const DecisionContext&, std::span<const SupplierId> arms, RandomStream&) const override {
        return choose_fixed(supplier_, arms);
    }

  private:
    SupplierId supplier_;
};

class RandomPolicy final : public SupplierPolicy {
  public:
    std::string name() const override { return "random"; }
    SupplierId choose(const DecisionContext&, std::span<const SupplierId> arms, RandomStream& rng) const override {
        return choose_random(arms, rng);
    }
};

class StaticUtilityPolicy final : public SupplierPolicy {
  public:
    StaticUtilityPolicy(Eigen::VectorXd theta, std::size_t n_suppliers, UtilityWeights weights)
        : theta_(std::move(theta)), n_suppliers_(n_suppliers), weights_(weights) {}
    /// Parameter vector drawn once from the bandit prior N(0, prior_variance I).
    static StaticUtilityPolicy from_prior(std::size_t n_products, std::size_t n_suppliers, double prior_variance,
                                          UtilityWeights weights, RandomStream& rng);

    std::string name() const override { return "static-utility"; }
    SupplierId choose(const DecisionContext& ctx, std::span<const SupplierId> arms, RandomStream&) const override {
        return choose_static_utility(theta_, n_suppliers_, weights_, ctx.covariates, ctx.product, arms);
    }
    const Eigen::VectorXd& theta() const { return theta_; }

  private:
    Eigen::VectorXd theta_;
    std::size_t n_suppliers_;
    UtilityWeights weights_;
};

/// Multinomial logit over registry features (sampling, not argmax).
class LogitPolicy final : public SupplierPolicy {
  public:
    explicit LogitPolicy(SupplierUtilityModel model) : model_(std::move(model)) {}
    std::string name() const override { return "logit"; }
    SupplierId choose(const DecisionContext& ctx, std::span<const SupplierId> arms, RandomStream& rng) const override;

  private:
    SupplierUtilityModel model_;
};

class ThompsonPolicy final : public SupplierPolicy {
  public:
    ThompsonPolicy(std::size_t n_products, std::size_t n_suppliers, const BanditHyperparameters& hyper,
                   UtilityWeights weights)
        : state_(n_products, n_suppliers, hyper), weights_(weights) {}

    std::string name() const override { return "bandit"; }
    SupplierId choose(const DecisionContext& ctx, std::span<const SupplierId> arms, RandomStream& rng) const override {
        return thompson_choose(state_, weights_, ctx.covariates, ctx.product, arms, rng);
    }
    void observe(const DecisionContext& ctx, SupplierId arm, const OutcomeRecord& y) override {
        state_.observe(ctx.product, arm, ctx.covariates, y.as_vector());
    }
    void end_of_day() override { state_.flush(); }
    const BanditState& state() const { return state_; }

  private:
    BanditState state_;
    UtilityWeights weights_;
};

class OraclePolicy final : public SupplierPolicy {
  public:
    std::string name() const override { return "oracle"; }
    SupplierId choose(const DecisionContext& ctx, std::span<const SupplierId> arms, RandomStream&) const override;
};

// --- regret --------------------------------------------------------------------

enum class RegretMode { expected, realized };

class RegretAccount {
  public:
    explicit RegretAccount(int horizon_days = 0);

    void record(Day day, double regret);
    std::span<const double> per_item() const { return per_item_; }
    std::span<const Day> item_days() const { return item_days_; }
    /// Cumulative regret at the end of each day 1..horizon.
    std::vector<double> daily_cumulative() const;
    double total() const { return total_; }
    double min_item() const;

  private:
    int horizon_;
    std::vector<double> per_item_;
    std::vector<Day> item_days_;
    std::vector<double> daily_;
    double total_ = 0.0;
};

/// Appends w . mean(chosen) - oracle_value and returns it.
double record_regret(RegretAccount& account, SupplierId chosen, double oracle_value, const OutcomeModel& model,
                     ProductId product, Day day, const HistoryLedger& ledger, const UtilityWeights& weights);

}  // namespace procsim
