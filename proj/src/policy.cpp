#include "procsim/policy.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>

namespace procsim {

void UtilityWeights::validate() const {
    if ((w.array() < 0.0).any()) throw ContractViolation("weights must be non-negative");
    if (std::fabs(w.sum() - 1.0) > 1e-9) throw ContractViolation("weights must sum to 1");
}

std::size_t argmax_first(std::span<const double> values) {
    if (values.empty()) throw ContractViolation("argmax over an empty set");
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = i;
    }
    return best;
}

namespace {
void require_arms(std::span<const SupplierId> arms) {
    if (arms.empty()) throw ContractViolation("policy: empty arm set");
}
}  // namespace

SupplierId choose_fixed(SupplierId fixed, std::span<const SupplierId> arms) {
    require_arms(arms);
    if (std::find(arms.begin(), arms.end(), fixed) == arms.end()) {
        throw ContractViolation("fixed policy: supplier " + std::to_string(fixed.value) + " is not available");
    }
    return fixed;
}

SupplierId choose_random(std::span<const SupplierId> arms, RandomStream& rng) {
    require_arms(arms);
    auto i = static_cast<std::size_t>(rng.uniform() * static_cast<double>(arms.size()));
    return arms[std::min(i, arms.size() - 1)];
}

// --- conjugate regression ------------------------------------------------------

Gaussian2 bayes_update(const Gaussian2& prior, const Eigen::MatrixX2d& design, const Eigen::VectorXd& response,
                       double noise_variance) {
    if (design.rows() != response.size()) throw ContractViolation("bayes_update: design/response size mismatch");
    if (!(noise_variance > 0.0)) throw ContractViolation("bayes_update: noise variance must be positive");
    if (design.rows() == 0) return prior;
    const Eigen::Matrix2d prior_precision = prior.cov.inverse();
    const Eigen::Matrix2d precision = prior_precision + design.transpose() * design / noise_variance;
    Eigen::FullPivLU<Eigen::Matrix2d> lu(precision);
    if (!lu.isInvertible()) throw ContractViolation("bayes_update: singular posterior precision");
    Gaussian2 post;
    post.cov = lu.inverse();
    post.mean = post.cov * (prior_precision * prior.mean + design.transpose() * response / noise_variance);
    return post;
}

BayesianLinearRegression::BayesianLinearRegression(const Gaussian2& prior, double noise_variance)
    : precision_(prior.cov.inverse()),
      information_(precision_ * prior.mean),
      noise_variance_(noise_variance),
      posterior_(prior) {
    if (!(noise_variance > 0.0)) throw ContractViolation("regression: noise variance must be positive");
    Eigen::LLT<Eigen::Matrix2d> llt(prior.cov);
    if (llt.info() != Eigen::Success) throw ContractViolation("regression: prior covariance not positive definite");
    factor_ = llt.matrixL();
}

void BayesianLinearRegression::add(const Eigen::Vector2d& x, double y) {
    precision_ += x * x.transpose() / noise_variance_;
    information_ += x * y / noise_variance_;
    ++n_;
    refresh();
}

void BayesianLinearRegression::refresh() {
    posterior_.cov = precision_.inverse();
    posterior_.mean = posterior_.cov * information_;
    Eigen::LLT<Eigen::Matrix2d> llt(posterior_.cov);
    factor_ = llt.matrixL();
}

Eigen::Vector2d BayesianLinearRegression::draw(RandomStream& rng) const {
    Eigen::Vector2d z(rng.normal(), rng.normal());
    return posterior_.mean + factor_ * z;
}

BanditState::BanditState(std::size_t n_products, std::size_t n_suppliers, const BanditHyperparameters& hyper)
    : n_products_(n_products), n_suppliers_(n_suppliers) {
    Gaussian2 prior;
    prior.cov = hyper.prior_variance * Eigen::Matrix2d::Identity();
    models_.reserve(n_products * n_suppliers * 3);
    for (std::size_t i = 0; i < n_products * n_suppliers; ++i) {
        for (int c = 0; c < 3; ++c) models_.emplace_back(prior, hyper.noise_variances[c]);
    }
}

std::size_t BanditState::index(ProductId p, SupplierId s, int component) const {
    if (p.value < 1 || p.index() >= n_products_ || s.value < 1 || s.index() >= n_suppliers_ || component < 0 ||
        component > 2) {
        throw ContractViolation("bandit: unknown (product, supplier, component)");
    }
    return (p.index() * n_suppliers_ + s.index()) * 3 + static_cast<std::size_t>(component);
}

const BayesianLinearRegression& BanditState::model(ProductId p, SupplierId s, int component) const {
    return models_[index(p, s, component)];
}

void BanditState::observe(ProductId p, SupplierId s, const Eigen::Vector2d& x, const Vec3& y) {
    (void)index(p, s, 0);
    pending_.push_back({p, s, x, y});
}

void BanditState::flush() {
    for (const auto& o : pending_) {
        for (int c = 0; c < 3; ++c) models_[index(o.product, o.supplier, c)].add(o.x, o.y[c]);
    }
    pending_.clear();
}

Vec3 BanditState::sample_means(ProductId p, SupplierId s, const Eigen::Vector2d& x, RandomStream& rng) const {
    Vec3 y;
    for (int c = 0; c < 3; ++c) y[c] = models_[index(p, s, c)].draw(rng).dot(x);
    return y;
}

SupplierId thompson_choose(const BanditState& state, const UtilityWeights& weights, const Eigen::Vector2d& x,
                           ProductId product, std::span<const SupplierId> arms, RandomStream& rng) {
    require_arms(arms);
    std::vector<double> utility;
    utility.reserve(arms.size());
    for (auto arm : arms) utility.push_back(weights.utility(state.sample_means(product, arm, x, rng)));
    return arms[argmax_first(utility)];
}

SupplierId choose_static_utility(const Eigen::VectorXd& theta, std::size_t n_suppliers, const UtilityWeights& weights,
                                 const Eigen::Vector2d& x, ProductId product, std::span<const SupplierId> arms) {
    require_arms(arms);
    std::vector<double> utility;
    utility.reserve(arms.size());
    for (auto arm : arms) {
        Vec3 y;
        for (int c = 0; c < 3; ++c) {
            const auto base = static_cast<Eigen::Index>(((product.index() * n_suppliers + arm.index()) * 3 +
                                                         static_cast<std::size_t>(c)) * 2);
            if (base + 1 >= theta.size()) throw ContractViolation("static utility: parameter vector too short");
            y[c] = theta[base] * x[0] + theta[base + 1] * x[1];
        }
        utility.push_back(weights.utility(y));
    }
    return arms[argmax_first(utility)];
}

OracleChoice oracle_choice(const OutcomeModel& model, ProductId product, Day day, const HistoryLedger& ledger,
                           std::span<const SupplierId> arms, const UtilityWeights& weights) {
    require_arms(arms);
    OracleChoice best{arms[0], weights.cost(outcome_mean(model, product, arms[0], day, ledger))};
    for (std::size_t i = 1; i < arms.size(); ++i) {
        const double v = weights.cost(outcome_mean(model, product, arms[i], day, ledger));
        if (v < best.value) best = {arms[i], v};
    }
    return best;
}

StaticUtilityPolicy StaticUtilityPolicy::from_prior(std::size_t n_products, std::size_t n_suppliers,
                                                    double prior_variance, UtilityWeights weights, RandomStream& rng) {
    Eigen::VectorXd theta(static_cast<Eigen::Index>(n_products * n_suppliers * 3 * 2));
    const double sd = std::sqrt(prior_variance);
    for (Eigen::Index i = 0; i < theta.size(); ++i) theta[i] = sd * rng.normal();
    return StaticUtilityPolicy(std::move(theta), n_suppliers, weights);
}

SupplierId LogitPolicy::choose(const DecisionContext& ctx, std::span<const SupplierId> arms, RandomStream& rng) const {
    require_arms(arms);
    if (ctx.features == nullptr) throw ContractViolation("logit policy: feature context missing");
    auto probs = supplier_propensities(model_, *ctx.features, arms);
    return arms[sample_categorical(probs, rng)];
}

SupplierId OraclePolicy::choose(const DecisionContext& ctx, std::span<const SupplierId> arms, RandomStream&) const {
    if (ctx.oracle == nullptr || ctx.oracle->model == nullptr || ctx.oracle->ledger == nullptr) {
        throw ContractViolation("oracle policy: no access to the true outcome model");
    }
    return oracle_choice(*ctx.oracle->model, ctx.product, ctx.day, *ctx.oracle->ledger, arms, ctx.oracle->weights).arm;
}

// --- regret --------------------------------------------------------------------

RegretAccount::RegretAccount(int horizon_days)
    : horizon_(horizon_days), daily_(static_cast<std::size_t>(std::max(horizon_days, 0)), 0.0) {}

void RegretAccount::record(Day day, double regret) {
    if (day < 1 || (horizon_ > 0 && day > horizon_)) throw ContractViolation("regret: day outside the horizon");
    if (!item_days_.empty() && day < item_days_.back()) throw ContractViolation("regret: out-of-order day");
    per_item_.push_back(regret);
    item_days_.push_back(day);
    if (horizon_ > 0) daily_[static_cast<std::size_t>(day - 1)] += regret;
    total_ += regret;
}

std::vector<double> RegretAccount::daily_cumulative() const {
    std::vector<double> out(daily_.size());
    double run = 0.0;
    for (std::size_t d = 0; d < daily_.size(); ++d) {
        run += daily_[d];
        out[d] = run;
    }
    return out;
}

double RegretAccount::min_item() const {
    return per_item_.empty() ? 0.0 : *std::min_element(per_item_.begin(), per_item_.end());
}

double record_regret(RegretAccount& account, SupplierId chosen, double oracle_value, const OutcomeModel& model,
                     ProductId product, Day day, const HistoryLedger& ledger, const UtilityWeights& weights) {
    const double regret = weights.cost(outcome_mean(model, product, chosen, day, ledger)) - oracle_value;
    account.record(day, regret);
    return regret;
}

}  // namespace procsim
