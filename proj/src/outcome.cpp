#include "procsim/outcome.hpp"

#include "procsim/demand.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace procsim {

void OrderPropensityModel::validate() const {
    if (mode == Mode::uniform && !(low >= 0.0 && low < high && high <= 1.0)) {
        throw ContractViolation("order propensity: uniform bounds must satisfy 0 <= low < high <= 1");
    }
    if (mode == Mode::logistic) FeatureRegistry::standard().check(features);
}

double order_propensity(const OrderPropensityModel& model, const FeatureContext& ctx, RandomStream& rng) {
    if (model.mode == OrderPropensityModel::Mode::uniform) return sample_uniform(model.low, model.high, rng);
    return expit(linear_predictor(model.features, ctx));
}

double supplier_utility(const SupplierUtilityModel& model, const FeatureContext& ctx, SupplierId supplier) {
    FeatureContext c = ctx;
    c.supplier = supplier;
    return linear_predictor(model.features, c);
}

std::vector<double> supplier_propensities(const SupplierUtilityModel& model, const FeatureContext& ctx,
                                          std::span<const SupplierId> suppliers) {
    if (suppliers.empty()) throw ContractViolation("supplier_propensities: no suppliers");
    std::vector<double> u;
    u.reserve(suppliers.size());
    for (auto s : suppliers) u.push_back(supplier_utility(model, ctx, s));
    const double peak = *std::max_element(u.begin(), u.end());
    double total = 0.0;
    for (auto& v : u) {
        v = std::exp(v - peak);
        total += v;
    }
    for (auto& v : u) v /= total;
    return u;
}

double companion_spectral_radius(const Mat3& ar1, const Mat3& ar2) {
    Eigen::Matrix<double, 6, 6> c = Eigen::Matrix<double, 6, 6>::Zero();
    c.topLeftCorner<3, 3>() = ar1;
    c.topRightCorner<3, 3>() = ar2;
    c.bottomLeftCorner<3, 3>() = Mat3::Identity();
    Eigen::EigenSolver<Eigen::Matrix<double, 6, 6>> solver(c, false);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

Vec3 var2_stationary_mean(const Mat3& ar1, const Mat3& ar2, const Vec3& drift) {
    return (Mat3::Identity() - ar1 - ar2).lu().solve(drift);
}

OutcomeModel::OutcomeModel(std::size_t n_products, std::size_t n_suppliers, const PairOutcomeParams& defaults)
    : n_products_(n_products),
      n_suppliers_(n_suppliers),
      pairs_(n_products * n_suppliers, defaults),
      factors_(n_products * n_suppliers, GaussianFactor(defaults.noise_covariance)) {}

std::size_t OutcomeModel::index(ProductId p, SupplierId s) const {
    if (p.value < 1 || p.index() >= n_products_ || s.value < 1 || s.index() >= n_suppliers_) {
        throw ContractViolation("outcome model: unknown (product, supplier) pair");
    }
    return p.index() * n_suppliers_ + s.index();
}

void OutcomeModel::set_pair(ProductId p, SupplierId s, const PairOutcomeParams& params) {
    const auto i = index(p, s);
    factors_[i] = GaussianFactor(params.noise_covariance);
    pairs_[i] = params;
}

Eigen::VectorXd OutcomeModel::stacked_coefficients(ProductId p, SupplierId s) const {
    const auto& q = pair(p, s);
    Eigen::VectorXd v(3 + 9 + 9 + 3 + 3 + 3);
    v << q.intercept, q.ar1.transpose().reshaped(), q.ar2.transpose().reshaped(), q.short_allocation,
        q.long_allocation, q.harmonic_loading;
    return v;
}

OutcomeModel OutcomeModel::standard(std::span<const double> baseline_costs, std::size_t n_suppliers) {
    PairOutcomeParams base;
    base.ar1 = 0.2 * Mat3::Identity();
    base.ar2 = 0.1 * Mat3::Identity();
    base.noise_covariance = Vec3(25.0, 4.0, 4.0).asDiagonal();
    base.short_allocation = Vec3(0.05, 0.0, 0.0);
    base.long_allocation = Vec3(0.01, 0.0, 0.0);
    base.harmonic_loading = Vec3(8.0, 2.0, -2.0);

    OutcomeModel model(baseline_costs.size(), n_suppliers, base);
    model.harmonic = HarmonicSignal{1.0, 365.0, std::numbers::pi / 6.0};
    const double persistence = 1.0 - 0.2 - 0.1;
    // Per-product unit-cost offsets for the second supplier; small next to the
    // seasonal swing, so the cheaper supplier changes during the year.
    const double offsets[] = {1.0, -0.5, 0.5};
    for (std::size_t p = 0; p < baseline_costs.size(); ++p) {
        for (std::size_t s = 0; s < n_suppliers; ++s) {
            PairOutcomeParams q = base;
            const bool second = s % 2 == 1;
            q.intercept = Vec3(persistence * baseline_costs[p], 14.0, 7.0);
            if (second) {
                q.intercept += Vec3(offsets[p % 3], -1.4, 0.7);
                q.harmonic_loading = -base.harmonic_loading;
            }
            model.set_pair(ProductId(static_cast<int>(p + 1)), SupplierId(static_cast<int>(s + 1)), q);
        }
    }
    return model;
}

Vec3 outcome_mean(const OutcomeModel& model, ProductId product, SupplierId supplier, Day day,
                  const HistoryLedger& ledger) {
    const auto& q = model.pair(product, supplier);
    const auto* lag1 = ledger.recent_order(product, supplier, day, 1);
    const auto* lag2 = ledger.recent_order(product, supplier, day, 2);
    const Vec3 y1 = lag1 ? lag1->outcome.as_vector() : q.intercept;
    const Vec3 y2 = lag2 ? lag2->outcome.as_vector() : q.intercept;
    const auto v_short = static_cast<double>(ledger.supplier_volume_in_window(supplier, day, model.short_window));
    const auto v_long = static_cast<double>(ledger.supplier_volume_in_window(supplier, day, model.long_window));
    return q.intercept + q.ar1 * y1 + q.ar2 * y2 + q.short_allocation * v_short + q.long_allocation * v_long +
           q.harmonic_loading * harmonic_at(model.harmonic, static_cast<double>(day));
}

OutcomeSample sample_outcome(const OutcomeModel& model, ProductId product, SupplierId supplier, Day day,
                             const HistoryLedger& ledger, RandomStream& rng) {
    OutcomeSample s;
    s.mean = outcome_mean(model, product, supplier, day, ledger);
    Eigen::VectorXd draw = model.noise_factor(product, supplier).sample(Eigen::VectorXd::Zero(3), rng);
    s.noise = draw;
    s.outcome = OutcomeRecord::from_vector(s.mean + s.noise);
    return s;
}

int LeadTimeRule::lead_days(double lead_cost) const {
    if (!(usd_per_day > 0.0)) throw ContractViolation("lead time rule: usd_per_day must be positive");
    const double days = std::round(lead_cost / usd_per_day);
    if (!(days >= 1.0)) return 1;
    return static_cast<int>(std::min(days, 1e6));
}

}  // namespace procsim
