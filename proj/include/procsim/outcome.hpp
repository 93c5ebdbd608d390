#pragma once

#include "procsim/core.hpp"
#include "procsim/signals.hpp"
#include "procsim/stochastic.hpp"

#include <Eigen/Core>

#include <vector>

namespace procsim {

struct OrderPropensityModel {
    enum class Mode { logistic, uniform };
    Mode mode = Mode::uniform;
    FeatureSpec features;  // logistic mode
    double low = 0.1;      // uniform mode
    double high = 0.9;

    void validate() const;
};

/// Logistic mode: expit(features . coefficients). Uniform mode: a fresh
/// Uniform(low, high) draw on every call.
double order_propensity(const OrderPropensityModel& model, const FeatureContext& ctx, RandomStream& rng);

struct SupplierUtilityModel {
    FeatureSpec features;  // evaluated with ctx.supplier set to each option
};

double supplier_utility(const SupplierUtilityModel& model, const FeatureContext& ctx, SupplierId supplier);
std::vector<double> supplier_propensities(const SupplierUtilityModel& model, const FeatureContext& ctx,
                                          std::span<const SupplierId> suppliers);

/// True outcome law of one (product, supplier) pair:
///   y = c + A1 y[-1] + A2 y[-2] + s * vol_short + l * vol_long + h * harmonic(day) + eps
struct PairOutcomeParams {
    Vec3 intercept = Vec3::Zero();
    Mat3 ar1 = Mat3::Zero();
    Mat3 ar2 = Mat3::Zero();
    Vec3 short_allocation = Vec3::Zero();
    Vec3 long_allocation = Vec3::Zero();
    Vec3 harmonic_loading = Vec3::Zero();
    Mat3 noise_covariance = Mat3::Zero();
};

/// Largest eigenvalue modulus of the VAR(2) companion matrix.
double companion_spectral_radius(const Mat3& ar1, const Mat3& ar2);
/// (I - A1 - A2)^-1 drift
Vec3 var2_stationary_mean(const Mat3& ar1, const Mat3& ar2, const Vec3& drift);

class OutcomeModel {
  public:
    OutcomeModel(std::size_t n_products, std::size_t n_suppliers, const PairOutcomeParams& defaults);

    /// Default scenario: VAR(2) with A1 = 0.2 I, A2 = 0.1 I, noise diag(25, 4, 4),
    /// harmonic loading (8, 2, -2) negated for the second supplier, unit-cost
    /// allocation effects 0.05 (90 days) and 0.01 (365 days), and intercepts
    /// placing stationary unit costs at the baseline costs.
    static OutcomeModel standard(std::span<const double> baseline_costs, std::size_t n_suppliers = 2);

    std::size_t n_products() const { return n_products_; }
    std::size_t n_suppliers() const { return n_suppliers_; }

    const PairOutcomeParams& pair(ProductId p, SupplierId s) const { return pairs_[index(p, s)]; }
    void set_pair(ProductId p, SupplierId s, const PairOutcomeParams& params);
    const GaussianFactor& noise_factor(ProductId p, SupplierId s) const { return factors_[index(p, s)]; }

    /// Stacked coefficients in the order intercept, A1 (row-major), A2,
    /// short allocation, long allocation, harmonic loading.
    Eigen::VectorXd stacked_coefficients(ProductId p, SupplierId s) const;

    HarmonicSignal harmonic{1.0, 365.0, 0.0};
    int short_window = 90;
    int long_window = 365;

  private:
    std::size_t index(ProductId p, SupplierId s) const;

    std::size_t n_products_;
    std::size_t n_suppliers_;
    std::vector<PairOutcomeParams> pairs_;
    std::vector<GaussianFactor> factors_;
};

/// Conditional mean given everything visible on `day`. Missing lags take the intercept.
Vec3 outcome_mean(const OutcomeModel& model, ProductId product, SupplierId supplier, Day day,
                  const HistoryLedger& ledger);

struct OutcomeSample {
    OutcomeRecord outcome;
    Vec3 mean = Vec3::Zero();
    Vec3 noise = Vec3::Zero();
};

OutcomeSample sample_outcome(const OutcomeModel& model, ProductId product, SupplierId supplier, Day day,
                             const HistoryLedger& ledger, RandomStream& rng);

struct LeadTimeRule {
    double usd_per_day = 10.0;

    /// lead_cost / usd_per_day rounded to the nearest day, at least one day.
    int lead_days(double lead_cost) const;
};

}  // namespace procsim
