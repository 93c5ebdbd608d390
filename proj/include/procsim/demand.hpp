#pragma once

#include "procsim/core.hpp"
#include "procsim/signals.hpp"
#include "procsim/stochastic.hpp"

#include <Eigen/Core>

#include <limits>
#include <optional>
#include <variant>
#include <vector>

namespace procsim {

/// (shape / scale) * (t / scale)^(shape - 1)
struct WeibullBaseline {
    double shape = 1.0;
    double scale = 1.0;
};

/// rates[i] applies on [breaks[i-1], breaks[i]); breaks ascending, one fewer than rates.
struct PiecewiseConstant {
    std::vector<double> breaks;
    std::vector<double> rates;

    static PiecewiseConstant constant(double rate) { return {{}, {rate}}; }
    double at(double t) const;
    /// End of the segment containing t (infinity for the last one).
    double segment_end(double t) const;
    void validate() const;
};

using BaselineIntensity = std::variant<WeibullBaseline, PiecewiseConstant>;

struct IntensityModel {
    BaselineIntensity baseline = PiecewiseConstant::constant(1.0 / 90.0);
    FeatureSpec features;          // log-linear effects
    double frailty_variance = 0.0; // 0: every site has frailty 1
    PiecewiseConstant bound = PiecewiseConstant::constant(1.0 / 90.0);  // per unit frailty

    double baseline_at(double t) const;
};

/// 0 below `threshold`, then floor * min(1, ((c - threshold) / (saturation - threshold))^exponent).
struct CostEffectCurve {
    double threshold = 20.0;
    double saturation_cost = 500.0;
    double floor = -120.0;
    double exponent = 0.5;

    double at(double cost) const;
};

enum class CostEstimateMode { baseline, rolling_average };

struct StopModel {
    double intercept_mean = 5.0;
    double intercept_variance = 1.0;
    double size_quadratic = -0.1;  // coefficient on (k - 1)^2
    std::optional<CostEffectCurve> cost_effect = CostEffectCurve{};
    CostEstimateMode cost_estimate = CostEstimateMode::baseline;
    int rolling_window = 10;  // unit-cost realisations averaged in rolling mode
    FeatureSpec features;
};

struct ProductChoiceModel {
    FeatureSpec features;                 // evaluated per candidate product
    double utility_noise_variance = 0.0;  // i.i.d. normal utility per candidate and step
    Eigen::MatrixXd group_design;         // groups x products; empty for none
    Eigen::MatrixXd group_covariance;     // groups x groups
};

struct QuantityModel {
    std::vector<double> base_means;  // per product
    FeatureSpec features;            // additive adjustments to the mean
    double dispersion = 0.0;         // gamma frailty variance per requisition; 0: plain Poisson
    double site_frailty_variance = 0.0;
};

struct RequisitionModel {
    std::vector<double> baseline_costs;  // per product, USD
    StopModel stop;
    ProductChoiceModel product;
    QuantityModel quantity;
    double stores_rate = 0.5;
    double urgency_rate = 0.1;

    std::size_t n_products() const { return baseline_costs.size(); }
};

struct DemandModel {
    IntensityModel intensity;
    RequisitionModel requisition;
};

/// Random effects drawn once per replication.
struct DemandState {
    std::vector<double> intensity_frailty;  // per site
    std::vector<double> quantity_frailty;   // per site
    double stop_intercept = 0.0;
};

DemandState draw_demand_state(const DemandModel& model, std::size_t n_sites, RandomStream& setup);

/// Read-only view of history and exogenous inputs used to build features.
struct DemandEnvironment {
    const HistoryLedger* ledger = nullptr;
    const SignalBank* signals = nullptr;
    const BaselineInfo* baselines = nullptr;
    double horizon = 365.0;

    FeatureContext context(double t) const;
};

double intensity_at(const IntensityModel& model, double frailty, SiteId site, double t,
                    const DemandEnvironment& env);

/// Next accepted thinning time in (t_prev, horizon], or nullopt.
std::optional<double> next_request_time(const IntensityModel& model, double frailty, SiteId site,
                                        double t_prev, double horizon, const DemandEnvironment& env,
                                        RandomStream& rng);

double expit(double x);

double requisition_cost_estimate(const RequisitionModel& model, std::span<const LineItem> items, Day day,
                                 const HistoryLedger* ledger);

/// Probability of adding another line item given the items placed so far.
double stop_propensity(const RequisitionModel& model, double intercept, const PartialRequisition& partial,
                       SiteId site, double t, const DemandEnvironment& env);

/// Softmax over candidate utilities. `group_effects` holds G^T w (per product) or is empty.
std::vector<double> product_propensities(const RequisitionModel& model, std::span<const ProductId> candidates,
                                         const PartialRequisition& partial, SiteId site, double t,
                                         const Eigen::VectorXd& group_effects, const DemandEnvironment& env,
                                         RandomStream& rng);

double quantity_mean(const RequisitionModel& model, ProductId product, SiteId site, double t,
                     const DemandEnvironment& env);

/// Zero-truncated Poisson(frailty * mean); mean 0 gives 1 (the truncated limit).
int sample_truncated_poisson(double mean, RandomStream& rng);

/// Draws the requisition-level gamma effect itself, so the marginal law is a
/// zero-truncated gamma-mixed Poisson.
int sample_quantity(const RequisitionModel& model, ProductId product, SiteId site, double site_frailty, double t,
                    const DemandEnvironment& env, RandomStream& rng);

Requisition generate_requisition(const RequisitionModel& model, const DemandState& state, SiteId site, double t,
                                 const DemandEnvironment& env, RandomStream& rng, std::uint64_t id = 0);

}  // namespace procsim
