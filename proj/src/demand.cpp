#include "procsim/demand.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace procsim {

double PiecewiseConstant::at(double t) const {
    auto it = std::upper_bound(breaks.begin(), breaks.end(), t);
    return rates[static_cast<std::size_t>(it - breaks.begin())];
}

double PiecewiseConstant::segment_end(double t) const {
    auto it = std::upper_bound(breaks.begin(), breaks.end(), t);
    return it == breaks.end() ? std::numeric_limits<double>::infinity() : *it;
}

void PiecewiseConstant::validate() const {
    if (rates.size() != breaks.size() + 1) throw ContractViolation("piecewise: need one more rate than breaks");
    if (!std::is_sorted(breaks.begin(), breaks.end()) ||
        std::adjacent_find(breaks.begin(), breaks.end()) != breaks.end()) {
        throw ContractViolation("piecewise: breaks must be strictly ascending");
    }
    for (double r : rates) {
        if (!(r >= 0.0) || !std::isfinite(r)) throw ContractViolation("piecewise: rates must be finite and >= 0");
    }
}

double IntensityModel::baseline_at(double t) const {
    if (const auto* w = std::get_if<WeibullBaseline>(&baseline)) {
        return (w->shape / w->scale) * std::pow(t / w->scale, w->shape - 1.0);
    }
    return std::get<PiecewiseConstant>(baseline).at(t);
}

double CostEffectCurve::at(double cost) const {
    if (cost <= threshold) return 0.0;
    double frac = std::pow((cost - threshold) / (saturation_cost - threshold), exponent);
    return floor * std::min(1.0, frac);
}

DemandState draw_demand_state(const DemandModel& model, std::size_t n_sites, RandomStream& setup) {
    DemandState state;
    state.intensity_frailty.assign(n_sites, 1.0);
    state.quantity_frailty.assign(n_sites, 1.0);
    if (model.intensity.frailty_variance > 0.0) {
        for (auto& z : state.intensity_frailty) z = sample_gamma_mean_one(model.intensity.frailty_variance, setup);
    }
    if (model.requisition.quantity.site_frailty_variance > 0.0) {
        for (auto& z : state.quantity_frailty) {
            z = sample_gamma_mean_one(model.requisition.quantity.site_frailty_variance, setup);
        }
    }
    const auto& stop = model.requisition.stop;
    state.stop_intercept = stop.intercept_mean;
    if (stop.intercept_variance > 0.0) state.stop_intercept += std::sqrt(stop.intercept_variance) * setup.normal();
    return state;
}

FeatureContext DemandEnvironment::context(double t) const {
    FeatureContext ctx;
    ctx.ledger = ledger;
    ctx.signals = signals;
    ctx.baselines = baselines;
    ctx.horizon = horizon;
    ctx.time = t;
    ctx.day = day_of(t);
    return ctx;
}

double intensity_at(const IntensityModel& model, double frailty, SiteId site, double t,
                    const DemandEnvironment& env) {
    if (!(t >= 0.0)) throw ContractViolation("intensity_at: negative time");
    double eta = 0.0;
    if (!model.features.empty()) {
        auto ctx = env.context(t);
        ctx.site = site;
        eta = linear_predictor(model.features, ctx);
    }
    return frailty * model.baseline_at(t) * std::exp(eta);
}

std::optional<double> next_request_time(const IntensityModel& model, double frailty, SiteId site, double t_prev,
                                        double horizon, const DemandEnvironment& env, RandomStream& rng) {
    if (!(t_prev < horizon)) throw ContractViolation("next_request_time: t_prev must be before the horizon");
    double t = t_prev;
    for (;;) {
        const double bound = frailty * model.bound.at(t);
        const double seg_end = model.bound.segment_end(t);
        if (bound <= 0.0) {
            t = seg_end;
            if (t > horizon) return std::nullopt;
            continue;
        }
        const double candidate = t + rng.exponential(bound);
        if (candidate >= seg_end) {
            // Memoryless restart at the start of the next bound segment.
            t = seg_end;
            if (t > horizon) return std::nullopt;
            continue;
        }
        t = candidate;
        if (t > horizon) return std::nullopt;
        const double lambda = intensity_at(model, frailty, site, t, env);
        if (lambda > bound * (1.0 + 1e-12)) {
            throw ContractViolation("next_request_time: intensity " + std::to_string(lambda) +
                                    " exceeds bound " + std::to_string(bound) + " at t=" + std::to_string(t));
        }
        if (rng.uniform() * bound < lambda) return t;
    }
}

double expit(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double requisition_cost_estimate(const RequisitionModel& model, std::span<const LineItem> items, Day day,
                                 const HistoryLedger* ledger) {
    double total = 0.0;
    for (const auto& item : items) {
        double unit = model.baseline_costs.at(item.product.index());
        if (model.stop.cost_estimate == CostEstimateMode::rolling_average && ledger != nullptr) {
            if (auto avg = ledger->recent_unit_cost(item.product, day, model.stop.rolling_window)) unit = *avg;
        }
        total += unit * item.quantity;
    }
    return total;
}

double stop_propensity(const RequisitionModel& model, double intercept, const PartialRequisition& partial,
                       SiteId site, double t, const DemandEnvironment& env) {
    const auto& stop = model.stop;
    const double size = static_cast<double>(partial.items.size());
    double eta = intercept + stop.size_quadratic * size * size;
    if (stop.cost_effect) eta += stop.cost_effect->at(partial.cost_estimate);
    if (!stop.features.empty()) {
        auto ctx = env.context(t);
        ctx.site = site;
        ctx.partial = &partial;
        eta += linear_predictor(stop.features, ctx);
    }
    return expit(eta);
}

std::vector<double> product_propensities(const RequisitionModel& model, std::span<const ProductId> candidates,
                                         const PartialRequisition& partial, SiteId site, double t,
                                         const Eigen::VectorXd& group_effects, const DemandEnvironment& env,
                                         RandomStream& rng) {
    if (candidates.empty()) throw ContractViolation("product_propensities: empty candidate set");
    const auto& choice = model.product;
    const double noise_sd = std::sqrt(choice.utility_noise_variance);
    std::vector<double> utility(candidates.size(), 0.0);
    FeatureContext ctx;
    if (!choice.features.empty()) {
        ctx = env.context(t);
        ctx.site = site;
        ctx.partial = &partial;
    }
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        double u = 0.0;
        if (!choice.features.empty()) {
            ctx.product = candidates[i];
            u += linear_predictor(choice.features, ctx);
        }
        if (group_effects.size() > 0) u += group_effects[static_cast<Eigen::Index>(candidates[i].index())];
        if (noise_sd > 0.0) u += noise_sd * rng.normal();
        utility[i] = u;
    }
    const double peak = *std::max_element(utility.begin(), utility.end());
    double total = 0.0;
    for (auto& u : utility) {
        u = std::exp(u - peak);
        total += u;
    }
    for (auto& u : utility) u /= total;
    return utility;
}

double quantity_mean(const RequisitionModel& model, ProductId product, SiteId site, double t,
                     const DemandEnvironment& env) {
    double mean = model.quantity.base_means.at(product.index());
    if (!model.quantity.features.empty()) {
        auto ctx = env.context(t);
        ctx.site = site;
        ctx.product = product;
        mean += linear_predictor(model.quantity.features, ctx);
    }
    return std::max(0.0, mean);
}

int sample_truncated_poisson(double mean, RandomStream& rng) {
    if (!(mean >= 0.0)) throw ContractViolation("truncated poisson: negative mean");
    if (mean == 0.0) return 1;
    if (mean < 0.05) {
        // Rejection would need ~1/mean rounds here; invert the truncated law directly.
        const double norm = -std::expm1(-mean);
        double p = mean * std::exp(-mean) / norm;
        double cdf = p;
        const double u = rng.uniform();
        int k = 1;
        while (u > cdf && k < 1000) {
            ++k;
            p *= mean / k;
            cdf += p;
        }
        return k;
    }
    for (;;) {
        long q = sample_poisson(mean, rng);
        if (q >= 1) return static_cast<int>(q);
    }
}

int sample_quantity(const RequisitionModel& model, ProductId product, SiteId site, double site_frailty, double t,
                    const DemandEnvironment& env, RandomStream& rng) {
    double frailty = site_frailty;
    if (model.quantity.dispersion > 0.0) frailty *= sample_gamma_mean_one(model.quantity.dispersion, rng);
    return sample_truncated_poisson(frailty * quantity_mean(model, product, site, t, env), rng);
}

Requisition generate_requisition(const RequisitionModel& model, const DemandState& state, SiteId site, double t,
                                 const DemandEnvironment& env, RandomStream& rng, std::uint64_t id) {
    Requisition req;
    req.id = id;
    req.site = site;
    req.event_time = t;

    // Once per requisition: group intercepts and the quantity frailty.
    Eigen::VectorXd group_effects;
    const auto& choice = model.product;
    if (choice.group_design.size() > 0) {
        Eigen::VectorXd w = sample_mvnormal(Eigen::VectorXd::Zero(choice.group_covariance.rows()),
                                            choice.group_covariance, rng);
        group_effects = choice.group_design.transpose() * w;
    }
    double frailty = state.quantity_frailty.empty() ? 1.0 : state.quantity_frailty.at(site.index());
    if (model.quantity.dispersion > 0.0) frailty *= sample_gamma_mean_one(model.quantity.dispersion, rng);
    req.mode = rng.bernoulli(model.stores_rate) ? DeliveryMode::stores : DeliveryMode::local;
    req.urgent = rng.bernoulli(model.urgency_rate);

    std::vector<ProductId> candidates;
    for (std::size_t p = 0; p < model.n_products(); ++p) candidates.emplace_back(static_cast<int>(p + 1));

    const Day day = day_of(t);
    for (;;) {
        // Features of the requisition before the item drawn in this round.
        const std::vector<LineItem> before = req.items;
        PartialRequisition partial{before, requisition_cost_estimate(model, before, day, env.ledger)};

        auto probs = product_propensities(model, candidates, partial, site, t, group_effects, env, rng);
        const auto pick = sample_categorical(probs, rng);
        const ProductId product = candidates[pick];
        candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(pick));

        const int q = sample_truncated_poisson(frailty * quantity_mean(model, product, site, t, env), rng);
        req.items.push_back({product, q});

        const double keep_going = stop_propensity(model, state.stop_intercept, partial, site, t, env);
        const bool more = rng.bernoulli(keep_going);
        if (!more || candidates.empty()) break;
    }
    return req;
}

}  // namespace procsim
