#include "procsim/signals.hpp"

#include <cmath>
#include <numbers>

namespace procsim {

double harmonic_at(const HarmonicSignal& signal, double t) {
    return signal.amplitude * std::sin(2.0 * std::numbers::pi * t / signal.period + signal.phase);
}

double sinc_at(const SincShock& shock, double t) {
    const double x = (t - shock.center) / shock.scale;
    if (x == 0.0) return shock.amplitude;
    const double px = std::numbers::pi * x;
    return shock.amplitude * std::sin(px) / px;
}

double ExogenousSignal::at(double t) const {
    double v = 0.0;
    for (const auto& h : harmonics) v += harmonic_at(h, t);
    for (const auto& s : shocks) v += sinc_at(s, t);
    return v;
}

Eigen::VectorXd FeatureSpec::coefficients() const {
    Eigen::VectorXd c(static_cast<Eigen::Index>(terms.size()));
    for (std::size_t i = 0; i < terms.size(); ++i) c[static_cast<Eigen::Index>(i)] = terms[i].coefficient;
    return c;
}

namespace {

const HistoryLedger& ledger_of(const FeatureContext& c) { return *c.ledger; }
SiteId site_of(const FeatureContext& c) { return *c.site; }
ProductId product_of(const FeatureContext& c) { return *c.product; }
SupplierId supplier_of(const FeatureContext& c) { return *c.supplier; }

double days_since(std::optional<double> t, const FeatureContext& c) {
    return t ? c.time - *t : c.horizon;
}

double signal_value(const FeatureContext& c, const FeatureRef& r) {
    auto it = c.signals->find(r.signal);
    if (it == c.signals->end()) throw ContractViolation("feature " + r.feature + ": unknown signal '" + r.signal + "'");
    return it->second.at(c.time);
}

double baseline_value(const std::vector<std::vector<double>>& table, std::size_t entity, const FeatureRef& r) {
    if (entity >= table.size() || r.index >= table[entity].size()) return 0.0;
    return table[entity][r.index];
}

double lagged_outcome(const FeatureContext& c, const FeatureRef& r, bool noise) {
    // index = 3 * (lag - 1) + component
    const int lag = static_cast<int>(r.index / 3) + 1;
    const auto comp = static_cast<Eigen::Index>(r.index % 3);
    const auto* order = ledger_of(c).recent_order(product_of(c), supplier_of(c), c.day, lag);
    if (order) return noise ? order->noise[comp] : order->outcome.as_vector()[comp];
    if (noise || c.ar_default == nullptr) return 0.0;
    return (*c.ar_default)[comp];
}

}  // namespace

FeatureRegistry::FeatureRegistry() {
    auto add = [this](std::string name, std::vector<std::string> symbols, unsigned keys,
                      std::function<double(const FeatureContext&, const FeatureRef&)> fn) {
        entries_.push_back({std::move(name), std::move(symbols), keys, std::move(fn)});
    };

    add("constant", {}, 0, [](const FeatureContext&, const FeatureRef&) { return 1.0; });

    // Intensity model, site level.
    add("days_since_latest_delivery", {"H1"}, key_ledger | key_site,
        [](const FeatureContext& c, const FeatureRef&) {
            auto d = ledger_of(c).last_delivery(site_of(c), c.time);
            return days_since(d ? std::optional<double>(d->time) : std::nullopt, c);
        });
    add("quality_of_latest_delivery", {"H2"}, key_ledger | key_site,
        [](const FeatureContext& c, const FeatureRef&) {
            auto d = ledger_of(c).last_delivery(site_of(c), c.time);
            return d ? d->quality_cost : 0.0;
        });
    add("requisitions_past_year", {"H3"}, key_ledger | key_site,
        [](const FeatureContext& c, const FeatureRef&) {
            return static_cast<double>(ledger_of(c).requisitions_in_window(site_of(c), c.time, kYearWindow));
        });

    // Exogenous signals shared by every model.
    add("seasonal", {"H4", "e03", "e16", "e23", "d05", "d15", "y5"}, key_signals, signal_value);
    add("business_policy_shock", {"H5", "e04", "e17", "e24", "d06", "d16", "y6"}, key_signals, signal_value);
    add("market_disruption", {"H6", "e05", "e18", "e25", "d07", "d17", "y7"}, key_signals, signal_value);

    add("site_baseline", {"H0", "e06"}, key_baselines | key_site,
        [](const FeatureContext& c, const FeatureRef& r) {
            return baseline_value(c.baselines->sites, site_of(c).index(), r);
        });
    add("product_baseline", {"e19", "e26", "d08"}, key_baselines | key_product,
        [](const FeatureContext& c, const FeatureRef& r) {
            return baseline_value(c.baselines->products, product_of(c).index(), r);
        });
    add("supplier_baseline", {"d18", "y8"}, key_baselines | key_supplier,
        [](const FeatureContext& c, const FeatureRef& r) {
            return baseline_value(c.baselines->suppliers, supplier_of(c).index(), r);
        });

    // Requisition generation model.
    add("line_items_in_requisition", {"e01"}, key_partial,
        [](const FeatureContext& c, const FeatureRef&) { return static_cast<double>(c.partial->items.size()); });
    add("requisition_cost_estimate", {"e02"}, key_partial,
        [](const FeatureContext& c, const FeatureRef&) { return c.partial->cost_estimate; });
    add("product_requests_past_year", {"e11"}, key_ledger | key_site | key_product,
        [](const FeatureContext& c, const FeatureRef&) {
            return static_cast<double>(
                ledger_of(c).product_requests_in_window(site_of(c), product_of(c), c.time, kYearWindow));
        });
    add("product_quantity_delivered_past_year", {"e12", "e22"}, key_ledger | key_site | key_product,
        [](const FeatureContext& c, const FeatureRef&) {
            return static_cast<double>(
                ledger_of(c).product_quantity_delivered_in_window(site_of(c), product_of(c), c.time, kYearWindow));
        });
    add("days_since_product_request", {"e13"}, key_ledger | key_site | key_product,
        [](const FeatureContext& c, const FeatureRef&) {
            return days_since(ledger_of(c).last_request_time(site_of(c), product_of(c), c.time), c);
        });
    add("days_since_product_delivery", {"e14"}, key_ledger | key_site | key_product,
        [](const FeatureContext& c, const FeatureRef&) {
            auto d = ledger_of(c).last_delivery(site_of(c), product_of(c), c.time);
            return days_since(d ? std::optional<double>(d->time) : std::nullopt, c);
        });
    add("quality_of_last_product_delivery", {"e15"}, key_ledger | key_site | key_product,
        [](const FeatureContext& c, const FeatureRef&) {
            auto d = ledger_of(c).last_delivery(site_of(c), product_of(c), c.time);
            return d ? d->quality_cost : 0.0;
        });
    add("product_quantity_requested_past_year", {"e21"}, key_ledger | key_site | key_product,
        [](const FeatureContext& c, const FeatureRef&) {
            return static_cast<double>(
                ledger_of(c).product_quantity_requested_in_window(site_of(c), product_of(c), c.time, kYearWindow));
        });

    // Decision model.
    add("days_since_generation", {"d01"}, key_request,
        [](const FeatureContext& c, const FeatureRef&) { return c.time - c.request->event_time; });
    add("unresolved_requisitions", {"d02"}, key_unresolved,
        [](const FeatureContext& c, const FeatureRef&) {
            if (!c.unresolved_requisitions) throw ContractViolation("feature unresolved_requisitions: count missing");
            return static_cast<double>(*c.unresolved_requisitions);
        });
    add("unresolved_line_items", {}, key_unresolved,
        [](const FeatureContext& c, const FeatureRef&) {
            if (!c.unresolved_items) throw ContractViolation("feature unresolved_line_items: count missing");
            return static_cast<double>(*c.unresolved_items);
        });
    add("mode_of_delivery", {"d03"}, key_request,
        [](const FeatureContext& c, const FeatureRef&) { return c.request->mode == DeliveryMode::stores ? 1.0 : 0.0; });
    add("urgency", {"d04"}, key_request,
        [](const FeatureContext& c, const FeatureRef&) { return c.request->urgent ? 1.0 : 0.0; });
    add("previous_outcome", {"d11"}, key_ledger | key_product | key_supplier,
        [](const FeatureContext& c, const FeatureRef& r) {
            const auto* o = ledger_of(c).recent_order(product_of(c), supplier_of(c), c.day, 1);
            return o ? o->outcome.as_vector()[static_cast<Eigen::Index>(r.index % 3)] : 0.0;
        });
    add("average_outcome", {"d12"}, key_ledger | key_product | key_supplier,
        [](const FeatureContext& c, const FeatureRef& r) {
            auto avg = ledger_of(c).average_outcome(product_of(c), supplier_of(c), c.day);
            return avg ? (*avg)[static_cast<Eigen::Index>(r.index % 3)] : 0.0;
        });
    add("pair_volume_allocated", {"d13"}, key_ledger | key_product | key_supplier,
        [](const FeatureContext& c, const FeatureRef&) {
            return static_cast<double>(ledger_of(c).pair_total_volume(product_of(c), supplier_of(c), c.day));
        });
    add("supplier_volume_allocated", {"d14"}, key_ledger | key_supplier,
        [](const FeatureContext& c, const FeatureRef&) {
            return static_cast<double>(ledger_of(c).supplier_total_volume(supplier_of(c), c.day));
        });

    // Outcome model.
    add("autoregressive", {"y1"}, key_ledger | key_product | key_supplier,
        [](const FeatureContext& c, const FeatureRef& r) { return lagged_outcome(c, r, false); });
    add("moving_average", {"y2"}, key_ledger | key_product | key_supplier,
        [](const FeatureContext& c, const FeatureRef& r) { return lagged_outcome(c, r, true); });
    add("supplier_volume_recent", {"y3"}, key_ledger | key_supplier,
        [](const FeatureContext& c, const FeatureRef&) {
            return static_cast<double>(ledger_of(c).supplier_volume_in_window(supplier_of(c), c.day, kRecentWindowDays));
        });
    add("supplier_volume_past_year", {"y4"}, key_ledger | key_supplier,
        [](const FeatureContext& c, const FeatureRef&) {
            return static_cast<double>(
                ledger_of(c).supplier_volume_in_window(supplier_of(c), c.day, static_cast<int>(kYearWindow)));
        });
}

const FeatureRegistry& FeatureRegistry::standard() {
    static const FeatureRegistry registry;
    return registry;
}

const FeatureRegistry::Entry* FeatureRegistry::find(std::string_view key) const {
    for (const auto& e : entries_) {
        if (e.name == key) return &e;
        for (const auto& s : e.symbols) {
            if (s == key) return &e;
        }
    }
    return nullptr;
}

double FeatureRegistry::evaluate(const FeatureRef& ref, const FeatureContext& ctx) const {
    const Entry* e = find(ref.feature);
    if (!e) throw ContractViolation("unknown feature '" + ref.feature + "'");
    auto missing = [&](unsigned key, bool present, const char* what) {
        if ((e->requires_keys & key) && !present) {
            throw ContractViolation("feature " + e->name + ": context key '" + what + "' not available");
        }
    };
    missing(key_ledger, ctx.ledger != nullptr, "ledger");
    missing(key_signals, ctx.signals != nullptr, "signals");
    missing(key_baselines, ctx.baselines != nullptr, "baselines");
    missing(key_site, ctx.site.has_value(), "site");
    missing(key_product, ctx.product.has_value(), "product");
    missing(key_supplier, ctx.supplier.has_value(), "supplier");
    missing(key_partial, ctx.partial != nullptr, "partial requisition");
    missing(key_request, ctx.request != nullptr, "request");
    return e->eval(ctx, ref);
}

void FeatureRegistry::check(const FeatureSpec& spec) const {
    for (const auto& term : spec.terms) {
        if (!find(term.ref.feature)) throw ContractViolation("unknown feature '" + term.ref.feature + "'");
        if (term.times && !find(term.times->feature)) {
            throw ContractViolation("unknown feature '" + term.times->feature + "'");
        }
    }
}

Eigen::VectorXd build_features(const FeatureSpec& spec, const FeatureContext& ctx) {
    const auto& reg = FeatureRegistry::standard();
    Eigen::VectorXd x(static_cast<Eigen::Index>(spec.terms.size()));
    for (std::size_t i = 0; i < spec.terms.size(); ++i) {
        const auto& term = spec.terms[i];
        double v = reg.evaluate(term.ref, ctx);
        if (term.times) v *= reg.evaluate(*term.times, ctx);
        x[static_cast<Eigen::Index>(i)] = v;
    }
    return x;
}

double linear_predictor(const FeatureSpec& spec, const FeatureContext& ctx) {
    if (spec.empty()) return 0.0;
    return build_features(spec, ctx).dot(spec.coefficients());
}

}  // namespace procsim
