#include "procsim/operations.hpp"

#include <algorithm>

namespace procsim {

Eigen::Vector2d decision_covariates(const OutcomeModel& model, Day day) {
    HarmonicSignal unit = model.harmonic;
    unit.amplitude = 1.0;
    return {1.0, harmonic_at(unit, static_cast<double>(day))};
}

DayResult process_day(Day day, UnresolvedQueue& queue, HistoryLedger& ledger, SupplierPolicy& policy,
                      const OperationsModels& models, DayStreams streams) {
    if (models.order == nullptr || models.outcome == nullptr) {
        throw ContractViolation("process_day: order propensity and outcome models are required");
    }
    if (models.suppliers.empty()) throw ContractViolation("process_day: no suppliers");

    DayResult result;
    result.day = day;
    result.queue_before = queue.size();

    const auto refs = queue.in_order();
    const OracleView oracle{models.outcome, &ledger, models.weights};
    const Eigen::Vector2d covariates = decision_covariates(*models.outcome, day);

    std::vector<std::size_t> ordered;
    std::size_t live_items = refs.size();
    std::size_t live_requisitions = queue.requisition_count();

    for (std::size_t i = 0; i < refs.size(); ++i) {
        const RequestRef& ref = refs[i];

        FeatureContext fctx;
        fctx.ledger = &ledger;
        fctx.signals = models.signals;
        fctx.baselines = models.baselines;
        fctx.horizon = models.horizon;
        fctx.time = static_cast<double>(day);
        fctx.day = day;
        fctx.site = ref.site;
        fctx.product = ref.product;
        fctx.request = &ref;
        fctx.unresolved_items = live_items;
        fctx.unresolved_requisitions = live_requisitions;

        const double p = order_propensity(*models.order, fctx, streams.order);
        const bool place = streams.order.bernoulli(p);
        if (!place) {
            DecisionEntry entry{day, ref, DecisionRecord::defer()};
            ledger.append_decision(entry);
            result.decisions.push_back(entry);
            continue;
        }

        DecisionContext dctx;
        dctx.day = day;
        dctx.product = ref.product;
        dctx.request = &ref;
        dctx.covariates = covariates;
        dctx.features = &fctx;
        dctx.oracle = &oracle;
        const SupplierId supplier = policy.choose(dctx, models.suppliers, streams.policy);
        if (std::find(models.suppliers.begin(), models.suppliers.end(), supplier) == models.suppliers.end()) {
            throw ContractViolation("policy " + policy.name() + " chose supplier " + std::to_string(supplier.value) +
                                    " outside the available set");
        }

        PlacedOrder order;
        order.ref = ref;
        order.supplier = supplier;
        order.sample = sample_outcome(*models.outcome, ref.product, supplier, day, ledger, streams.outcome);
        order.oracle = oracle_choice(*models.outcome, ref.product, day, ledger, models.suppliers, models.weights);
        order.chosen_cost = models.weights.cost(order.sample.mean);
        const double realised = models.weights.cost(order.sample.outcome.as_vector());
        order.regret = (models.regret_mode == RegretMode::expected ? order.chosen_cost : realised) - order.oracle.value;
        order.lead_days = models.lead_time.lead_days(order.sample.outcome.lead_cost);

        DecisionEntry entry{day, ref, DecisionRecord::place(supplier)};
        ledger.append_decision(entry);
        ledger.append_order(OrderEntry{day, ref, supplier, order.sample.outcome, order.sample.noise});
        policy.observe(dctx, supplier, order.sample.outcome);

        result.decisions.push_back(entry);
        result.orders.push_back(order);
        ordered.push_back(i);

        --live_items;
        const bool last_of_requisition = std::none_of(refs.begin(), refs.end(), [&](const RequestRef& r) {
            if (r.requisition_id != ref.requisition_id) return false;
            auto pos = static_cast<std::size_t>(&r - refs.data());
            return pos != i && std::find(ordered.begin(), ordered.end(), pos) == ordered.end();
        });
        if (last_of_requisition) --live_requisitions;
    }

    queue.erase_positions(ordered);
    result.queue_after = queue.size();
    return result;
}

}  // namespace procsim
