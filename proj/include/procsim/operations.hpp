#pragma once

#include "procsim/core.hpp"
#include "procsim/outcome.hpp"
#include "procsim/policy.hpp"
#include "procsim/signals.hpp"
#include "procsim/stochastic.hpp"

#include <vector>

namespace procsim {

/// Everything the daily mechanism reads but never mutates.
struct OperationsModels {
    const OrderPropensityModel* order = nullptr;
    const OutcomeModel* outcome = nullptr;
    LeadTimeRule lead_time;
    UtilityWeights weights;
    RegretMode regret_mode = RegretMode::expected;
    std::vector<SupplierId> suppliers;
    const SignalBank* signals = nullptr;
    const BaselineInfo* baselines = nullptr;
    double horizon = 365.0;
};

struct DayStreams {
    RandomStream& order;
    RandomStream& outcome;
    RandomStream& policy;
};

struct PlacedOrder {
    RequestRef ref;
    SupplierId supplier;
    OutcomeSample sample;
    OracleChoice oracle;
    double chosen_cost = 0.0;  // w . mean of the chosen arm
    double regret = 0.0;
    int lead_days = 1;
};

struct DayResult {
    Day day = 1;
    std::vector<DecisionEntry> decisions;  // one per unresolved item, in queue order
    std::vector<PlacedOrder> orders;       // one per decision with order = true
    std::size_t queue_before = 0;
    std::size_t queue_after = 0;
};

/// Seasonal covariate (1, harmonic(day)) shared by the learning policies.
Eigen::Vector2d decision_covariates(const OutcomeModel& model, Day day);

/// Walks the unresolved items in order: draws the order flag, asks the policy
/// for a supplier, samples the outcome and appends decisions and orders to the
/// ledger. Appended orders become visible on day + 1.
DayResult process_day(Day day, UnresolvedQueue& queue, HistoryLedger& ledger, SupplierPolicy& policy,
                      const OperationsModels& models, DayStreams streams);

}  // namespace procsim
