#pragma once

#include "procsim/core.hpp"
#include "procsim/demand.hpp"
#include "procsim/operations.hpp"
#include "procsim/outcome.hpp"
#include "procsim/policy.hpp"
#include "procsim/signals.hpp"
#include "procsim/stochastic.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <queue>
#include <set>
#include <string>
#include <vector>

namespace procsim {

/// How the static-utility policy obtains its fixed parameter vector.
enum class StaticUtilityTheta {
    prior_draw,          // one draw per replication from the bandit prior
    seasonal_projection  // long-run intercept and seasonal loading of the true law
};

/// Complete description of one simulated world, minus the policy.
struct SimulationConfig {
    int horizon = 365;
    std::size_t n_sites = 50;
    std::size_t n_suppliers = 2;
    DemandModel demand;
    OutcomeModel outcome = OutcomeModel::standard(std::vector<double>{100.0, 50.0, 50.0});
    OrderPropensityModel order;
    LeadTimeRule lead_time;
    UtilityWeights weights;
    RegretMode regret_mode = RegretMode::expected;
    BanditHyperparameters bandit;
    StaticUtilityTheta static_utility_theta = StaticUtilityTheta::prior_draw;
    SignalBank signals;
    BaselineInfo baselines;
    double first_decision_time = 1.0;
    double evaluation_interval = 90.0;

    std::size_t n_products() const { return demand.requisition.n_products(); }
    std::vector<SupplierId> supplier_ids() const;
};

/// Generation times closer than this are separated: the later-scheduled one
/// moves to just after the other.
inline constexpr double kSimultaneityTolerance = 1e-9;

/// Same-time events run in this order.
enum class EventKind : int {
    order_delivery = 0,
    requisition_generation = 1,
    decision_point = 2,
    supplier_evaluation = 3,
    termination = 4,
};

const char* event_kind_name(EventKind kind);

struct Event {
    double time = 0.0;
    EventKind kind = EventKind::termination;
    std::uint64_t seq = 0;
    SiteId site;                 // requisition generation
    Day day = 0;                 // decision point
    std::size_t delivery = 0;    // order delivery: index into the pending deliveries
};

struct EventOrder {
    bool operator()(const Event& a, const Event& b) const;  // "a after b", for std::priority_queue
};

class EventQueue {
  public:
    void push(Event e);
    Event pop();
    const Event& top() const { return heap_.top(); }
    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }

  private:
    std::priority_queue<Event, std::vector<Event>, EventOrder> heap_;
    std::uint64_t next_seq_ = 0;
};

/// Queue bookkeeping around one decision point.
struct DayAudit {
    Day day = 1;
    std::size_t queue_before = 0;
    std::size_t generated = 0;  // line items enqueued since the previous decision point
    std::size_t ordered = 0;
    std::size_t deferred = 0;
    std::size_t queue_after = 0;
};

struct EvaluationRow {
    double time = 0.0;
    SupplierId supplier;
    std::size_t orders = 0;
    Vec3 mean_outcome = Vec3::Zero();  // over order days in the trailing 90 days
};

struct RunArtifacts {
    HistoryLedger ledger;
    RegretAccount regret;
    std::vector<DayAudit> days;
    std::vector<EvaluationRow> evaluations;
    std::uint64_t requisition_hash = 0;
    std::size_t decision_points = 0;
    std::size_t events = 0;
    std::size_t line_items = 0;
};

/// FNV-1a over site, time bits and items of every requisition.
std::uint64_t hash_requisitions(std::span<const Requisition> requisitions);

/// One replication under one policy. The RandomSource supplies every stream.
class Simulation {
  public:
    Simulation(const SimulationConfig& config, SupplierPolicy& policy, RandomSource& random,
               std::ostream* event_log = nullptr);

    /// Schedules the first generation per site, the first decision point,
    /// the first supplier evaluation and termination.
    void initialize();
    /// Pops and handles one event. Returns false once termination ran.
    bool step();
    RunArtifacts run();

    const EventQueue& queue() const { return queue_; }
    const HistoryLedger& ledger() const { return ledger_; }
    const SimulationClock& clock() const { return clock_; }
    bool halted() const { return halted_; }

  private:
    DemandEnvironment environment() const;
    void schedule_generation(SiteId site, double after);
    void on_generation(const Event& e);
    void on_decision(const Event& e);
    void on_evaluation(const Event& e);
    void on_delivery(const Event& e);
    void log(const Event& e);

    const SimulationConfig& config_;
    SupplierPolicy& policy_;
    RandomSource& random_;
    std::ostream* event_log_;

    EventQueue queue_;
    SimulationClock clock_;
    HistoryLedger ledger_;
    UnresolvedQueue unresolved_;
    RegretAccount regret_;
    DemandState demand_state_;
    OperationsModels ops_;
    std::vector<DeliveryEntry> pending_deliveries_;
    std::multiset<double> generation_times_;  // pending generation events
    std::vector<DayAudit> days_;
    std::vector<EvaluationRow> evaluations_;
    std::vector<int> day_line_counter_;
    std::size_t generated_since_decision_ = 0;
    std::size_t decision_points_ = 0;
    std::size_t events_ = 0;
    std::size_t line_items_ = 0;
    std::uint64_t next_requisition_id_ = 1;
    bool initialized_ = false;
    bool halted_ = false;
};

enum class PolicyKind { fixed, random, static_utility, bandit, oracle, logit };

struct PolicySpec {
    PolicyKind kind = PolicyKind::random;
    SupplierId fixed_supplier{1};
    SupplierUtilityModel logit;  // logit policy only

    std::string name() const;
    static PolicySpec parse(const std::string& name);
};

/// Static-utility parameters read off the true law: long-run level
/// (I - A1 - A2)^-1 c and long-run seasonal gain (I - A1 - A2)^-1 h per pair.
Eigen::VectorXd seasonal_projection_theta(const OutcomeModel& model);

/// Builds a fresh policy for one replication. The static-utility policy draws
/// its parameter vector here, from the policy stream of `random`.
std::unique_ptr<SupplierPolicy> make_policy(const PolicySpec& spec, const SimulationConfig& config,
                                            RandomSource& random);

/// Runs one replication of `policy` with all streams derived from `seed`.
RunArtifacts run_simulation(const SimulationConfig& config, const PolicySpec& policy, std::uint64_t seed,
                            std::ostream* event_log = nullptr);

}  // namespace procsim
