#include "procsim/engine.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <ostream>

namespace procsim {

std::vector<SupplierId> SimulationConfig::supplier_ids() const {
    std::vector<SupplierId> ids;
    for (std::size_t s = 1; s <= n_suppliers; ++s) ids.emplace_back(static_cast<int>(s));
    return ids;
}

const char* event_kind_name(EventKind kind) {
    switch (kind) {
        case EventKind::order_delivery: return "order_delivery";
        case EventKind::requisition_generation: return "requisition_generation";
        case EventKind::decision_point: return "decision_point";
        case EventKind::supplier_evaluation: return "supplier_evaluation";
        case EventKind::termination: return "termination";
    }
    return "unknown";
}

bool EventOrder::operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    if (a.kind != b.kind) return static_cast<int>(a.kind) > static_cast<int>(b.kind);
    return a.seq > b.seq;
}

void EventQueue::push(Event e) {
    e.seq = next_seq_++;
    heap_.push(e);
}

Event EventQueue::pop() {
    if (heap_.empty()) throw ContractViolation("EventQueue: pop from an empty queue");
    Event e = heap_.top();
    heap_.pop();
    return e;
}

namespace {

struct Fnv1a {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    void add(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xffU;
            h *= 0x100000001b3ULL;
        }
    }
};

void write_double(std::ostream& os, double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    os.write(buf, res.ptr - buf);
}

}  // namespace

std::uint64_t hash_requisitions(std::span<const Requisition> requisitions) {
    Fnv1a f;
    for (const auto& r : requisitions) {
        f.add(static_cast<std::uint64_t>(r.site.value));
        f.add(std::bit_cast<std::uint64_t>(r.event_time));
        f.add(static_cast<std::uint64_t>(r.mode));
        f.add(r.urgent ? 1 : 0);
        f.add(r.items.size());
        for (const auto& item : r.items) {
            f.add(static_cast<std::uint64_t>(item.product.value));
            f.add(static_cast<std::uint64_t>(item.quantity));
        }
    }
    return f.h;
}

Simulation::Simulation(const SimulationConfig& config, SupplierPolicy& policy, RandomSource& random,
                       std::ostream* event_log)
    : config_(config),
      policy_(policy),
      random_(random),
      event_log_(event_log),
      ledger_(config.n_sites, config.n_products(), config.n_suppliers),
      regret_(config.horizon),
      day_line_counter_(static_cast<std::size_t>(config.horizon) + 2, 0) {
    if (config.horizon < 1) throw ContractViolation("simulation: horizon must be at least one day");
    if (config.n_sites < 1) throw ContractViolation("simulation: at least one site is required");
    ops_.order = &config_.order;
    ops_.outcome = &config_.outcome;
    ops_.lead_time = config_.lead_time;
    ops_.weights = config_.weights;
    ops_.regret_mode = config_.regret_mode;
    ops_.suppliers = config_.supplier_ids();
    ops_.signals = &config_.signals;
    ops_.baselines = &config_.baselines;
    ops_.horizon = static_cast<double>(config_.horizon);
}

DemandEnvironment Simulation::environment() const {
    return DemandEnvironment{&ledger_, &config_.signals, &config_.baselines, static_cast<double>(config_.horizon)};
}

void Simulation::schedule_generation(SiteId site, double after) {
    auto& rng = random_.stream(StreamPurpose::demand_timing, static_cast<std::uint64_t>(site.value));
    const auto t = next_request_time(config_.demand.intensity, demand_state_.intensity_frailty[site.index()], site,
                                     after, static_cast<double>(config_.horizon), environment(), rng);
    if (!t) return;
    double when = *t;
    for (;;) {
        auto it = generation_times_.upper_bound(when + kSimultaneityTolerance);
        if (it == generation_times_.begin()) break;
        --it;
        if (*it < when - kSimultaneityTolerance) break;
        when = *it + kSimultaneityTolerance;
    }
    if (when > static_cast<double>(config_.horizon)) return;
    generation_times_.insert(when);
    Event e;
    e.time = when;
    e.kind = EventKind::requisition_generation;
    e.site = site;
    queue_.push(e);
}

void Simulation::initialize() {
    if (initialized_) throw ContractViolation("simulation: initialize called twice");
    initialized_ = true;
    demand_state_ = draw_demand_state(config_.demand, config_.n_sites, random_.stream(StreamPurpose::setup));
    for (std::size_t i = 1; i <= config_.n_sites; ++i) schedule_generation(SiteId(static_cast<int>(i)), 0.0);

    const auto tau = static_cast<double>(config_.horizon);
    if (config_.first_decision_time <= tau) {
        Event d;
        d.time = config_.first_decision_time;
        d.kind = EventKind::decision_point;
        d.day = static_cast<Day>(std::lround(config_.first_decision_time));
        queue_.push(d);
    }
    if (config_.evaluation_interval > 0.0 && config_.evaluation_interval <= tau) {
        Event s;
        s.time = config_.evaluation_interval;
        s.kind = EventKind::supplier_evaluation;
        queue_.push(s);
    }
    Event end;
    end.time = tau;
    end.kind = EventKind::termination;
    queue_.push(end);
}

void Simulation::log(const Event& e) {
    if (event_log_ == nullptr) return;
    auto& os = *event_log_;
    os << "{\"t\":";
    write_double(os, e.time);
    os << ",\"kind\":\"" << event_kind_name(e.kind) << '"';
    switch (e.kind) {
        case EventKind::requisition_generation: os << ",\"site\":" << e.site.value; break;
        case EventKind::decision_point: os << ",\"day\":" << e.day; break;
        case EventKind::order_delivery: {
            const auto& d = pending_deliveries_[e.delivery];
            os << ",\"site\":" << d.site.value << ",\"product\":" << d.product.value
               << ",\"supplier\":" << d.supplier.value;
            break;
        }
        default: break;
    }
    os << "}\n";
}

bool Simulation::step() {
    if (!initialized_) initialize();
    if (halted_) return false;
    if (queue_.empty()) throw ContractViolation("simulation: event queue ran dry before termination");
    const Event e = queue_.pop();
    if (e.time < clock_.now()) throw ContractViolation("simulation: event earlier than the clock");
    clock_.advance_to(e.time);
    ++events_;
    log(e);
    switch (e.kind) {
        case EventKind::requisition_generation: on_generation(e); break;
        case EventKind::decision_point: on_decision(e); break;
        case EventKind::supplier_evaluation: on_evaluation(e); break;
        case EventKind::order_delivery: on_delivery(e); break;
        case EventKind::termination: halted_ = true; break;
    }
    return !halted_;
}

void Simulation::on_generation(const Event& e) {
    generation_times_.erase(generation_times_.find(e.time));
    auto& rng = random_.stream(StreamPurpose::requisition_content, static_cast<std::uint64_t>(e.site.value));
    Requisition req = generate_requisition(config_.demand.requisition, demand_state_, e.site, e.time, environment(),
                                           rng, next_requisition_id_++);
    ledger_.append_requisition(req);

    const Day origin = day_of(e.time);
    auto& counter = day_line_counter_[std::min(static_cast<std::size_t>(origin), day_line_counter_.size() - 1)];
    for (std::size_t k = 0; k < req.items.size(); ++k) {
        RequestRef ref;
        ref.origin_day = origin;
        ref.line_index = ++counter;
        ref.event_time = req.event_time;
        ref.item_index = static_cast<int>(k + 1);
        ref.requisition_id = req.id;
        ref.site = req.site;
        ref.product = req.items[k].product;
        ref.quantity = req.items[k].quantity;
        ref.mode = req.mode;
        ref.urgent = req.urgent;
        unresolved_.push(ref);
    }
    generated_since_decision_ += req.items.size();
    line_items_ += req.items.size();
    schedule_generation(e.site, e.time);
}

void Simulation::on_decision(const Event& e) {
    const Day day = e.day;
    DayAudit audit;
    audit.day = day;
    audit.generated = generated_since_decision_;
    generated_since_decision_ = 0;

    DayStreams streams{random_.stream(StreamPurpose::order_propensity), random_.stream(StreamPurpose::outcome_noise),
                       random_.stream(StreamPurpose::policy_internal)};
    DayResult result = process_day(day, unresolved_, ledger_, policy_, ops_, streams);
    policy_.end_of_day();

    audit.queue_before = result.queue_before;
    audit.ordered = result.orders.size();
    audit.deferred = result.decisions.size() - result.orders.size();
    audit.queue_after = result.queue_after;
    days_.push_back(audit);
    ++decision_points_;

    for (const auto& order : result.orders) {
        regret_.record(day, order.regret);
        const double arrival = static_cast<double>(day) + order.lead_days;
        if (arrival > static_cast<double>(config_.horizon)) continue;
        pending_deliveries_.push_back(DeliveryEntry{arrival, order.ref.site, order.ref.product, order.supplier,
                                                    order.ref.quantity, order.sample.outcome.quality_cost});
        Event d;
        d.time = arrival;
        d.kind = EventKind::order_delivery;
        d.delivery = pending_deliveries_.size() - 1;
        queue_.push(d);
    }

    if (day < config_.horizon) {
        Event next;
        next.time = e.time + 1.0;
        next.kind = EventKind::decision_point;
        next.day = day + 1;
        queue_.push(next);
    }
}

void Simulation::on_evaluation(const Event& e) {
    const Day day = day_of(e.time);
    const auto window = static_cast<int>(std::lround(config_.evaluation_interval));
    const auto orders = ledger_.orders_between(std::max(1, day - window), day - 1);
    for (auto s : ops_.suppliers) {
        EvaluationRow row;
        row.time = e.time;
        row.supplier = s;
        for (const auto& o : orders) {
            if (o.supplier != s) continue;
            row.mean_outcome += o.outcome.as_vector();
            ++row.orders;
        }
        if (row.orders > 0) row.mean_outcome /= static_cast<double>(row.orders);
        evaluations_.push_back(row);
    }
    const double next = e.time + config_.evaluation_interval;
    if (next <= static_cast<double>(config_.horizon)) {
        Event n;
        n.time = next;
        n.kind = EventKind::supplier_evaluation;
        queue_.push(n);
    }
}

void Simulation::on_delivery(const Event& e) { ledger_.append_delivery(pending_deliveries_[e.delivery]); }

RunArtifacts Simulation::run() {
    while (step()) {
    }
    RunArtifacts out{ledger_, regret_, days_, evaluations_, hash_requisitions(ledger_.requisitions()),
                     decision_points_, events_, line_items_};
    return out;
}

std::string PolicySpec::name() const {
    switch (kind) {
        case PolicyKind::fixed: return "fixed-" + std::to_string(fixed_supplier.value);
        case PolicyKind::random: return "random";
        case PolicyKind::static_utility: return "static-utility";
        case PolicyKind::bandit: return "bandit";
        case PolicyKind::oracle: return "oracle";
        case PolicyKind::logit: return "logit";
    }
    return "unknown";
}

PolicySpec PolicySpec::parse(const std::string& name) {
    PolicySpec spec;
    if (name == "random") {
        spec.kind = PolicyKind::random;
    } else if (name == "static-utility" || name == "utility") {
        spec.kind = PolicyKind::static_utility;
    } else if (name == "bandit") {
        spec.kind = PolicyKind::bandit;
    } else if (name == "oracle") {
        spec.kind = PolicyKind::oracle;
    } else if (name == "logit") {
        spec.kind = PolicyKind::logit;
    } else if (name.rfind("fixed-", 0) == 0) {
        spec.kind = PolicyKind::fixed;
        const std::string digits = name.substr(6);
        int id = 0;
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), id);
        if (ec != std::errc{} || ptr != digits.data() + digits.size() || digits.empty() || id < 1) {
            throw ContractViolation("unknown policy '" + name + "'");
        }
        spec.fixed_supplier = SupplierId(id);
    } else {
        throw ContractViolation("unknown policy '" + name + "'");
    }
    return spec;
}

Eigen::VectorXd seasonal_projection_theta(const OutcomeModel& model) {
    const auto n_p = model.n_products();
    const auto n_s = model.n_suppliers();
    Eigen::VectorXd theta(static_cast<Eigen::Index>(n_p * n_s * 3 * 2));
    for (std::size_t p = 0; p < n_p; ++p) {
        for (std::size_t s = 0; s < n_s; ++s) {
            const auto& q = model.pair(ProductId(static_cast<int>(p + 1)), SupplierId(static_cast<int>(s + 1)));
            const Vec3 level = var2_stationary_mean(q.ar1, q.ar2, q.intercept);
            const Vec3 seasonal =
                var2_stationary_mean(q.ar1, q.ar2, q.harmonic_loading * model.harmonic.amplitude);
            for (int c = 0; c < 3; ++c) {
                const auto base = static_cast<Eigen::Index>(((p * n_s + s) * 3 + static_cast<std::size_t>(c)) * 2);
                theta[base] = level[c];
                theta[base + 1] = seasonal[c];
            }
        }
    }
    return theta;
}

std::unique_ptr<SupplierPolicy> make_policy(const PolicySpec& spec, const SimulationConfig& config,
                                            RandomSource& random) {
    switch (spec.kind) {
        case PolicyKind::fixed:
            if (spec.fixed_supplier.index() >= config.n_suppliers) {
                throw ContractViolation("policy " + spec.name() + ": no such supplier");
            }
            return std::make_unique<FixedPolicy>(spec.fixed_supplier);
        case PolicyKind::random: return std::make_unique<RandomPolicy>();
        case PolicyKind::static_utility:
            if (config.static_utility_theta == StaticUtilityTheta::seasonal_projection) {
                return std::make_unique<StaticUtilityPolicy>(seasonal_projection_theta(config.outcome),
                                                             config.n_suppliers, config.weights);
            }
            return std::make_unique<StaticUtilityPolicy>(StaticUtilityPolicy::from_prior(
                config.n_products(), config.n_suppliers, config.bandit.prior_variance, config.weights,
                random.stream(StreamPurpose::policy_internal, 1)));
        case PolicyKind::bandit:
            return std::make_unique<ThompsonPolicy>(config.n_products(), config.n_suppliers, config.bandit,
                                                    config.weights);
        case PolicyKind::oracle: return std::make_unique<OraclePolicy>();
        case PolicyKind::logit: return std::make_unique<LogitPolicy>(spec.logit);
    }
    throw ContractViolation("unknown policy kind");
}

RunArtifacts run_simulation(const SimulationConfig& config, const PolicySpec& spec, std::uint64_t seed,
                            std::ostream* event_log) {
    RandomSource random(seed);
    auto policy = make_policy(spec, config, random);
    Simulation sim(config, *policy, random, event_log);
    return sim.run();
}

}  // namespace procsim
