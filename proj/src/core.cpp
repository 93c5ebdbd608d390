#include "procsim/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace procsim {

Day day_of(double t) {
    if (!(t >= 0.0)) {
        throw ContractViolation("day_of: negative or NaN time");
    }
    return static_cast<Day>(std::floor(t)) + 1;
}

bool RequestRef::precedes(const RequestRef& other) const {
    if (event_time != other.event_time) return event_time < other.event_time;
    if (item_index != other.item_index) return item_index < other.item_index;
    return requisition_id < other.requisition_id;
}

void SimulationClock::advance_to(double t) {
    if (t < now_) {
        throw ContractViolation("SimulationClock: time moved backwards");
    }
    now_ = t;
}

void UnresolvedQueue::push(const RequestRef& ref) {
    auto pos = std::upper_bound(refs_.begin(), refs_.end(), ref,
                                [](const RequestRef& a, const RequestRef& b) { return a.precedes(b); });
    refs_.insert(pos, ref);
}

void UnresolvedQueue::erase_positions(std::span<const std::size_t> positions) {
    std::vector<bool> drop(refs_.size(), false);
    for (auto p : positions) {
        if (p >= refs_.size()) throw ContractViolation("UnresolvedQueue: position out of range");
        drop[p] = true;
    }
    std::size_t w = 0;
    for (std::size_t r = 0; r < refs_.size(); ++r) {
        if (!drop[r]) refs_[w++] = refs_[r];
    }
    refs_.resize(w);
}

std::vector<RequestRef> UnresolvedQueue::in_order() const { return refs_; }

std::size_t UnresolvedQueue::requisition_count() const {
    std::set<std::uint64_t> ids;
    for (const auto& r : refs_) ids.insert(r.requisition_id);
    return ids.size();
}

std::vector<RequestRef> unresolved_in_order(const UnresolvedQueue& queue) { return queue.in_order(); }

// --- HistoryLedger ---------------------------------------------------------

void HistoryLedger::TimeSeries::push(double t, long q) {
    times.push_back(t);
    cumulative.push_back((cumulative.empty() ? 0 : cumulative.back()) + q);
}

std::size_t HistoryLedger::TimeSeries::count_in(double lo, double hi) const {
    auto first = std::upper_bound(times.begin(), times.end(), lo);
    auto last = std::upper_bound(times.begin(), times.end(), hi);
    return last > first ? static_cast<std::size_t>(last - first) : 0;
}

long HistoryLedger::TimeSeries::sum_in(double lo, double hi) const {
    auto first = static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), lo) - times.begin());
    auto last = static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), hi) - times.begin());
    if (last <= first) return 0;
    long upper = cumulative[last - 1];
    long lower = first == 0 ? 0 : cumulative[first - 1];
    return upper - lower;
}

HistoryLedger::HistoryLedger(std::size_t n_sites, std::size_t n_products, std::size_t n_suppliers)
    : n_sites_(n_sites),
      n_products_(n_products),
      n_suppliers_(n_suppliers),
      site_requisitions_(n_sites),
      site_product_requests_(n_sites * n_products),
      site_product_deliveries_(n_sites * n_products),
      site_delivery_positions_(n_sites),
      site_product_delivery_positions_(n_sites * n_products),
      supplier_orders_(n_suppliers),
      pairs_(n_products * n_suppliers),
      product_orders_(n_products) {}

void HistoryLedger::check_site(SiteId s) const {
    if (s.value < 1 || s.index() >= n_sites_) throw ContractViolation("ledger: unknown site id");
}
void HistoryLedger::check_product(ProductId p) const {
    if (p.value < 1 || p.index() >= n_products_) throw ContractViolation("ledger: unknown product id");
}
void HistoryLedger::check_supplier(SupplierId s) const {
    if (s.value < 1 || s.index() >= n_suppliers_) throw ContractViolation("ledger: unknown supplier id");
}

std::size_t HistoryLedger::site_product(SiteId s, ProductId p) const {
    check_site(s);
    check_product(p);
    return s.index() * n_products_ + p.index();
}

std::size_t HistoryLedger::pair_index(ProductId p, SupplierId s) const {
    check_product(p);
    check_supplier(s);
    return p.index() * n_suppliers_ + s.index();
}

void HistoryLedger::append_requisition(const Requisition& req) {
    check_site(req.site);
    if (!requisitions_.empty() && req.event_time < requisitions_.back().event_time) {
        throw ContractViolation("ledger: out-of-order requisition append");
    }
    if (req.items.empty()) throw ContractViolation("ledger: requisition without line items");
    for (const auto& item : req.items) {
        if (item.quantity < 1) throw ContractViolation("ledger: line item quantity below 1");
        check_product(item.product);
    }
    requisitions_.push_back(req);
    site_requisitions_[req.site.index()].push(req.event_time, 1);
    for (const auto& item : req.items) {
        site_product_requests_[site_product(req.site, item.product)].push(req.event_time, item.quantity);
    }
}

void HistoryLedger::append_decision(const DecisionEntry& entry) {
    if (!decisions_.empty() && entry.day < decisions_.back().day) {
        throw ContractViolation("ledger: out-of-order decision append");
    }
    if (entry.decision.order != entry.decision.supplier.has_value()) {
        throw ContractViolation("ledger: supplier must be present iff an order is placed");
    }
    decisions_.push_back(entry);
}

void HistoryLedger::append_order(const OrderEntry& entry) {
    check_supplier(entry.supplier);
    if (!order_days_.empty() && entry.day < order_days_.back()) {
        throw ContractViolation("ledger: out-of-order order append");
    }
    auto& pair = pairs_[pair_index(entry.ref.product, entry.supplier)];
    orders_.push_back(entry);
    order_days_.push_back(entry.day);
    pair.order_positions.push_back(orders_.size() - 1);
    Vec3 prev = pair.cumulative_outcome.empty() ? Vec3::Zero() : pair.cumulative_outcome.back();
    pair.cumulative_outcome.push_back(prev + entry.outcome.as_vector());
    long prev_q = pair.cumulative_quantity.empty() ? 0 : pair.cumulative_quantity.back();
    pair.cumulative_quantity.push_back(prev_q + entry.ref.quantity);
    product_orders_[entry.ref.product.index()].push_back(orders_.size() - 1);
    supplier_orders_[entry.supplier.index()].push(static_cast<double>(entry.day), entry.ref.quantity);
}

void HistoryLedger::append_delivery(const DeliveryEntry& entry) {
    check_supplier(entry.supplier);
    auto sp = site_product(entry.site, entry.product);
    if (!deliveries_.empty() && entry.time < deliveries_.back().time) {
        throw ContractViolation("ledger: out-of-order delivery append");
    }
    deliveries_.push_back(entry);
    site_delivery_positions_[entry.site.index()].push_back(deliveries_.size() - 1);
    site_product_delivery_positions_[sp].push_back(deliveries_.size() - 1);
    site_product_deliveries_[sp].push(entry.time, entry.quantity);
}

std::size_t HistoryLedger::requisitions_in_window(SiteId site, double time, double window) const {
    check_site(site);
    return site_requisitions_[site.index()].count_in(time - window, time);
}

std::size_t HistoryLedger::product_requests_in_window(SiteId site, ProductId product, double time,
                                                      double window) const {
    return site_product_requests_[site_product(site, product)].count_in(time - window, time);
}

long HistoryLedger::product_quantity_requested_in_window(SiteId site, ProductId product, double time,
                                                         double window) const {
    return site_product_requests_[site_product(site, product)].sum_in(time - window, time);
}

std::optional<double> HistoryLedger::last_request_time(SiteId site, ProductId product, double time) const {
    const auto& ts = site_product_requests_[site_product(site, product)].times;
    auto it = std::upper_bound(ts.begin(), ts.end(), time);
    if (it == ts.begin()) return std::nullopt;
    return *std::prev(it);
}

namespace {
std::optional<DeliveryEntry> last_visible(const std::vector<std::size_t>& positions,
                                          std::span<const DeliveryEntry> all, double time) {
    auto it = std::upper_bound(positions.begin(), positions.end(), time,
                               [&](double t, std::size_t pos) { return t < all[pos].time; });
    if (it == positions.begin()) return std::nullopt;
    return all[*std::prev(it)];
}
}  // namespace

std::optional<DeliveryEntry> HistoryLedger::last_delivery(SiteId site, double time) const {
    check_site(site);
    return last_visible(site_delivery_positions_[site.index()], deliveries_, time);
}

std::optional<DeliveryEntry> HistoryLedger::last_delivery(SiteId site, ProductId product, double time) const {
    return last_visible(site_product_delivery_positions_[site_product(site, product)], deliveries_, time);
}

long HistoryLedger::product_quantity_delivered_in_window(SiteId site, ProductId product, double time,
                                                         double window) const {
    return site_product_deliveries_[site_product(site, product)].sum_in(time - window, time);
}

long HistoryLedger::supplier_volume_in_window(SupplierId supplier, Day day, int window) const {
    check_supplier(supplier);
    // Order days are integers: (day - window - 1, day - 1] == [day - window, day - 1].
    return supplier_orders_[supplier.index()].sum_in(static_cast<double>(day - window) - 0.5,
                                                     static_cast<double>(day) - 0.5);
}

long HistoryLedger::supplier_total_volume(SupplierId supplier, Day day) const {
    check_supplier(supplier);
    const auto& ts = supplier_orders_[supplier.index()];
    return ts.sum_in(-1.0, static_cast<double>(day) - 0.5);
}

std::size_t HistoryLedger::visible_orders_of_pair(const PairHistory& h, Day day) const {
    auto it = std::lower_bound(h.order_positions.begin(), h.order_positions.end(), day,
                               [&](std::size_t pos, Day d) { return orders_[pos].day < d; });
    return static_cast<std::size_t>(it - h.order_positions.begin());
}

long HistoryLedger::pair_total_volume(ProductId product, SupplierId supplier, Day day) const {
    const auto& h = pairs_[pair_index(product, supplier)];
    auto n = visible_orders_of_pair(h, day);
    return n == 0 ? 0 : h.cumulative_quantity[n - 1];
}

const OrderEntry* HistoryLedger::recent_order(ProductId product, SupplierId supplier, Day day, int lag) const {
    if (lag < 1) throw ContractViolation("recent_order: lag must be >= 1");
    const auto& h = pairs_[pair_index(product, supplier)];
    auto n = visible_orders_of_pair(h, day);
    if (static_cast<std::size_t>(lag) > n) return nullptr;
    return &orders_[h.order_positions[n - static_cast<std::size_t>(lag)]];
}

std::optional<Vec3> HistoryLedger::average_outcome(ProductId product, SupplierId supplier, Day day) const {
    const auto& h = pairs_[pair_index(product, supplier)];
    auto n = visible_orders_of_pair(h, day);
    if (n == 0) return std::nullopt;
    return Vec3(h.cumulative_outcome[n - 1] / static_cast<double>(n));
}

std::size_t HistoryLedger::visible_order_count(ProductId product, SupplierId supplier, Day day) const {
    return visible_orders_of_pair(pairs_[pair_index(product, supplier)], day);
}

std::optional<double> HistoryLedger::recent_unit_cost(ProductId product, Day day, int n) const {
    check_product(product);
    const auto& pos = product_orders_[product.index()];
    auto it = std::lower_bound(pos.begin(), pos.end(), day,
                               [&](std::size_t p, Day d) { return orders_[p].day < d; });
    auto visible = static_cast<std::size_t>(it - pos.begin());
    if (visible == 0 || n < 1) return std::nullopt;
    auto take = std::min(visible, static_cast<std::size_t>(n));
    double sum = 0.0;
    for (std::size_t i = visible - take; i < visible; ++i) sum += orders_[pos[i]].outcome.unit_cost;
    return sum / static_cast<double>(take);
}

std::span<const OrderEntry> HistoryLedger::orders_between(Day first, Day last) const {
    auto lo = std::lower_bound(order_days_.begin(), order_days_.end(), first) - order_days_.begin();
    auto hi = std::upper_bound(order_days_.begin(), order_days_.end(), last) - order_days_.begin();
    if (hi <= lo) return {};
    return std::span<const OrderEntry>(orders_).subspan(static_cast<std::size_t>(lo),
                                                        static_cast<std::size_t>(hi - lo));
}

}  // namespace procsim
