#pragma once

#include <Eigen/Core>

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace procsim {

/// Raised when a caller breaks an operation's precondition.
class ContractViolation : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

/// Dense, 1-based identifier. The tag keeps sites, products and suppliers apart.
template <class Tag>
struct StrongId {
    int value = 0;

    constexpr StrongId() = default;
    constexpr explicit StrongId(int v) : value(v) {}

    constexpr std::size_t index() const { return static_cast<std::size_t>(value - 1); }
    constexpr auto operator<=>(const StrongId&) const = default;
};

using SiteId = StrongId<struct SiteTag>;
using ProductId = StrongId<struct ProductTag>;
using SupplierId = StrongId<struct SupplierTag>;

/// Calendar day index; day l covers continuous time [l-1, l).
using Day = int;

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

Day day_of(double t);

struct LineItem {
    ProductId product;
    int quantity = 1;
};

enum class DeliveryMode { local, stores };

struct Requisition {
    std::uint64_t id = 0;
    SiteId site;
    double event_time = 0.0;
    std::vector<LineItem> items;
    DeliveryMode mode = DeliveryMode::local;
    bool urgent = false;
};

struct RequestRef {
    Day origin_day = 1;
    int line_index = 1;  // ordinal among the line items generated on origin_day
    double event_time = 0.0;
    int item_index = 1;  // position inside the requisition
    std::uint64_t requisition_id = 0;
    SiteId site;
    ProductId product;
    int quantity = 1;
    DeliveryMode mode = DeliveryMode::local;
    bool urgent = false;

    /// Sequence key: (event_time, item_index), then requisition id for exact ties.
    bool precedes(const RequestRef& other) const;
};

struct DecisionRecord {
    bool order = false;
    std::optional<SupplierId> supplier;

    static DecisionRecord defer() { return {}; }
    static DecisionRecord place(SupplierId s) { return {true, s}; }
};

struct OutcomeRecord {
    double unit_cost = 0.0;
    double lead_cost = 0.0;
    double quality_cost = 0.0;

    Vec3 as_vector() const { return {unit_cost, lead_cost, quality_cost}; }
    static OutcomeRecord from_vector(const Vec3& v) { return {v[0], v[1], v[2]}; }
};

class SimulationClock {
  public:
    double now() const { return now_; }
    Day day() const { return day_of(now_); }
    void advance_to(double t);

  private:
    double now_ = 0.0;
};

/// The set of line items awaiting an order decision, kept in arrival order.
class UnresolvedQueue {
  public:
    void push(const RequestRef& ref);
    /// Removes the refs at the given positions of the ordered view.
    void erase_positions(std::span<const std::size_t> positions);
    std::vector<RequestRef> in_order() const;
    std::size_t size() const { return refs_.size(); }
    bool empty() const { return refs_.empty(); }
    /// Number of distinct requisitions with at least one unresolved line item.
    std::size_t requisition_count() const;

  private:
    std::vector<RequestRef> refs_;  // sorted by sequence key
};

std::vector<RequestRef> unresolved_in_order(const UnresolvedQueue& queue);

struct OrderEntry {
    Day day = 1;
    RequestRef ref;
    SupplierId supplier;
    OutcomeRecord outcome;
    Vec3 noise = Vec3::Zero();
};

struct DeliveryEntry {
    double time = 0.0;
    SiteId site;
    ProductId product;
    SupplierId supplier;
    int quantity = 0;
    double quality_cost = 0.0;
};

struct DecisionEntry {
    Day day = 1;
    RequestRef ref;
    DecisionRecord decision;
};

/// Append-only record of requisitions, decisions, orders and deliveries.
///
/// Orders placed on day l are visible to queries made on day l+1 onward.
/// Requisitions and deliveries are visible from their own timestamp.
/// Rolling windows are served from per-key cumulative series, so each
/// query is a pair of binary searches.
class HistoryLedger {
  public:
    HistoryLedger(std::size_t n_sites, std::size_t n_products, std::size_t n_suppliers);

    void append_requisition(const Requisition& req);
    void append_decision(const DecisionEntry& entry);
    void append_order(const OrderEntry& entry);
    void append_delivery(const DeliveryEntry& entry);

    std::span<const Requisition> requisitions() const { return requisitions_; }
    std::span<const DecisionEntry> decisions() const { return decisions_; }
    std::span<const OrderEntry> orders() const { return orders_; }
    std::span<const DeliveryEntry> deliveries() const { return deliveries_; }

    std::size_t n_sites() const { return n_sites_; }
    std::size_t n_products() const { return n_products_; }
    std::size_t n_suppliers() const { return n_suppliers_; }

    // Requisition-side queries; windows are (time - window, time].
    std::size_t requisitions_in_window(SiteId site, double time, double window) const;
    std::size_t product_requests_in_window(SiteId site, ProductId product, double time,
                                           double window) const;
    long product_quantity_requested_in_window(SiteId site, ProductId product, double time,
                                              double window) const;
    std::optional<double> last_request_time(SiteId site, ProductId product, double time) const;

    // Delivery-side queries.
    std::optional<DeliveryEntry> last_delivery(SiteId site, double time) const;
    std::optional<DeliveryEntry> last_delivery(SiteId site, ProductId product, double time) const;
    long product_quantity_delivered_in_window(SiteId site, ProductId product, double time,
                                              double window) const;

    // Order-side queries at decision day `day`: orders with order day in
    // [day - window, day - 1], or all orders before `day` for totals.
    long supplier_volume_in_window(SupplierId supplier, Day day, int window) const;
    long supplier_total_volume(SupplierId supplier, Day day) const;
    long pair_total_volume(ProductId product, SupplierId supplier, Day day) const;
    /// lag-th most recent order of the pair visible on `day` (lag = 1 is the latest).
    const OrderEntry* recent_order(ProductId product, SupplierId supplier, Day day,
                                   int lag = 1) const;
    std::optional<Vec3> average_outcome(ProductId product, SupplierId supplier, Day day) const;
    std::size_t visible_order_count(ProductId product, SupplierId supplier, Day day) const;
    /// Mean unit cost of the product's last `n` visible orders, any supplier.
    std::optional<double> recent_unit_cost(ProductId product, Day day, int n) const;
    /// Orders with order day in [first, last].
    std::span<const OrderEntry> orders_between(Day first, Day last) const;

  private:
    struct TimeSeries {
        std::vector<double> times;
        std::vector<long> cumulative;  // running sum of quantities
        void push(double t, long q);
        long sum_in(double lo_exclusive, double hi_inclusive) const;
        std::size_t count_in(double lo_exclusive, double hi_inclusive) const;
    };
    struct PairHistory {
        std::vector<std::size_t> order_positions;
        std::vector<Vec3> cumulative_outcome;
        std::vector<long> cumulative_quantity;
    };

    std::size_t site_product(SiteId s, ProductId p) const;
    std::size_t pair_index(ProductId p, SupplierId s) const;
    void check_site(SiteId s) const;
    void check_product(ProductId p) const;
    void check_supplier(SupplierId s) const;
    std::size_t visible_orders_of_pair(const PairHistory& h, Day day) const;

    std::size_t n_sites_;
    std::size_t n_products_;
    std::size_t n_suppliers_;

    std::vector<Requisition> requisitions_;
    std::vector<DecisionEntry> decisions_;
    std::vector<OrderEntry> orders_;
    std::vector<DeliveryEntry> deliveries_;

    std::vector<TimeSeries> site_requisitions_;
    std::vector<TimeSeries> site_product_requests_;
    std::vector<TimeSeries> site_product_deliveries_;
    std::vector<std::vector<std::size_t>> site_delivery_positions_;
    std::vector<std::vector<std::size_t>> site_product_delivery_positions_;
    std::vector<TimeSeries> supplier_orders_;  // keyed by order day
    std::vector<PairHistory> pairs_;
    std::vector<std::vector<std::size_t>> product_orders_;
    std::vector<Day> order_days_;
};

}  // namespace procsim
