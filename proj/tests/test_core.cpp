#include "procsim/core.hpp"
#include "procsim/stochastic.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace procsim;

namespace {

Requisition make_req(std::uint64_t id, int site, double t, std::vector<LineItem> items) {
    Requisition r;
    r.id = id;
    r.site = SiteId(site);
    r.event_time = t;
    r.items = std::move(items);
    return r;
}

RequestRef make_ref(double t, int item, std::uint64_t req = 1) {
    RequestRef r;
    r.event_time = t;
    r.origin_day = day_of(t);
    r.item_index = item;
    r.requisition_id = req;
    r.site = SiteId(1);
    r.product = ProductId(1);
    return r;
}

}  // namespace

TEST_CASE("day_of maps continuous time to 1-based days") {
    CHECK(day_of(0.0) == 1);
    CHECK(day_of(0.5) == 1);
    CHECK(day_of(364.99) == 365);
    CHECK(day_of(1.0) == 2);
    CHECK_THROWS_AS(day_of(-0.1), ContractViolation);

    // Monotone and onto {1..365} on [0, 365).
    Day prev = 1;
    std::vector<bool> hit(366, false);
    for (double t = 0.0; t < 365.0; t += 0.25) {
        const Day d = day_of(t);
        CHECK(d >= prev);
        prev = d;
        hit[static_cast<std::size_t>(d)] = true;
    }
    CHECK(std::all_of(hit.begin() + 1, hit.end(), [](bool b) { return b; }));
}

TEST_CASE("clock refuses to move backwards") {
    SimulationClock c;
    c.advance_to(2.5);
    CHECK(c.day() == 3);
    c.advance_to(2.5);
    CHECK_THROWS_AS(c.advance_to(1.0), ContractViolation);
}

TEST_CASE("unresolved queue keeps arrival order") {
    UnresolvedQueue q;
    CHECK(unresolved_in_order(q).empty());

    q.push(make_ref(2.5, 1, 3));
    q.push(make_ref(1.3, 2, 2));
    q.push(make_ref(1.3, 1, 2));
    auto v = unresolved_in_order(q);
    REQUIRE(v.size() == 3);
    CHECK(v[0].event_time == 1.3);
    CHECK(v[0].item_index == 1);
    CHECK(v[1].event_time == 1.3);
    CHECK(v[1].item_index == 2);
    CHECK(v[2].event_time == 2.5);
    CHECK(q.requisition_count() == 2);

    // An item deferred on day 2 stays ahead of anything generated on day 3.
    UnresolvedQueue carry;
    carry.push(make_ref(1.7, 1, 1));
    carry.push(make_ref(1.9, 1, 2));
    const std::size_t ordered[] = {1};
    carry.erase_positions(ordered);
    carry.push(make_ref(2.2, 1, 3));
    carry.push(make_ref(2.1, 2, 4));
    auto after = unresolved_in_order(carry);
    REQUIRE(after.size() == 3);
    CHECK(after[0].requisition_id == 1);
    CHECK(after[0].origin_day == 2);
    CHECK(after[1].origin_day == 3);
}

TEST_CASE("ledger read-back and empty cases") {
    HistoryLedger ledger(2, 3, 2);
    CHECK(ledger.requisitions_in_window(SiteId(1), 100.0, 365.0) == 0);
    CHECK_FALSE(ledger.last_delivery(SiteId(1), ProductId(2), 12.0).has_value());

    ledger.append_delivery(DeliveryEntry{10.0, SiteId(1), ProductId(2), SupplierId(1), 4, 3.0});
    auto d = ledger.last_delivery(SiteId(1), ProductId(2), 12.0);
    REQUIRE(d.has_value());
    CHECK(d->time == 10.0);
    CHECK(d->quality_cost == 3.0);
    CHECK_FALSE(ledger.last_delivery(SiteId(1), ProductId(2), 9.0).has_value());
    CHECK(ledger.product_quantity_delivered_in_window(SiteId(1), ProductId(2), 12.0, 365.0) == 4);

    for (int day = 1; day <= 5; ++day) {
        ledger.append_requisition(make_req(static_cast<std::uint64_t>(day), 1, day - 0.5, {{ProductId(1), 1}}));
    }
    CHECK(ledger.requisitions_in_window(SiteId(1), 5.0, 365.0) == 5);
    CHECK(ledger.requisitions_in_window(SiteId(2), 5.0, 365.0) == 0);
}

TEST_CASE("ledger rejects out-of-order appends") {
    HistoryLedger ledger(1, 1, 1);
    ledger.append_requisition(make_req(1, 1, 5.0, {{ProductId(1), 1}}));
    ledger.append_requisition(make_req(2, 1, 5.0, {{ProductId(1), 1}}));
    CHECK_THROWS_AS(ledger.append_requisition(make_req(3, 1, 4.0, {{ProductId(1), 1}})), ContractViolation);

    OrderEntry o;
    o.day = 3;
    o.ref = make_ref(2.0, 1);
    o.supplier = SupplierId(1);
    ledger.append_order(o);
    o.day = 2;
    CHECK_THROWS_AS(ledger.append_order(o), ContractViolation);
}

TEST_CASE("orders become visible the next day") {
    HistoryLedger ledger(1, 1, 2);
    OrderEntry o;
    o.day = 4;
    o.ref = make_ref(3.2, 1);
    o.ref.quantity = 6;
    o.supplier = SupplierId(2);
    o.outcome = {10.0, 5.0, 1.0};
    ledger.append_order(o);
    CHECK(ledger.recent_order(ProductId(1), SupplierId(2), 4) == nullptr);
    REQUIRE(ledger.recent_order(ProductId(1), SupplierId(2), 5) != nullptr);
    CHECK(ledger.recent_order(ProductId(1), SupplierId(2), 5)->outcome.unit_cost == 10.0);
    CHECK(ledger.supplier_volume_in_window(SupplierId(2), 4, 90) == 0);
    CHECK(ledger.supplier_volume_in_window(SupplierId(2), 5, 90) == 6);
    CHECK(ledger.supplier_volume_in_window(SupplierId(2), 95, 90) == 0);
    CHECK(ledger.supplier_volume_in_window(SupplierId(2), 94, 90) == 6);
}

TEST_CASE("ledger aggregates equal brute-force recomputation") {
    const std::size_t n_sites = 3;
    const std::size_t n_products = 3;
    const std::size_t n_suppliers = 2;
    HistoryLedger ledger(n_sites, n_products, n_suppliers);
    RandomStream rng(42);

    std::vector<Requisition> reqs;
    std::vector<OrderEntry> orders;
    std::vector<DeliveryEntry> deliveries;
    double t = 0.0;
    std::uint64_t id = 1;
    for (int e = 0; e < 1000; ++e) {
        t += rng.exponential(1.0 / 0.35);
        const int site = 1 + static_cast<int>(rng.uniform() * n_sites);
        const int product = 1 + static_cast<int>(rng.uniform() * n_products);
        const int supplier = 1 + static_cast<int>(rng.uniform() * n_suppliers);
        const int q = 1 + static_cast<int>(rng.uniform() * 4);
        const double kind = rng.uniform();
        if (kind < 0.4) {
            auto r = make_req(id++, site, t, {{ProductId(product), q}});
            ledger.append_requisition(r);
            reqs.push_back(r);
        } else if (kind < 0.8) {
            OrderEntry o;
            o.day = day_of(t);
            o.ref = make_ref(t, 1);
            o.ref.site = SiteId(site);
            o.ref.product = ProductId(product);
            o.ref.quantity = q;
            o.supplier = SupplierId(supplier);
            o.outcome = {rng.normal() * 5 + 50, rng.normal() + 10, rng.normal() + 3};
            ledger.append_order(o);
            orders.push_back(o);
        } else {
            DeliveryEntry d{t, SiteId(site), ProductId(product), SupplierId(supplier), q, rng.normal()};
            ledger.append_delivery(d);
            deliveries.push_back(d);
        }
    }

    for (int probe = 0; probe < 200; ++probe) {
        const double qt = rng.uniform() * (t + 10.0);
        const Day qd = day_of(qt);
        const SiteId s(1 + static_cast<int>(rng.uniform() * n_sites));
        const ProductId p(1 + static_cast<int>(rng.uniform() * n_products));
        const SupplierId k(1 + static_cast<int>(rng.uniform() * n_suppliers));
        const double w = 30.0 + rng.uniform() * 300.0;
        const int wd = 1 + static_cast<int>(rng.uniform() * 200);

        std::size_t n_req = 0;
        std::size_t n_prod_req = 0;
        long q_req = 0;
        std::optional<double> last_req;
        for (const auto& r : reqs) {
            if (r.site != s || !(r.event_time > qt - w && r.event_time <= qt)) continue;
            ++n_req;
            for (const auto& item : r.items) {
                if (item.product == p) {
                    ++n_prod_req;
                    q_req += item.quantity;
                }
            }
        }
        for (const auto& r : reqs) {
            if (r.site == s && r.event_time <= qt && r.items[0].product == p) last_req = r.event_time;
        }
        CHECK(ledger.requisitions_in_window(s, qt, w) == n_req);
        CHECK(ledger.product_requests_in_window(s, p, qt, w) == n_prod_req);
        CHECK(ledger.product_quantity_requested_in_window(s, p, qt, w) == q_req);
        CHECK(ledger.last_request_time(s, p, qt) == last_req);

        long vol = 0;
        long total = 0;
        long pair_total = 0;
        const OrderEntry* lag1 = nullptr;
        const OrderEntry* lag2 = nullptr;
        Vec3 sum = Vec3::Zero();
        std::size_t n_pair = 0;
        for (const auto& o : orders) {
            if (o.day >= qd) continue;
            if (o.supplier == k) {
                total += o.ref.quantity;
                if (o.day >= qd - wd) vol += o.ref.quantity;
            }
            if (o.supplier == k && o.ref.product == p) {
                pair_total += o.ref.quantity;
                lag2 = lag1;
                lag1 = &o;
                sum += o.outcome.as_vector();
                ++n_pair;
            }
        }
        CHECK(ledger.supplier_volume_in_window(k, qd, wd) == vol);
        CHECK(ledger.supplier_total_volume(k, qd) == total);
        CHECK(ledger.pair_total_volume(p, k, qd) == pair_total);
        CHECK(ledger.visible_order_count(p, k, qd) == n_pair);
        const auto* got1 = ledger.recent_order(p, k, qd, 1);
        const auto* got2 = ledger.recent_order(p, k, qd, 2);
        CHECK((got1 == nullptr) == (lag1 == nullptr));
        CHECK((got2 == nullptr) == (lag2 == nullptr));
        if (got1 && lag1) CHECK(got1->outcome.unit_cost == lag1->outcome.unit_cost);
        if (got2 && lag2) CHECK(got2->outcome.unit_cost == lag2->outcome.unit_cost);
        auto avg = ledger.average_outcome(p, k, qd);
        CHECK(avg.has_value() == (n_pair > 0));
        if (avg && n_pair > 0) CHECK((*avg - sum / static_cast<double>(n_pair)).norm() < 1e-9);

        std::optional<double> last_site;
        std::optional<double> last_pair;
        long delivered = 0;
        for (const auto& d : deliveries) {
            if (d.site != s || d.time > qt) continue;
            last_site = d.time;
            if (d.product == p) {
                last_pair = d.time;
                if (d.time > qt - w) delivered += d.quantity;
            }
        }
        auto ls = ledger.last_delivery(s, qt);
        auto lp = ledger.last_delivery(s, p, qt);
        CHECK(ls.has_value() == last_site.has_value());
        CHECK(lp.has_value() == last_pair.has_value());
        if (ls && last_site) CHECK(ls->time == *last_site);
        if (lp && last_pair) CHECK(lp->time == *last_pair);
        CHECK(ledger.product_quantity_delivered_in_window(s, p, qt, w) == delivered);
    }
}
