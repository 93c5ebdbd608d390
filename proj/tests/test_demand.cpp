#include "procsim/demand.hpp"

#include "support/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace procsim;

namespace {

RequisitionModel three_products() {
    RequisitionModel m;
    m.baseline_costs = {100.0, 50.0, 50.0};
    m.quantity.base_means = {0.1, 0.5, 0.5};
    m.product.utility_noise_variance = 1.0;
    return m;
}

std::vector<double> arrivals(const IntensityModel& model, double frailty, double horizon, RandomStream& rng) {
    DemandEnvironment env;
    env.horizon = horizon;
    std::vector<double> out;
    double t = 0.0;
    while (auto next = next_request_time(model, frailty, SiteId(1), t, horizon, env, rng)) {
        out.push_back(*next);
        t = *next;
        if (t >= horizon) break;
    }
    return out;
}

}  // namespace

TEST_CASE("intensity evaluation") {
    IntensityModel m;
    DemandEnvironment env;
    CHECK(intensity_at(m, 1.0, SiteId(1), 10.0, env) == doctest::Approx(1.0 / 90.0));
    CHECK(intensity_at(m, 2.0, SiteId(1), 10.0, env) == doctest::Approx(2.0 / 90.0));

    m.baseline = WeibullBaseline{2.0, 100.0};
    CHECK(intensity_at(m, 1.0, SiteId(1), 50.0, env) == doctest::Approx(0.01));

    SignalBank bank;
    bank["seasonal"] = ExogenousSignal{{HarmonicSignal{1.0, 365.0, 0.0}}, {}};
    env.signals = &bank;
    m.baseline = PiecewiseConstant::constant(0.01);
    m.features.terms.push_back({{"H4", "seasonal"}, std::nullopt, std::log(2.0)});
    CHECK(intensity_at(m, 1.0, SiteId(1), 365.0 / 4.0, env) == doctest::Approx(0.02));
    CHECK_THROWS_AS(intensity_at(m, 1.0, SiteId(1), -1.0, env), ContractViolation);

    PiecewiseConstant pc{{10.0, 20.0}, {1.0, 2.0, 3.0}};
    CHECK(pc.at(0.0) == 1.0);
    CHECK(pc.at(10.0) == 2.0);
    CHECK(pc.at(25.0) == 3.0);
    CHECK(pc.segment_end(5.0) == 10.0);
    CHECK(std::isinf(pc.segment_end(30.0)));
    CHECK_THROWS_AS((PiecewiseConstant{{10.0}, {1.0}}.validate()), ContractViolation);
    CHECK_THROWS_AS((PiecewiseConstant{{20.0, 10.0}, {1.0, 1.0, 1.0}}.validate()), ContractViolation);
}

TEST_CASE("homogeneous thinning gives exponential gaps") {
    IntensityModel m;
    m.bound = PiecewiseConstant::constant(1.0 / 30.0);  // loose bound, two in three candidates rejected
    RandomStream rng(21);
    auto times = arrivals(m, 1.0, 1e9, rng);
    REQUIRE(times.size() > 10000);
    times.resize(10001);
    std::vector<double> gaps;
    for (std::size_t i = 0; i + 1 < times.size(); ++i) gaps.push_back(times[i + 1] - times[i]);
    gaps.insert(gaps.begin(), times[0]);
    gaps.pop_back();
    CHECK(gaps.size() == 10000);
    CHECK(teststats::ks_pvalue(gaps, [](double x) { return 1.0 - std::exp(-x / 90.0); }) > 0.01);
    CHECK(teststats::mean(gaps) == doctest::Approx(90.0).epsilon(0.05));
}

TEST_CASE("piecewise intensity counts match their expectations") {
    IntensityModel m;
    m.baseline = PiecewiseConstant{{100.0, 200.0}, {0.02, 0.05, 0.01}};
    m.bound = PiecewiseConstant{{100.0, 200.0}, {0.03, 0.05, 0.02}};
    RandomStream rng(22);
    const int reps = 2000;
    std::vector<double> obs(3, 0.0);
    std::vector<double> per_run;
    for (int r = 0; r < reps; ++r) {
        auto times = arrivals(m, 1.0, 365.0, rng);
        for (double t : times) obs[t < 100.0 ? 0 : t < 200.0 ? 1 : 2] += 1.0;
        per_run.push_back(static_cast<double>(times.size()));
    }
    const std::vector<double> expected = {reps * 2.0, reps * 5.0, reps * 1.65};
    CHECK(teststats::chi_square_pvalue(teststats::chi_square_statistic(obs, expected), 2) > 0.01);
    CHECK(teststats::mean(per_run) == doctest::Approx(8.65).epsilon(0.03));
    CHECK(teststats::variance(per_run) == doctest::Approx(8.65).epsilon(0.1));
}

TEST_CASE("weibull intensity on a finite horizon") {
    IntensityModel m;
    m.baseline = WeibullBaseline{2.0, 100.0};
    m.bound = PiecewiseConstant::constant(0.08);
    RandomStream rng(23);
    std::vector<double> times;
    for (int r = 0; r < 2000; ++r) {
        for (double t : arrivals(m, 1.0, 365.0, rng)) times.push_back(t);
    }
    // Given the count, times are i.i.d. with cdf (t / 365)^2.
    CHECK(teststats::ks_pvalue(times, [](double t) { return (t / 365.0) * (t / 365.0); }) > 0.01);
    CHECK(static_cast<double>(times.size()) / 2000.0 == doctest::Approx(13.3225).epsilon(0.03));
}

TEST_CASE("a bound below the intensity is reported") {
    IntensityModel m;
    m.baseline = PiecewiseConstant::constant(0.1);
    m.bound = PiecewiseConstant::constant(0.05);
    RandomStream rng(24);
    DemandEnvironment env;
    CHECK_THROWS_AS(next_request_time(m, 1.0, SiteId(1), 0.0, 365.0, env, rng), ContractViolation);
    CHECK_THROWS_AS(next_request_time(m, 1.0, SiteId(1), 365.0, 365.0, env, rng), ContractViolation);
}

TEST_CASE("site frailty spreads the counts") {
    DemandModel dm;
    dm.intensity.frailty_variance = 0.5;
    dm.requisition = three_products();
    RandomStream setup(25);
    RandomStream rng(26);
    const std::size_t n_sites = 4000;
    auto state = draw_demand_state(dm, n_sites, setup);
    std::vector<double> counts;
    for (std::size_t s = 0; s < n_sites; ++s) {
        counts.push_back(static_cast<double>(arrivals(dm.intensity, state.intensity_frailty[s], 365.0, rng).size()));
    }
    const double m = 365.0 / 90.0;
    CHECK(teststats::mean(counts) == doctest::Approx(m).epsilon(0.05));
    CHECK(teststats::variance(counts) == doctest::Approx(m + 0.5 * m * m).epsilon(0.12));

    dm.intensity.frailty_variance = 0.0;
    auto flat = draw_demand_state(dm, 10, setup);
    for (double z : flat.intensity_frailty) CHECK(z == 1.0);
}

TEST_CASE("stop and choice propensities") {
    auto model = three_products();
    model.stop.cost_effect.reset();
    DemandEnvironment env;
    PartialRequisition empty{{}, 0.0};
    CHECK(stop_propensity(model, 5.0, empty, SiteId(1), 0.0, env) == doctest::Approx(0.99331).epsilon(1e-5));
    const LineItem two[] = {{ProductId(1), 1}, {ProductId(2), 1}};
    PartialRequisition partial{two, 0.0};
    CHECK(stop_propensity(model, 5.0, partial, SiteId(1), 0.0, env) == doctest::Approx(expit(4.6)));

    model.stop.cost_effect = CostEffectCurve{};
    CHECK(model.stop.cost_effect->at(10.0) == 0.0);
    CHECK(model.stop.cost_effect->at(500.0) == doctest::Approx(-120.0));
    CHECK(model.stop.cost_effect->at(5000.0) == doctest::Approx(-120.0));
    CHECK(model.stop.cost_effect->at(140.0) == doctest::Approx(-120.0 * std::sqrt(0.25)));

    CHECK(expit(0.0) == 0.5);
    CHECK(expit(-800.0) >= 0.0);
    CHECK(expit(800.0) == 1.0);

    auto choice = three_products();
    choice.product.utility_noise_variance = 0.0;
    choice.product.features.terms.push_back({{"e19", "", 0}, std::nullopt, 1.0});
    BaselineInfo base;
    base.products = {{std::log(2.0)}, {0.0}};
    env.baselines = &base;
    const ProductId cands[] = {ProductId(1), ProductId(2)};
    RandomStream rng(27);
    auto p = product_propensities(choice, cands, empty, SiteId(1), 0.0, Eigen::VectorXd(), env, rng);
    CHECK(p[0] == doctest::Approx(2.0 / 3.0));
    CHECK(p[1] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("zero-truncated poisson") {
    RandomStream rng(28);
    for (const auto& [mean, target] : {std::pair{0.5, 1.2707}, std::pair{0.1, 1.0508}, std::pair{0.01, 1.0050}}) {
        double sum = 0.0;
        const int n = 400000;
        for (int i = 0; i < n; ++i) {
            const int q = sample_truncated_poisson(mean, rng);
            REQUIRE(q >= 1);
            sum += q;
        }
        CHECK(sum / n == doctest::Approx(target).epsilon(0.005));
    }
    CHECK(sample_truncated_poisson(0.0, rng) == 1);
    CHECK_THROWS_AS(sample_truncated_poisson(-1.0, rng), ContractViolation);
}

TEST_CASE("requisitions are well formed") {
    auto model = three_products();
    DemandModel dm;
    dm.requisition = model;
    RandomStream setup(29);
    auto state = draw_demand_state(dm, 5, setup);
    DemandEnvironment env;
    RandomStream rng(30);
    std::size_t stores = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        auto req = generate_requisition(model, state, SiteId(2), 12.5, env, rng, 7);
        CHECK(req.id == 7);
        CHECK(req.site == SiteId(2));
        REQUIRE(!req.items.empty());
        REQUIRE(req.items.size() <= 3);
        std::set<int> seen;
        for (const auto& item : req.items) {
            REQUIRE(item.quantity >= 1);
            REQUIRE(seen.insert(item.product.value).second);
        }
        stores += req.mode == DeliveryMode::stores;
    }
    CHECK(static_cast<double>(stores) / n == doctest::Approx(0.5).epsilon(0.03));
}

TEST_CASE("item count matches an independent chain simulation") {
    auto model = three_products();
    DemandModel dm;
    dm.requisition = model;
    DemandEnvironment env;
    RandomStream setup(31);
    RandomStream rng(32);
    RandomStream oracle_rng(33);
    const int n_intercepts = 200;
    const int per = 200;
    double sim_items = 0.0;
    double oracle_items = 0.0;
    for (int j = 0; j < n_intercepts; ++j) {
        auto state = draw_demand_state(dm, 1, setup);
        for (int i = 0; i < per; ++i) sim_items += static_cast<double>(generate_requisition(model, state, SiteId(1), 1.0, env, rng).items.size());

        // Chain: uniform choice among remaining products, truncated Poisson
        // quantity, continue with expit(a - 0.1 (k-1)^2 + g(cost of first k-1 items)).
        const double a = state.stop_intercept;
        for (int i = 0; i < per; ++i) {
            std::vector<int> left = {0, 1, 2};
            double cost = 0.0;
            int k = 0;
            for (;;) {
                const auto idx = static_cast<std::size_t>(oracle_rng.uniform() * static_cast<double>(left.size()));
                const int product = left[idx];
                left.erase(left.begin() + static_cast<std::ptrdiff_t>(idx));
                double eta = a - 0.1 * k * k;
                if (cost > 20.0) eta += -120.0 * std::min(1.0, std::sqrt((cost - 20.0) / 480.0));
                const double mean = model.quantity.base_means[static_cast<std::size_t>(product)];
                long q = 0;
                while (q == 0) q = sample_poisson(mean, oracle_rng);
                cost += model.baseline_costs[static_cast<std::size_t>(product)] * static_cast<double>(q);
                ++k;
                if (left.empty() || !(oracle_rng.uniform() < expit(eta))) break;
            }
            oracle_items += k;
        }
    }
    CHECK(sim_items / oracle_items == doctest::Approx(1.0).epsilon(0.05));
}
