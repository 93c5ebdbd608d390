#include "procsim/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace procsim {

using nlohmann::json;

ConfigError::ConfigError(Code code, std::vector<std::string> problems)
    : std::runtime_error([&] {
          std::string msg;
          for (const auto& p : problems) msg += (msg.empty() ? "" : "\n") + p;
          return msg;
      }()),
      code_(code),
      problems_(std::move(problems)) {}

std::string default_output_dir() {
    const char* env = std::getenv("PROCSIM_OUT_DIR");
    return env != nullptr && *env != '\0' ? std::string(env) : std::string("out");
}

namespace {

/// Object view that records type errors and unknown keys instead of throwing.
class Reader {
  public:
    Reader(const json& j, std::string path, std::vector<std::string>& problems)
        : j_(j), path_(std::move(path)), problems_(problems) {
        if (!j_.is_object()) problems_.push_back(path_ + ": expected an object");
    }
    ~Reader() {
        if (!j_.is_object()) return;
        for (const auto& [key, value] : j_.items()) {
            if (!used_.contains(key)) problems_.push_back(here(key) + ": unknown key");
        }
    }
    Reader(const Reader&) = delete;
    Reader& operator=(const Reader&) = delete;

    bool has(const std::string& key) {
        used_.insert(key);
        return j_.is_object() && j_.contains(key) && !j_.at(key).is_null();
    }
    const json& raw(const std::string& key) {
        used_.insert(key);
        return j_.at(key);
    }
    std::string here(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    template <class T>
    void get(const std::string& key, T& out) {
        if (!has(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception&) {
            problems_.push_back(here(key) + ": wrong type");
        }
    }

    std::vector<std::string>& problems() { return problems_; }

  private:
    const json& j_;
    std::string path_;
    std::vector<std::string>& problems_;
    std::set<std::string> used_;
};

Vec3 read_vec3(const json& j, const std::string& where, std::vector<std::string>& problems) {
    Vec3 v = Vec3::Zero();
    if (!j.is_array() || j.size() != 3) {
        problems.push_back(where + ": expected 3 numbers");
        return v;
    }
    for (int i = 0; i < 3; ++i) {
        if (!j[static_cast<std::size_t>(i)].is_number()) {
            problems.push_back(where + ": expected 3 numbers");
            return v;
        }
        v[i] = j[static_cast<std::size_t>(i)].get<double>();
    }
    return v;
}

Eigen::MatrixXd read_matrix(const json& j, const std::string& where, std::vector<std::string>& problems) {
    if (!j.is_array()) {
        problems.push_back(where + ": expected an array of rows");
        return {};
    }
    const auto rows = j.size();
    const auto cols = rows == 0 ? 0 : (j[0].is_array() ? j[0].size() : 0);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols) {
            problems.push_back(where + ": rows must be arrays of equal length");
            return {};
        }
        for (std::size_t c = 0; c < cols; ++c) {
            if (!j[r][c].is_number()) {
                problems.push_back(where + ": entries must be numbers");
                return {};
            }
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
        }
    }
    return m;
}

Mat3 read_mat3(const json& j, const std::string& where, std::vector<std::string>& problems) {
    auto m = read_matrix(j, where, problems);
    if (m.rows() != 3 || m.cols() != 3) {
        if (m.size() != 0) problems.push_back(where + ": expected a 3x3 matrix");
        return Mat3::Zero();
    }
    return m;
}

FeatureRef read_ref(const json& j, const std::string& where, std::vector<std::string>& problems) {
    FeatureRef ref;
    Reader r(j, where, problems);
    r.get("feature", ref.feature);
    r.get("signal", ref.signal);
    r.get("index", ref.index);
    if (ref.feature.empty()) problems.push_back(where + ".feature: required");
    return ref;
}

FeatureSpec read_features(const json& j, const std::string& where, std::vector<std::string>& problems) {
    FeatureSpec spec;
    if (!j.is_array()) {
        problems.push_back(where + ": expected an array of terms");
        return spec;
    }
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string at = where + "[" + std::to_string(i) + "]";
        if (!j[i].is_object()) {
            problems.push_back(at + ": expected an object");
            continue;
        }
        FeatureTerm term;
        json ref_part = j[i];
        ref_part.erase("coefficient");
        ref_part.erase("times");
        term.ref = read_ref(ref_part, at, problems);
        if (j[i].contains("coefficient") && j[i]["coefficient"].is_number()) {
            term.coefficient = j[i]["coefficient"].get<double>();
        } else {
            problems.push_back(at + ".coefficient: required number");
        }
        if (j[i].contains("times") && !j[i]["times"].is_null()) term.times = read_ref(j[i]["times"], at + ".times", problems);
        spec.terms.push_back(std::move(term));
    }
    return spec;
}

PiecewiseConstant read_piecewise(Reader& r) {
    PiecewiseConstant pc;
    pc.rates.clear();
    r.get("breaks", pc.breaks);
    r.get("rates", pc.rates);
    return pc;
}

void read_intensity(const json& j, IntensityModel& m, std::vector<std::string>& problems) {
    Reader r(j, "demand.intensity", problems);
    bool bound_given = false;
    if (r.has("mean_interarrival_days")) {
        double mean = 0.0;
        r.get("mean_interarrival_days", mean);
        if (!(mean > 0.0)) {
            problems.push_back("demand.intensity.mean_interarrival_days: must be positive");
        } else {
            m.baseline = PiecewiseConstant::constant(1.0 / mean);
        }
        if (r.has("baseline")) problems.push_back("demand.intensity: give mean_interarrival_days or baseline, not both");
    } else if (r.has("baseline")) {
        Reader b(r.raw("baseline"), "demand.intensity.baseline", problems);
        std::string kind = "piecewise_constant";
        b.get("kind", kind);
        if (kind == "weibull") {
            WeibullBaseline w;
            b.get("shape", w.shape);
            b.get("scale", w.scale);
            m.baseline = w;
        } else if (kind == "piecewise_constant") {
            m.baseline = read_piecewise(b);
        } else {
            problems.push_back("demand.intensity.baseline.kind: expected weibull or piecewise_constant");
        }
    }
    r.get("frailty_variance", m.frailty_variance);
    if (r.has("features")) m.features = read_features(r.raw("features"), "demand.intensity.features", problems);
    if (r.has("bound")) {
        Reader b(r.raw("bound"), "demand.intensity.bound", problems);
        m.bound = read_piecewise(b);
        bound_given = true;
    }
    if (!bound_given) {
        if (const auto* pc = std::get_if<PiecewiseConstant>(&m.baseline); pc && m.features.empty()) {
            m.bound = *pc;
        } else {
            problems.push_back("demand.intensity.bound: required unless the baseline is piecewise constant without features");
        }
    }
}

void read_demand(const json& j, ExperimentConfig& cfg, const std::vector<double>& quantity_means,
                 std::vector<std::string>& problems) {
    auto& d = cfg.sim.demand;
    Reader r(j, "demand", problems);
    if (r.has("intensity")) read_intensity(r.raw("intensity"), d.intensity, problems);
    auto& req = d.requisition;
    r.get("stores_rate", req.stores_rate);
    r.get("urgency_rate", req.urgency_rate);
    if (r.has("stop")) {
        Reader s(r.raw("stop"), "demand.stop", problems);
        s.get("intercept_mean", req.stop.intercept_mean);
        s.get("intercept_variance", req.stop.intercept_variance);
        s.get("size_quadratic", req.stop.size_quadratic);
        s.get("rolling_window", req.stop.rolling_window);
        if (s.has("cost_estimate")) {
            std::string mode;
            s.get("cost_estimate", mode);
            if (mode == "baseline") {
                req.stop.cost_estimate = CostEstimateMode::baseline;
            } else if (mode == "rolling_average") {
                req.stop.cost_estimate = CostEstimateMode::rolling_average;
            } else {
                problems.push_back("demand.stop.cost_estimate: expected baseline or rolling_average");
            }
        }
        if (s.has("cost_effect")) {
            CostEffectCurve c;
            Reader ce(s.raw("cost_effect"), "demand.stop.cost_effect", problems);
            ce.get("threshold", c.threshold);
            ce.get("saturation_cost", c.saturation_cost);
            ce.get("floor", c.floor);
            ce.get("exponent", c.exponent);
            req.stop.cost_effect = c;
        } else if (r.raw("stop").contains("cost_effect")) {
            req.stop.cost_effect.reset();
        }
        if (s.has("features")) req.stop.features = read_features(s.raw("features"), "demand.stop.features", problems);
    }
    if (r.has("product_choice")) {
        Reader p(r.raw("product_choice"), "demand.product_choice", problems);
        p.get("utility_noise_variance", req.product.utility_noise_variance);
        if (p.has("features")) {
            req.product.features = read_features(p.raw("features"), "demand.product_choice.features", problems);
        }
        if (p.has("group_design")) {
            req.product.group_design = read_matrix(p.raw("group_design"), "demand.product_choice.group_design", problems);
        }
        if (p.has("group_covariance")) {
            req.product.group_covariance =
                read_matrix(p.raw("group_covariance"), "demand.product_choice.group_covariance", problems);
        }
    }
    req.quantity.base_means = quantity_means;
    if (r.has("quantity")) {
        Reader q(r.raw("quantity"), "demand.quantity", problems);
        q.get("dispersion", req.quantity.dispersion);
        q.get("site_frailty_variance", req.quantity.site_frailty_variance);
        if (q.has("features")) req.quantity.features = read_features(q.raw("features"), "demand.quantity.features", problems);
    }
}

void read_outcome(const json& j, ExperimentConfig& cfg, std::vector<std::string>& problems) {
    auto& model = cfg.sim.outcome;
    Reader r(j, "outcome", problems);
    if (r.has("harmonic")) {
        Reader h(r.raw("harmonic"), "outcome.harmonic", problems);
        h.get("amplitude", model.harmonic.amplitude);
        h.get("period", model.harmonic.period);
        h.get("phase", model.harmonic.phase);
    }
    r.get("short_window", model.short_window);
    r.get("long_window", model.long_window);
    if (!r.has("pairs")) return;
    const json& pairs = r.raw("pairs");
    if (!pairs.is_array()) {
        problems.push_back("outcome.pairs: expected an array");
        return;
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const std::string at = "outcome.pairs[" + std::to_string(i) + "]";
        Reader p(pairs[i], at, problems);
        int product = 0;
        int supplier = 0;
        p.get("product", product);
        p.get("supplier", supplier);
        if (product < 1 || static_cast<std::size_t>(product) > model.n_products() || supplier < 1 ||
            static_cast<std::size_t>(supplier) > model.n_suppliers()) {
            problems.push_back(at + ": unknown (product, supplier) pair");
            continue;
        }
        const ProductId pid(product);
        const SupplierId sid(supplier);
        PairOutcomeParams q = model.pair(pid, sid);
        if (p.has("intercept")) q.intercept = read_vec3(p.raw("intercept"), at + ".intercept", problems);
        if (p.has("ar1")) q.ar1 = read_mat3(p.raw("ar1"), at + ".ar1", problems);
        if (p.has("ar2")) q.ar2 = read_mat3(p.raw("ar2"), at + ".ar2", problems);
        if (p.has("short_allocation")) {
            q.short_allocation = read_vec3(p.raw("short_allocation"), at + ".short_allocation", problems);
        }
        if (p.has("long_allocation")) {
            q.long_allocation = read_vec3(p.raw("long_allocation"), at + ".long_allocation", problems);
        }
        if (p.has("harmonic_loading")) {
            q.harmonic_loading = read_vec3(p.raw("harmonic_loading"), at + ".harmonic_loading", problems);
        }
        if (p.has("noise_covariance")) {
            q.noise_covariance = read_mat3(p.raw("noise_covariance"), at + ".noise_covariance", problems);
        }
        try {
            model.set_pair(pid, sid, q);
        } catch (const ContractViolation& e) {
            problems.push_back(at + ".noise_covariance: " + e.what());
        }
    }
}

void read_signals(const json& j, SignalBank& bank, std::vector<std::string>& problems) {
    if (!j.is_object()) {
        problems.push_back("signals: expected an object");
        return;
    }
    for (const auto& [name, value] : j.items()) {
        const std::string at = "signals." + name;
        Reader r(value, at, problems);
        ExogenousSignal sig;
        if (r.has("harmonics")) {
            const json& hs = r.raw("harmonics");
            for (std::size_t i = 0; hs.is_array() && i < hs.size(); ++i) {
                Reader h(hs[i], at + ".harmonics[" + std::to_string(i) + "]", problems);
                HarmonicSignal s;
                h.get("amplitude", s.amplitude);
                h.get("period", s.period);
                h.get("phase", s.phase);
                sig.harmonics.push_back(s);
            }
        }
        if (r.has("shocks")) {
            const json& ss = r.raw("shocks");
            for (std::size_t i = 0; ss.is_array() && i < ss.size(); ++i) {
                Reader h(ss[i], at + ".shocks[" + std::to_string(i) + "]", problems);
                SincShock s;
                h.get("center", s.center);
                h.get("scale", s.scale);
                h.get("amplitude", s.amplitude);
                sig.shocks.push_back(s);
            }
        }
        bank[name] = std::move(sig);
    }
}

template <class F>
void collect(std::vector<std::string>& problems, const std::string& where, F&& check) {
    try {
        check();
    } catch (const std::exception& e) {
        problems.push_back(where + ": " + e.what());
    }
}

void check_features(std::vector<std::string>& problems, const std::string& where, const FeatureSpec& spec) {
    collect(problems, where, [&] { FeatureRegistry::standard().check(spec); });
}

}  // namespace

std::vector<std::string> validate(const ExperimentConfig& cfg) {
    std::vector<std::string> problems;
    const auto& sim = cfg.sim;
    if (sim.horizon < 1) problems.push_back("horizon: must be at least 1 day");
    if (sim.n_sites < 1) problems.push_back("sites: must be at least 1");
    if (sim.n_suppliers < 1) problems.push_back("suppliers: must be at least 1");
    if (sim.n_products() < 1) problems.push_back("products: at least one product is required");
    if (cfg.replications < 1) problems.push_back("replications: must be at least 1");
    if (cfg.bootstrap_resamples < 1) problems.push_back("bootstrap_resamples: must be at least 1");

    const Vec3& w = sim.weights.w;
    if ((w.array() < 0.0).any() || std::fabs(w.sum() - 1.0) > 1e-9) {
        problems.push_back("weights: must be non-negative and sum to 1");
    }

    if (cfg.policies.empty()) problems.push_back("policies: at least one policy is required");
    std::set<std::string> seen;
    for (const auto& p : cfg.policies) {
        if (!seen.insert(p.name()).second) problems.push_back("policies: duplicate " + p.name());
        if (p.kind == PolicyKind::fixed && p.fixed_supplier.index() >= sim.n_suppliers) {
            problems.push_back("policies: " + p.name() + " names a supplier that does not exist");
        }
        if (p.kind == PolicyKind::logit) check_features(problems, "logit_policy.features", p.logit.features);
    }

    if (!(sim.bandit.prior_variance > 0.0)) problems.push_back("bandit.prior_variance: must be positive");
    if (!(sim.bandit.noise_variances.array() > 0.0).all()) {
        problems.push_back("bandit.noise_variances: must be positive");
    }

    const auto& in = sim.demand.intensity;
    if (const auto* wb = std::get_if<WeibullBaseline>(&in.baseline)) {
        if (!(wb->shape > 0.0) || !(wb->scale > 0.0)) {
            problems.push_back("demand.intensity.baseline: Weibull shape and scale must be positive");
        }
    } else {
        const auto& pc = std::get<PiecewiseConstant>(in.baseline);
        collect(problems, "demand.intensity.baseline", [&] { pc.validate(); });
    }
    collect(problems, "demand.intensity.bound", [&] { in.bound.validate(); });
    if (in.bound.rates.size() == in.bound.breaks.size() + 1) {
        if (!std::all_of(in.bound.rates.begin(), in.bound.rates.end(), [](double r) { return r > 0.0; })) {
            problems.push_back("demand.intensity.bound: rates must be positive");
        }
        const auto* pc = std::get_if<PiecewiseConstant>(&in.baseline);
        if (pc && in.features.empty() && in.frailty_variance == 0.0 && pc->rates.size() == pc->breaks.size() + 1) {
            std::vector<double> probes{0.0};
            probes.insert(probes.end(), pc->breaks.begin(), pc->breaks.end());
            probes.insert(probes.end(), in.bound.breaks.begin(), in.bound.breaks.end());
            for (double t : probes) {
                if (pc->at(t) > in.bound.at(t) * (1.0 + 1e-12)) {
                    problems.push_back("demand.intensity.bound: below the baseline at t = " + std::to_string(t));
                    break;
                }
            }
        }
    }
    if (!(in.frailty_variance >= 0.0)) problems.push_back("demand.intensity.frailty_variance: must be >= 0");
    check_features(problems, "demand.intensity.features", in.features);

    const auto& req = sim.demand.requisition;
    for (std::size_t p = 0; p < req.baseline_costs.size(); ++p) {
        if (!(req.baseline_costs[p] >= 0.0)) {
            problems.push_back("products[" + std::to_string(p) + "].baseline_cost: must be >= 0");
        }
    }
    if (!(req.stop.intercept_variance >= 0.0)) problems.push_back("demand.stop.intercept_variance: must be >= 0");
    if (req.stop.rolling_window < 1) problems.push_back("demand.stop.rolling_window: must be at least 1");
    if (req.stop.cost_effect && !(req.stop.cost_effect->saturation_cost > req.stop.cost_effect->threshold)) {
        problems.push_back("demand.stop.cost_effect: saturation_cost must exceed threshold");
    }
    check_features(problems, "demand.stop.features", req.stop.features);
    if (!(req.product.utility_noise_variance >= 0.0)) {
        problems.push_back("demand.product_choice.utility_noise_variance: must be >= 0");
    }
    check_features(problems, "demand.product_choice.features", req.product.features);
    const auto& g = req.product.group_design;
    if (g.size() != 0) {
        if (static_cast<std::size_t>(g.cols()) != req.n_products()) {
            problems.push_back("demand.product_choice.group_design: needs one column per product");
        }
        const auto& gc = req.product.group_covariance;
        if (gc.rows() != g.rows() || gc.cols() != g.rows()) {
            problems.push_back("demand.product_choice.group_covariance: must be groups x groups");
        } else {
            collect(problems, "demand.product_choice.group_covariance", [&] { GaussianFactor f(gc); });
        }
    }
    if (req.quantity.base_means.size() != req.n_products()) {
        problems.push_back("products: every product needs a quantity_mean");
    }
    for (double m : req.quantity.base_means) {
        if (!(m >= 0.0)) problems.push_back("products: quantity_mean must be >= 0");
    }
    if (!(req.quantity.dispersion >= 0.0)) problems.push_back("demand.quantity.dispersion: must be >= 0");
    if (!(req.quantity.site_frailty_variance >= 0.0)) {
        problems.push_back("demand.quantity.site_frailty_variance: must be >= 0");
    }
    check_features(problems, "demand.quantity.features", req.quantity.features);
    if (!(req.stores_rate >= 0.0 && req.stores_rate <= 1.0)) problems.push_back("demand.stores_rate: must be in [0, 1]");
    if (!(req.urgency_rate >= 0.0 && req.urgency_rate <= 1.0)) {
        problems.push_back("demand.urgency_rate: must be in [0, 1]");
    }

    collect(problems, "operations.order_propensity", [&] { sim.order.validate(); });
    if (!(sim.lead_time.usd_per_day > 0.0)) problems.push_back("operations.lead_time_usd_per_day: must be positive");
    if (!(sim.evaluation_interval > 0.0)) problems.push_back("operations.evaluation_interval: must be positive");
    if (!(sim.first_decision_time >= 1.0) || sim.first_decision_time != std::floor(sim.first_decision_time)) {
        problems.push_back("operations.first_decision_time: must be a whole day >= 1");
    }

    const auto& om = sim.outcome;
    if (om.n_products() != sim.n_products() || om.n_suppliers() != sim.n_suppliers) {
        problems.push_back("outcome: model dimensions disagree with products and suppliers");
    } else {
        for (std::size_t p = 1; p <= om.n_products(); ++p) {
            for (std::size_t s = 1; s <= om.n_suppliers(); ++s) {
                const auto& q = om.pair(ProductId(static_cast<int>(p)), SupplierId(static_cast<int>(s)));
                const double rho = companion_spectral_radius(q.ar1, q.ar2);
                if (!(rho < 1.0)) {
                    problems.push_back("outcome: pair (product " + std::to_string(p) + ", supplier " +
                                       std::to_string(s) + ") is not stationary, spectral radius " +
                                       std::to_string(rho));
                }
            }
        }
    }
    if (!(om.harmonic.period > 0.0)) problems.push_back("outcome.harmonic.period: must be positive");
    if (om.short_window < 1 || om.long_window < 1) problems.push_back("outcome: windows must be at least 1 day");

    for (const auto& [name, sig] : sim.signals) {
        for (const auto& h : sig.harmonics) {
            if (!(h.period > 0.0)) problems.push_back("signals." + name + ": harmonic period must be positive");
        }
        for (const auto& s : sig.shocks) {
            if (!(s.scale > 0.0)) problems.push_back("signals." + name + ": shock scale must be positive");
        }
    }
    return problems;
}

ExperimentConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(ConfigError::parse, {std::string("parse error: ") + e.what()});
    }

    ExperimentConfig cfg;
    cfg.output_dir = default_output_dir();
    std::vector<std::string> problems;
    {
        Reader r(doc, "", problems);
        r.get("horizon", cfg.sim.horizon);
        r.get("sites", cfg.sim.n_sites);
        r.get("suppliers", cfg.sim.n_suppliers);
        r.get("replications", cfg.replications);
        r.get("full_scale_replications", cfg.full_scale_replications);
        r.get("bootstrap_resamples", cfg.bootstrap_resamples);
        r.get("output_dir", cfg.output_dir);
        if (r.has("seed")) {
            const json& s = r.raw("seed");
            try {
                if (s.is_number_unsigned()) {
                    cfg.seed = s.get<std::uint64_t>();
                } else if (s.is_string()) {
                    cfg.seed = parse_seed(s.get<std::string>());
                } else {
                    problems.push_back("seed: expected a non-negative integer or a decimal/hex string");
                }
            } catch (const std::exception& e) {
                problems.push_back(std::string("seed: ") + e.what());
            }
        }

        std::vector<double> costs{100.0, 50.0, 50.0};
        std::vector<double> quantity_means{0.1, 0.5, 0.5};
        if (r.has("products")) {
            const json& ps = r.raw("products");
            costs.clear();
            quantity_means.clear();
            if (!ps.is_array()) problems.push_back("products: expected an array");
            for (std::size_t i = 0; ps.is_array() && i < ps.size(); ++i) {
                Reader p(ps[i], "products[" + std::to_string(i) + "]", problems);
                double cost = 0.0;
                double qm = 0.0;
                if (!p.has("baseline_cost")) problems.push_back(p.here("baseline_cost") + ": required");
                if (!p.has("quantity_mean")) problems.push_back(p.here("quantity_mean") + ": required");
                p.get("baseline_cost", cost);
                p.get("quantity_mean", qm);
                costs.push_back(cost);
                quantity_means.push_back(qm);
            }
        }
        cfg.sim.demand.requisition.baseline_costs = costs;
        if (!costs.empty() && cfg.sim.n_suppliers >= 1) {
            cfg.sim.outcome = OutcomeModel::standard(costs, cfg.sim.n_suppliers);
        }

        if (r.has("weights")) cfg.sim.weights.w = read_vec3(r.raw("weights"), "weights", problems);
        if (r.has("regret")) {
            std::string mode;
            r.get("regret", mode);
            if (mode == "expected") {
                cfg.sim.regret_mode = RegretMode::expected;
            } else if (mode == "realized") {
                cfg.sim.regret_mode = RegretMode::realized;
            } else {
                problems.push_back("regret: expected 'expected' or 'realized'");
            }
        }
        if (r.has("bandit")) {
            Reader b(r.raw("bandit"), "bandit", problems);
            b.get("prior_variance", cfg.sim.bandit.prior_variance);
            if (b.has("noise_variances")) {
                cfg.sim.bandit.noise_variances = read_vec3(b.raw("noise_variances"), "bandit.noise_variances", problems);
            }
        }
        if (r.has("static_utility")) {
            Reader s(r.raw("static_utility"), "static_utility", problems);
            std::string theta;
            s.get("theta", theta);
            if (theta == "prior_draw") {
                cfg.sim.static_utility_theta = StaticUtilityTheta::prior_draw;
            } else if (theta == "seasonal_projection") {
                cfg.sim.static_utility_theta = StaticUtilityTheta::seasonal_projection;
            } else if (!theta.empty()) {
                problems.push_back("static_utility.theta: expected prior_draw or seasonal_projection");
            }
        }
        SupplierUtilityModel logit;
        if (r.has("logit_policy")) {
            Reader l(r.raw("logit_policy"), "logit_policy", problems);
            if (l.has("features")) logit.features = read_features(l.raw("features"), "logit_policy.features", problems);
        }

        std::vector<std::string> names{"fixed-1", "fixed-2", "random", "static-utility", "bandit", "oracle"};
        r.get("policies", names);
        for (const auto& n : names) {
            try {
                auto spec = PolicySpec::parse(n);
                if (spec.kind == PolicyKind::logit) spec.logit = logit;
                cfg.policies.push_back(spec);
            } catch (const ContractViolation& e) {
                problems.push_back(std::string("policies: ") + e.what());
            }
        }

        cfg.sim.demand.requisition.quantity.base_means = quantity_means;
        if (r.has("demand")) read_demand(r.raw("demand"), cfg, quantity_means, problems);
        if (r.has("operations")) {
            Reader o(r.raw("operations"), "operations", problems);
            if (o.has("order_propensity")) {
                Reader op(o.raw("order_propensity"), "operations.order_propensity", problems);
                std::string mode = "uniform";
                op.get("mode", mode);
                if (mode == "uniform") {
                    cfg.sim.order.mode = OrderPropensityModel::Mode::uniform;
                } else if (mode == "logistic") {
                    cfg.sim.order.mode = OrderPropensityModel::Mode::logistic;
                } else {
                    problems.push_back("operations.order_propensity.mode: expected uniform or logistic");
                }
                op.get("low", cfg.sim.order.low);
                op.get("high", cfg.sim.order.high);
                if (op.has("features")) {
                    cfg.sim.order.features =
                        read_features(op.raw("features"), "operations.order_propensity.features", problems);
                }
            }
            o.get("lead_time_usd_per_day", cfg.sim.lead_time.usd_per_day);
            o.get("first_decision_time", cfg.sim.first_decision_time);
            o.get("evaluation_interval", cfg.sim.evaluation_interval);
        }
        if (r.has("outcome")) read_outcome(r.raw("outcome"), cfg, problems);
        if (r.has("signals")) read_signals(r.raw("signals"), cfg.sim.signals, problems);
        if (r.has("baselines")) {
            Reader b(r.raw("baselines"), "baselines", problems);
            b.get("sites", cfg.sim.baselines.sites);
            b.get("products", cfg.sim.baselines.products);
            b.get("suppliers", cfg.sim.baselines.suppliers);
        }
    }

    auto more = validate(cfg);
    problems.insert(problems.end(), more.begin(), more.end());
    if (!problems.empty()) throw ConfigError(ConfigError::validation, std::move(problems));
    cfg.echo = doc.dump();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(ConfigError::io, {"cannot read " + path.string()});
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace procsim
