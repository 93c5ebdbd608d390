#pragma once

#include "procsim/core.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace procsim {

struct HarmonicSignal {
    double amplitude = 1.0;
    double period = 365.0;
    double phase = 0.0;
};

struct SincShock {
    double center = 0.0;
    double scale = 1.0;
    double amplitude = 1.0;
};

/// amplitude * sin(2 pi t / period + phase)
double harmonic_at(const HarmonicSignal& signal, double t);
/// amplitude * sinc((t - center) / scale), normalised sinc with sinc(0) = 1.
double sinc_at(const SincShock& shock, double t);

/// Sum of harmonics and sinc shocks, evaluated on the calendar axis.
struct ExogenousSignal {
    std::vector<HarmonicSignal> harmonics;
    std::vector<SincShock> shocks;
    double at(double t) const;
};

using SignalBank = std::map<std::string, ExogenousSignal, std::less<>>;

/// Static per-entity vectors ("baseline information"), indexed by id - 1.
struct BaselineInfo {
    std::vector<std::vector<double>> sites;
    std::vector<std::vector<double>> products;
    std::vector<std::vector<double>> suppliers;
};

struct PartialRequisition {
    std::span<const LineItem> items;
    double cost_estimate = 0.0;
};

/// Everything a feature may read. Optional members that a feature needs but
/// the caller left empty raise ContractViolation.
struct FeatureContext {
    const HistoryLedger* ledger = nullptr;
    const SignalBank* signals = nullptr;
    const BaselineInfo* baselines = nullptr;
    double horizon = 365.0;  // value of "days since ..." when nothing happened yet
    double time = 0.0;
    Day day = 1;
    std::optional<SiteId> site;
    std::optional<ProductId> product;
    std::optional<SupplierId> supplier;
    const PartialRequisition* partial = nullptr;
    const RequestRef* request = nullptr;
    std::optional<std::size_t> unresolved_items;
    std::optional<std::size_t> unresolved_requisitions;
    const Vec3* ar_default = nullptr;  // stand-in for missing autoregressive lags
};

struct FeatureRef {
    std::string feature;     // registry name or table symbol
    std::string signal;      // exogenous features: which named signal
    std::size_t index = 0;   // baselines: component; outcome features: see registry
};

struct FeatureTerm {
    FeatureRef ref;
    std::optional<FeatureRef> times;  // pairwise product with a second feature
    double coefficient = 0.0;
};

struct FeatureSpec {
    std::vector<FeatureTerm> terms;

    bool empty() const { return terms.empty(); }
    std::size_t size() const { return terms.size(); }
    Eigen::VectorXd coefficients() const;
};

enum ContextKey : unsigned {
    key_ledger = 1u << 0,
    key_signals = 1u << 1,
    key_baselines = 1u << 2,
    key_site = 1u << 3,
    key_product = 1u << 4,
    key_supplier = 1u << 5,
    key_partial = 1u << 6,
    key_request = 1u << 7,
    key_unresolved = 1u << 8,
};

class FeatureRegistry {
  public:
    struct Entry {
        std::string name;
        std::vector<std::string> symbols;
        unsigned requires_keys = 0;
        std::function<double(const FeatureContext&, const FeatureRef&)> eval;
    };

    static const FeatureRegistry& standard();

    const Entry* find(std::string_view name_or_symbol) const;
    std::span<const Entry> entries() const { return entries_; }
    double evaluate(const FeatureRef& ref, const FeatureContext& ctx) const;
    /// Throws if any term names an unknown feature.
    void check(const FeatureSpec& spec) const;

  private:
    FeatureRegistry();
    std::vector<Entry> entries_;
};

/// Vector aligned with spec.terms.
Eigen::VectorXd build_features(const FeatureSpec& spec, const FeatureContext& ctx);
/// Dot product of build_features with the terms' coefficients.
double linear_predictor(const FeatureSpec& spec, const FeatureContext& ctx);

inline constexpr double kYearWindow = 365.0;
inline constexpr int kRecentWindowDays = 90;

}  // namespace procsim
