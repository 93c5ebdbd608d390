#include "procsim/experiment.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <optional>

namespace procsim {

ReplicationError::ReplicationError(int replication, std::uint64_t seed, const std::string& policy,
                                   const std::string& what)
    : std::runtime_error("replication " + std::to_string(replication) + " (seed " + std::to_string(seed) +
                         ", policy " + policy + ") failed: " + what),
      replication_(replication),
      seed_(seed) {}

std::uint64_t replication_seed(std::uint64_t master, int replication) {
    return derive_seed(master, static_cast<std::uint64_t>(replication));
}

ReplicationResult run_replication(const SimulationConfig& sim, const PolicySpec& policy, int replication,
                                  std::uint64_t seed) {
    try {
        auto art = run_simulation(sim, policy, seed);
        ReplicationResult r;
        r.replication = replication;
        r.seed = seed;
        r.policy = policy.name();
        r.terminal_regret = art.regret.total();
        r.min_item_regret = art.regret.min_item();
        r.daily_cumulative = art.regret.daily_cumulative();
        r.requisition_hash = art.requisition_hash;
        r.requisitions = art.ledger.requisitions().size();
        r.line_items = art.line_items;
        r.orders = art.ledger.orders().size();
        r.decision_points = art.decision_points;
        return r;
    } catch (const std::exception& e) {
        throw ReplicationError(replication, seed, policy.name(), e.what());
    }
}

namespace {

ReportBundle empty_bundle(const ExperimentConfig& config) {
    ReportBundle b;
    for (const auto& p : config.policies) b.policies.push_back(p.name());
    b.master_seed = config.seed;
    b.horizon = config.sim.horizon;
    b.bootstrap_resamples = config.bootstrap_resamples;
    b.config_echo = config.echo;
    for (int r = 1; r <= config.replications; ++r) b.seeds.push_back(replication_seed(config.seed, r));
    return b;
}

void finish(ReportBundle& b) { b.summaries = summarize(b.policies, b.results, b.master_seed, b.bootstrap_resamples); }

}  // namespace

ReportBundle run_experiment_serial(const ExperimentConfig& config) {
    ReportBundle b = empty_bundle(config);
    for (int r = 1; r <= config.replications; ++r) {
        for (const auto& policy : config.policies) {
            b.results.push_back(run_replication(config.sim, policy, r, b.seeds[static_cast<std::size_t>(r - 1)]));
        }
    }
    finish(b);
    return b;
}

ReportBundle run_experiment(const ExperimentConfig& config, int jobs) {
    ReportBundle b = empty_bundle(config);
    const auto n_policies = static_cast<long>(config.policies.size());
    const long n_tasks = static_cast<long>(config.replications) * n_policies;
    std::vector<std::optional<ReplicationResult>> slots(static_cast<std::size_t>(n_tasks));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_tasks));
    const int threads = jobs > 0 ? jobs : omp_get_max_threads();

#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (long task = 0; task < n_tasks; ++task) {
        const int r = static_cast<int>(task / n_policies) + 1;
        const auto& policy = config.policies[static_cast<std::size_t>(task % n_policies)];
        try {
            slots[static_cast<std::size_t>(task)] =
                run_replication(config.sim, policy, r, b.seeds[static_cast<std::size_t>(r - 1)]);
        } catch (...) {
            errors[static_cast<std::size_t>(task)] = std::current_exception();
        }
    }

    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    b.results.reserve(slots.size());
    for (auto& s : slots) b.results.push_back(std::move(*s));
    finish(b);
    return b;
}

double quantile(std::vector<double> values, double p) {
    if (values.empty()) throw ContractViolation("quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double h = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<PolicySummary> summarize(const std::vector<std::string>& policies,
                                     const std::vector<ReplicationResult>& results, std::uint64_t master_seed,
                                     int bootstrap_resamples) {
    std::vector<PolicySummary> out;
    for (std::size_t k = 0; k < policies.size(); ++k) {
        std::vector<double> v;
        for (const auto& r : results) {
            if (r.policy == policies[k]) v.push_back(r.terminal_regret);
        }
        PolicySummary s;
        s.policy = policies[k];
        s.n = v.size();
        if (!v.empty()) {
            double total = 0.0;
            for (double x : v) total += x;
            s.mean = total / static_cast<double>(v.size());
            s.median = quantile(v, 0.5);
            s.q1 = quantile(v, 0.25);
            s.q3 = quantile(v, 0.75);
            s.iqr = s.q3 - s.q1;

            RandomStream rng(derive_seed(master_seed, 0xb0075ULL, k));
            std::vector<double> means(static_cast<std::size_t>(std::max(bootstrap_resamples, 1)));
            for (auto& m : means) {
                double sum = 0.0;
                for (std::size_t i = 0; i < v.size(); ++i) {
                    auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(v.size()));
                    sum += v[std::min(j, v.size() - 1)];
                }
                m = sum / static_cast<double>(v.size());
            }
            s.ci_low = quantile(means, 0.025);
            s.ci_high = quantile(means, 0.975);
        }
        out.push_back(s);
    }
    return out;
}

}  // namespace procsim
