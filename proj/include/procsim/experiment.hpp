#pragma once

#include "procsim/config.hpp"
#include "procsim/engine.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace procsim {

/// Everything one (replication, policy) run contributes to the reports.
struct ReplicationResult {
    int replication = 1;
    std::uint64_t seed = 0;
    std::string policy;
    double terminal_regret = 0.0;
    double min_item_regret = 0.0;
    std::vector<double> daily_cumulative;
    std::uint64_t requisition_hash = 0;
    std::size_t requisitions = 0;
    std::size_t line_items = 0;
    std::size_t orders = 0;
    std::size_t decision_points = 0;
};

struct PolicySummary {
    std::string policy;
    double mean = 0.0;
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double iqr = 0.0;
    double ci_low = 0.0;   // percentile bootstrap 95% interval of the mean
    double ci_high = 0.0;
    std::size_t n = 0;
};

struct ReportBundle {
    std::vector<std::string> policies;  // in configuration order
    std::vector<ReplicationResult> results;  // replication-major, then policy order
    std::vector<PolicySummary> summaries;
    std::vector<std::uint64_t> seeds;    // per replication
    std::uint64_t master_seed = 0;
    int horizon = 0;
    int bootstrap_resamples = 0;
    std::string config_echo;
};

/// Raised when one replication fails; carries what is needed to replay it.
class ReplicationError : public std::runtime_error {
  public:
    ReplicationError(int replication, std::uint64_t seed, const std::string& policy, const std::string& what);
    int replication() const { return replication_; }
    std::uint64_t seed() const { return seed_; }

  private:
    int replication_;
    std::uint64_t seed_;
};

std::uint64_t replication_seed(std::uint64_t master, int replication);

ReplicationResult run_replication(const SimulationConfig& sim, const PolicySpec& policy, int replication,
                                  std::uint64_t seed);

/// Reference runner: replications and policies in a plain loop.
ReportBundle run_experiment_serial(const ExperimentConfig& config);

/// Same bundle, with (replication, policy) tasks spread over `jobs` OpenMP
/// threads (0: the OpenMP default).
ReportBundle run_experiment(const ExperimentConfig& config, int jobs = 0);

/// Quartiles use linear interpolation between order statistics.
double quantile(std::vector<double> values, double p);

std::vector<PolicySummary> summarize(const std::vector<std::string>& policies,
                                     const std::vector<ReplicationResult>& results, std::uint64_t master_seed,
                                     int bootstrap_resamples);

/// terminal.csv, daily.csv and summary.json.
void write_reports(const ReportBundle& bundle, const std::filesystem::path& dir);

/// Only summary.json; what `report` rewrites after recomputing.
void write_summary(const ReportBundle& bundle, const std::filesystem::path& dir);

/// Rebuilds policies and summaries from terminal.csv and summary.json in `dir`.
ReportBundle read_reports(const std::filesystem::path& dir);

std::string format_double(double v);

}  // namespace procsim
