#include "procsim/config.hpp"
#include "procsim/experiment.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace procsim;

namespace {

void print_summary(const ReportBundle& b) {
    std::printf("%-16s %6s %12s %12s %12s %25s\n", "policy", "n", "mean", "median", "iqr", "95% CI (mean)");
    for (const auto& s : b.summaries) {
        std::printf("%-16s %6zu %12.3f %12.3f %12.3f   [%10.3f, %10.3f]\n", s.policy.c_str(), s.n, s.mean, s.median,
                    s.iqr, s.ci_low, s.ci_high);
    }
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

void write_event_logs(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    const auto events_dir = dir / "events";
    std::filesystem::create_directories(events_dir);
    for (int r = 1; r <= cfg.replications; ++r) {
        for (const auto& policy : cfg.policies) {
            char name[64];
            std::snprintf(name, sizeof name, "r%04d-%s.ndjson", r, policy.name().c_str());
            std::ofstream out(events_dir / name, std::ios::binary | std::ios::trunc);
            if (!out) throw ConfigError(ConfigError::io, {"cannot write " + (events_dir / name).string()});
            run_simulation(cfg.sim, policy, replication_seed(cfg.seed, r), &out);
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Procurement operations simulator"};
    app.require_subcommand(1);

    std::string config_path;
    auto* validate_cmd = app.add_subcommand("validate", "Parse and validate a configuration file");
    validate_cmd->add_option("config", config_path, "Configuration file")->required();

    std::string run_config;
    int replications = 0;
    std::string seed_text;
    std::string out_dir;
    std::string policies;
    bool event_log = false;
    int jobs = 0;
    auto* run_cmd = app.add_subcommand("run", "Run the Monte Carlo policy comparison");
    run_cmd->add_option("config", run_config, "Configuration file")->required();
    run_cmd->add_option("--replications,-M", replications, "Number of replications");
    run_cmd->add_option("--seed", seed_text, "Master seed, decimal or 0x-hex");
    run_cmd->add_option("--out", out_dir, "Output directory (default: $PROCSIM_OUT_DIR or ./out)");
    run_cmd->add_option("--policies", policies, "Comma-separated policy names");
    run_cmd->add_flag("--event-log", event_log, "Write one NDJSON event log per run under OUT/events");
    run_cmd->add_option("--jobs,-j", jobs, "Worker threads (0: OpenMP default)");

    std::string report_dir;
    auto* report_cmd = app.add_subcommand("report", "Recompute summaries from an output directory");
    report_cmd->add_option("dir", report_dir, "Directory written by run")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*validate_cmd) {
            auto cfg = load_config(config_path);
            std::printf("ok: horizon %d, %zu sites, %zu products, %zu suppliers, %zu policies, %d replications\n",
                        cfg.sim.horizon, cfg.sim.n_sites, cfg.sim.n_products(), cfg.sim.n_suppliers,
                        cfg.policies.size(), cfg.replications);
            return 0;
        }
        if (*run_cmd) {
            auto cfg = load_config(run_config);
            if (replications > 0) cfg.replications = replications;
            if (!seed_text.empty()) cfg.seed = parse_seed(seed_text);
            if (!out_dir.empty()) cfg.output_dir = out_dir;
            if (!policies.empty()) {
                cfg.policies.clear();
                for (const auto& name : split_list(policies)) cfg.policies.push_back(PolicySpec::parse(name));
            }
            auto problems = validate(cfg);
            if (!problems.empty()) throw ConfigError(ConfigError::validation, problems);

            auto bundle = run_experiment(cfg, jobs);
            write_reports(bundle, cfg.output_dir);
            if (event_log) write_event_logs(cfg, cfg.output_dir);
            print_summary(bundle);
            std::printf("reports written to %s (seed %llu)\n", cfg.output_dir.c_str(),
                        static_cast<unsigned long long>(cfg.seed));
            return 0;
        }
        if (*report_cmd) {
            auto bundle = read_reports(report_dir);
            write_summary(bundle, report_dir);
            print_summary(bundle);
            return 0;
        }
    } catch (const ConfigError& e) {
        for (const auto& p : e.problems()) std::fprintf(stderr, "error: %s\n", p.c_str());
        return static_cast<int>(e.code());
    } catch (const ContractViolation& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
