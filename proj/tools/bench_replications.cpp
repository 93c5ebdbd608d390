// Times the serial reference runner against the OpenMP runner on the same
// experiment and checks that both produce the same terminal regrets.
#include "procsim/config.hpp"
#include "procsim/experiment.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <chrono>
#include <cstdio>

using namespace procsim;

int main(int argc, char** argv) {
    CLI::App app{"Serial vs OpenMP replication benchmark"};
    std::string config_path = "configs/paper-s5.json";
    int replications = 20;
    int jobs = 0;
    int repeats = 3;
    app.add_option("config", config_path, "Configuration file");
    app.add_option("--replications,-M", replications, "Replications per timing");
    app.add_option("--jobs,-j", jobs, "OpenMP threads (0: default)");
    app.add_option("--repeats", repeats, "Timings per runner; the best is reported");
    CLI11_PARSE(app, argc, argv);

    try {
        auto cfg = load_config(config_path);
        cfg.replications = replications;

        auto time_best = [&](auto&& fn) {
            double best = 1e300;
            ReportBundle out;
            for (int i = 0; i < repeats; ++i) {
                const auto t0 = std::chrono::steady_clock::now();
                out = fn();
                const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
                best = std::min(best, dt.count());
            }
            return std::pair{best, std::move(out)};
        };

        auto [t_serial, serial] = time_best([&] { return run_experiment_serial(cfg); });
        auto [t_parallel, parallel] = time_best([&] { return run_experiment(cfg, jobs); });

        bool same = serial.results.size() == parallel.results.size();
        for (std::size_t i = 0; same && i < serial.results.size(); ++i) {
            same = serial.results[i].terminal_regret == parallel.results[i].terminal_regret &&
                   serial.results[i].policy == parallel.results[i].policy;
        }
        const int threads = jobs > 0 ? jobs : omp_get_max_threads();
        const auto tasks = serial.results.size();
        std::printf("tasks %zu (replications %d x policies %zu), threads %d\n", tasks, replications,
                    cfg.policies.size(), threads);
        std::printf("serial    %8.3f s  %8.2f ms/task\n", t_serial, 1e3 * t_serial / static_cast<double>(tasks));
        std::printf("openmp    %8.3f s  %8.2f ms/task\n", t_parallel, 1e3 * t_parallel / static_cast<double>(tasks));
        std::printf("speedup   %8.2fx\n", t_serial / t_parallel);
        std::printf("results   %s\n", same ? "identical" : "DIFFERENT");
        return same ? 0 : 1;
    } catch (const ConfigError& e) {
        for (const auto& p : e.problems()) std::fprintf(stderr, "error: %s\n", p.c_str());
        return static_cast<int>(e.code());
    }
}
