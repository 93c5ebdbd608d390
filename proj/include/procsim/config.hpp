#pragma once

#include "procsim/engine.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace procsim {

struct ExperimentConfig {
    SimulationConfig sim;
    std::vector<PolicySpec> policies;
    int replications = 100;
    int full_scale_replications = 1000;
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    int bootstrap_resamples = 2000;
    std::string echo;  // the parsed document, re-serialised
};

/// Carries the process exit code the CLI should return.
class ConfigError : public std::runtime_error {
  public:
    enum Code { parse = 2, validation = 3, io = 4 };
    ConfigError(Code code, std::vector<std::string> problems);
    Code code() const { return code_; }
    const std::vector<std::string>& problems() const { return problems_; }

  private:
    Code code_;
    std::vector<std::string> problems_;
};

/// Parses JSON (comments allowed), fills defaults, validates everything.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Every violated invariant, one message each; empty when valid.
std::vector<std::string> validate(const ExperimentConfig& config);

/// PROCSIM_OUT_DIR if set, otherwise "out".
std::string default_output_dir();

}  // namespace procsim
