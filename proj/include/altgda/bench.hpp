#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace altgda {

// Log-spaced iteration checkpoints: starts at 1, ends at T, at most
// per_decade points per factor of ten.
std::vector<long long> log_checkpoints(long long T, int per_decade = 100);

struct RepeatCurve {
  std::uint64_t seed = 0;
  std::vector<double> gap;
};

struct BenchmarkReport {
  std::vector<long long> t;
  std::vector<RepeatCurve> repeats;
  std::vector<double> mean;
  std::vector<double> stddev;  // sample standard deviation, 0 for one repeat
  double wall_seconds = 0.0;
  nlohmann::ordered_json metadata;

  // t,mean_gap,std_gap,gap_r0,gap_r1,...
  std::string csv() const;
  nlohmann::ordered_json to_json() const;
};

BenchmarkReport aggregate(std::vector<long long> t, std::vector<RepeatCurve> repeats);

// Configuration documents. Precedence: defaults < file < overrides. Keys that
// are not part of the default document are rejected.
nlohmann::ordered_json default_config();
nlohmann::ordered_json parse_toml(const std::string& text);
nlohmann::ordered_json load_config_file(const std::string& path);

struct ExperimentConfig {
  std::string command;
  nlohmann::ordered_json doc;
};

ExperimentConfig resolve_config(const std::string& command,
                                const nlohmann::ordered_json& file,
                                const nlohmann::ordered_json& overrides);

struct ExperimentOutcome {
  int exit_code = 0;
  std::string summary;
};

// Runs one CLI command. Throws Error for configuration, I/O and solver
// failures; audit failures are reported through exit_code = 1.
ExperimentOutcome execute_experiment(const ExperimentConfig& cfg);

const char* library_version();

}  // namespace altgda
