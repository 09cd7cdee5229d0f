#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ipsm/objectives.hpp"
#include "ipsm/optimizer.hpp"
#include "ipsm/topology.hpp"

namespace ipsm {

struct ErgodicitySweep {
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::vector<long> s;  // start indices
  std::vector<long> k;  // end indices of Phi(s, k)
  std::vector<long> K;  // estimation horizons (one per grid point or a single value)
  long horizon = 0;     // beta schedule and row-spread decay horizon, >= B
  long spread_blocks = 200;
  double gamma_tol = 1e-10;
  long assumption2_N = 2;
  long assumption2_horizon = 10000;
  std::vector<long> uniform_gap_s{100, 1000, 10000};
  long uniform_gap_factor = 10;  // pi estimate at s uses horizon factor * s
};

/// Everything a run needs; defaults are materialized at load so the copy
/// persisted next to the results names every parameter.
struct ExperimentConfig {
  std::string experiment = "experiment";
  TopologyConfig topology;
  double delta = 0.5;
  std::optional<double> log10_delta;  // overrides delta when present
  double lambda = 0.5;

  std::vector<Method> methods{Method::UDPSG};
  long iterations = 20000;
  double step_scale = 1.0;
  long pi_blocks = 40;
  long state_stride = 0;
  std::vector<std::uint64_t> seeds{0};

  std::vector<Family> families{Family::SquaredError};
  std::uint64_t dataset_seed = 0;
  int dim = 2;
  double box_lower = -1.0;
  double box_upper = 1.0;

  ErgodicitySweep ergodicity;
  std::string output_dir = "out";
};

/// Command-line overrides applied on top of a config file.
struct ConfigOverrides {
  std::optional<std::uint64_t> topology_seed;
  std::optional<int> n;
  std::optional<std::string> mode;
  std::optional<double> extra_edge_prob;
  std::optional<double> epsilon_exponent;
  std::optional<double> laziness;
  std::optional<std::string> output_dir;
};

/// Throws ConfigError on unknown keys, bad values or missing grid data.
ExperimentConfig load_config(const nlohmann::json& j, const ConfigOverrides& overrides = {});
ExperimentConfig load_config_file(const std::filesystem::path& path, const ConfigOverrides& overrides = {});
nlohmann::json to_json(const ExperimentConfig& config);

/// Classification report for one matrix file.
nlohmann::json cmd_check(const std::filesystem::path& matrix_file);

struct CommandResult {
  int exit_code = 0;  // 0 success, 3 runtime assumption violation
  std::vector<std::filesystem::path> files;
  nlohmann::json summary;
};

CommandResult cmd_ergodicity(const ExperimentConfig& config, const std::filesystem::path& out_dir, int threads = 1);
CommandResult cmd_optimize(const ExperimentConfig& config, const std::filesystem::path& out_dir, int threads = 1);
/// Like optimize over at least two methods, plus a ranking of terminal values.
CommandResult cmd_compare(const ExperimentConfig& config, const std::filesystem::path& out_dir, int threads = 1);

/// Re-reads every emitted file and checks it against its schema. Returns
/// one message per problem; empty when all files validate.
std::vector<std::string> validate_outputs(const std::vector<std::filesystem::path>& files);

std::string trajectory_file_name(Family family, Method method, std::uint64_t seed);

}  // namespace ipsm
