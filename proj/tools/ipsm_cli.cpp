// Command-line harness: check | ergodicity | optimize | compare.
//
// Exit codes: 0 success, 2 configuration or input error, 3 runtime
// assumption violation (including failed --validate passes).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ipsm/harness.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

int exit_code_for(const ipsm::Error& e) {
  switch (e.code()) {
    case ipsm::ErrorCode::AssumptionViolated:
    case ipsm::ErrorCode::NonConvergent:
    case ipsm::ErrorCode::GenerationFailure:
    case ipsm::ErrorCode::ZeroDiagonal:
    case ipsm::ErrorCode::IoError:
      return kExitRuntime;
    default:
      return kExitConfig;
  }
}

int finish(const ipsm::CommandResult& result, bool validate) {
  if (validate) {
    const auto problems = ipsm::validate_outputs(result.files);
    for (const auto& p : problems) std::cerr << "validate: " << p << '\n';
    if (!problems.empty()) return kExitRuntime;
    std::cerr << "validate: " << result.files.size() << " files ok\n";
  }
  std::cout << result.summary.dump(2) << '\n';
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Products of stochastic matrices and unbalanced distributed projected subgradient experiments"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  int threads = 1;
  bool validate = false;
  ipsm::ConfigOverrides overrides;
  std::uint64_t topology_seed = 0;
  int n = 0;
  std::string mode;
  double extra_edge_prob = 0.0;
  double epsilon_exponent = 0.0;
  double laziness = 0.0;

  app.add_option("--config", config_path, "Experiment config (JSON)");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--threads", threads, "Worker threads for independent cells")->check(CLI::PositiveNumber);
  app.add_flag("--validate", validate, "Re-read and schema-check every emitted file");
  auto* seed_opt = app.add_option("--topology-seed", topology_seed, "Topology seed");
  auto* n_opt = app.add_option("--n", n, "Number of agents")->check(CLI::Range(2, 64));
  auto* mode_opt = app.add_option("--mode", mode, "standard | identity_approaching")
                       ->check(CLI::IsMember({"standard", "identity_approaching"}));
  auto* prob_opt = app.add_option("--extra-edge-prob", extra_edge_prob, "Extra edge probability")
                       ->check(CLI::Range(0.0, 1.0));
  auto* eps_opt = app.add_option("--epsilon-exponent", epsilon_exponent, "Identity-approaching exponent (> 1)");
  auto* lazy_opt = app.add_option("--laziness", laziness, "Identity weight mixed into standard-mode matrices")
                       ->check(CLI::Range(0.0, 1.0));

  auto* check = app.add_subcommand("check", "Classify a stochastic matrix file (CSV or JSON)");
  std::string matrix_file;
  check->add_option("matrix", matrix_file, "Matrix file")->required();
  auto* ergodicity = app.add_subcommand("ergodicity", "Backward-product and Gamma-bound diagnostics");
  auto* optimize = app.add_subcommand("optimize", "Run the configured methods and families");
  auto* compare = app.add_subcommand("compare", "Run and rank at least two methods on shared seeds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (*seed_opt) overrides.topology_seed = topology_seed;
  if (*n_opt) overrides.n = n;
  if (*mode_opt) overrides.mode = mode;
  if (*prob_opt) overrides.extra_edge_prob = extra_edge_prob;
  if (*eps_opt) overrides.epsilon_exponent = epsilon_exponent;
  if (*lazy_opt) overrides.laziness = laziness;
  if (!out_dir.empty()) overrides.output_dir = out_dir;

  try {
    if (*check) {
      const auto report = ipsm::cmd_check(matrix_file);
      const std::string text = report.dump(2);
      if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::ofstream(std::filesystem::path(out_dir) / "check.json", std::ios::binary) << text << '\n';
      }
      std::cout << text << '\n';
      return 0;
    }

    const ipsm::ExperimentConfig config = config_path.empty()
                                              ? ipsm::load_config(nlohmann::json::object(), overrides)
                                              : ipsm::load_config_file(config_path, overrides);
    const std::filesystem::path out = config.output_dir;
    if (*ergodicity) return finish(ipsm::cmd_ergodicity(config, out, threads), validate);
    if (*optimize) return finish(ipsm::cmd_optimize(config, out, threads), validate);
    if (*compare) return finish(ipsm::cmd_compare(config, out, threads), validate);
  } catch (const ipsm::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
