#include "ipsm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "ipsm/ergodicity.hpp"
#include "ipsm/matrix_io.hpp"

namespace ipsm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) config_error(where + " must be an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items())
    if (!keys.count(key)) config_error("unknown key '" + key + "' in " + where);
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    config_error(std::string("bad value for '") + key + "': " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

// Runs fn(i) for i in [0, count) on up to `threads` workers. Each index is
// handled exactly once; the first exception is rethrown after joining.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  const std::size_t workers = std::clamp<std::size_t>(threads < 1 ? 1 : threads, 1, std::max<std::size_t>(count, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

AssumptionParams assumption_params(const ExperimentConfig& c) {
  return c.log10_delta ? AssumptionParams::from_log10_delta(c.topology.n, *c.log10_delta, c.lambda)
                       : AssumptionParams(c.topology.n, c.delta, c.lambda);
}

TopologyConfig topology_for_seed(const ExperimentConfig& c, std::uint64_t seed) {
  TopologyConfig t = c.topology;
  t.seed = seed;
  return t;
}

int family_dim(const ExperimentConfig& c, Family f) { return is_convex_family(f) ? c.dim : 2; }

}  // namespace

ExperimentConfig load_config(const json& j, const ConfigOverrides& overrides) {
  reject_unknown(j, "config",
                 {"experiment", "topology", "optimizer", "seeds", "objective", "box", "ergodicity", "output_dir"});
  ExperimentConfig c;
  read(j, "experiment", c.experiment);
  read(j, "output_dir", c.output_dir);
  read(j, "seeds", c.seeds);

  if (j.contains("topology")) {
    const json& t = j.at("topology");
    reject_unknown(t, "topology",
                   {"n", "seed", "extra_edge_prob", "mode", "epsilon_exponent", "laziness", "delta", "log10_delta", "lambda", "B"});
    read(t, "n", c.topology.n);
    read(t, "seed", c.topology.seed);
    read(t, "extra_edge_prob", c.topology.extra_edge_prob);
    read(t, "epsilon_exponent", c.topology.epsilon_exponent);
    read(t, "laziness", c.topology.laziness);
    read(t, "delta", c.delta);
    read(t, "lambda", c.lambda);
    if (t.contains("log10_delta") && !t.at("log10_delta").is_null()) {
      double v = 0.0;
      read(t, "log10_delta", v);
      c.log10_delta = v;
    }
    std::string mode = to_string(c.topology.mode);
    read(t, "mode", mode);
    c.topology.mode = topology_mode_from_string(mode);
  }
  if (j.contains("optimizer")) {
    const json& o = j.at("optimizer");
    reject_unknown(o, "optimizer", {"methods", "iterations", "step_scale", "pi_blocks", "state_stride"});
    std::vector<std::string> methods;
    read(o, "methods", methods);
    if (o.contains("methods")) {
      c.methods.clear();
      for (const auto& m : methods) c.methods.push_back(method_from_string(m));
    }
    read(o, "iterations", c.iterations);
    read(o, "step_scale", c.step_scale);
    read(o, "pi_blocks", c.pi_blocks);
    read(o, "state_stride", c.state_stride);
  }
  if (j.contains("objective")) {
    const json& o = j.at("objective");
    reject_unknown(o, "objective", {"families", "dataset_seed", "dim"});
    std::vector<std::string> families;
    read(o, "families", families);
    if (o.contains("families")) {
      c.families.clear();
      for (const auto& f : families) {
        try {
          c.families.push_back(family_from_string(f));
        } catch (const Error& e) {
          config_error(e.what());
        }
      }
    }
    read(o, "dataset_seed", c.dataset_seed);
    read(o, "dim", c.dim);
  }
  if (j.contains("box")) {
    const json& b = j.at("box");
    reject_unknown(b, "box", {"lower", "upper"});
    read(b, "lower", c.box_lower);
    read(b, "upper", c.box_upper);
  }
  bool horizon_given = false;
  if (j.contains("ergodicity")) {
    const json& e = j.at("ergodicity");
    reject_unknown(e, "ergodicity",
                   {"seeds", "s", "k", "K", "horizon", "spread_blocks", "gamma_tol", "assumption2_N",
                    "assumption2_horizon", "uniform_gap_s", "uniform_gap_factor"});
    auto& g = c.ergodicity;
    read(e, "seeds", g.seeds);
    read(e, "s", g.s);
    read(e, "k", g.k);
    read(e, "K", g.K);
    horizon_given = e.contains("horizon");
    read(e, "horizon", g.horizon);
    read(e, "spread_blocks", g.spread_blocks);
    read(e, "gamma_tol", g.gamma_tol);
    read(e, "assumption2_N", g.assumption2_N);
    read(e, "assumption2_horizon", g.assumption2_horizon);
    read(e, "uniform_gap_s", g.uniform_gap_s);
    read(e, "uniform_gap_factor", g.uniform_gap_factor);
  }

  if (overrides.topology_seed) c.topology.seed = *overrides.topology_seed;
  if (overrides.n) c.topology.n = *overrides.n;
  if (overrides.mode) c.topology.mode = topology_mode_from_string(*overrides.mode);
  if (overrides.extra_edge_prob) c.topology.extra_edge_prob = *overrides.extra_edge_prob;
  if (overrides.epsilon_exponent) c.topology.epsilon_exponent = *overrides.epsilon_exponent;
  if (overrides.laziness) c.topology.laziness = *overrides.laziness;
  if (overrides.output_dir) c.output_dir = *overrides.output_dir;

  // materialize derived defaults and validate
  try {
    c.topology.assumption_params = assumption_params(c);
    c.topology.validate();
  } catch (const Error& e) {
    config_error(e.what());
  }
  const long B = c.topology.assumption_params.B();
  auto& g = c.ergodicity;
  if (g.s.empty()) g.s = {0};
  if (g.k.empty())
    for (long s : g.s) g.k.push_back(s + 10 * B);
  if (g.K.empty())
    for (long s : g.s) g.K.push_back(s + 60 * B);
  if (g.K.size() == 1 && g.s.size() > 1) g.K.assign(g.s.size(), g.K.front());
  if (g.k.size() != g.s.size() || g.K.size() != g.s.size())
    config_error("ergodicity grid lists s, k, K must have equal lengths");
  for (std::size_t i = 0; i < g.s.size(); ++i)
    if (g.s[i] < 0 || g.k[i] < g.s[i] || g.K[i] < g.k[i])
      config_error("ergodicity grid point " + std::to_string(i) + " needs 0 <= s <= k <= K");
  if (!horizon_given) g.horizon = g.spread_blocks * B;
  if (g.horizon < B)
    config_error("ergodicity horizon " + std::to_string(g.horizon) + " is below B=" + std::to_string(B) +
                 " for n=" + std::to_string(c.topology.n));
  if (g.spread_blocks < 1) config_error("spread_blocks must be positive");
  if (!(g.gamma_tol > 0.0)) config_error("gamma_tol must be positive");
  if (g.assumption2_N < 2 || g.assumption2_horizon < g.assumption2_N)
    config_error("assumption2 needs N >= 2 and horizon >= N");
  if (g.uniform_gap_factor < 1) config_error("uniform_gap_factor must be at least 1");
  if (g.seeds.empty()) config_error("ergodicity needs at least one seed");

  if (c.methods.empty()) config_error("at least one method required");
  if (c.families.empty()) config_error("at least one objective family required");
  if (c.seeds.empty()) config_error("at least one seed required");
  if (c.iterations < 0) config_error("iterations must be nonnegative");
  if (!(c.step_scale > 0.0)) config_error("step_scale must be positive");
  if (c.pi_blocks < 1) config_error("pi_blocks must be positive");
  if (c.state_stride < 0) config_error("state_stride must be nonnegative");
  if (c.dim < 1) config_error("dim must be positive");
  if (!(c.box_lower < c.box_upper)) config_error("box needs lower < upper");
  return c;
}

ExperimentConfig load_config_file(const fs::path& path, const ConfigOverrides& overrides) {
  std::ifstream in(path);
  if (!in) config_error("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    config_error(std::string("config is not valid JSON: ") + e.what());
  }
  return load_config(j, overrides);
}

json to_json(const ExperimentConfig& c) {
  std::vector<std::string> methods, families;
  for (Method m : c.methods) methods.push_back(to_string(m));
  for (Family f : c.families) families.push_back(to_string(f));
  const auto& g = c.ergodicity;
  return {
      {"experiment", c.experiment},
      {"output_dir", c.output_dir},
      {"seeds", c.seeds},
      {"topology",
       {{"n", c.topology.n},
        {"seed", c.topology.seed},
        {"extra_edge_prob", c.topology.extra_edge_prob},
        {"mode", to_string(c.topology.mode)},
        {"epsilon_exponent", c.topology.epsilon_exponent},
        {"laziness", c.topology.laziness},
        {"delta", c.delta},
        {"log10_delta", c.log10_delta ? json(*c.log10_delta) : json(nullptr)},
        {"lambda", c.lambda},
        {"B", c.topology.assumption_params.B()}}},
      {"optimizer",
       {{"methods", methods},
        {"iterations", c.iterations},
        {"step_scale", c.step_scale},
        {"pi_blocks", c.pi_blocks},
        {"state_stride", c.state_stride}}},
      {"objective", {{"families", families}, {"dataset_seed", c.dataset_seed}, {"dim", c.dim}}},
      {"box", {{"lower", c.box_lower}, {"upper", c.box_upper}}},
      {"ergodicity",
       {{"seeds", g.seeds},
        {"s", g.s},
        {"k", g.k},
        {"K", g.K},
        {"horizon", g.horizon},
        {"spread_blocks", g.spread_blocks},
        {"gamma_tol", g.gamma_tol},
        {"assumption2_N", g.assumption2_N},
        {"assumption2_horizon", g.assumption2_horizon},
        {"uniform_gap_s", g.uniform_gap_s},
        {"uniform_gap_factor", g.uniform_gap_factor}}},
  };
}

json cmd_check(const fs::path& matrix_file) {
  const Eigen::MatrixXd raw = read_matrix(matrix_file);
  if (raw.rows() != raw.cols())
    throw Error(ErrorCode::NonSquare, std::to_string(raw.rows()) + "x" + std::to_string(raw.cols()));
  if (raw.rows() > kMaxOrder) throw Error(ErrorCode::TooLarge, "order exceeds 64");

  const bool nonnegative = (raw.array() >= 0.0).all();
  const double row_error = (raw.rowwise().sum().array() - 1.0).abs().maxCoeff();
  const auto a = StochasticMatrix::trusted(raw, kDefaultZeroTol);

  json report;
  report["order"] = a.order();
  report["stochastic"] = nonnegative && row_error <= 1e-12;
  report["positive_diagonal"] = a.has_positive_diagonal();
  report["connectivity"] = connectivity(a);
  report["sarymsakov"] = a.order() <= kDefaultEnumerationLimit ? json(is_sarymsakov(a)) : json(nullptr);
  report["scrambling"] = is_scrambling(a);
  if (auto col = positive_column_index(a))
    report["positive_column"] = {{"column", col->column + 1}, {"min", col->minimum}};
  else
    report["positive_column"] = nullptr;
  try {
    report["min_positive_entry"] = min_positive_entry(a);
  } catch (const Error&) {
    report["min_positive_entry"] = nullptr;
  }
  return report;
}

CommandResult cmd_ergodicity(const ExperimentConfig& config, const fs::path& out_dir, int threads) {
  fs::create_directories(out_dir);
  CommandResult result;
  const auto params = config.topology.assumption_params;
  const long B = params.B();
  const auto& g = config.ergodicity;
  const bool identity_mode = config.topology.mode == TopologyMode::IdentityApproaching;

  const fs::path config_path = out_dir / "config.json";
  write_json(config_path, to_json(config));
  result.files.push_back(config_path);

  // Gamma depends only on the parameters, not on the realized sequence.
  json gamma_grid = json::array();
  for (long s : g.s) {
    json series = json::array();
    for (long m = 0; m <= 50; ++m) series.push_back(to_json(gamma_bound(params, s, s + m * B, g.gamma_tol)));
    gamma_grid.push_back({{"s", s}, {"series", series}});
  }
  const fs::path gamma_path = out_dir / "gamma_grid.json";
  write_json(gamma_path, {{"B", B}, {"grid", gamma_grid}});
  result.files.push_back(gamma_path);

  std::vector<json> reports(g.seeds.size());
  parallel_for(g.seeds.size(), threads, [&](std::size_t idx) {
    const std::uint64_t seed = g.seeds[idx];
    const MatrixSequence seq(topology_for_seed(config, seed));
    json rep;
    rep["seed"] = seed;
    rep["B"] = B;
    rep["mode"] = to_string(config.topology.mode);

    json prop1 = json::array(), pis = json::array();
    bool all_dominated = true;
    for (std::size_t i = 0; i < g.s.size(); ++i) {
      const auto r = verify_prop1(seq, params, g.s[i], g.k[i], g.K[i], false, g.gamma_tol);
      all_dominated = all_dominated && r.dominated;
      prop1.push_back(to_json(r));
      pis.push_back(to_json(estimate_pi(seq, g.s[i], g.K[i])));
    }
    rep["prop1"] = prop1;
    rep["pi_series"] = pis;
    rep["all_dominated"] = all_dominated;

    json decay = json::array();
    Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(seq.order(), seq.order());
    long below_at = -1;
    for (long t = 0; t <= g.spread_blocks * B; ++t) {
      phi = seq.matrix(t).entries() * phi;
      if (t % B == 0) {
        const double spread = row_spread(phi);
        decay.push_back({t / B, spread});
        if (below_at < 0 && spread < 1e-6) below_at = t / B;
      }
    }
    rep["spread_decay"] = decay;
    rep["spread_below_1e-6_at_block"] = below_at >= 0 ? json(below_at) : json(nullptr);

    rep["beta_schedule"] = to_json(beta_schedule_check(seq, params, g.horizon));
    rep["assumption2"] = to_json(assumption2_diagnostics(seq, g.assumption2_N, g.assumption2_horizon));

    if (identity_mode) {
      json gaps = json::array();
      bool decreasing = true;
      double prev = std::numeric_limits<double>::infinity();
      for (long s : g.uniform_gap_s) {
        const auto est = estimate_pi(seq, s, g.uniform_gap_factor * s);
        const double gap = pi_uniform_gap(est);
        decreasing = decreasing && gap < prev;
        prev = gap;
        gaps.push_back({{"s", s}, {"gap", gap}, {"spread_at_K", est.spread_at_K}, {"horizon", est.horizon}});
      }
      rep["uniform_gap"] = gaps;
      rep["uniform_gap_decreasing"] = decreasing;
    }

    const fs::path path = out_dir / ("ergodicity_seed" + std::to_string(seed) + ".json");
    write_json(path, rep);
    reports[idx] = std::move(rep);
  });

  json summary;
  summary["experiment"] = config.experiment;
  summary["B"] = B;
  bool dominated = true;
  json seeds = json::array();
  for (std::size_t i = 0; i < reports.size(); ++i) {
    result.files.push_back(out_dir / ("ergodicity_seed" + std::to_string(g.seeds[i]) + ".json"));
    dominated = dominated && reports[i]["all_dominated"].get<bool>();
    json cell = {{"seed", g.seeds[i]},
                 {"all_dominated", reports[i]["all_dominated"]},
                 {"spread_below_1e-6_at_block", reports[i]["spread_below_1e-6_at_block"]},
                 {"beta_schedule_ok", reports[i]["beta_schedule"]["schedule_ok"]}};
    if (identity_mode) cell["uniform_gap_decreasing"] = reports[i]["uniform_gap_decreasing"];
    seeds.push_back(cell);
  }
  summary["seeds"] = seeds;
  summary["all_dominated"] = dominated;
  const fs::path summary_path = out_dir / "ergodicity_summary.json";
  write_json(summary_path, summary);
  result.files.push_back(summary_path);
  result.summary = summary;
  result.exit_code = dominated ? 0 : 3;
  return result;
}

std::string trajectory_file_name(Family family, Method method, std::uint64_t seed) {
  return "traj_" + to_string(family) + "_" + to_string(method) + "_seed" + std::to_string(seed) + ".csv";
}

namespace {

struct Cell {
  Family family;
  Method method;
  std::uint64_t seed;
};

double last_decade_mean_movement(const Trajectory& t) {
  const std::size_t n = t.records.size();
  if (n < 2) return 0.0;
  const std::size_t from = std::max<std::size_t>(1, n - std::max<std::size_t>(1, (n - 1) / 10));
  double sum = 0.0;
  for (std::size_t i = from; i < n; ++i) sum += t.records[i].movement;
  return sum / static_cast<double>(n - from);
}

CommandResult run_cells(const ExperimentConfig& config, const fs::path& out_dir, int threads) {
  fs::create_directories(out_dir);
  CommandResult result;
  const fs::path config_path = out_dir / "config.json";
  write_json(config_path, to_json(config));
  result.files.push_back(config_path);

  std::vector<AggregateObjective> aggregates;
  std::vector<std::vector<Objective>> locals;
  for (Family f : config.families) {
    const Dataset data = make_dataset(f, config.topology.n, family_dim(config, f), config.dataset_seed);
    const fs::path path = out_dir / ("dataset_" + to_string(f) + ".json");
    write_json(path, to_json(data));
    result.files.push_back(path);
    locals.push_back(make_objectives(data));
    aggregates.emplace_back(locals.back());
  }

  std::vector<Cell> cells;
  for (std::size_t fi = 0; fi < config.families.size(); ++fi)
    for (Method m : config.methods)
      for (std::uint64_t seed : config.seeds) cells.push_back({config.families[fi], m, seed});

  std::vector<json> rows(cells.size());
  parallel_for(cells.size(), threads, [&](std::size_t i) {
    const Cell& cell = cells[i];
    const std::size_t fi = std::find(config.families.begin(), config.families.end(), cell.family) -
                           config.families.begin();
    const MatrixSequence seq(topology_for_seed(config, cell.seed));
    OptimizerConfig oc;
    oc.method = cell.method;
    oc.iterations = config.iterations;
    oc.step_scale = config.step_scale;
    oc.init_seed = cell.seed;
    oc.pi_blocks = config.pi_blocks;
    oc.state_stride = config.state_stride;
    const FeasibleBox box(family_dim(config, cell.family), config.box_lower, config.box_upper);
    const Trajectory traj = run(oc, seq, locals[fi], box);

    std::ostringstream csv;
    write_trajectory_csv(csv, traj);
    write_text(out_dir / trajectory_file_name(cell.family, cell.method, cell.seed), csv.str());
    if (config.state_stride > 0) {
      std::ostringstream states;
      write_states_jsonl(states, traj);
      write_text(out_dir / ("states_" + to_string(cell.family) + "_" + to_string(cell.method) + "_seed" +
                            std::to_string(cell.seed) + ".jsonl"),
                 states.str());
    }
    const auto& last = traj.records.back();
    const auto& first = traj.records.front();
    const auto f_star = aggregates[fi].known_minimum();
    const long probe = std::min<long>(10, static_cast<long>(traj.records.size()) - 1);
    rows[i] = {{"family", to_string(cell.family)},
               {"method", to_string(cell.method)},
               {"seed", cell.seed},
               {"iterations", config.iterations},
               {"initial_consensus_error", first.consensus_error},
               {"consensus_error_at_10", traj.records[probe].consensus_error},
               {"terminal_consensus_error", last.consensus_error},
               {"terminal_f_mean", last.f_mean},
               {"terminal_f_y", last.f_y},
               {"f_star", f_star ? json(*f_star) : json(nullptr)},
               {"terminal_max_y_deviation", last.max_y_deviation},
               {"last_decade_mean_movement", last_decade_mean_movement(traj)},
               {"pi_spread", traj.pi_spread}};
  });

  for (std::size_t i = 0; i < cells.size(); ++i) {
    result.files.push_back(out_dir / trajectory_file_name(cells[i].family, cells[i].method, cells[i].seed));
    if (config.state_stride > 0)
      result.files.push_back(out_dir / ("states_" + to_string(cells[i].family) + "_" + to_string(cells[i].method) +
                                        "_seed" + std::to_string(cells[i].seed) + ".jsonl"));
  }
  result.summary = {{"experiment", config.experiment}, {"cells", rows}};
  const fs::path summary_path = out_dir / "summary.json";
  write_json(summary_path, result.summary);
  result.files.push_back(summary_path);
  return result;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

CommandResult cmd_optimize(const ExperimentConfig& config, const fs::path& out_dir, int threads) {
  return run_cells(config, out_dir, threads);
}

CommandResult cmd_compare(const ExperimentConfig& config, const fs::path& out_dir, int threads) {
  if (config.methods.size() < 2) config_error("compare needs at least two methods");
  CommandResult result = run_cells(config, out_dir, threads);

  json families = json::array();
  for (Family f : config.families) {
    json methods = json::array();
    std::vector<std::pair<double, std::string>> ranking;
    std::map<std::string, double> median_consensus;
    for (Method m : config.methods) {
      std::vector<double> consensus, fvals;
      for (const auto& row : result.summary["cells"]) {
        if (row["family"] != to_string(f) || row["method"] != to_string(m)) continue;
        consensus.push_back(row["terminal_consensus_error"].get<double>());
        fvals.push_back(row["terminal_f_mean"].get<double>());
      }
      const double mc = median(consensus), mf = median(fvals);
      median_consensus[to_string(m)] = mc;
      ranking.emplace_back(mf, to_string(m));
      methods.push_back({{"method", to_string(m)}, {"median_terminal_consensus_error", mc},
                         {"median_terminal_f_mean", mf}});
    }
    std::stable_sort(ranking.begin(), ranking.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    json order = json::array();
    for (const auto& [_, name] : ranking) order.push_back(name);
    json entry = {{"family", to_string(f)}, {"methods", methods}, {"ranking_by_terminal_f", order}};
    if (median_consensus.count("UDPSG") && median_consensus.count("SPSG"))
      entry["udpsg_consensus_le_spsg"] = median_consensus["UDPSG"] <= median_consensus["SPSG"];
    families.push_back(entry);
  }
  const fs::path path = out_dir / "comparison.json";
  write_json(path, {{"experiment", config.experiment}, {"families", families}});
  result.files.push_back(path);
  result.summary["comparison"] = families;
  return result;
}

namespace {

void validate_trajectory_csv(const fs::path& path, std::vector<std::string>& problems) {
  std::ifstream in(path);
  std::string line;
  if (!std::getline(in, line) || line != "k,consensus_error,f_mean,f_y,method,seed") {
    problems.push_back(path.string() + ": bad header");
    return;
  }
  long expected_k = 0;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != 6) {
      problems.push_back(path.string() + ":" + std::to_string(line_no) + ": expected 6 fields");
      return;
    }
    try {
      if (std::stol(fields[0]) != expected_k++) {
        problems.push_back(path.string() + ":" + std::to_string(line_no) + ": k out of sequence");
        return;
      }
      for (int c = 1; c <= 3; ++c) (void)std::stod(fields[c]);
      (void)method_from_string(fields[4]);
      (void)std::stoull(fields[5]);
    } catch (const std::exception& e) {
      problems.push_back(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
      return;
    }
  }
  if (expected_k == 0) problems.push_back(path.string() + ": no records");
}

void require_keys(const json& j, const fs::path& path, std::initializer_list<const char*> keys,
                  std::vector<std::string>& problems) {
  for (const char* k : keys)
    if (!j.contains(k)) problems.push_back(path.string() + ": missing key '" + k + "'");
}

}  // namespace

std::vector<std::string> validate_outputs(const std::vector<fs::path>& files) {
  std::vector<std::string> problems;
  for (const auto& path : files) {
    if (!fs::exists(path)) {
      problems.push_back(path.string() + ": missing");
      continue;
    }
    const std::string name = path.filename().string();
    try {
      if (path.extension() == ".csv") {
        validate_trajectory_csv(path, problems);
      } else if (path.extension() == ".jsonl") {
        std::ifstream in(path);
        std::string line;
        while (std::getline(in, line)) {
          const json j = json::parse(line);
          require_keys(j, path, {"k", "states"}, problems);
        }
      } else if (path.extension() == ".json") {
        std::ifstream in(path);
        const json j = json::parse(in);
        if (name == "config.json") {
          (void)load_config(j);
        } else if (name == "summary.json") {
          require_keys(j, path, {"experiment", "cells"}, problems);
        } else if (name == "comparison.json") {
          require_keys(j, path, {"experiment", "families"}, problems);
        } else if (name == "gamma_grid.json") {
          require_keys(j, path, {"B", "grid"}, problems);
        } else if (name == "ergodicity_summary.json") {
          require_keys(j, path, {"seeds", "all_dominated"}, problems);
        } else if (name.rfind("ergodicity_seed", 0) == 0) {
          require_keys(j, path, {"seed", "prop1", "pi_series", "spread_decay", "beta_schedule", "assumption2"},
                       problems);
        } else if (name.rfind("dataset_", 0) == 0) {
          (void)dataset_from_json(j);
        }
      } else {
        problems.push_back(path.string() + ": unexpected file type");
      }
    } catch (const std::exception& e) {
      problems.push_back(path.string() + ": " + e.what());
    }
  }
  return problems;
}

}  // namespace ipsm
