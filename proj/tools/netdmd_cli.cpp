// netdmd command-line tool: generate networks, simulate trajectories,
// identify models and run recovery-error sweeps.
//
// Exit codes: 0 success, 1 invalid input or configuration, 2 I/O failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "netdmd/netdmd.hpp"

namespace {

using namespace netdmd;

constexpr int kExitInvalid = 1;
constexpr int kExitIo = 2;

std::vector<double> parse_numbers(const std::string& text, char sep) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string cell;
  while (std::getline(in, cell, sep)) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(cell, &used);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::ParseError, "bad number '" + cell + "'");
    }
    while (used < cell.size() && cell[used] == ' ') ++used;
    if (used != cell.size()) throw Error(ErrorCode::ParseError, "bad number '" + cell + "'");
    out.push_back(x);
  }
  return out;
}

// "a,b,c;d,e,f": one row per input observable, one column per step.
Matrix parse_matrix(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::stringstream in(text);
  std::string row;
  while (std::getline(in, row, ';')) rows.push_back(parse_numbers(row, ','));
  if (rows.empty()) return Matrix(0, 0);
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) throw Error(ErrorCode::ParseError, "input rows have different lengths");
    for (std::size_t k = 0; k < rows[i].size(); ++k)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  }
  return m;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    write_text_file(path, text);
}

// Topology files may hold a bare topology or a full system.
NetworkTopology load_topology(const std::string& path) {
  const Json j = read_json_file(path);
  return j.contains("topology") ? topology_from_json(j.at("topology")) : topology_from_json(j);
}

struct GenOptions {
  std::string family = "circular";
  std::size_t n = 50;
  std::size_t input_period = 2;
  double p = 0.05;
  double coeff_lo = -1.0, coeff_hi = 1.0;
  std::uint64_t seed = 0;
  std::string out;
};

int run_gen(const GenOptions& o) {
  GeneratorConfig cfg;
  if (o.family == "circular")
    cfg.family = CircularFamily{o.n, o.input_period};
  else if (o.family == "erdos_renyi")
    cfg.family = ErdosRenyiFamily{o.n, o.p};
  else
    throw Error(ErrorCode::BadConfig, "unknown family '" + o.family + "'");
  cfg.coeff_range = Interval{o.coeff_lo, o.coeff_hi};
  cfg.seed = o.seed;
  emit(dump_json(system_to_json(generate(cfg))), o.out);
  return 0;
}

struct SimOptions {
  std::string system;
  std::string x0;
  std::string inputs;
  std::size_t steps = 0;
  std::uint64_t seed = 0;
  double input_lo = -10.0, input_hi = 10.0;
  std::string out;
};

int run_simulate(const SimOptions& o) {
  const auto s = system_from_json(read_json_file(o.system));
  const auto n = static_cast<Eigen::Index>(s.topology.state_dim());
  const auto l = static_cast<Eigen::Index>(s.topology.input_dim());
  Rng rng(o.seed);

  Vector x0(n);
  if (!o.x0.empty()) {
    const auto values = parse_numbers(o.x0, ',');
    if (static_cast<Eigen::Index>(values.size()) != n)
      throw Error(ErrorCode::DimensionMismatch, "--x0 needs " + std::to_string(n) + " values");
    for (Eigen::Index i = 0; i < n; ++i) x0(i) = values[static_cast<std::size_t>(i)];
  } else {
    for (Eigen::Index i = 0; i < n; ++i) x0(i) = rng.uniform(-1.0, 1.0);
  }

  Matrix inputs;
  if (!o.inputs.empty()) {
    inputs = parse_matrix(o.inputs);
    if (l == 0 && inputs.size() == 0) inputs.resize(0, static_cast<Eigen::Index>(o.steps));
  } else {
    if (o.steps < 1) throw Error(ErrorCode::BadConfig, "give --inputs or --steps >= 1");
    inputs.resize(l, static_cast<Eigen::Index>(o.steps));
    for (Eigen::Index k = 0; k < inputs.cols(); ++k)
      for (Eigen::Index i = 0; i < l; ++i) inputs(i, k) = rng.uniform(o.input_lo, o.input_hi);
  }
  if (inputs.rows() != l) throw Error(ErrorCode::DimensionMismatch, "--inputs needs " + std::to_string(l) + " rows");

  std::ostringstream csv;
  write_trajectory_csv(simulate(s, x0, inputs), csv);
  emit(csv.str(), o.out);
  return 0;
}

struct IdentifyOptions {
  std::string trajectory;
  std::string topology;
  std::string algorithm = "network_dmdc";
  bool reduced = false;
  double rcond = kDefaultRcond;
  std::string truncation = "machine_default";
  std::size_t threads = 1;
  std::string out;
};

int run_identify(const IdentifyOptions& o) {
  std::istringstream csv(read_text_file(o.trajectory));
  const auto traj = read_trajectory_csv(csv);
  const auto algorithm = parse_algorithm(o.algorithm);
  const auto rule = TruncationRule::parse(o.truncation);
  Json result;
  switch (algorithm) {
    case Algorithm::Dmd:
      if (o.reduced) {
        const auto fit = dmd_reduced(traj.z, traj.y, rule);
        result = model_to_json(fit.model, fit.modes);
      } else {
        const auto model = dmd_exact(traj.z, traj.y, o.rcond);
        result = model_to_json(model, dmd_modes(model));
      }
      break;
    case Algorithm::Dmdc:
      if (o.reduced) {
        const auto fit = dmdc_reduced(traj.z, traj.y, traj.gamma, rule, rule);
        result = model_to_json(fit.model, fit.modes);
      } else {
        const auto model = dmdc_exact(traj.z, traj.y, traj.gamma, o.rcond);
        result = model_to_json(model, dmd_modes(model));
      }
      break;
    case Algorithm::NetworkDmdc: {
      if (o.topology.empty()) throw Error(ErrorCode::BadConfig, "network_dmdc needs --topology");
      const auto t = load_topology(o.topology);
      if (const auto v = validate(t); !v.empty())
        throw Error(ErrorCode::BadConfig, "invalid topology: " + v.front().to_string());
      result = o.reduced ? network_model_to_json(network_dmdc_reduced(t, traj, rule, rule, o.threads))
                         : network_model_to_json(network_dmdc_exact(t, traj, o.rcond, o.threads));
      break;
    }
  }
  result["algorithm"] = to_string(algorithm);
  emit(dump_json(result), o.out);
  return 0;
}

struct SweepOptions {
  std::string config;
  std::string csv;
  std::string json;
  std::optional<std::size_t> threads;
};

int run_sweep_cmd(const SweepOptions& o) {
  auto cfg = sweep_config_from_json(read_json_file(o.config));
  if (o.threads) cfg.threads = *o.threads;
  const auto result = run_sweep(cfg);
  if (!o.csv.empty()) export_result(result, "csv", o.csv);
  if (!o.json.empty()) export_result(result, "json", o.json);
  std::printf("%-14s %-13s %-24s %s\n", "m", "algorithm", "mean_error", "count");
  for (const auto& g : result.aggregates)
    std::printf("%-14s %-13s %-24s %zu\n", g.m_label.c_str(), to_string(g.algorithm).c_str(),
                format_double(g.mean_error).c_str(), g.count);
  return 0;
}

int run_validate(const std::string& path) {
  const auto violations = validate(load_topology(path));
  for (const auto& v : violations) std::cout << v.to_string() << '\n';
  if (violations.empty()) std::cout << "ok\n";
  return violations.empty() ? 0 : kExitInvalid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Identify networked linear systems with network DMDc"};
  app.require_subcommand(1);

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-network", "Generate a random network system as JSON");
  gen_cmd->add_option("--family", gen.family, "circular or erdos_renyi")->check(CLI::IsMember({"circular", "erdos_renyi"}));
  gen_cmd->add_option("--n", gen.n, "Number of state vertices");
  gen_cmd->add_option("--input-period", gen.input_period, "Circular: one input every k vertices");
  gen_cmd->add_option("--p", gen.p, "Erdos-Renyi edge probability");
  gen_cmd->add_option("--coeff-lo", gen.coeff_lo);
  gen_cmd->add_option("--coeff-hi", gen.coeff_hi);
  gen_cmd->add_option("--seed", gen.seed);
  gen_cmd->add_option("-o,--output", gen.out, "Output path (default stdout)");

  SimOptions sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate a system and write a trajectory CSV");
  sim_cmd->add_option("--system", sim.system, "System JSON")->required();
  sim_cmd->add_option("--x0", sim.x0, "Initial state, comma separated (default random in [-1, 1])");
  sim_cmd->add_option("--inputs", sim.inputs, "Input matrix, rows separated by ';'");
  sim_cmd->add_option("--steps", sim.steps, "Number of steps when inputs are drawn at random");
  sim_cmd->add_option("--seed", sim.seed);
  sim_cmd->add_option("--input-lo", sim.input_lo);
  sim_cmd->add_option("--input-hi", sim.input_hi);
  sim_cmd->add_option("-o,--output", sim.out, "Output path (default stdout)");

  IdentifyOptions id;
  auto* id_cmd = app.add_subcommand("identify", "Identify a model from a trajectory CSV");
  id_cmd->add_option("--trajectory", id.trajectory, "Trajectory CSV")->required();
  id_cmd->add_option("--topology", id.topology, "Topology or system JSON (network_dmdc)");
  id_cmd->add_option("--algorithm", id.algorithm)->check(CLI::IsMember({"dmd", "dmdc", "network_dmdc"}));
  id_cmd->add_flag("--reduced", id.reduced, "Use the reduced-order variant");
  id_cmd->add_option("--rcond", id.rcond);
  id_cmd->add_option("--truncation", id.truncation, "machine_default, fixed_rank:N or relative:TAU");
  id_cmd->add_option("--threads", id.threads);
  id_cmd->add_option("-o,--output", id.out, "Output path (default stdout)");

  SweepOptions sw;
  auto* sw_cmd = app.add_subcommand("sweep", "Run a recovery-error sweep from a JSON config");
  sw_cmd->add_option("--config", sw.config, "Sweep config JSON")->required();
  sw_cmd->add_option("--csv", sw.csv, "Write per-row results as CSV");
  sw_cmd->add_option("--json", sw.json, "Write rows and aggregates as JSON");
  sw_cmd->add_option("--threads", sw.threads);

  std::string validate_path;
  auto* val_cmd = app.add_subcommand("validate", "Check a topology for structural violations");
  val_cmd->add_option("--topology", validate_path, "Topology or system JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    if (*gen_cmd) return run_gen(gen);
    if (*sim_cmd) return run_simulate(sim);
    if (*id_cmd) return run_identify(id);
    if (*sw_cmd) return run_sweep_cmd(sw);
    if (*val_cmd) return run_validate(validate_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::IoError ? kExitIo : kExitInvalid;
  }
  return kExitInvalid;
}
