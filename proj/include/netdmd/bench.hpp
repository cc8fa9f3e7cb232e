#ifndef NETDMD_BENCH_HPP
#define NETDMD_BENCH_HPP

/// \file bench.hpp
/// Recovery-error sweeps: simulate seeded random networks for several
/// snapshot counts m, identify them with standard and network DMD(c), and
/// record the Frobenius distance to the true [A B].

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "netdmd/dmdcore.hpp"
#include "netdmd/io.hpp"
#include "netdmd/netdmdc.hpp"
#include "netdmd/parallel.hpp"
#include "netdmd/rng.hpp"
#include "netdmd/sysmodel.hpp"

namespace netdmd {

enum class Algorithm { Dmd, Dmdc, NetworkDmdc };

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Dmd: return "dmd";
    case Algorithm::Dmdc: return "dmdc";
    case Algorithm::NetworkDmdc: break;
  }
  return "network_dmdc";
}

inline Algorithm parse_algorithm(const std::string& name) {
  if (name == "dmd") return Algorithm::Dmd;
  if (name == "dmdc") return Algorithm::Dmdc;
  if (name == "network_dmdc") return Algorithm::NetworkDmdc;
  throw Error(ErrorCode::BadConfig, "unknown algorithm '" + name + "'");
}

/// A snapshot count: either fixed, or the trial network's max_local_dim.
struct SnapshotCount {
  std::size_t fixed = 1;
  bool at_max_local_dim = false;

  static SnapshotCount max_local() { return SnapshotCount{0, true}; }

  std::string label() const { return at_max_local_dim ? "max_local_dim" : std::to_string(fixed); }
  std::size_t resolve(const NetworkTopology& t) const { return at_max_local_dim ? max_local_dim(t) : fixed; }

  friend bool operator==(const SnapshotCount&, const SnapshotCount&) = default;
};

struct SweepConfig {
  GeneratorConfig generator;  ///< generator.seed is replaced per trial
  std::size_t trials = 20;
  std::vector<SnapshotCount> m_values;
  std::vector<Algorithm> algorithms{Algorithm::Dmdc, Algorithm::NetworkDmdc};
  TruncationRule truncation = TruncationRule::machine_default();
  double rcond = kDefaultRcond;
  std::uint64_t master_seed = 0;
  Interval initial_state_range{-1.0, 1.0};
  bool reduced = false;  ///< use the reduced-order variants, lifted to full space
  std::size_t threads = 1;
};

struct ResultRow {
  std::size_t trial = 0;
  std::size_t m = 0;
  std::string m_label;
  Algorithm algorithm = Algorithm::NetworkDmdc;
  double frobenius_error = std::numeric_limits<double>::quiet_NaN();
  double cond_ratio = std::numeric_limits<double>::quiet_NaN();
  double wall_time_s = 0.0;
  std::string warnings;
  std::string truncation;
  std::uint64_t data_hash = 0;  ///< hash of the trajectory the algorithm consumed
};

struct Aggregate {
  std::string m_label;
  Algorithm algorithm;
  double mean_error;   ///< over rows with a finite error
  std::size_t count;   ///< rows contributing to the mean
};

struct SweepResult {
  SweepConfig config;
  std::vector<ResultRow> rows;
  std::vector<Aggregate> aggregates;

  const Aggregate* find(const std::string& m_label, Algorithm a) const {
    for (const auto& g : aggregates)
      if (g.m_label == m_label && g.algorithm == a) return &g;
    return nullptr;
  }
};

/// Per-(m, algorithm) means, in first-appearance order of the rows.
inline std::vector<Aggregate> compute_aggregates(const std::vector<ResultRow>& rows) {
  std::vector<Aggregate> out;
  std::vector<double> sums;
  for (const auto& row : rows) {
    std::size_t slot = 0;
    while (slot < out.size() && !(out[slot].m_label == row.m_label && out[slot].algorithm == row.algorithm)) ++slot;
    if (slot == out.size()) {
      out.push_back({row.m_label, row.algorithm, 0.0, 0});
      sums.push_back(0.0);
    }
    if (std::isfinite(row.frobenius_error)) {
      sums[slot] += row.frobenius_error;
      ++out[slot].count;
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i].mean_error = out[i].count > 0 ? sums[i] / static_cast<double>(out[i].count)
                                         : std::numeric_limits<double>::quiet_NaN();
  return out;
}

/// FNV-1a over shapes and raw bytes of Z, Gamma, Y.
inline std::uint64_t trajectory_hash(const TrajectoryData& traj) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const Matrix* m : {&traj.z, &traj.gamma, &traj.y}) {
    const std::int64_t shape[2] = {m->rows(), m->cols()};
    feed(shape, sizeof shape);
    feed(m->data(), static_cast<std::size_t>(m->size()) * sizeof(double));
  }
  return h;
}

struct TrialOptions {
  double rcond = kDefaultRcond;
  TruncationRule truncation = TruncationRule::machine_default();
  bool reduced = false;
  Interval initial_state_range{-1.0, 1.0};
  Interval input_range{-10.0, 10.0};
};

namespace detail {

inline double singular_ratio(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  const Vector s = Eigen::JacobiSVD<Matrix>(m).singularValues();
  return s(0) > 0.0 ? s(s.size() - 1) / s(0) : 0.0;
}

inline void append_warning(std::string& w, const std::string& item) {
  if (!w.empty()) w += ';';
  for (const char c : item) w += (c == ',' || c == '\n' || c == '\r') ? ' ' : c;
}

struct Identified {
  Matrix a;
  std::optional<Matrix> b;
  double cond_ratio;
  std::string warnings;
};

inline Identified identify(Algorithm algorithm, const NetworkTopology& t, const TrajectoryData& traj,
                           const TrialOptions& opt) {
  Identified out;
  const bool autonomous = traj.gamma.rows() == 0;
  switch (algorithm) {
    case Algorithm::Dmd:
    case Algorithm::Dmdc: {
      const bool with_inputs = algorithm == Algorithm::Dmdc;
      if (!with_inputs && !autonomous)
        throw Error(ErrorCode::BadConfig, "dmd requires a system without input vertices");
      if (!opt.reduced) {
        const auto model = with_inputs ? dmdc_exact(traj.z, traj.y, traj.gamma, opt.rcond)
                                       : dmd_exact(traj.z, traj.y, opt.rcond);
        out.a = model.a;
        out.b = model.b;
        out.cond_ratio = model.conditioning.ratio();
        if (model.conditioning.warning) append_warning(out.warnings, "ill_conditioned");
      } else {
        const auto fit = with_inputs ? dmdc_reduced(traj.z, traj.y, traj.gamma, opt.truncation, opt.truncation)
                                     : dmd_reduced(traj.z, traj.y, opt.truncation);
        const Matrix& u = fit.model.u_hat;
        out.a = u * fit.model.a_tilde * u.transpose();
        if (fit.model.b_tilde) out.b = u * (*fit.model.b_tilde);
        out.cond_ratio = singular_ratio(with_inputs ? vstack(traj.z, traj.gamma) : traj.z);
        if (!(out.cond_ratio >= kConditioningWarnRatio)) append_warning(out.warnings, "ill_conditioned");
      }
      break;
    }
    case Algorithm::NetworkDmdc: {
      if (!opt.reduced) {
        const auto model = network_dmdc_exact(t, traj, opt.rcond);
        out.a = model.assembled_a;
        out.b = model.assembled_b;
        out.cond_ratio = std::numeric_limits<double>::infinity();
        std::size_t ill = 0;
        for (const auto& [id, c] : model.per_node_conditioning) {
          out.cond_ratio = std::min(out.cond_ratio, c.ratio());
          if (c.warning) ++ill;
        }
        if (model.per_node_conditioning.empty()) out.cond_ratio = 0.0;
        if (ill > 0) append_warning(out.warnings, "ill_conditioned_nodes=" + std::to_string(ill));
        if (model.partial()) append_warning(out.warnings, "failed_nodes=" + std::to_string(model.failures.size()));
      } else {
        const auto model = network_dmdc_reduced(t, traj, opt.truncation, opt.truncation);
        auto [a, b] = model.lift();
        out.a = std::move(a);
        out.b = std::move(b);
        out.cond_ratio = std::numeric_limits<double>::infinity();
        std::size_t ill = 0;
        const detail::TopologyIndex index(t);
        for (std::size_t j = 0; j < t.state_vertices.size(); ++j) {
          const auto local = detail::build_local_data(t, index, traj, j);
          const double ratio = singular_ratio(vstack(local.z, local.gamma));
          out.cond_ratio = std::min(out.cond_ratio, ratio);
          if (!(ratio >= kConditioningWarnRatio)) ++ill;
        }
        if (t.state_vertices.empty()) out.cond_ratio = 0.0;
        if (ill > 0) append_warning(out.warnings, "ill_conditioned_nodes=" + std::to_string(ill));
        if (!model.failures.empty())
          append_warning(out.warnings, "failed_nodes=" + std::to_string(model.failures.size()));
      }
      break;
    }
  }
  return out;
}

}  // namespace detail

/// Simulates one trajectory of m snapshot triples (random x0 and inputs drawn
/// from `rng`) and feeds the identical data to every algorithm. Rows carry
/// trial index 0; run_sweep fills in the real index.
inline std::vector<ResultRow> run_trial(const LinearNetworkSystem& system, std::size_t m,
                                        const std::vector<Algorithm>& algorithms, Rng& rng,
                                        const TrialOptions& opt = {}) {
  if (m < 1) throw Error(ErrorCode::BadConfig, "simulation length must be >= 1");
  const auto& t = system.topology;
  const auto n = static_cast<Eigen::Index>(t.state_dim());
  const auto l = static_cast<Eigen::Index>(t.input_dim());
  const auto cols = static_cast<Eigen::Index>(m);

  Vector x0(n);
  for (Eigen::Index i = 0; i < n; ++i) x0(i) = rng.uniform(opt.initial_state_range.lo, opt.initial_state_range.hi);
  Matrix inputs(l, cols);
  for (Eigen::Index k = 0; k < cols; ++k)
    for (Eigen::Index i = 0; i < l; ++i) inputs(i, k) = rng.uniform(opt.input_range.lo, opt.input_range.hi);

  const TrajectoryData traj = simulate(system, x0, inputs);
  const auto [truth_a, truth_b] = true_full_matrices(system);
  const std::uint64_t hash = trajectory_hash(traj);

  std::vector<ResultRow> rows;
  for (const auto algorithm : algorithms) {
    ResultRow row;
    row.m = m;
    row.m_label = std::to_string(m);
    row.algorithm = algorithm;
    row.truncation = opt.truncation.describe();
    row.data_hash = trajectory_hash(traj);
    if (row.data_hash != hash) throw std::logic_error("trajectory changed between algorithm dispatches");
    try {
      const auto start = std::chrono::steady_clock::now();
      const auto fit = detail::identify(algorithm, t, traj, opt);
      row.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      row.frobenius_error = model_error(fit.a, fit.b, truth_a, truth_b);
      row.cond_ratio = fit.cond_ratio;
      row.warnings = fit.warnings;
    } catch (const Error& e) {
      detail::append_warning(row.warnings, std::string("error:") + e.what());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline void check_config(const SweepConfig& cfg) {
  auto bad = [](const std::string& why) { throw Error(ErrorCode::BadConfig, why); };
  check_config(cfg.generator);
  if (cfg.trials < 1) bad("trials must be >= 1");
  if (cfg.m_values.empty()) bad("m_values must not be empty");
  for (const auto& m : cfg.m_values)
    if (!m.at_max_local_dim && m.fixed < 1) bad("every m value must be >= 1");
  if (cfg.algorithms.empty()) bad("algorithms must not be empty");
  if (!(cfg.rcond >= 0.0)) bad("rcond must be non-negative");
  if (!(cfg.initial_state_range.lo <= cfg.initial_state_range.hi)) bad("initial_state_range is empty");
  const bool has_inputs = std::holds_alternative<CircularFamily>(cfg.generator.family);
  for (const auto a : cfg.algorithms)
    if (a == Algorithm::Dmd && has_inputs) bad("dmd requires a family without input vertices");
}

/// Seed of the network generated for `trial`.
inline std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t trial) {
  return derive_seed(master_seed, static_cast<std::uint64_t>(trial));
}

/// Runs every (trial, m, algorithm) cell. Trial t uses the network generated
/// from trial_seed(master_seed, t); the trajectory for snapshot count m
/// draws from derive_seed(trial seed, m). Output is independent of `threads`.
inline SweepResult run_sweep(const SweepConfig& cfg) {
  check_config(cfg);
  const TrialOptions opt{cfg.rcond, cfg.truncation, cfg.reduced, cfg.initial_state_range, cfg.generator.input_range};

  std::vector<std::vector<ResultRow>> per_trial(cfg.trials);
  detail::parallel_for(cfg.trials, cfg.threads, [&](std::size_t trial) {
    auto& rows = per_trial[trial];
    GeneratorConfig gen = cfg.generator;
    gen.seed = trial_seed(cfg.master_seed, trial);
    std::optional<LinearNetworkSystem> system;
    std::string failure;
    try {
      system = generate(gen);
    } catch (const Error& e) {
      failure = e.what();
    }
    for (const auto& mv : cfg.m_values) {
      std::vector<ResultRow> cell;
      try {
        if (!system) throw Error(ErrorCode::BadConfig, failure);
        const std::size_t m = mv.resolve(system->topology);
        Rng rng(derive_seed(gen.seed, m));
        cell = run_trial(*system, m, cfg.algorithms, rng, opt);
      } catch (const Error& e) {
        cell.clear();
        for (const auto a : cfg.algorithms) {
          ResultRow row;
          row.m = mv.fixed;
          row.algorithm = a;
          row.truncation = cfg.truncation.describe();
          detail::append_warning(row.warnings, std::string("error:") + e.what());
          cell.push_back(std::move(row));
        }
      }
      for (auto& row : cell) {
        row.trial = trial;
        row.m_label = mv.label();
        rows.push_back(std::move(row));
      }
    }
  });

  SweepResult result;
  result.config = cfg;
  for (auto& rows : per_trial)
    for (auto& row : rows) result.rows.push_back(std::move(row));
  result.aggregates = compute_aggregates(result.rows);
  return result;
}

// ---- config and result serialization -------------------------------------

inline Json interval_to_json(const Interval& i) { return Json::array({i.lo, i.hi}); }

inline Interval interval_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw Error(ErrorCode::ParseError, "interval must be [lo, hi]");
  return Interval{j[0].get<double>(), j[1].get<double>()};
}

inline Json generator_to_json(const GeneratorConfig& g) {
  Json j;
  if (const auto* c = std::get_if<CircularFamily>(&g.family)) {
    j["family"] = "circular";
    j["n_states"] = c->n_states;
    j["input_period"] = c->input_period;
  } else {
    const auto& er = std::get<ErdosRenyiFamily>(g.family);
    j["family"] = "erdos_renyi";
    j["n"] = er.n;
    j["p"] = er.p;
  }
  j["coeff_range"] = interval_to_json(g.coeff_range);
  j["input_range"] = interval_to_json(g.input_range);
  j["seed"] = g.seed;
  return j;
}

inline GeneratorConfig generator_from_json(const Json& j) {
  GeneratorConfig g;
  const auto family = detail::get_as<std::string>(detail::field(j, "family"), "family");
  if (family == "circular") {
    CircularFamily c;
    c.n_states = detail::get_as<std::size_t>(detail::field(j, "n_states"), "n_states");
    c.input_period = j.contains("input_period") ? detail::get_as<std::size_t>(j.at("input_period"), "input_period") : 2;
    g.family = c;
  } else if (family == "erdos_renyi") {
    ErdosRenyiFamily er;
    er.n = detail::get_as<std::size_t>(detail::field(j, "n"), "n");
    er.p = detail::get_as<double>(detail::field(j, "p"), "p");
    g.family = er;
  } else {
    throw Error(ErrorCode::BadConfig, "unknown generator family '" + family + "'");
  }
  if (j.contains("coeff_range")) g.coeff_range = interval_from_json(j.at("coeff_range"));
  if (j.contains("input_range")) g.input_range = interval_from_json(j.at("input_range"));
  if (j.contains("seed")) g.seed = detail::get_as<std::uint64_t>(j.at("seed"), "seed");
  return g;
}

inline Json sweep_config_to_json(const SweepConfig& cfg) {
  Json m_values = Json::array();
  for (const auto& m : cfg.m_values) m_values.push_back(m.at_max_local_dim ? Json("max_local_dim") : Json(m.fixed));
  Json algorithms = Json::array();
  for (const auto a : cfg.algorithms) algorithms.push_back(to_string(a));
  return Json{{"generator", generator_to_json(cfg.generator)},
              {"trials", cfg.trials},
              {"m_values", std::move(m_values)},
              {"algorithms", std::move(algorithms)},
              {"truncation", cfg.truncation.describe()},
              {"rcond", cfg.rcond},
              {"master_seed", cfg.master_seed},
              {"initial_state_range", interval_to_json(cfg.initial_state_range)},
              {"reduced", cfg.reduced},
              {"threads", cfg.threads}};
}

/// Missing optional fields keep their SweepConfig defaults.
inline SweepConfig sweep_config_from_json(const Json& j) {
  SweepConfig cfg;
  cfg.generator = generator_from_json(detail::field(j, "generator"));
  if (j.contains("trials")) cfg.trials = detail::get_as<std::size_t>(j.at("trials"), "trials");
  const auto& ms = detail::field(j, "m_values");
  if (!ms.is_array()) throw Error(ErrorCode::ParseError, "m_values must be an array");
  for (const auto& m : ms) {
    if (m.is_string() && m.get<std::string>() == "max_local_dim")
      cfg.m_values.push_back(SnapshotCount::max_local());
    else if (m.is_number_unsigned())
      cfg.m_values.push_back(SnapshotCount{m.get<std::size_t>(), false});
    else
      throw Error(ErrorCode::ParseError, "m_values entries must be positive integers or \"max_local_dim\"");
  }
  if (j.contains("algorithms")) {
    cfg.algorithms.clear();
    for (const auto& a : j.at("algorithms")) cfg.algorithms.push_back(parse_algorithm(detail::get_as<std::string>(a, "algorithm")));
  }
  if (j.contains("truncation")) cfg.truncation = TruncationRule::parse(detail::get_as<std::string>(j.at("truncation"), "truncation"));
  if (j.contains("rcond")) cfg.rcond = detail::get_as<double>(j.at("rcond"), "rcond");
  if (j.contains("master_seed")) cfg.master_seed = detail::get_as<std::uint64_t>(j.at("master_seed"), "master_seed");
  if (j.contains("initial_state_range")) cfg.initial_state_range = interval_from_json(j.at("initial_state_range"));
  if (j.contains("reduced")) cfg.reduced = detail::get_as<bool>(j.at("reduced"), "reduced");
  if (j.contains("threads")) cfg.threads = detail::get_as<std::size_t>(j.at("threads"), "threads");
  return cfg;
}

inline constexpr const char* kSweepCsvHeader = "trial,m,algorithm,frobenius_error,cond_ratio,wall_time_s,warnings";

namespace detail {

inline std::string csv_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return format_double(x);
}

inline Json json_number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

inline double number_from_json(const Json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return get_as<double>(j, "number");
}

}  // namespace detail

inline void write_sweep_csv(const SweepResult& result, std::ostream& out) {
  out << kSweepCsvHeader << '\n';
  for (const auto& r : result.rows) {
    out << r.trial << ',' << r.m << ',' << to_string(r.algorithm) << ',' << detail::csv_number(r.frobenius_error) << ','
        << detail::csv_number(r.cond_ratio) << ',' << detail::csv_number(r.wall_time_s) << ',' << r.warnings << '\n';
  }
}

inline Json sweep_result_to_json(const SweepResult& result) {
  Json rows = Json::array();
  for (const auto& r : result.rows) {
    std::ostringstream hash;
    hash << std::hex << r.data_hash;
    rows.push_back(Json{{"trial", r.trial},
                        {"m", r.m},
                        {"m_label", r.m_label},
                        {"algorithm", to_string(r.algorithm)},
                        {"frobenius_error", detail::json_number(r.frobenius_error)},
                        {"cond_ratio", detail::json_number(r.cond_ratio)},
                        {"wall_time_s", r.wall_time_s},
                        {"warnings", r.warnings},
                        {"truncation", r.truncation},
                        {"data_hash", hash.str()}});
  }
  Json aggregate = Json::array();
  for (const auto& g : result.aggregates)
    aggregate.push_back(Json{{"m", g.m_label},
                             {"algorithm", to_string(g.algorithm)},
                             {"mean_error", detail::json_number(g.mean_error)},
                             {"count", g.count}});
  return Json{{"config", sweep_config_to_json(result.config)}, {"rows", std::move(rows)}, {"aggregate", std::move(aggregate)}};
}

inline SweepResult sweep_result_from_json(const Json& j) {
  SweepResult result;
  result.config = sweep_config_from_json(detail::field(j, "config"));
  for (const auto& r : detail::field(j, "rows")) {
    ResultRow row;
    row.trial = detail::get_as<std::size_t>(detail::field(r, "trial"), "trial");
    row.m = detail::get_as<std::size_t>(detail::field(r, "m"), "m");
    row.m_label = detail::get_as<std::string>(detail::field(r, "m_label"), "m_label");
    row.algorithm = parse_algorithm(detail::get_as<std::string>(detail::field(r, "algorithm"), "algorithm"));
    row.frobenius_error = detail::number_from_json(detail::field(r, "frobenius_error"));
    row.cond_ratio = detail::number_from_json(detail::field(r, "cond_ratio"));
    row.wall_time_s = detail::get_as<double>(detail::field(r, "wall_time_s"), "wall_time_s");
    row.warnings = detail::get_as<std::string>(detail::field(r, "warnings"), "warnings");
    row.truncation = detail::get_as<std::string>(detail::field(r, "truncation"), "truncation");
    row.data_hash = std::stoull(detail::get_as<std::string>(detail::field(r, "data_hash"), "data_hash"), nullptr, 16);
    result.rows.push_back(std::move(row));
  }
  for (const auto& g : detail::field(j, "aggregate")) {
    result.aggregates.push_back(Aggregate{detail::get_as<std::string>(detail::field(g, "m"), "m"),
                                          parse_algorithm(detail::get_as<std::string>(detail::field(g, "algorithm"), "algorithm")),
                                          detail::number_from_json(detail::field(g, "mean_error")),
                                          detail::get_as<std::size_t>(detail::field(g, "count"), "count")});
  }
  return result;
}

/// Writes `result` as CSV or JSON; throws IoError when the path is not writable.
inline void export_result(const SweepResult& result, const std::string& format, const std::string& path) {
  std::ostringstream out;
  if (format == "csv")
    write_sweep_csv(result, out);
  else if (format == "json")
    out << dump_json(sweep_result_to_json(result));
  else
    throw Error(ErrorCode::BadConfig, "unknown export format '" + format + "'");
  write_text_file(path, out.str());
}

}  // namespace netdmd

#endif  // NETDMD_BENCH_HPP
