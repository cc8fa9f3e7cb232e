#ifndef NETDMD_SYSMODEL_HPP
#define NETDMD_SYSMODEL_HPP

/// \file sysmodel.hpp
/// Ground-truth linear networked dynamics, trajectory simulation, and the
/// circular / Erdos-Renyi network generators.

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "netdmd/numkernel.hpp"
#include "netdmd/rng.hpp"
#include "netdmd/topology.hpp"

namespace netdmd {

/// Linear transition maps on a topology: x'_j = S_j x_j + sum over in-edges
/// (w -> j) of E_{w->j} x_w.
struct LinearNetworkSystem {
  NetworkTopology topology;
  std::map<std::string, Matrix> self_blocks;  ///< n_j x n_j per state vertex
  std::map<Edge, Matrix> edge_blocks;         ///< n_target x dim(source) per edge
};

/// Throws DimensionMismatch unless every state vertex and edge has exactly one
/// block of the right shape.
inline void check_blocks(const LinearNetworkSystem& s) {
  const auto& t = s.topology;
  for (const auto& v : t.state_vertices) {
    const auto it = s.self_blocks.find(v.id);
    if (it == s.self_blocks.end()) throw Error(ErrorCode::DimensionMismatch, "missing self block for " + v.id);
    const auto d = static_cast<Eigen::Index>(v.dim);
    if (it->second.rows() != d || it->second.cols() != d)
      throw Error(ErrorCode::DimensionMismatch, "self block shape for " + v.id);
  }
  if (s.self_blocks.size() != t.state_vertices.size())
    throw Error(ErrorCode::DimensionMismatch, "self block for a non-state vertex");
  for (const auto& e : t.edges) {
    const auto it = s.edge_blocks.find(e);
    if (it == s.edge_blocks.end()) throw Error(ErrorCode::DimensionMismatch, "missing block for " + edge_key(e));
    const auto src = t.find(e.source);
    const auto dst = t.find(e.target);
    if (!src || !dst) throw Error(ErrorCode::UnknownVertex, edge_key(e));
    if (it->second.rows() != static_cast<Eigen::Index>(t.vertex(*dst).dim) ||
        it->second.cols() != static_cast<Eigen::Index>(t.vertex(*src).dim))
      throw Error(ErrorCode::DimensionMismatch, "block shape for " + edge_key(e));
  }
  if (s.edge_blocks.size() != t.edges.size())
    throw Error(ErrorCode::DimensionMismatch, "edge block for a non-edge");
}

/// Aligned snapshot triples (x_k, u_k, w_k), k = 1..m, one per column.
struct TrajectoryData {
  Matrix z;      ///< n x m states
  Matrix gamma;  ///< l x m inputs
  Matrix y;      ///< n x m successors
  std::map<std::string, RowRange> state_rows;  ///< rows of z / y
  std::map<std::string, RowRange> input_rows;  ///< rows of gamma

  Eigen::Index snapshots() const { return z.cols(); }
};

namespace detail {

struct ParentTerm {
  const Matrix* block;
  bool from_state;
  Eigen::Index offset;
  Eigen::Index dim;
};

struct VertexPlan {
  Eigen::Index offset;
  Eigen::Index dim;
  const Matrix* self_block;
  std::vector<ParentTerm> parents;  ///< state parents then input parents, global order
};

/// Flattened evaluation order for step(); borrows blocks from the system.
inline std::vector<VertexPlan> make_step_plan(const LinearNetworkSystem& s) {
  check_blocks(s);
  const auto& t = s.topology;
  const TopologyIndex index(t);
  const auto srows = t.state_rows();
  const auto irows = t.input_rows();
  std::vector<VertexPlan> plan;
  plan.reserve(t.state_vertices.size());
  for (std::size_t j = 0; j < t.state_vertices.size(); ++j) {
    const auto& v = t.state_vertices[j];
    const auto& r = srows.at(v.id);
    VertexPlan vp{static_cast<Eigen::Index>(r.offset), static_cast<Eigen::Index>(r.size), &s.self_blocks.at(v.id), {}};
    for (const auto k : index.state_parent_indices(j)) {
      const auto& w = t.state_vertices[k];
      const auto& wr = srows.at(w.id);
      vp.parents.push_back({&s.edge_blocks.at(Edge{w.id, v.id}), true, static_cast<Eigen::Index>(wr.offset),
                            static_cast<Eigen::Index>(wr.size)});
    }
    for (const auto k : index.input_parent_indices(j)) {
      const auto& w = t.input_vertices[k];
      const auto& wr = irows.at(w.id);
      vp.parents.push_back({&s.edge_blocks.at(Edge{w.id, v.id}), false, static_cast<Eigen::Index>(wr.offset),
                            static_cast<Eigen::Index>(wr.size)});
    }
    plan.push_back(std::move(vp));
  }
  return plan;
}

inline Vector apply_plan(const std::vector<VertexPlan>& plan, const Vector& x, const Vector& u) {
  Vector next(x.size());
  for (const auto& vp : plan) {
    Vector acc = (*vp.self_block) * x.segment(vp.offset, vp.dim);
    for (const auto& p : vp.parents) {
      const auto& src = p.from_state ? x : u;
      acc += (*p.block) * src.segment(p.offset, p.dim);
    }
    next.segment(vp.offset, vp.dim) = acc;
  }
  return next;
}

inline void check_step_dims(const NetworkTopology& t, const Vector& x, const Vector& u) {
  if (x.size() != static_cast<Eigen::Index>(t.state_dim()))
    throw Error(ErrorCode::DimensionMismatch, "state vector length");
  if (u.size() != static_cast<Eigen::Index>(t.input_dim()))
    throw Error(ErrorCode::DimensionMismatch, "input vector length");
}

}  // namespace detail

/// One application of the network transition map.
inline Vector step(const LinearNetworkSystem& s, const Vector& x, const Vector& u) {
  detail::check_step_dims(s.topology, x, u);
  return detail::apply_plan(detail::make_step_plan(s), x, u);
}

/// Runs the system from x0 under `inputs` (l x m): z_1 = x0, y_k = step(z_k, u_k),
/// z_{k+1} = y_k.
inline TrajectoryData simulate(const LinearNetworkSystem& s, const Vector& x0, const Matrix& inputs) {
  const auto& t = s.topology;
  if (inputs.cols() < 1) throw Error(ErrorCode::DimensionMismatch, "simulation needs at least one input column");
  if (inputs.rows() != static_cast<Eigen::Index>(t.input_dim()))
    throw Error(ErrorCode::DimensionMismatch, "input matrix row count");
  detail::check_step_dims(t, x0, inputs.col(0));

  const auto plan = detail::make_step_plan(s);
  const Eigen::Index m = inputs.cols();
  TrajectoryData out;
  out.z.resize(x0.size(), m);
  out.y.resize(x0.size(), m);
  out.gamma = inputs;
  out.state_rows = t.state_rows();
  out.input_rows = t.input_rows();

  Vector x = x0;
  for (Eigen::Index k = 0; k < m; ++k) {
    out.z.col(k) = x;
    x = detail::apply_plan(plan, x, inputs.col(k));
    out.y.col(k) = x;
  }
  return out;
}

/// Dense (A, B) with exact zeros wherever the topology has no edge.
inline std::pair<Matrix, Matrix> true_full_matrices(const LinearNetworkSystem& s) {
  check_blocks(s);
  const auto& t = s.topology;
  const auto srows = t.state_rows();
  const auto irows = t.input_rows();
  const auto n = static_cast<Eigen::Index>(t.state_dim());
  const auto l = static_cast<Eigen::Index>(t.input_dim());
  Matrix a = Matrix::Zero(n, n);
  Matrix b = Matrix::Zero(n, l);
  for (const auto& [id, block] : s.self_blocks) {
    const auto& r = srows.at(id);
    a.block(static_cast<Eigen::Index>(r.offset), static_cast<Eigen::Index>(r.offset), block.rows(), block.cols()) =
        block;
  }
  for (const auto& [edge, block] : s.edge_blocks) {
    const auto& rr = srows.at(edge.target);
    const auto row = static_cast<Eigen::Index>(rr.offset);
    if (const auto it = srows.find(edge.source); it != srows.end())
      a.block(row, static_cast<Eigen::Index>(it->second.offset), block.rows(), block.cols()) = block;
    else
      b.block(row, static_cast<Eigen::Index>(irows.at(edge.source).offset), block.rows(), block.cols()) = block;
  }
  return {std::move(a), std::move(b)};
}

struct Interval {
  double lo = -1.0;
  double hi = 1.0;

  friend bool operator==(const Interval&, const Interval&) = default;
};

struct CircularFamily {
  std::size_t n_states = 50;
  std::size_t input_period = 2;  ///< input attached to v_1, v_{1+period}, ...

  friend bool operator==(const CircularFamily&, const CircularFamily&) = default;
};

struct ErdosRenyiFamily {
  std::size_t n = 50;
  double p = 0.05;

  friend bool operator==(const ErdosRenyiFamily&, const ErdosRenyiFamily&) = default;
};

struct GeneratorConfig {
  std::variant<CircularFamily, ErdosRenyiFamily> family = CircularFamily{};
  Interval coeff_range{-1.0, 1.0};
  Interval input_range{-10.0, 10.0};
  std::uint64_t seed = 0;

  friend bool operator==(const GeneratorConfig&, const GeneratorConfig&) = default;
};

inline void check_config(const GeneratorConfig& cfg) {
  auto bad = [](const std::string& why) { throw Error(ErrorCode::BadConfig, why); };
  if (!(cfg.coeff_range.lo <= cfg.coeff_range.hi)) bad("coeff_range is empty");
  if (!(cfg.input_range.lo <= cfg.input_range.hi)) bad("input_range is empty");
  if (const auto* c = std::get_if<CircularFamily>(&cfg.family)) {
    if (c->n_states < 2) bad("circular networks need n_states >= 2");
    if (c->input_period < 1) bad("input_period must be >= 1");
  } else {
    const auto& er = std::get<ErdosRenyiFamily>(cfg.family);
    if (er.n < 1) bad("Erdos-Renyi networks need n >= 1");
    if (!(er.p >= 0.0 && er.p <= 1.0)) bad("edge probability must lie in [0, 1]");
  }
}

namespace detail {

// Self blocks in vertex order, then edge blocks in edge order; all dims are 1.
inline void draw_scalar_coefficients(LinearNetworkSystem& s, const Interval& range, Rng& rng) {
  for (const auto& v : s.topology.state_vertices)
    s.self_blocks[v.id] = Matrix::Constant(1, 1, rng.uniform(range.lo, range.hi));
  for (const auto& e : s.topology.edges) s.edge_blocks[e] = Matrix::Constant(1, 1, rng.uniform(range.lo, range.hi));
}

}  // namespace detail

/// Ring v_1 -> v_2 -> ... -> v_n -> v_1 with scalar inputs on every
/// input_period-th state vertex starting at v_1.
inline LinearNetworkSystem gen_circular(const GeneratorConfig& cfg, Rng& rng) {
  check_config(cfg);
  const auto* fam = std::get_if<CircularFamily>(&cfg.family);
  if (fam == nullptr) throw Error(ErrorCode::BadConfig, "gen_circular needs a circular family");

  LinearNetworkSystem s;
  auto& t = s.topology;
  for (std::size_t j = 1; j <= fam->n_states; ++j) t.state_vertices.push_back({"v" + std::to_string(j), 1});
  for (std::size_t j = 0; j < fam->n_states; ++j)
    t.edges.push_back({t.state_vertices[j].id, t.state_vertices[(j + 1) % fam->n_states].id});
  std::size_t k = 1;
  for (std::size_t j = 0; j < fam->n_states; j += fam->input_period, ++k) {
    const std::string id = "e" + std::to_string(k);
    t.input_vertices.push_back({id, 1});
    t.edges.push_back({id, t.state_vertices[j].id});
  }
  detail::draw_scalar_coefficients(s, cfg.coeff_range, rng);
  return s;
}

/// Directed G(n, p): each ordered pair (v, v'), v != v', is an edge
/// independently with probability p. No input vertices.
inline LinearNetworkSystem gen_erdos_renyi(const GeneratorConfig& cfg, Rng& rng) {
  check_config(cfg);
  const auto* fam = std::get_if<ErdosRenyiFamily>(&cfg.family);
  if (fam == nullptr) throw Error(ErrorCode::BadConfig, "gen_erdos_renyi needs an Erdos-Renyi family");

  LinearNetworkSystem s;
  auto& t = s.topology;
  for (std::size_t j = 1; j <= fam->n; ++j) t.state_vertices.push_back({"v" + std::to_string(j), 1});
  for (std::size_t i = 0; i < fam->n; ++i)
    for (std::size_t j = 0; j < fam->n; ++j)
      if (i != j && rng.unit() < fam->p) t.edges.push_back({t.state_vertices[i].id, t.state_vertices[j].id});
  detail::draw_scalar_coefficients(s, cfg.coeff_range, rng);
  return s;
}

/// Dispatches on the family, seeding a fresh generator from cfg.seed.
inline LinearNetworkSystem generate(const GeneratorConfig& cfg) {
  Rng rng(cfg.seed);
  if (std::holds_alternative<CircularFamily>(cfg.family)) return gen_circular(cfg, rng);
  return gen_erdos_renyi(cfg, rng);
}

}  // namespace netdmd

#endif  // NETDMD_SYSMODEL_HPP
