#ifndef NETDMD_NETDMDC_HPP
#define NETDMD_NETDMDC_HPP

/// \file netdmdc.hpp
/// Network DMDc: identify a networked linear system one state vertex at a
/// time, then compose the per-vertex models into block matrices.
///
/// For state vertex v_j the regression sees only its local subsystem. The
/// regressand is v_j's own successor rows Y_j; the regressors are v_j's own
/// state rows Z_j stacked over Gamma_j, the rows of every parent (state
/// parents in declaration order, then input parents in declaration order).
/// DMDc on (Z_j, Y_j, Gamma_j) yields one block row
///
///     [ A_jj | A_j,k1 ... A_j,ka | B_j,l1 ... B_j,lb ]
///
/// and every block for a vertex pair without an edge is fixed to exactly
/// zero. Each local regression has local_dim unknowns per row instead of
/// n + l, so m >= max_local_dim snapshots suffice for exact recovery of
/// generic data.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "netdmd/dmdcore.hpp"
#include "netdmd/parallel.hpp"
#include "netdmd/sysmodel.hpp"
#include "netdmd/topology.hpp"

namespace netdmd {

/// Regression data for one local subsystem.
struct LocalData {
  std::string center;
  Matrix z;      ///< n_j x m, center rows of Z
  Matrix y;      ///< n_j x m, center rows of Y
  Matrix gamma;  ///< (sum of parent dims) x m
  std::vector<std::string> parent_order;        ///< state parents, then input parents
  std::map<std::string, RowRange> parent_rows;  ///< rows of each parent in gamma
};

namespace detail {

inline RowRange checked_range(const std::map<std::string, RowRange>& rows, const std::string& id, std::size_t dim,
                              Eigen::Index matrix_rows) {
  const auto it = rows.find(id);
  if (it == rows.end()) throw Error(ErrorCode::RowRangeMismatch, "trajectory has no rows for '" + id + "'");
  const RowRange r = it->second;
  if (r.size != dim || static_cast<Eigen::Index>(r.offset + r.size) > matrix_rows)
    throw Error(ErrorCode::RowRangeMismatch, "trajectory rows for '" + id + "' do not match the topology");
  return r;
}

inline void check_trajectory_shape(const TrajectoryData& traj) {
  if (traj.z.rows() != traj.y.rows() || traj.z.cols() != traj.y.cols() || traj.gamma.cols() != traj.z.cols())
    throw Error(ErrorCode::DimensionMismatch, "trajectory matrices are not aligned");
}

inline LocalData build_local_data(const NetworkTopology& t, const TopologyIndex& index, const TrajectoryData& traj,
                                  std::size_t j) {
  check_trajectory_shape(traj);
  const auto& center = t.state_vertices[j];
  const auto m = traj.z.cols();
  const RowRange own = checked_range(traj.state_rows, center.id, center.dim, traj.z.rows());

  LocalData out;
  out.center = center.id;
  out.z = traj.z.middleRows(static_cast<Eigen::Index>(own.offset), static_cast<Eigen::Index>(own.size));
  out.y = traj.y.middleRows(static_cast<Eigen::Index>(own.offset), static_cast<Eigen::Index>(own.size));

  struct Source {
    const Matrix* data;
    RowRange rows;
  };
  std::vector<Source> sources;
  std::size_t total = 0;
  auto take = [&](const VertexSpec& parent, const Matrix& data, const std::map<std::string, RowRange>& rows) {
    const RowRange r = checked_range(rows, parent.id, parent.dim, data.rows());
    out.parent_order.push_back(parent.id);
    out.parent_rows.emplace(parent.id, RowRange{total, r.size});
    sources.push_back({&data, r});
    total += r.size;
  };
  for (const auto k : index.state_parent_indices(j)) take(t.state_vertices[k], traj.z, traj.state_rows);
  for (const auto k : index.input_parent_indices(j)) take(t.input_vertices[k], traj.gamma, traj.input_rows);

  out.gamma.resize(static_cast<Eigen::Index>(total), m);
  for (std::size_t s = 0; s < sources.size(); ++s) {
    const auto& dst = out.parent_rows.at(out.parent_order[s]);
    out.gamma.middleRows(static_cast<Eigen::Index>(dst.offset), static_cast<Eigen::Index>(dst.size)) =
        sources[s].data->middleRows(static_cast<Eigen::Index>(sources[s].rows.offset),
                                    static_cast<Eigen::Index>(sources[s].rows.size));
  }
  return out;
}

}  // namespace detail

/// Slices the local subsystem of state vertex `v` out of a trajectory.
inline LocalData build_local_data(const NetworkTopology& t, const TrajectoryData& traj, const std::string& v) {
  const detail::TopologyIndex index(t);
  return detail::build_local_data(t, index, traj, index.state_index(v));
}

/// Result of one local regression, before composition.
struct NodeIdentification {
  std::string center;
  Matrix a_self;  ///< n_j x n_j
  /// Parent id -> coefficient block (n_j x parent dim), in LocalData order.
  std::vector<std::pair<std::string, Matrix>> parent_blocks;
  Conditioning conditioning;
  std::optional<std::string> failure;
};

/// Full-dimension network model with structural zeros.
struct NetworkModel {
  NetworkTopology topology;
  std::map<Edge, Matrix> blocks_a;  ///< {i -> j}: A_{j,i}; self blocks keyed {j -> j}
  std::map<Edge, Matrix> blocks_b;  ///< {input l -> j}: B_{j,l}
  Matrix assembled_a;               ///< n x n
  Matrix assembled_b;               ///< n x l
  std::map<std::string, Conditioning> per_node_conditioning;
  std::map<std::string, std::string> failures;

  bool partial() const { return !failures.empty(); }
};

/// Runs exact DMDc on one local subsystem. Numerical failures are captured
/// in the result and leave the blocks zero.
inline NodeIdentification identify_node(const LocalData& local, double rcond = kDefaultRcond) {
  NodeIdentification out;
  out.center = local.center;
  const auto nj = local.z.rows();
  out.a_self = Matrix::Zero(nj, nj);
  for (const auto& id : local.parent_order)
    out.parent_blocks.emplace_back(id, Matrix::Zero(nj, static_cast<Eigen::Index>(local.parent_rows.at(id).size)));
  try {
    const auto fit = dmdc_exact(local.z, local.y, local.gamma, rcond);
    out.conditioning = fit.conditioning;
    out.a_self = fit.a;
    for (auto& [id, block] : out.parent_blocks) {
      const auto& r = local.parent_rows.at(id);
      block = fit.b->middleCols(static_cast<Eigen::Index>(r.offset), static_cast<Eigen::Index>(r.size));
    }
  } catch (const Error& e) {
    out.failure = e.what();
    out.conditioning = Conditioning{0.0, 0.0, rcond, true};
  }
  return out;
}

/// Composes per-node results (any order) into a NetworkModel. Every block
/// outside the identified strips stays exactly zero.
inline NetworkModel assemble_network_model(const NetworkTopology& t, const std::vector<NodeIdentification>& nodes) {
  NetworkModel model;
  model.topology = t;
  const auto srows = t.state_rows();
  const auto irows = t.input_rows();
  model.assembled_a = Matrix::Zero(static_cast<Eigen::Index>(t.state_dim()), static_cast<Eigen::Index>(t.state_dim()));
  model.assembled_b = Matrix::Zero(static_cast<Eigen::Index>(t.state_dim()), static_cast<Eigen::Index>(t.input_dim()));

  for (const auto& node : nodes) {
    const auto& own = srows.at(node.center);
    const auto row = static_cast<Eigen::Index>(own.offset);
    model.blocks_a[Edge{node.center, node.center}] = node.a_self;
    model.assembled_a.block(row, row, node.a_self.rows(), node.a_self.cols()) = node.a_self;
    for (const auto& [parent, block] : node.parent_blocks) {
      const Edge key{parent, node.center};
      if (const auto it = srows.find(parent); it != srows.end()) {
        model.blocks_a[key] = block;
        model.assembled_a.block(row, static_cast<Eigen::Index>(it->second.offset), block.rows(), block.cols()) = block;
      } else {
        model.blocks_b[key] = block;
        model.assembled_b.block(row, static_cast<Eigen::Index>(irows.at(parent).offset), block.rows(), block.cols()) =
            block;
      }
    }
    model.per_node_conditioning[node.center] = node.conditioning;
    if (node.failure) model.failures[node.center] = *node.failure;
  }
  return model;
}

/// Network DMDc, exact variant: one pseudoinverse regression per state
/// vertex. Nodes may run on `threads` workers; the result does not depend
/// on scheduling.
inline NetworkModel network_dmdc_exact(const NetworkTopology& t, const TrajectoryData& traj,
                                       double rcond = kDefaultRcond, std::size_t threads = 1) {
  detail::check_trajectory_shape(traj);
  if (traj.z.rows() != static_cast<Eigen::Index>(t.state_dim()) ||
      traj.gamma.rows() != static_cast<Eigen::Index>(t.input_dim()))
    throw Error(ErrorCode::RowRangeMismatch, "trajectory dimensions do not match the topology");
  const detail::TopologyIndex index(t);
  std::vector<NodeIdentification> nodes(t.state_vertices.size());
  detail::parallel_for(nodes.size(), threads, [&](std::size_t j) {
    nodes[j] = identify_node(detail::build_local_data(t, index, traj, j), rcond);
  });
  return assemble_network_model(t, nodes);
}

inline double model_error(const NetworkModel& model, const Matrix& truth_a, const Matrix& truth_b) {
  return model_error(model.assembled_a, std::optional<Matrix>(model.assembled_b), truth_a, truth_b);
}

/// Reduced network model. The global reduced state is the concatenation of
/// g~_j = U_hat_j^T g_j in vertex order; no global basis is formed.
struct ReducedNetworkModel {
  NetworkTopology topology;
  std::map<std::string, Matrix> u_hat;             ///< n_j x r_j per state vertex
  std::map<std::string, RowRange> reduced_rows;    ///< rows of g~_j in the reduced state
  std::map<Edge, Matrix> blocks_a;                 ///< A~_{j,j} and A~_{j,k} = Abar_{j,k} U_hat_k
  std::map<Edge, Matrix> blocks_b;                 ///< B~_{j,l}
  Matrix assembled_a;                              ///< R x R, R = sum r_j
  Matrix assembled_b;                              ///< R x l
  std::map<std::string, std::vector<Complex>> node_eigenvalues;
  std::map<std::string, std::string> failures;

  /// Block-diagonal diag(U_hat_1, ..., U_hat_nu), n x R.
  Matrix projector() const {
    const auto srows = topology.state_rows();
    std::size_t reduced = 0;
    for (const auto& [id, r] : reduced_rows) reduced += r.size;
    Matrix p = Matrix::Zero(static_cast<Eigen::Index>(topology.state_dim()), static_cast<Eigen::Index>(reduced));
    for (const auto& v : topology.state_vertices) {
      const auto& full = srows.at(v.id);
      const auto& red = reduced_rows.at(v.id);
      p.block(static_cast<Eigen::Index>(full.offset), static_cast<Eigen::Index>(red.offset),
              static_cast<Eigen::Index>(full.size), static_cast<Eigen::Index>(red.size)) = u_hat.at(v.id);
    }
    return p;
  }

  /// Full-space estimate (P A~ P^T, P B~) with P = projector().
  std::pair<Matrix, Matrix> lift() const {
    const Matrix p = projector();
    return {p * assembled_a * p.transpose(), p * assembled_b};
  }

  /// The same model viewed as a single reduced linear model with U_hat = P.
  ReducedLinearModel as_reduced_linear_model() const {
    ReducedLinearModel out;
    out.a_tilde = assembled_a;
    out.b_tilde = assembled_b;
    out.u_hat = projector();
    out.r = static_cast<std::size_t>(assembled_a.rows());
    out.p = out.r;
    return out;
  }
};

/// Network DMDc, reduced variant. Each node runs reduced DMDc, giving
/// A~_{j,j} = U_hat_j^T A_{j,j} U_hat_j and the strip U_hat_j^T B_j; the
/// strip is cut into Abar_{j,k} (state parents) and B~_{j,l} (input
/// parents), and cross blocks are re-expressed in the parent's reduced
/// coordinates as A~_{j,k} = Abar_{j,k} U_hat_k. A node whose regression
/// fails keeps U_hat_j = I and zero blocks.
inline ReducedNetworkModel network_dmdc_reduced(const NetworkTopology& t, const TrajectoryData& traj,
                                                const TruncationRule& input_rule = TruncationRule::machine_default(),
                                                const TruncationRule& output_rule = TruncationRule::machine_default(),
                                                std::size_t threads = 1) {
  detail::check_trajectory_shape(traj);
  if (traj.z.rows() != static_cast<Eigen::Index>(t.state_dim()) ||
      traj.gamma.rows() != static_cast<Eigen::Index>(t.input_dim()))
    throw Error(ErrorCode::RowRangeMismatch, "trajectory dimensions do not match the topology");
  const detail::TopologyIndex index(t);

  struct NodeFit {
    LocalData local;
    std::optional<ReducedIdentification> fit;
    std::string failure;
  };
  std::vector<NodeFit> fits(t.state_vertices.size());
  detail::parallel_for(fits.size(), threads, [&](std::size_t j) {
    fits[j].local = detail::build_local_data(t, index, traj, j);
    try {
      fits[j].fit = dmdc_reduced(fits[j].local.z, fits[j].local.y, fits[j].local.gamma, input_rule, output_rule);
    } catch (const Error& e) {
      fits[j].failure = e.what();
    }
  });

  ReducedNetworkModel model;
  model.topology = t;
  std::size_t offset = 0;
  for (std::size_t j = 0; j < fits.size(); ++j) {
    const auto& v = t.state_vertices[j];
    const auto dim = static_cast<Eigen::Index>(v.dim);
    Matrix u = fits[j].fit ? fits[j].fit->model.u_hat : Matrix::Identity(dim, dim);
    model.reduced_rows[v.id] = RowRange{offset, static_cast<std::size_t>(u.cols())};
    offset += static_cast<std::size_t>(u.cols());
    model.u_hat[v.id] = std::move(u);
    if (!fits[j].fit) model.failures[v.id] = fits[j].failure;
  }
  const auto reduced_dim = static_cast<Eigen::Index>(offset);
  const auto irows = t.input_rows();
  model.assembled_a = Matrix::Zero(reduced_dim, reduced_dim);
  model.assembled_b = Matrix::Zero(reduced_dim, static_cast<Eigen::Index>(t.input_dim()));

  for (std::size_t j = 0; j < fits.size(); ++j) {
    const auto& id = t.state_vertices[j].id;
    const auto& rows = model.reduced_rows.at(id);
    const auto row = static_cast<Eigen::Index>(rows.offset);
    const auto rj = static_cast<Eigen::Index>(rows.size);
    const auto& local = fits[j].local;

    Matrix self = Matrix::Zero(rj, rj);
    if (fits[j].fit) {
      self = fits[j].fit->model.a_tilde;
      model.node_eigenvalues[id] = fits[j].fit->modes.eigenvalues;
    }
    model.blocks_a[Edge{id, id}] = self;
    model.assembled_a.block(row, row, rj, rj) = self;

    for (const auto& parent : local.parent_order) {
      const auto& pr = local.parent_rows.at(parent);
      Matrix strip = Matrix::Zero(rj, static_cast<Eigen::Index>(pr.size));
      if (fits[j].fit)
        strip = fits[j].fit->model.b_tilde->middleCols(static_cast<Eigen::Index>(pr.offset),
                                                        static_cast<Eigen::Index>(pr.size));
      const Edge key{parent, id};
      if (const auto it = model.reduced_rows.find(parent); it != model.reduced_rows.end()) {
        Matrix cross = strip * model.u_hat.at(parent);
        model.assembled_a.block(row, static_cast<Eigen::Index>(it->second.offset), rj, cross.cols()) = cross;
        model.blocks_a[key] = std::move(cross);
      } else {
        model.assembled_b.block(row, static_cast<Eigen::Index>(irows.at(parent).offset), rj, strip.cols()) = strip;
        model.blocks_b[key] = std::move(strip);
      }
    }
  }
  return model;
}

}  // namespace netdmd

#endif  // NETDMD_NETDMDC_HPP
