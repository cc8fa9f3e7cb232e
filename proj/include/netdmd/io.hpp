#ifndef NETDMD_IO_HPP
#define NETDMD_IO_HPP

/// \file io.hpp
/// JSON documents for topologies, systems and identified models, and the
/// trajectory CSV format.
///
/// Trajectory CSV layout:
///
///     k,v1:0,v2:0,u:e1:0,u:e2:0
///     1,<z col 1>,<gamma col 1>
///     ...
///     m,<z col m>,<gamma col m>
///     y_final,<y col m>,,
///
/// Successors are recovered as Y = [z_2 ... z_m y_final], which holds for any
/// trajectory produced by simulate().

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "netdmd/dmdcore.hpp"
#include "netdmd/netdmdc.hpp"
#include "netdmd/sysmodel.hpp"
#include "netdmd/topology.hpp"

namespace netdmd {

using Json = nlohmann::json;

namespace detail {

[[noreturn]] inline void parse_fail(const std::string& why) { throw Error(ErrorCode::ParseError, why); }

inline const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) parse_fail(std::string("missing field '") + key + "'");
  return j.at(key);
}

template <typename T>
T get_as(const Json& j, const char* what) {
  try {
    return j.get<T>();
  } catch (const Json::exception&) {
    parse_fail(std::string("bad value for '") + what + "'");
  }
}

}  // namespace detail

inline Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const Json& j) {
  if (!j.is_array()) detail::parse_fail("matrix must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows > 0 && j[0].is_array() ? static_cast<Eigen::Index>(j[0].size()) : Eigen::Index{0};
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) detail::parse_fail("ragged matrix rows");
    for (Eigen::Index k = 0; k < cols; ++k) {
      const auto& x = row[static_cast<std::size_t>(k)];
      if (!x.is_number()) detail::parse_fail("matrix entries must be numbers");
      m(i, k) = x.get<double>();
    }
  }
  return m;
}

inline Json complex_to_json(const Complex& c) { return Json{{"re", c.real()}, {"im", c.imag()}}; }

// ---- topology -------------------------------------------------------------

inline Json topology_to_json(const NetworkTopology& t) {
  auto vertices = [](const std::vector<VertexSpec>& vs) {
    Json out = Json::array();
    for (const auto& v : vs) out.push_back(Json{{"id", v.id}, {"dim", v.dim}});
    return out;
  };
  Json edges = Json::array();
  for (const auto& e : t.edges) edges.push_back(Json::array({e.source, e.target}));
  return Json{{"state_vertices", vertices(t.state_vertices)},
              {"input_vertices", vertices(t.input_vertices)},
              {"edges", std::move(edges)}};
}

inline NetworkTopology topology_from_json(const Json& j) {
  NetworkTopology t;
  auto vertices = [](const Json& arr, const char* what) {
    if (!arr.is_array()) detail::parse_fail(std::string(what) + " must be an array");
    std::vector<VertexSpec> out;
    for (const auto& v : arr) {
      const auto dim = detail::get_as<long long>(detail::field(v, "dim"), "dim");
      if (dim < 0) detail::parse_fail("negative vertex dimension");
      out.push_back({detail::get_as<std::string>(detail::field(v, "id"), "id"), static_cast<std::size_t>(dim)});
    }
    return out;
  };
  t.state_vertices = vertices(detail::field(j, "state_vertices"), "state_vertices");
  t.input_vertices = j.contains("input_vertices") ? vertices(j.at("input_vertices"), "input_vertices")
                                                  : std::vector<VertexSpec>{};
  const auto& edges = detail::field(j, "edges");
  if (!edges.is_array()) detail::parse_fail("edges must be an array");
  for (const auto& e : edges) {
    if (!e.is_array() || e.size() != 2) detail::parse_fail("each edge must be [src, dst]");
    t.edges.push_back({detail::get_as<std::string>(e[0], "edge source"), detail::get_as<std::string>(e[1], "edge target")});
  }
  return t;
}

// ---- systems --------------------------------------------------------------

inline Json system_to_json(const LinearNetworkSystem& s) {
  Json j = topology_to_json(s.topology);
  Json self = Json::object();
  for (const auto& [id, block] : s.self_blocks) self[id] = matrix_to_json(block);
  Json edges = Json::object();
  for (const auto& [edge, block] : s.edge_blocks) edges[edge_key(edge)] = matrix_to_json(block);
  j["self_blocks"] = std::move(self);
  j["edge_blocks"] = std::move(edges);
  return j;
}

inline LinearNetworkSystem system_from_json(const Json& j) {
  LinearNetworkSystem s;
  s.topology = topology_from_json(j);
  const auto& self = detail::field(j, "self_blocks");
  if (!self.is_object()) detail::parse_fail("self_blocks must be an object");
  for (const auto& [id, block] : self.items()) s.self_blocks[id] = matrix_from_json(block);
  const auto& edges = detail::field(j, "edge_blocks");
  if (!edges.is_object()) detail::parse_fail("edge_blocks must be an object");
  for (const auto& e : s.topology.edges) {
    const auto key = edge_key(e);
    if (!edges.contains(key)) detail::parse_fail("edge_blocks has no entry for " + key);
    s.edge_blocks[e] = matrix_from_json(edges.at(key));
  }
  if (edges.size() != s.topology.edges.size()) detail::parse_fail("edge_blocks has entries for non-edges");
  check_blocks(s);
  return s;
}

// ---- models ---------------------------------------------------------------

inline Json conditioning_to_json(const Conditioning& c) {
  return Json{{"sigma_max", c.sigma_max},
              {"sigma_min", c.sigma_min},
              {"rcond_used", c.rcond_used},
              {"warning", c.warning}};
}

inline Json modes_to_json(const DynamicModes& modes) {
  Json values = Json::array();
  for (const auto& v : modes.eigenvalues) values.push_back(complex_to_json(v));
  // One inner list per mode (column of Phi).
  Json cols = Json::array();
  for (Eigen::Index c = 0; c < modes.modes.cols(); ++c) {
    Json col = Json::array();
    for (Eigen::Index r = 0; r < modes.modes.rows(); ++r) col.push_back(complex_to_json(modes.modes(r, c)));
    cols.push_back(std::move(col));
  }
  return Json{{"eigenvalues", std::move(values)},
              {"modes", std::move(cols)},
              {"source", modes.source == ModeSource::Exact ? "exact" : "reduced"},
              {"excluded_near_zero", modes.excluded_near_zero}};
}

inline Json model_to_json(const ExactLinearModel& model, const DynamicModes& modes) {
  Json j = modes_to_json(modes);
  j["A"] = matrix_to_json(model.a);
  j["B"] = model.b ? matrix_to_json(*model.b) : Json(nullptr);
  j["conditioning"] = conditioning_to_json(model.conditioning);
  return j;
}

inline Json model_to_json(const ReducedLinearModel& model, const DynamicModes& modes) {
  Json j = modes_to_json(modes);
  j["A"] = matrix_to_json(model.a_tilde);
  j["B"] = model.b_tilde ? matrix_to_json(*model.b_tilde) : Json(nullptr);
  j["U_hat"] = matrix_to_json(model.u_hat);
  j["p"] = model.p;
  j["r"] = model.r;
  return j;
}

inline Json network_model_to_json(const NetworkModel& model) {
  Json blocks_a = Json::object();
  for (const auto& [key, block] : model.blocks_a) blocks_a[edge_key(key)] = matrix_to_json(block);
  Json blocks_b = Json::object();
  for (const auto& [key, block] : model.blocks_b) blocks_b[edge_key(key)] = matrix_to_json(block);
  Json cond = Json::object();
  for (const auto& [id, c] : model.per_node_conditioning) cond[id] = conditioning_to_json(c);
  return Json{{"topology", topology_to_json(model.topology)},
              {"blocks_a", std::move(blocks_a)},
              {"blocks_b", std::move(blocks_b)},
              {"A", matrix_to_json(model.assembled_a)},
              {"B", matrix_to_json(model.assembled_b)},
              {"conditioning", std::move(cond)},
              {"failures", model.failures}};
}

inline Json network_model_to_json(const ReducedNetworkModel& model) {
  Json blocks_a = Json::object();
  for (const auto& [key, block] : model.blocks_a) blocks_a[edge_key(key)] = matrix_to_json(block);
  Json blocks_b = Json::object();
  for (const auto& [key, block] : model.blocks_b) blocks_b[edge_key(key)] = matrix_to_json(block);
  Json u_hat = Json::object();
  for (const auto& [id, u] : model.u_hat) u_hat[id] = matrix_to_json(u);
  Json eigenvalues = Json::object();
  for (const auto& [id, values] : model.node_eigenvalues) {
    Json arr = Json::array();
    for (const auto& v : values) arr.push_back(complex_to_json(v));
    eigenvalues[id] = std::move(arr);
  }
  return Json{{"topology", topology_to_json(model.topology)},
              {"U_hat", std::move(u_hat)},
              {"blocks_a", std::move(blocks_a)},
              {"blocks_b", std::move(blocks_b)},
              {"A", matrix_to_json(model.assembled_a)},
              {"B", matrix_to_json(model.assembled_b)},
              {"node_eigenvalues", std::move(eigenvalues)},
              {"failures", model.failures}};
}

// ---- files ----------------------------------------------------------------

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for reading");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write to '" + path + "' failed");
}

inline Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

inline Json read_json_file(const std::string& path) { return parse_json(read_text_file(path)); }

/// Canonical text form: two-space indent, trailing newline.
inline std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

// ---- trajectory CSV -------------------------------------------------------

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double x) {
  char buf[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

namespace detail {

inline std::vector<std::pair<std::string, RowRange>> ordered_rows(const std::map<std::string, RowRange>& rows) {
  std::vector<std::pair<std::string, RowRange>> out(rows.begin(), rows.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second.offset < b.second.offset; });
  return out;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline double parse_cell(const std::string& cell) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(cell, &used);
  } catch (const std::logic_error&) {
    parse_fail("bad number '" + cell + "'");
  }
  if (used != cell.size() || !std::isfinite(x)) parse_fail("bad number '" + cell + "'");
  return x;
}

}  // namespace detail

inline void write_trajectory_csv(const TrajectoryData& traj, std::ostream& out) {
  std::string header = "k";
  for (const auto& [id, r] : detail::ordered_rows(traj.state_rows)) {
    if (id.find_first_of(",\n") != std::string::npos)
      throw Error(ErrorCode::BadConfig, "vertex id '" + id + "' cannot be written to CSV");
    for (std::size_t c = 0; c < r.size; ++c) header += "," + id + ":" + std::to_string(c);
  }
  for (const auto& [id, r] : detail::ordered_rows(traj.input_rows)) {
    if (id.find_first_of(",\n") != std::string::npos)
      throw Error(ErrorCode::BadConfig, "vertex id '" + id + "' cannot be written to CSV");
    for (std::size_t c = 0; c < r.size; ++c) header += ",u:" + id + ":" + std::to_string(c);
  }
  out << header << '\n';
  for (Eigen::Index k = 0; k < traj.z.cols(); ++k) {
    out << (k + 1);
    for (Eigen::Index i = 0; i < traj.z.rows(); ++i) out << ',' << format_double(traj.z(i, k));
    for (Eigen::Index i = 0; i < traj.gamma.rows(); ++i) out << ',' << format_double(traj.gamma(i, k));
    out << '\n';
  }
  out << "y_final";
  const auto last = traj.y.cols() - 1;
  for (Eigen::Index i = 0; i < traj.y.rows(); ++i) out << ',' << format_double(traj.y(i, last));
  for (Eigen::Index i = 0; i < traj.gamma.rows(); ++i) out << ',';
  out << '\n';
}

inline TrajectoryData read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) detail::parse_fail("empty trajectory CSV");
  const auto header = detail::split_csv_line(line);
  if (header.empty() || header[0] != "k") detail::parse_fail("trajectory CSV must start with column 'k'");

  TrajectoryData traj;
  std::size_t n = 0, l = 0;
  std::string current;
  bool current_input = false;
  for (std::size_t c = 1; c < header.size(); ++c) {
    std::string name = header[c];
    const bool input = name.rfind("u:", 0) == 0;
    if (input) name = name.substr(2);
    const auto colon = name.rfind(':');
    if (colon == std::string::npos) detail::parse_fail("bad column name '" + header[c] + "'");
    const std::string id = name.substr(0, colon);
    auto& rows = input ? traj.input_rows : traj.state_rows;
    auto& count = input ? l : n;
    if (id == current && input == current_input) {
      rows[id].size += 1;
    } else {
      if (rows.count(id) != 0) detail::parse_fail("columns of '" + id + "' are not contiguous");
      if (!input && l > 0) detail::parse_fail("state columns must precede input columns");
      rows[id] = RowRange{count, 1};
      current = id;
      current_input = input;
    }
    if (name.substr(colon + 1) != std::to_string(rows[id].size - 1))
      detail::parse_fail("bad component index in '" + header[c] + "'");
    ++count;
  }

  std::vector<std::vector<double>> z_cols, g_cols;
  std::vector<double> y_final;
  bool have_final = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (have_final) detail::parse_fail("rows after y_final");
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) detail::parse_fail("row has the wrong number of cells");
    if (cells[0] == "y_final") {
      for (std::size_t i = 0; i < n; ++i) y_final.push_back(detail::parse_cell(cells[1 + i]));
      have_final = true;
      continue;
    }
    if (cells[0] != std::to_string(z_cols.size() + 1)) detail::parse_fail("time index out of sequence");
    std::vector<double> zc, gc;
    for (std::size_t i = 0; i < n; ++i) zc.push_back(detail::parse_cell(cells[1 + i]));
    for (std::size_t i = 0; i < l; ++i) gc.push_back(detail::parse_cell(cells[1 + n + i]));
    z_cols.push_back(std::move(zc));
    g_cols.push_back(std::move(gc));
  }
  if (!have_final) detail::parse_fail("missing y_final row");
  if (z_cols.empty()) detail::parse_fail("trajectory has no snapshots");

  const auto m = static_cast<Eigen::Index>(z_cols.size());
  traj.z.resize(static_cast<Eigen::Index>(n), m);
  traj.gamma.resize(static_cast<Eigen::Index>(l), m);
  traj.y.resize(static_cast<Eigen::Index>(n), m);
  for (Eigen::Index k = 0; k < m; ++k) {
    for (std::size_t i = 0; i < n; ++i) traj.z(static_cast<Eigen::Index>(i), k) = z_cols[static_cast<std::size_t>(k)][i];
    for (std::size_t i = 0; i < l; ++i)
      traj.gamma(static_cast<Eigen::Index>(i), k) = g_cols[static_cast<std::size_t>(k)][i];
  }
  if (m > 1) traj.y.leftCols(m - 1) = traj.z.rightCols(m - 1);
  for (std::size_t i = 0; i < n; ++i) traj.y(static_cast<Eigen::Index>(i), m - 1) = y_final[i];
  return traj;
}

}  // namespace netdmd

#endif  // NETDMD_IO_HPP
