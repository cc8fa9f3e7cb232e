#ifndef NETDMD_TOPOLOGY_HPP
#define NETDMD_TOPOLOGY_HPP

/// \file topology.hpp
/// Directed-graph description of a networked control system. State vertices
/// carry the evolving components; input vertices only feed other vertices.
/// Declaration order of vertices fixes every block ordering downstream.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "netdmd/error.hpp"

namespace netdmd {

struct VertexSpec {
  std::string id;
  std::size_t dim = 1;

  friend bool operator==(const VertexSpec&, const VertexSpec&) = default;
};

/// Directed edge source -> target. Also used as the (row vertex, column
/// vertex) key of coefficient blocks, with source == target for self blocks.
struct Edge {
  std::string source;
  std::string target;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Key used in serialized block maps, "src→dst".
inline std::string edge_key(const Edge& e) { return e.source + "→" + e.target; }

enum class VertexKind { State, Input };

struct VertexRef {
  VertexKind kind;
  std::size_t index;  ///< position in the state or input vertex list
};

/// Contiguous row block [offset, offset + size).
struct RowRange {
  std::size_t offset = 0;
  std::size_t size = 0;

  friend bool operator==(const RowRange&, const RowRange&) = default;
};

struct NetworkTopology {
  std::vector<VertexSpec> state_vertices;
  std::vector<VertexSpec> input_vertices;
  std::vector<Edge> edges;

  std::optional<VertexRef> find(const std::string& id) const {
    for (std::size_t i = 0; i < state_vertices.size(); ++i)
      if (state_vertices[i].id == id) return VertexRef{VertexKind::State, i};
    for (std::size_t i = 0; i < input_vertices.size(); ++i)
      if (input_vertices[i].id == id) return VertexRef{VertexKind::Input, i};
    return std::nullopt;
  }

  const VertexSpec& vertex(const VertexRef& ref) const {
    return ref.kind == VertexKind::State ? state_vertices[ref.index] : input_vertices[ref.index];
  }

  std::size_t state_dim() const {
    std::size_t n = 0;
    for (const auto& v : state_vertices) n += v.dim;
    return n;
  }
  std::size_t input_dim() const {
    std::size_t l = 0;
    for (const auto& v : input_vertices) l += v.dim;
    return l;
  }

  /// Row ranges of each state vertex inside a stacked state vector.
  std::map<std::string, RowRange> state_rows() const { return rows_of(state_vertices); }
  /// Row ranges of each input vertex inside a stacked input vector.
  std::map<std::string, RowRange> input_rows() const { return rows_of(input_vertices); }

  friend bool operator==(const NetworkTopology&, const NetworkTopology&) = default;

 private:
  static std::map<std::string, RowRange> rows_of(const std::vector<VertexSpec>& vs) {
    std::map<std::string, RowRange> out;
    std::size_t offset = 0;
    for (const auto& v : vs) {
      out.emplace(v.id, RowRange{offset, v.dim});
      offset += v.dim;
    }
    return out;
  }
};

struct Violation {
  enum class Kind {
    DuplicateVertexId,
    ZeroDimension,
    UnknownEdgeEndpoint,
    InputVertexHasInEdge,
    SelfLoop,
    DuplicateEdge,
  };
  Kind kind;
  std::string subject;  ///< offending vertex id, or "src→dst" for edges

  std::string to_string() const {
    const char* name = "";
    switch (kind) {
      case Kind::DuplicateVertexId: name = "DuplicateVertexId"; break;
      case Kind::ZeroDimension: name = "ZeroDimension"; break;
      case Kind::UnknownEdgeEndpoint: name = "UnknownEdgeEndpoint"; break;
      case Kind::InputVertexHasInEdge: name = "InputVertexHasInEdge"; break;
      case Kind::SelfLoop: name = "SelfLoop"; break;
      case Kind::DuplicateEdge: name = "DuplicateEdge"; break;
    }
    return std::string(name) + "(" + subject + ")";
  }

  friend bool operator==(const Violation&, const Violation&) = default;
};

/// Checks every structural rule; never throws. Empty result means valid.
inline std::vector<Violation> validate(const NetworkTopology& t) {
  std::vector<Violation> out;
  std::unordered_map<std::string, VertexKind> kinds;
  auto add_vertices = [&](const std::vector<VertexSpec>& vs, VertexKind kind) {
    for (const auto& v : vs) {
      if (!kinds.emplace(v.id, kind).second) out.push_back({Violation::Kind::DuplicateVertexId, v.id});
      if (v.dim == 0) out.push_back({Violation::Kind::ZeroDimension, v.id});
    }
  };
  add_vertices(t.state_vertices, VertexKind::State);
  add_vertices(t.input_vertices, VertexKind::Input);

  std::set<Edge> seen;
  for (const auto& e : t.edges) {
    const std::string key = edge_key(e);
    const auto src = kinds.find(e.source);
    const auto dst = kinds.find(e.target);
    if (src == kinds.end() || dst == kinds.end()) {
      out.push_back({Violation::Kind::UnknownEdgeEndpoint, key});
      continue;
    }
    if (dst->second == VertexKind::Input) out.push_back({Violation::Kind::InputVertexHasInEdge, e.target});
    if (e.source == e.target) out.push_back({Violation::Kind::SelfLoop, key});
    if (!seen.insert(e).second) out.push_back({Violation::Kind::DuplicateEdge, key});
  }
  return out;
}

struct LocalSubsystem {
  std::string center;
  std::vector<std::string> state_parents;  ///< global state-vertex order
  std::vector<std::string> input_parents;  ///< global input-vertex order
  std::size_t local_dim = 0;

  friend bool operator==(const LocalSubsystem&, const LocalSubsystem&) = default;
};

namespace detail {

/// Resolves ids once so per-vertex queries do not rescan vertex lists.
class TopologyIndex {
 public:
  explicit TopologyIndex(const NetworkTopology& t) : t_(t) {
    for (std::size_t i = 0; i < t.state_vertices.size(); ++i)
      refs_.emplace(t.state_vertices[i].id, VertexRef{VertexKind::State, i});
    for (std::size_t i = 0; i < t.input_vertices.size(); ++i)
      refs_.emplace(t.input_vertices[i].id, VertexRef{VertexKind::Input, i});
    state_parents_.resize(t.state_vertices.size());
    input_parents_.resize(t.state_vertices.size());
    for (const auto& e : t.edges) {
      const auto src = refs_.find(e.source);
      const auto dst = refs_.find(e.target);
      if (src == refs_.end() || dst == refs_.end() || dst->second.kind != VertexKind::State) continue;
      if (e.source == e.target) continue;
      auto& bucket = src->second.kind == VertexKind::State ? state_parents_[dst->second.index]
                                                           : input_parents_[dst->second.index];
      bucket.push_back(src->second.index);
    }
    for (auto* lists : {&state_parents_, &input_parents_})
      for (auto& l : *lists) {
        std::sort(l.begin(), l.end());
        l.erase(std::unique(l.begin(), l.end()), l.end());
      }
  }

  std::optional<VertexRef> find(const std::string& id) const {
    const auto it = refs_.find(id);
    if (it == refs_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t state_index(const std::string& id) const {
    const auto ref = find(id);
    if (!ref || ref->kind != VertexKind::State)
      throw Error(ErrorCode::UnknownVertex, "'" + id + "' is not a state vertex");
    return ref->index;
  }

  LocalSubsystem local_subsystem(std::size_t j) const {
    LocalSubsystem out;
    out.center = t_.state_vertices[j].id;
    out.local_dim = t_.state_vertices[j].dim;
    for (const auto k : state_parents_[j]) {
      out.state_parents.push_back(t_.state_vertices[k].id);
      out.local_dim += t_.state_vertices[k].dim;
    }
    for (const auto k : input_parents_[j]) {
      out.input_parents.push_back(t_.input_vertices[k].id);
      out.local_dim += t_.input_vertices[k].dim;
    }
    return out;
  }

  const std::vector<std::size_t>& state_parent_indices(std::size_t j) const { return state_parents_[j]; }
  const std::vector<std::size_t>& input_parent_indices(std::size_t j) const { return input_parents_[j]; }

 private:
  const NetworkTopology& t_;
  std::unordered_map<std::string, VertexRef> refs_;
  std::vector<std::vector<std::size_t>> state_parents_;
  std::vector<std::vector<std::size_t>> input_parents_;
};

}  // namespace detail

/// The in-neighbourhood of state vertex `v`, split into state and input parents.
inline LocalSubsystem local_subsystem(const NetworkTopology& t, const std::string& v) {
  const detail::TopologyIndex index(t);
  return index.local_subsystem(index.state_index(v));
}

/// Local subsystems of every state vertex, in declaration order.
inline std::vector<LocalSubsystem> local_subsystems(const NetworkTopology& t) {
  const detail::TopologyIndex index(t);
  std::vector<LocalSubsystem> out;
  out.reserve(t.state_vertices.size());
  for (std::size_t j = 0; j < t.state_vertices.size(); ++j) out.push_back(index.local_subsystem(j));
  return out;
}

/// Largest local subsystem dimension: the snapshot count at which every
/// local regression becomes square.
inline std::size_t max_local_dim(const NetworkTopology& t) {
  if (t.state_vertices.empty()) throw Error(ErrorCode::EmptyNetwork, "network has no state vertices");
  std::size_t best = 0;
  for (const auto& local : local_subsystems(t)) best = std::max(best, local.local_dim);
  return best;
}

}  // namespace netdmd

#endif  // NETDMD_TOPOLOGY_HPP
