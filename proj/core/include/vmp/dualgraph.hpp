#pragma once

// Rooted acyclic graphs generated by the backward net, relevant separation
// points and the reduced graph.

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "vmp/lattice_net.hpp"

namespace vmp {

enum class VertexKind : std::uint8_t { Branch, PassThrough, KillingLeaf, TimeZeroLeaf };

const char* to_string(VertexKind kind) noexcept;
std::optional<VertexKind> vertex_kind_from_string(std::string_view s) noexcept;

constexpr bool is_leaf(VertexKind k) noexcept {
  return k == VertexKind::KillingLeaf || k == VertexKind::TimeZeroLeaf;
}

/// One graph node. children[0] is reached through the left arrow (directly or
/// via skipped vertices); `children[0] == children[1]` encodes a
/// multiplicity-2 edge of a reduced graph.
struct DagNode {
  Vertex vertex;
  VertexKind kind = VertexKind::PassThrough;
  std::optional<double> uniform;
  std::uint8_t child_count = 0;
  std::array<std::int32_t, 2> children{-1, -1};

  std::span<const std::int32_t> child_span() const noexcept {
    return {children.data(), child_count};
  }
};

struct DagEdge {
  std::int32_t parent;
  std::int32_t child;
  std::uint8_t multiplicity;
  friend bool operator==(const DagEdge&, const DagEdge&) = default;
};

/// Shared storage of full and reduced graphs: node 0 is the root, every
/// child has a smaller time coordinate than its parent.
class DagGraph {
 public:
  DagGraph() = default;
  explicit DagGraph(std::vector<DagNode> nodes);

  std::size_t size() const noexcept { return nodes_.size(); }
  const DagNode& root() const { return nodes_.front(); }
  const DagNode& node(std::int32_t i) const { return nodes_[static_cast<std::size_t>(i)]; }
  const std::vector<DagNode>& nodes() const noexcept { return nodes_; }

  std::optional<std::int32_t> find(const Vertex& v) const;
  bool contains(const Vertex& v) const { return find(v).has_value(); }

  /// Edges with multiplicity, in node order.
  std::vector<DagEdge> edges() const;

  /// Indices ordered leaves-first (increasing time, then x).
  std::vector<std::int32_t> leaves_first_order() const;

  std::vector<std::int32_t> leaves() const;

  /// Throws InvalidArgument on the first structural violation.
  void validate() const;

 private:
  std::vector<DagNode> nodes_;
  std::unordered_map<Vertex, std::int32_t, VertexHash> index_;
};

/// Backward component of a root, down to the horizon.
class RootedDag : public DagGraph {
 public:
  using DagGraph::DagGraph;
};

/// Root, relevant separation points and leaves, with skip edges.
class ReducedDag : public DagGraph {
 public:
  using DagGraph::DagGraph;
};

/// Breadth-first expansion of the backward net from `root` down to `horizon`.
///
/// Vertices at the horizon are time-zero leaves, killing points are killing
/// leaves. Throws WindowError if the root or any reached vertex lies outside
/// the net's window.
template <NetView Net>
RootedDag build_dag(const Net& net, const Vertex& root, std::int64_t horizon = 0);

/// Relevance test by unit vertex-capacity max-flow from each intermediate
/// vertex to a super-sink joined to every leaf.
std::vector<Vertex> relevant_points(const DagGraph& dag);

/// Same set through immediate post-dominators: an intermediate vertex is
/// relevant iff no single vertex separates it from the super-sink. Runs in
/// O(n log n) and is what large-scale sampling uses.
std::vector<Vertex> relevant_points_by_dominators(const DagGraph& dag);

/// Reference definition: enumerates all pairs of maximal paths. Exponential;
/// intended for graphs with a handful of branch points.
std::vector<Vertex> relevant_points_brute_force(const DagGraph& dag);

enum class RelevanceMethod : std::uint8_t { MaxFlow, Dominators };

/// Keeps the root, relevant points and leaves; every other vertex is skipped.
ReducedDag reduce(const DagGraph& dag, RelevanceMethod method = RelevanceMethod::Dominators);

/// True iff fixing every non-root vertex and sending root to root is an
/// isomorphism of the two graphs (edges and multiplicities included).
bool differ_only_by_root(const ReducedDag& g1, const ReducedDag& g2);

nlohmann::json to_json(const DagGraph& dag);
/// Accepts the to_json layout; validates the structure.
DagGraph dag_from_json(const nlohmann::json& j);
std::string to_dot(const DagGraph& dag, const std::string& name = "dag");

// ---------------------------------------------------------------------------

template <NetView Net>
RootedDag build_dag(const Net& net, const Vertex& root, std::int64_t horizon) {
  if (net.orientation() != Orientation::Backward) {
    throw InvalidArgument("build_dag needs a backward-oriented net");
  }
  const Window& w = net.window();
  if (!net.contains(root)) {
    throw WindowError("dag root (" + std::to_string(root.x) + ", " + std::to_string(root.t) +
                      ") is not a vertex of the net window");
  }
  if (horizon < w.t_min || horizon > root.t) {
    throw WindowError("dag horizon " + std::to_string(horizon) + " outside [t_min, root.t]");
  }

  std::vector<DagNode> nodes;
  std::unordered_map<Vertex, std::int32_t, VertexHash> seen;
  std::deque<std::int32_t> queue;
  auto visit = [&](const Vertex& v) -> std::int32_t {
    auto [it, fresh] = seen.try_emplace(v, static_cast<std::int32_t>(nodes.size()));
    if (fresh) {
      if (!net.contains(v)) {
        throw WindowError("dag escapes the window at (" + std::to_string(v.x) + ", " +
                          std::to_string(v.t) + ")");
      }
      nodes.push_back(DagNode{v, VertexKind::PassThrough, std::nullopt});
      queue.push_back(it->second);
    }
    return it->second;
  };

  visit(root);
  while (!queue.empty()) {
    const std::int32_t i = queue.front();
    queue.pop_front();
    const Vertex v = nodes[static_cast<std::size_t>(i)].vertex;
    if (v.t == horizon) {
      nodes[static_cast<std::size_t>(i)].kind = VertexKind::TimeZeroLeaf;
      nodes[static_cast<std::size_t>(i)].uniform = net.color_uniform(v);
      continue;
    }
    const Arrow a = net.outcome(v);
    const ArrowTargets targets = arrow_targets(v, a, Orientation::Backward);
    std::array<std::int32_t, 2> kids{-1, -1};
    for (std::uint8_t k = 0; k < targets.count; ++k) kids[k] = visit(targets.to[k]);
    DagNode& n = nodes[static_cast<std::size_t>(i)];
    n.child_count = targets.count;
    n.children = kids;
    switch (a) {
      case Arrow::None:
        n.kind = VertexKind::KillingLeaf;
        n.uniform = net.color_uniform(v);
        break;
      case Arrow::Both:
        n.kind = VertexKind::Branch;
        n.uniform = net.color_uniform(v);
        break;
      default:
        n.kind = VertexKind::PassThrough;
        break;
    }
  }
  return RootedDag(std::move(nodes));
}

}  // namespace vmp
