#include "vmp/dualgraph.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace vmp {

namespace {

std::string describe(const Vertex& v) {
  return "(" + std::to_string(v.x) + ", " + std::to_string(v.t) + ")";
}

bool is_intermediate(const DagGraph& dag, std::int32_t i) {
  return i != 0 && !is_leaf(dag.node(i).kind);
}

/// Residual network for unit vertex capacities, built over the descendants
/// of one source vertex. Node 2k is v_in, 2k+1 is v_out, the last is the sink.
class UnitVertexFlow {
 public:
  UnitVertexFlow(const DagGraph& dag, std::int32_t source) {
    // Descendants of the source, local ids in discovery order.
    std::vector<std::int32_t> local(dag.size(), -1);
    std::vector<std::int32_t> order{source};
    local[static_cast<std::size_t>(source)] = 0;
    for (std::size_t k = 0; k < order.size(); ++k) {
      for (std::int32_t c : dag.node(order[k]).child_span()) {
        if (local[static_cast<std::size_t>(c)] < 0) {
          local[static_cast<std::size_t>(c)] = static_cast<std::int32_t>(order.size());
          order.push_back(c);
        }
      }
    }
    const auto n = static_cast<std::int32_t>(order.size());
    sink_ = 2 * n;
    adj_.assign(static_cast<std::size_t>(2 * n + 1), {});
    for (std::int32_t k = 0; k < n; ++k) {
      // The source itself is uncapacitated.
      add_edge(2 * k, 2 * k + 1, k == 0 ? 2 : 1);
      const DagNode& node = dag.node(order[static_cast<std::size_t>(k)]);
      if (is_leaf(node.kind)) add_edge(2 * k + 1, sink_, 1);
      std::int32_t prev = -1;
      for (std::int32_t c : node.child_span()) {
        if (c == prev) continue;  // a multiplicity-2 edge still enters one vertex
        add_edge(2 * k + 1, 2 * local[static_cast<std::size_t>(c)], 1);
        prev = c;
      }
    }
    source_ = 1;  // out-node of the source vertex
  }

  /// Max-flow value, stopping once `cap` units are routed.
  int max_flow(int cap) {
    int flow = 0;
    while (flow < cap && augment()) ++flow;
    return flow;
  }

 private:
  struct Arc {
    std::int32_t to;
    std::int32_t rev;
    int cap;
  };

  void add_edge(std::int32_t from, std::int32_t to, int cap) {
    auto& a = adj_[static_cast<std::size_t>(from)];
    auto& b = adj_[static_cast<std::size_t>(to)];
    a.push_back({to, static_cast<std::int32_t>(b.size()), cap});
    b.push_back({from, static_cast<std::int32_t>(a.size() - 1), 0});
  }

  bool augment() {
    std::vector<std::pair<std::int32_t, std::int32_t>> parent(adj_.size(), {-1, -1});
    std::vector<std::int32_t> queue{source_};
    parent[static_cast<std::size_t>(source_)] = {source_, -1};
    for (std::size_t k = 0; k < queue.size(); ++k) {
      const std::int32_t u = queue[k];
      if (u == sink_) break;
      const auto& arcs = adj_[static_cast<std::size_t>(u)];
      for (std::size_t e = 0; e < arcs.size(); ++e) {
        const Arc& arc = arcs[e];
        if (arc.cap > 0 && parent[static_cast<std::size_t>(arc.to)].first < 0) {
          parent[static_cast<std::size_t>(arc.to)] = {u, static_cast<std::int32_t>(e)};
          queue.push_back(arc.to);
        }
      }
    }
    if (parent[static_cast<std::size_t>(sink_)].first < 0) return false;
    for (std::int32_t v = sink_; v != source_;) {
      const auto [u, e] = parent[static_cast<std::size_t>(v)];
      Arc& arc = adj_[static_cast<std::size_t>(u)][static_cast<std::size_t>(e)];
      arc.cap -= 1;
      adj_[static_cast<std::size_t>(v)][static_cast<std::size_t>(arc.rev)].cap += 1;
      v = u;
    }
    return true;
  }

  std::vector<std::vector<Arc>> adj_;
  std::int32_t source_ = 0;
  std::int32_t sink_ = 0;
};

/// Immediate post-dominators towards a virtual sink (index dag.size()).
std::vector<std::int32_t> post_dominators(const DagGraph& dag) {
  const auto n = static_cast<std::int32_t>(dag.size());
  const std::int32_t sink = n;
  const int levels = std::max(1, static_cast<int>(std::bit_width(static_cast<unsigned>(n + 1))));
  std::vector<std::vector<std::int32_t>> up(static_cast<std::size_t>(levels),
                                            std::vector<std::int32_t>(static_cast<std::size_t>(n + 1), sink));
  std::vector<std::int32_t> depth(static_cast<std::size_t>(n + 1), 0);
  std::vector<std::int32_t> ipdom(static_cast<std::size_t>(n), sink);

  auto set_parent = [&](std::int32_t v, std::int32_t p) {
    ipdom[static_cast<std::size_t>(v)] = p;
    depth[static_cast<std::size_t>(v)] = depth[static_cast<std::size_t>(p)] + 1;
    up[0][static_cast<std::size_t>(v)] = p;
    for (int k = 1; k < levels; ++k) {
      up[static_cast<std::size_t>(k)][static_cast<std::size_t>(v)] =
          up[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(up[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(v)])];
    }
  };
  auto lca = [&](std::int32_t a, std::int32_t b) {
    if (depth[static_cast<std::size_t>(a)] < depth[static_cast<std::size_t>(b)]) std::swap(a, b);
    std::int32_t diff = depth[static_cast<std::size_t>(a)] - depth[static_cast<std::size_t>(b)];
    for (int k = 0; diff > 0; ++k, diff >>= 1) {
      if (diff & 1) a = up[static_cast<std::size_t>(k)][static_cast<std::size_t>(a)];
    }
    if (a == b) return a;
    for (int k = levels - 1; k >= 0; --k) {
      const auto& row = up[static_cast<std::size_t>(k)];
      if (row[static_cast<std::size_t>(a)] != row[static_cast<std::size_t>(b)]) {
        a = row[static_cast<std::size_t>(a)];
        b = row[static_cast<std::size_t>(b)];
      }
    }
    return up[0][static_cast<std::size_t>(a)];
  };

  for (std::int32_t v : dag.leaves_first_order()) {
    const DagNode& node = dag.node(v);
    if (node.child_count == 0) {
      set_parent(v, sink);
      continue;
    }
    std::int32_t candidate = node.children[0];
    if (node.child_count == 2) candidate = lca(candidate, node.children[1]);
    set_parent(v, candidate);
  }
  return ipdom;
}

std::vector<bool> relevance_mask(const DagGraph& dag, RelevanceMethod method) {
  const auto n = static_cast<std::int32_t>(dag.size());
  std::vector<bool> relevant(static_cast<std::size_t>(n), false);
  if (method == RelevanceMethod::Dominators) {
    const auto ipdom = post_dominators(dag);
    for (std::int32_t i = 0; i < n; ++i) {
      relevant[static_cast<std::size_t>(i)] = is_intermediate(dag, i) && ipdom[static_cast<std::size_t>(i)] == n;
    }
  } else {
    for (std::int32_t i = 0; i < n; ++i) {
      // A vertex with a single out-neighbor cannot start two disjoint paths.
      const DagNode& node = dag.node(i);
      if (!is_intermediate(dag, i) || node.child_count < 2 || node.children[0] == node.children[1]) continue;
      relevant[static_cast<std::size_t>(i)] = UnitVertexFlow(dag, i).max_flow(2) >= 2;
    }
  }
  return relevant;
}

std::vector<Vertex> collect(const DagGraph& dag, const std::vector<bool>& mask) {
  std::vector<Vertex> out;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) out.push_back(dag.nodes()[i].vertex);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void enumerate_paths(const DagGraph& dag, std::int32_t v, std::vector<std::int32_t>& current,
                     std::vector<std::vector<std::int32_t>>& out) {
  current.push_back(v);
  const DagNode& node = dag.node(v);
  if (node.child_count == 0) {
    out.push_back(current);
  } else {
    std::int32_t prev = -1;
    for (std::int32_t c : node.child_span()) {
      if (c == prev) continue;
      enumerate_paths(dag, c, current, out);
      prev = c;
    }
  }
  current.pop_back();
}

}  // namespace

const char* to_string(VertexKind kind) noexcept {
  switch (kind) {
    case VertexKind::Branch: return "Branch";
    case VertexKind::PassThrough: return "PassThrough";
    case VertexKind::KillingLeaf: return "KillingLeaf";
    case VertexKind::TimeZeroLeaf: return "TimeZeroLeaf";
  }
  return "?";
}

std::optional<VertexKind> vertex_kind_from_string(std::string_view s) noexcept {
  if (s == "Branch") return VertexKind::Branch;
  if (s == "PassThrough") return VertexKind::PassThrough;
  if (s == "KillingLeaf") return VertexKind::KillingLeaf;
  if (s == "TimeZeroLeaf") return VertexKind::TimeZeroLeaf;
  return std::nullopt;
}

DagGraph::DagGraph(std::vector<DagNode> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw InvalidArgument("graph needs at least a root");
  index_.reserve(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!index_.emplace(nodes_[i].vertex, static_cast<std::int32_t>(i)).second) {
      throw InvalidArgument("duplicate graph vertex " + describe(nodes_[i].vertex));
    }
  }
}

std::optional<std::int32_t> DagGraph::find(const Vertex& v) const {
  const auto it = index_.find(v);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<DagEdge> DagGraph::edges() const {
  std::vector<DagEdge> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const DagNode& n = nodes_[i];
    if (n.child_count == 2 && n.children[0] == n.children[1]) {
      out.push_back({static_cast<std::int32_t>(i), n.children[0], 2});
      continue;
    }
    for (std::int32_t c : n.child_span()) out.push_back({static_cast<std::int32_t>(i), c, 1});
  }
  return out;
}

std::vector<std::int32_t> DagGraph::leaves_first_order() const {
  std::vector<std::int32_t> order(nodes_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<std::int32_t>(i);
  std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
    const Vertex& va = nodes_[static_cast<std::size_t>(a)].vertex;
    const Vertex& vb = nodes_[static_cast<std::size_t>(b)].vertex;
    return va.t != vb.t ? va.t < vb.t : va.x < vb.x;
  });
  return order;
}

std::vector<std::int32_t> DagGraph::leaves() const {
  std::vector<std::int32_t> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (is_leaf(nodes_[i].kind)) out.push_back(static_cast<std::int32_t>(i));
  }
  return out;
}

void DagGraph::validate() const {
  const auto n = static_cast<std::int32_t>(nodes_.size());
  for (std::int32_t i = 0; i < n; ++i) {
    const DagNode& node = nodes_[static_cast<std::size_t>(i)];
    const std::string where = "vertex " + describe(node.vertex);
    switch (node.kind) {
      case VertexKind::KillingLeaf:
      case VertexKind::TimeZeroLeaf:
        if (node.child_count != 0) throw InvalidArgument(where + ": leaf with children");
        break;
      case VertexKind::Branch:
        if (node.child_count != 2) throw InvalidArgument(where + ": branch needs two children");
        break;
      case VertexKind::PassThrough:
        if (node.child_count != 1) throw InvalidArgument(where + ": pass-through needs one child");
        break;
    }
    const bool needs_uniform = node.kind != VertexKind::PassThrough;
    if (needs_uniform != node.uniform.has_value()) {
      throw InvalidArgument(where + (needs_uniform ? ": missing uniform" : ": unexpected uniform"));
    }
    if (node.uniform && !(*node.uniform >= 0.0 && *node.uniform < 1.0)) {
      throw InvalidArgument(where + ": uniform outside [0,1)");
    }
    for (std::int32_t c : node.child_span()) {
      if (c <= 0 || c >= n) throw InvalidArgument(where + ": child index out of range");
      if (nodes_[static_cast<std::size_t>(c)].vertex.t >= node.vertex.t) {
        throw InvalidArgument(where + ": child is not earlier in time");
      }
    }
  }
  std::vector<bool> reached(nodes_.size(), false);
  std::vector<std::int32_t> stack{0};
  reached[0] = true;
  while (!stack.empty()) {
    const std::int32_t v = stack.back();
    stack.pop_back();
    for (std::int32_t c : nodes_[static_cast<std::size_t>(v)].child_span()) {
      if (!reached[static_cast<std::size_t>(c)]) {
        reached[static_cast<std::size_t>(c)] = true;
        stack.push_back(c);
      }
    }
  }
  for (std::size_t i = 0; i < reached.size(); ++i) {
    if (!reached[i]) throw InvalidArgument("vertex " + describe(nodes_[i].vertex) + " unreachable from root");
  }
}

std::vector<Vertex> relevant_points(const DagGraph& dag) {
  return collect(dag, relevance_mask(dag, RelevanceMethod::MaxFlow));
}

std::vector<Vertex> relevant_points_by_dominators(const DagGraph& dag) {
  return collect(dag, relevance_mask(dag, RelevanceMethod::Dominators));
}

std::vector<Vertex> relevant_points_brute_force(const DagGraph& dag) {
  std::vector<Vertex> out;
  const auto n = static_cast<std::int32_t>(dag.size());
  for (std::int32_t z = 0; z < n; ++z) {
    if (!is_intermediate(dag, z)) continue;
    std::vector<std::vector<std::int32_t>> paths;
    std::vector<std::int32_t> current;
    enumerate_paths(dag, z, current, paths);
    bool found = false;
    for (std::size_t a = 0; a < paths.size() && !found; ++a) {
      std::set<std::int32_t> seen(paths[a].begin() + 1, paths[a].end());
      for (std::size_t b = a + 1; b < paths.size() && !found; ++b) {
        found = std::none_of(paths[b].begin() + 1, paths[b].end(),
                             [&](std::int32_t v) { return seen.count(v) > 0; });
      }
    }
    if (found) out.push_back(dag.node(z).vertex);
  }
  std::sort(out.begin(), out.end());
  return out;
}

ReducedDag reduce(const DagGraph& dag, RelevanceMethod method) {
  const auto n = static_cast<std::int32_t>(dag.size());
  const std::vector<bool> relevant = relevance_mask(dag, method);
  std::vector<bool> kept(static_cast<std::size_t>(n));
  for (std::int32_t i = 0; i < n; ++i) {
    kept[static_cast<std::size_t>(i)] = i == 0 || relevant[static_cast<std::size_t>(i)] || is_leaf(dag.node(i).kind);
  }

  // target[v]: the kept vertex every route out of a skipped vertex v reaches
  // first. Routes through irrelevant vertices never fan out to two kept ones.
  std::vector<std::int32_t> target(static_cast<std::size_t>(n), -1);
  auto resolve = [&](std::int32_t c) {
    return kept[static_cast<std::size_t>(c)] ? c : target[static_cast<std::size_t>(c)];
  };
  for (std::int32_t v : dag.leaves_first_order()) {
    if (kept[static_cast<std::size_t>(v)]) continue;
    std::int32_t reached = -1;
    for (std::int32_t c : dag.node(v).child_span()) {
      const std::int32_t r = resolve(c);
      if (reached >= 0 && r != reached) {
        throw std::logic_error("irrelevant vertex " + describe(dag.node(v).vertex) +
                               " reaches two kept vertices");
      }
      reached = r;
    }
    target[static_cast<std::size_t>(v)] = reached;
  }

  // Breadth-first from the root over skip edges.
  std::vector<std::int32_t> new_id(static_cast<std::size_t>(n), -1);
  std::vector<std::int32_t> order{0};
  new_id[0] = 0;
  std::vector<DagNode> nodes;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const DagNode& src = dag.node(order[k]);
    DagNode out{src.vertex, src.kind, src.uniform, src.child_count, {-1, -1}};
    for (std::uint8_t j = 0; j < src.child_count; ++j) {
      const std::int32_t r = resolve(src.children[j]);
      if (new_id[static_cast<std::size_t>(r)] < 0) {
        new_id[static_cast<std::size_t>(r)] = static_cast<std::int32_t>(order.size());
        order.push_back(r);
      }
      out.children[j] = new_id[static_cast<std::size_t>(r)];
    }
    nodes.push_back(out);
  }

  ReducedDag reduced(std::move(nodes));
  for (std::int32_t i = 1; i < static_cast<std::int32_t>(reduced.size()); ++i) {
    const DagNode& node = reduced.node(i);
    if (is_leaf(node.kind)) continue;
    if (node.kind != VertexKind::Branch || node.children[0] == node.children[1]) {
      throw std::logic_error("reduced graph keeps a vertex " + describe(node.vertex) +
                             " without two distinct out-neighbors");
    }
  }
  return reduced;
}

bool differ_only_by_root(const ReducedDag& g1, const ReducedDag& g2) {
  if (g1.size() != g2.size()) return false;
  std::set<Vertex> rest1;
  std::set<Vertex> rest2;
  for (std::size_t i = 1; i < g1.size(); ++i) rest1.insert(g1.nodes()[i].vertex);
  for (std::size_t i = 1; i < g2.size(); ++i) rest2.insert(g2.nodes()[i].vertex);
  if (rest1 != rest2) return false;

  // Root mapped to a sentinel; every other vertex to itself.
  const Vertex sentinel{std::numeric_limits<std::int64_t>::min(), std::numeric_limits<std::int64_t>::min()};
  auto edge_set = [&](const ReducedDag& g) {
    std::multiset<std::tuple<Vertex, Vertex, int>> out;
    for (const DagEdge& e : g.edges()) {
      const Vertex p = e.parent == 0 ? sentinel : g.node(e.parent).vertex;
      out.emplace(p, g.node(e.child).vertex, e.multiplicity);
    }
    return out;
  };
  return edge_set(g1) == edge_set(g2);
}

nlohmann::json to_json(const DagGraph& dag) {
  nlohmann::json vertices = nlohmann::json::array();
  for (const DagNode& n : dag.nodes()) {
    nlohmann::json v{{"x", n.vertex.x}, {"t", n.vertex.t}, {"kind", to_string(n.kind)}};
    v["uniform"] = n.uniform ? nlohmann::json(*n.uniform) : nlohmann::json(nullptr);
    vertices.push_back(std::move(v));
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const DagEdge& e : dag.edges()) {
    edges.push_back({{"parent", e.parent}, {"child", e.child}, {"multiplicity", e.multiplicity}});
  }
  return {{"root", 0}, {"vertices", std::move(vertices)}, {"edges", std::move(edges)}};
}

DagGraph dag_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("vertices") || !j.contains("edges")) {
    throw ParseError("graph JSON needs `vertices` and `edges`");
  }
  const auto& vs = j.at("vertices");
  if (!vs.is_array() || vs.empty()) throw ParseError("graph JSON: `vertices` must be a non-empty array");
  const std::int64_t root = j.value("root", std::int64_t{0});
  if (root < 0 || root >= static_cast<std::int64_t>(vs.size())) throw ParseError("graph JSON: bad root index");

  // Root goes first; other vertices keep their relative order.
  std::vector<std::int64_t> perm;
  perm.push_back(root);
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(vs.size()); ++i) {
    if (i != root) perm.push_back(i);
  }
  std::vector<std::int32_t> new_of(vs.size());
  for (std::size_t k = 0; k < perm.size(); ++k) new_of[static_cast<std::size_t>(perm[k])] = static_cast<std::int32_t>(k);

  std::vector<DagNode> nodes(vs.size());
  try {
    for (std::size_t k = 0; k < perm.size(); ++k) {
      const auto& v = vs.at(static_cast<std::size_t>(perm[k]));
      DagNode& node = nodes[k];
      node.vertex = {v.at("x").get<std::int64_t>(), v.at("t").get<std::int64_t>()};
      const auto kind = vertex_kind_from_string(v.at("kind").get<std::string>());
      if (!kind) throw ParseError("graph JSON: unknown vertex kind `" + v.at("kind").get<std::string>() + "`");
      node.kind = *kind;
      if (v.contains("uniform") && !v.at("uniform").is_null()) node.uniform = v.at("uniform").get<double>();
    }
    for (const auto& e : j.at("edges")) {
      const auto parent = e.at("parent").get<std::int64_t>();
      const auto child = e.at("child").get<std::int64_t>();
      const int mult = e.value("multiplicity", 1);
      if (parent < 0 || child < 0 || parent >= static_cast<std::int64_t>(vs.size()) ||
          child >= static_cast<std::int64_t>(vs.size())) {
        throw ParseError("graph JSON: edge index out of range");
      }
      if (mult != 1 && mult != 2) throw ParseError("graph JSON: edge multiplicity must be 1 or 2");
      DagNode& p = nodes[static_cast<std::size_t>(new_of[static_cast<std::size_t>(parent)])];
      for (int m = 0; m < mult; ++m) {
        if (p.child_count >= 2) throw ParseError("graph JSON: vertex with more than two out-edges");
        p.children[p.child_count++] = new_of[static_cast<std::size_t>(child)];
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("graph JSON: ") + e.what());
  }
  DagGraph g(std::move(nodes));
  g.validate();
  return g;
}

std::string to_dot(const DagGraph& dag, const std::string& name) {
  std::ostringstream os;
  os << "digraph " << name << " {\n  rankdir=TB;\n";
  for (std::size_t i = 0; i < dag.size(); ++i) {
    const DagNode& n = dag.nodes()[i];
    const char* shape = "circle";
    if (n.kind == VertexKind::KillingLeaf) shape = "box";
    else if (n.kind == VertexKind::TimeZeroLeaf) shape = "invtriangle";
    else if (n.kind == VertexKind::Branch) shape = "doublecircle";
    os << "  n" << i << " [label=\"" << n.vertex.x << "," << n.vertex.t << "\", shape=" << shape
       << (i == 0 ? ", style=bold" : "") << "];\n";
  }
  for (const DagEdge& e : dag.edges()) {
    os << "  n" << e.parent << " -> n" << e.child;
    if (e.multiplicity == 2) os << " [penwidth=2, label=\"x2\"]";
    os << ";\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace vmp
