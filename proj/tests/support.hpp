#pragma once

// Helpers shared by the unit tests: fixture loading and small independent
// oracles that do not go through the library code under test.

#include <algorithm>
#include <array>
#include <fstream>
#include <functional>
#include <set>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vmp/coloring.hpp"

namespace vmp::test {

inline std::string fixture_path(const std::string& name) {
  return std::string(VMP_FIXTURE_DIR) + "/" + name;
}

inline std::string read_fixture(const std::string& name) {
  std::ifstream is(fixture_path(name), std::ios::binary);
  if (!is) throw std::runtime_error("missing fixture " + name);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

inline nlohmann::json json_fixture(const std::string& name) {
  return nlohmann::json::parse(read_fixture(name));
}

/// Linear scan over half-open cumulative intervals [F(i-1), F(i)).
inline int cdf_scan(double u, const std::vector<double>& weights) {
  double lo = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double hi = lo + weights[i];
    if (u >= lo && u < hi) return static_cast<int>(i) + 1;
    lo = hi;
  }
  return static_cast<int>(weights.size());
}

/// Vertex -> kind name and sorted (child vertex, multiplicity) lists, so that
/// graphs can be compared independently of node numbering.
struct GraphShape {
  std::map<Vertex, std::string> kinds;
  std::map<std::pair<Vertex, Vertex>, int> edges;
  friend bool operator==(const GraphShape&, const GraphShape&) = default;
};

inline GraphShape shape_of(const DagGraph& dag) {
  GraphShape s;
  for (const DagNode& n : dag.nodes()) s.kinds[n.vertex] = to_string(n.kind);
  for (const DagEdge& e : dag.edges()) {
    s.edges[{dag.node(e.parent).vertex, dag.node(e.child).vertex}] = e.multiplicity;
  }
  return s;
}

inline Vertex vertex_of(const nlohmann::json& j) {
  return Vertex{j.at("x").get<std::int64_t>(), j.at("t").get<std::int64_t>()};
}

/// Shape read straight from a fixture's vertex and edge lists.
inline GraphShape shape_of(const nlohmann::json& j) {
  GraphShape s;
  const auto& vs = j.at("vertices");
  for (const auto& v : vs) s.kinds[vertex_of(v)] = v.at("kind").get<std::string>();
  for (const auto& e : j.at("edges")) {
    const Vertex p = vertex_of(vs.at(e.at("parent").get<std::size_t>()));
    const Vertex c = vertex_of(vs.at(e.at("child").get<std::size_t>()));
    s.edges[{p, c}] = e.value("multiplicity", 1);
  }
  return s;
}

/// A random backward graph: root (x, T) over a window that always holds its
/// cone, with (b, kappa) and T drawn from `rng`.
inline RootedDag random_dag(SplitMix64& rng, std::int64_t max_depth = 10) {
  static constexpr std::array<std::pair<double, double>, 6> grid{
      {{0.1, 0.0}, {0.3, 0.05}, {0.5, 0.1}, {0.8, 0.0}, {0.2, 0.3}, {0.6, 0.2}}};
  const auto [b, kappa] = grid[rng.below(grid.size())];
  const std::int64_t T = 1 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(max_depth)));
  const std::int64_t x = T % 2 == 0 ? 1 : 0;
  const LazyNet net(Window{x - T, x + T, 0, T}, b, kappa, rng(), Orientation::Backward);
  return build_dag(net, Vertex{x, T});
}

/// Relevance by definition: an intermediate vertex with two children is
/// relevant iff some maximal path from one child and some maximal path from
/// the other share no vertex.
inline std::vector<Vertex> relevant_by_path_pairs(const DagGraph& dag) {
  using Path = std::set<std::int32_t>;
  std::function<std::vector<Path>(std::int32_t)> paths = [&](std::int32_t v) {
    const DagNode& n = dag.node(v);
    std::vector<Path> out;
    if (n.child_count == 0) {
      out.push_back({v});
      return out;
    }
    for (std::int32_t c : n.child_span()) {
      for (Path p : paths(c)) {
        p.insert(v);
        out.push_back(std::move(p));
      }
    }
    return out;
  };
  std::vector<Vertex> out;
  for (std::int32_t i = 1; i < static_cast<std::int32_t>(dag.size()); ++i) {
    const DagNode& n = dag.node(i);
    if (n.child_count != 2 || n.children[0] == n.children[1]) continue;
    bool disjoint = false;
    for (const Path& a : paths(n.children[0])) {
      for (const Path& b : paths(n.children[1])) {
        bool meet = false;
        for (std::int32_t v : a) meet = meet || b.count(v) != 0;
        disjoint = disjoint || !meet;
      }
    }
    if (disjoint) out.push_back(n.vertex);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace vmp::test
