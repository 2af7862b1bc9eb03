#pragma once

// Leaf pre-coloring and the leaves-to-root coloring of backward graphs.

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "vmp/dualgraph.hpp"

namespace vmp {

/// Colors are 1-based; 0 never denotes a color.
using Color = std::uint8_t;
inline constexpr int kMaxColors = 255;

/// Probability distribution on {1..q}.
class ColorDistribution {
 public:
  ColorDistribution() = default;
  /// Throws InvalidProbability unless q >= 2, q <= 255, weights are
  /// non-negative and sum to 1 within 1e-12.
  explicit ColorDistribution(std::vector<double> weights);

  static ColorDistribution uniform(int q);
  static ColorDistribution point_mass(int q, Color c);

  int q() const noexcept { return static_cast<int>(weights_.size()); }
  /// Weight of color c (1-based).
  double operator[](Color c) const { return weights_.at(static_cast<std::size_t>(c) - 1); }
  const std::vector<double>& weights() const noexcept { return weights_; }

  friend bool operator==(const ColorDistribution&, const ColorDistribution&) = default;

 private:
  std::vector<double> weights_;
};

/// The unique color i with F(i-1) <= u < F(i), F the cumulative weights.
/// Throws InvalidProbability if u is outside [0,1).
Color color_from_uniform(double u, const ColorDistribution& d);

/// Boundary noise g: one distribution per ordered pair (left, right).
class BoundaryTable {
 public:
  BoundaryTable() = default;
  /// `entries` is row-major, entries[(k-1)*q + (l-1)] = g_{k,l}. Diagonal
  /// entries must be point masses.
  BoundaryTable(int q, std::vector<ColorDistribution> entries);

  /// g_{k,l} uniform for k != l.
  static BoundaryTable uniform(int q);
  /// Off-diagonal entries from a callback.
  template <typename F>
  static BoundaryTable from_function(int q, F&& off_diagonal) {
    std::vector<ColorDistribution> e;
    e.reserve(static_cast<std::size_t>(q * q));
    for (int k = 1; k <= q; ++k) {
      for (int l = 1; l <= q; ++l) {
        e.push_back(k == l ? ColorDistribution::point_mass(q, static_cast<Color>(k))
                           : off_diagonal(static_cast<Color>(k), static_cast<Color>(l)));
      }
    }
    return BoundaryTable(q, std::move(e));
  }

  int q() const noexcept { return q_; }
  const ColorDistribution& at(Color left, Color right) const;
  /// g'_{k,l} = g_{l,k}.
  BoundaryTable transposed() const;
  bool symmetric() const;

  friend bool operator==(const BoundaryTable&, const BoundaryTable&) = default;

 private:
  int q_ = 0;
  std::vector<ColorDistribution> entries_;
};

/// The noise data a coloring needs.
struct ColoringRule {
  BoundaryTable g;
  ColorDistribution lambda;  // time-zero leaves
  ColorDistribution p;       // killing leaves

  int q() const noexcept { return g.q(); }
  /// Throws InvalidArgument when the three pieces disagree on q.
  void validate() const;
};

/// One color per node of the colored graph, indexed like the graph.
struct DagColoring {
  std::vector<Color> colors;

  Color at(const DagGraph& dag, const Vertex& v) const;
  Color root() const { return colors.front(); }
};

/// Leaf colors only; non-leaves are left empty.
std::vector<std::optional<Color>> color_leaves(const DagGraph& dag,
                                               const ColorDistribution& lambda,
                                               const ColorDistribution& p);

/// Color of an internal vertex from its children's colors and its uniform.
Color internal_color(std::span<const Color> child_colors, std::optional<double> uniform,
                     const BoundaryTable& g);

/// Colors every vertex, leaves first.
DagColoring color_dag(const DagGraph& dag, const ColoringRule& rule);

/// Same, visiting vertices in the given order. Throws InvalidArgument if the
/// order is not a permutation in which children precede parents.
DagColoring color_dag(const DagGraph& dag, const ColoringRule& rule,
                      std::span<const std::int32_t> order);

/// Root color computed on the full graph and on its reduction; throws
/// std::logic_error if they differ.
Color color_root_via_reduction(const RootedDag& dag, const ColoringRule& rule,
                               RelevanceMethod method = RelevanceMethod::Dominators);

/// Colors of arbitrary vertices of a backward net, memoized across queries.
///
/// Applies the same per-vertex rule as color_dag, so by consistency of the
/// coloring each answer equals the root color of that vertex's own graph.
template <NetView Net>
class NetColorer {
 public:
  NetColorer(const Net& net, const ColoringRule& rule, std::int64_t horizon = 0)
      : net_(net), rule_(rule), horizon_(horizon) {
    if (net.orientation() != Orientation::Backward) {
      throw InvalidArgument("NetColorer needs a backward-oriented net");
    }
  }

  Color color(const Vertex& z);
  std::size_t visited() const noexcept { return memo_.size(); }

 private:
  const Net& net_;
  const ColoringRule& rule_;
  std::int64_t horizon_;
  std::unordered_map<Vertex, Color, VertexHash> memo_;
};

nlohmann::json to_json(const DagGraph& dag, const DagColoring& coloring);

/// Character map of a coloring on its bounding box: colors as digits, '.' for
/// vertices outside the graph; first line is the latest time.
std::string ascii_map(const DagGraph& dag, const DagColoring& coloring);

// ---------------------------------------------------------------------------

template <NetView Net>
Color NetColorer<Net>::color(const Vertex& z) {
  if (auto it = memo_.find(z); it != memo_.end()) return it->second;
  // Iterative post-order over the unvisited part of the backward graph.
  std::vector<Vertex> stack{z};
  while (!stack.empty()) {
    const Vertex v = stack.back();
    if (memo_.count(v) != 0) {
      stack.pop_back();
      continue;
    }
    if (!net_.contains(v)) {
      throw WindowError("coloring escapes the window at (" + std::to_string(v.x) + ", " +
                        std::to_string(v.t) + ")");
    }
    if (v.t == horizon_) {
      memo_.emplace(v, color_from_uniform(net_.color_uniform(v), rule_.lambda));
      stack.pop_back();
      continue;
    }
    const Arrow a = net_.outcome(v);
    if (a == Arrow::None) {
      memo_.emplace(v, color_from_uniform(net_.color_uniform(v), rule_.p));
      stack.pop_back();
      continue;
    }
    const ArrowTargets targets = arrow_targets(v, a, Orientation::Backward);
    bool ready = true;
    for (std::uint8_t k = 0; k < targets.count; ++k) {
      if (memo_.count(targets.to[k]) == 0) {
        stack.push_back(targets.to[k]);
        ready = false;
      }
    }
    if (!ready) continue;
    std::array<Color, 2> kids{};
    for (std::uint8_t k = 0; k < targets.count; ++k) kids[k] = memo_.at(targets.to[k]);
    const std::optional<double> u =
        a == Arrow::Both ? std::optional<double>(net_.color_uniform(v)) : std::nullopt;
    memo_.emplace(v, internal_color({kids.data(), targets.count}, u, rule_.g));
    stack.pop_back();
  }
  return memo_.at(z);
}

}  // namespace vmp
