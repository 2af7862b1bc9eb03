#pragma once

// Joint color laws at finitely many space-time points: forward and dual
// samplers, exact oracles for both sides, and a two-sample goodness-of-fit
// test between them.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vmp/models.hpp"

namespace vmp {

/// A query point: a vertex of the odd sublattice with t >= 0.
using QueryPoint = Vertex;
using ColorTuple = std::vector<Color>;

/// Throws InvalidArgument for empty lists, wrong parity or negative times.
void validate_query_points(std::span<const QueryPoint> points);

/// Law on color k-tuples. Tuples absent from the map have probability 0.
class JointColorLaw {
 public:
  JointColorLaw() = default;
  explicit JointColorLaw(std::size_t k) : k_(k) {}

  static JointColorLaw from_samples(std::span<const ColorTuple> samples);

  std::size_t k() const noexcept { return k_; }
  void add(const ColorTuple& tuple, double mass);
  double operator()(const ColorTuple& tuple) const;
  const std::map<ColorTuple, double>& probabilities() const noexcept { return probs_; }
  double total() const;
  /// Throws InvalidProbability unless the total is 1 within `tol`.
  void validate(double tol = 1e-10) const;
  /// Law of the coordinates in `which`.
  JointColorLaw marginal(std::span<const std::size_t> which) const;

 private:
  std::size_t k_ = 0;
  std::map<ColorTuple, double> probs_;
};

double total_variation(const JointColorLaw& a, const JointColorLaw& b);

/// Forward chain on the dependence window of the points, read at the points.
ColorTuple forward_sample(std::span<const QueryPoint> points, const VmpParams& params,
                          std::uint64_t seed);

/// Backward net on the dependence window, one graph per point, each colored
/// through its reduced graph. Points share the net and its uniforms.
///
/// With equal seeds this reproduces forward_sample exactly.
ColorTuple dual_sample(std::span<const QueryPoint> points, const VmpParams& params,
                       std::uint64_t seed);

/// Exact law of the forward chain at the points by dynamic programming over
/// the shrinking dependence cone. Throws StateSpaceError when a slice would
/// carry more than `max_states` configurations.
JointColorLaw exact_forward_law(std::span<const QueryPoint> points, const VmpParams& params,
                                std::size_t max_states = std::size_t{1} << 22);

/// Exact law of the dual coloring: every arrow configuration of the vertices
/// reachable from the points (t >= 1) is enumerated with its probability, and
/// for each the joint root-color law is propagated over the union of the
/// graphs with the uniforms integrated out. Throws StateSpaceError when the
/// backward cone holds more than `max_vertices` vertices with t >= 1.
JointColorLaw exact_dual_law(std::span<const QueryPoint> points, const VmpParams& params,
                             std::size_t max_vertices = 12);

/// Hybrid mode for larger cones: arrow fields are sampled, the coloring law
/// given each field is still computed exactly, and the laws are averaged.
JointColorLaw sampled_dual_law(std::span<const QueryPoint> points, const VmpParams& params,
                               std::size_t fields, std::uint64_t seed);

/// Exact joint law of the root colors of the given points for one fixed
/// backward net, uniforms integrated out.
template <NetView Net>
JointColorLaw conditional_dual_law(const Net& net, std::span<const QueryPoint> points,
                                   const ColoringRule& rule);

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  double tvd = 0.0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  std::size_t categories = 0;  // after pooling
};

/// Two-sample chi-square on category counts. Categories whose expected count
/// is below 5 in either sample are pooled into one bin; a pooled bin that is
/// still below 5 is merged into the smallest remaining bin. p-value from the
/// upper regularized incomplete gamma function.
ChiSquareResult two_sample_chi_square(const std::map<ColorTuple, std::size_t>& a,
                                      const std::map<ColorTuple, std::size_t>& b);

/// Same test on (count in sample 1, count in sample 2) per category.
ChiSquareResult chi_square_from_pairs(std::span<const std::pair<double, double>> categories);

std::map<ColorTuple, std::size_t> tally(std::span<const ColorTuple> samples);

/// Per-trial samples keyed by trial index: trial i uses
/// derive_seed(seed, stream, i).
std::vector<ColorTuple> forward_samples(std::span<const QueryPoint> points,
                                        const VmpParams& params, std::size_t n,
                                        std::uint64_t seed, std::uint64_t stream,
                                        unsigned workers = 1);
std::vector<ColorTuple> dual_samples(std::span<const QueryPoint> points,
                                     const VmpParams& params, std::size_t n,
                                     std::uint64_t seed, std::uint64_t stream,
                                     unsigned workers = 1);

inline constexpr std::uint64_t kForwardStream = 1;
inline constexpr std::uint64_t kDualStream = 2;

struct GofReport {
  std::string setting;
  ChiSquareResult test;
  bool passed(double alpha = 0.01) const noexcept { return test.p_value >= alpha; }
};

/// N forward samples of `forward` against N dual samples of `dual` (normally
/// the same parameters) on disjoint seed streams.
GofReport duality_gof_test(const std::string& setting, std::span<const QueryPoint> points,
                           const VmpParams& forward, const VmpParams& dual, std::size_t trials,
                           std::uint64_t seed, unsigned workers = 1);

/// {setting, statistic, dof, p_value, tvd, n}
nlohmann::json to_json(const GofReport& report);

// ---------------------------------------------------------------------------

namespace detail {

/// One vertex of the union graph: its arrow outcome (ignored at t = 0).
struct UnionNode {
  Vertex vertex;
  Arrow outcome;
};

/// Exact joint law of the colors at `roots` for the given union graph
/// (vertices listed with their outcomes), uniforms integrated out.
JointColorLaw union_color_law(std::vector<UnionNode> nodes, std::span<const QueryPoint> roots,
                              const ColoringRule& rule, std::int64_t horizon = 0);

}  // namespace detail

template <NetView Net>
JointColorLaw conditional_dual_law(const Net& net, std::span<const QueryPoint> points,
                                   const ColoringRule& rule) {
  std::vector<detail::UnionNode> nodes;
  std::map<Vertex, bool> seen;
  std::vector<Vertex> stack(points.begin(), points.end());
  while (!stack.empty()) {
    const Vertex v = stack.back();
    stack.pop_back();
    if (!seen.emplace(v, true).second) continue;
    if (!net.contains(v)) throw WindowError("dual graph escapes the window");
    const Arrow a = v.t == 0 ? Arrow::None : net.outcome(v);
    nodes.push_back({v, a});
    if (v.t == 0) continue;
    const ArrowTargets tg = arrow_targets(v, a, Orientation::Backward);
    for (std::uint8_t k = 0; k < tg.count; ++k) stack.push_back(tg.to[k]);
  }
  return detail::union_color_law(std::move(nodes), points, rule);
}

}  // namespace vmp
