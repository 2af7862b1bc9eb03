#include "vmp/coloring.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace vmp {

ColorDistribution::ColorDistribution(std::vector<double> weights) : weights_(std::move(weights)) {
  const auto q = weights_.size();
  if (q < 2 || q > static_cast<std::size_t>(kMaxColors)) {
    throw InvalidProbability("color distribution needs 2 <= q <= 255, got q = " +
                             std::to_string(q));
  }
  double sum = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw InvalidProbability("color distribution has a negative or non-finite weight");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    std::ostringstream os;
    os.precision(17);
    os << "color distribution weights sum to " << sum << ", not 1";
    throw InvalidProbability(os.str());
  }
}

ColorDistribution ColorDistribution::uniform(int q) {
  if (q < 2 || q > kMaxColors) {
    throw InvalidProbability("uniform distribution needs 2 <= q <= 255");
  }
  return ColorDistribution(std::vector<double>(static_cast<std::size_t>(q), 1.0 / q));
}

ColorDistribution ColorDistribution::point_mass(int q, Color c) {
  if (c < 1 || c > q) throw InvalidArgument("point mass color out of range");
  std::vector<double> w(static_cast<std::size_t>(q), 0.0);
  w[c - 1u] = 1.0;
  return ColorDistribution(std::move(w));
}

Color color_from_uniform(double u, const ColorDistribution& d) {
  if (!(u >= 0.0 && u < 1.0)) {
    throw InvalidProbability("color uniform outside [0,1)");
  }
  const auto& w = d.weights();
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] > 0.0) last_positive = i;
    cumulative += w[i];
    if (u < cumulative) return static_cast<Color>(i + 1);
  }
  // Rounding left the total just below u; the top of the support owns it.
  return static_cast<Color>(last_positive + 1);
}

BoundaryTable::BoundaryTable(int q, std::vector<ColorDistribution> entries)
    : q_(q), entries_(std::move(entries)) {
  if (q < 2 || q > kMaxColors) throw InvalidProbability("boundary table needs 2 <= q <= 255");
  if (entries_.size() != static_cast<std::size_t>(q) * static_cast<std::size_t>(q)) {
    throw InvalidArgument("boundary table needs q*q entries");
  }
  for (int k = 1; k <= q; ++k) {
    for (int l = 1; l <= q; ++l) {
      const auto& d = entries_[static_cast<std::size_t>((k - 1) * q + (l - 1))];
      if (d.q() != q) throw InvalidArgument("boundary entry has the wrong number of colors");
      if (k == l && d[static_cast<Color>(k)] != 1.0) {
        throw InvalidProbability("boundary diagonal g_{" + std::to_string(k) + "," +
                                 std::to_string(k) + "} must be a point mass at " +
                                 std::to_string(k));
      }
    }
  }
}

BoundaryTable BoundaryTable::uniform(int q) {
  return from_function(q, [q](Color, Color) { return ColorDistribution::uniform(q); });
}

const ColorDistribution& BoundaryTable::at(Color left, Color right) const {
  if (left < 1 || left > q_ || right < 1 || right > q_) {
    throw InvalidArgument("boundary table index out of range");
  }
  return entries_[static_cast<std::size_t>((left - 1) * q_ + (right - 1))];
}

BoundaryTable BoundaryTable::transposed() const {
  std::vector<ColorDistribution> e;
  e.reserve(entries_.size());
  for (int k = 1; k <= q_; ++k) {
    for (int l = 1; l <= q_; ++l) e.push_back(at(static_cast<Color>(l), static_cast<Color>(k)));
  }
  return BoundaryTable(q_, std::move(e));
}

bool BoundaryTable::symmetric() const { return *this == transposed(); }

void ColoringRule::validate() const {
  if (g.q() != lambda.q() || g.q() != p.q()) {
    throw InvalidArgument("g, lambda and p disagree on the number of colors");
  }
}

Color DagColoring::at(const DagGraph& dag, const Vertex& v) const {
  const auto i = dag.find(v);
  if (!i) throw InvalidArgument("vertex is not in the colored graph");
  return colors[static_cast<std::size_t>(*i)];
}

std::vector<std::optional<Color>> color_leaves(const DagGraph& dag,
                                               const ColorDistribution& lambda,
                                               const ColorDistribution& p) {
  std::vector<std::optional<Color>> out(dag.size());
  for (std::size_t i = 0; i < dag.size(); ++i) {
    const DagNode& n = dag.nodes()[i];
    if (n.kind == VertexKind::TimeZeroLeaf) {
      out[i] = color_from_uniform(n.uniform.value(), lambda);
    } else if (n.kind == VertexKind::KillingLeaf) {
      out[i] = color_from_uniform(n.uniform.value(), p);
    }
  }
  return out;
}

Color internal_color(std::span<const Color> child_colors, std::optional<double> uniform,
                     const BoundaryTable& g) {
  if (child_colors.empty()) throw std::logic_error("internal vertex without children");
  if (child_colors.size() == 1 || child_colors[0] == child_colors[1]) return child_colors[0];
  if (!uniform) throw std::logic_error("disagreeing children at a vertex without a uniform");
  return color_from_uniform(*uniform, g.at(child_colors[0], child_colors[1]));
}

namespace {

DagColoring color_in_order(const DagGraph& dag, const ColoringRule& rule,
                           std::span<const std::int32_t> order) {
  rule.validate();
  const auto leaves = color_leaves(dag, rule.lambda, rule.p);
  DagColoring out{std::vector<Color>(dag.size(), 0)};
  for (std::int32_t i : order) {
    const DagNode& n = dag.node(i);
    const auto ui = static_cast<std::size_t>(i);
    if (is_leaf(n.kind)) {
      out.colors[ui] = *leaves[ui];
      continue;
    }
    std::array<Color, 2> kids{};
    for (std::uint8_t k = 0; k < n.child_count; ++k) {
      kids[k] = out.colors[static_cast<std::size_t>(n.children[k])];
      if (kids[k] == 0) throw InvalidArgument("coloring order visits a parent before its child");
    }
    out.colors[ui] = internal_color({kids.data(), n.child_count}, n.uniform, rule.g);
  }
  return out;
}

}  // namespace

DagColoring color_dag(const DagGraph& dag, const ColoringRule& rule) {
  const auto order = dag.leaves_first_order();
  return color_in_order(dag, rule, order);
}

DagColoring color_dag(const DagGraph& dag, const ColoringRule& rule,
                      std::span<const std::int32_t> order) {
  if (order.size() != dag.size()) throw InvalidArgument("coloring order is not a permutation");
  std::vector<bool> seen(dag.size(), false);
  for (std::int32_t i : order) {
    if (i < 0 || static_cast<std::size_t>(i) >= dag.size() || seen[static_cast<std::size_t>(i)]) {
      throw InvalidArgument("coloring order is not a permutation");
    }
    seen[static_cast<std::size_t>(i)] = true;
  }
  return color_in_order(dag, rule, order);
}

Color color_root_via_reduction(const RootedDag& dag, const ColoringRule& rule,
                               RelevanceMethod method) {
  const Color full = color_dag(dag, rule).root();
  const Color reduced = color_dag(reduce(dag, method), rule).root();
  if (full != reduced) {
    throw std::logic_error("full and reduced graphs give different root colors");
  }
  return full;
}

nlohmann::json to_json(const DagGraph& dag, const DagColoring& coloring) {
  nlohmann::json j = to_json(dag);
  auto& verts = j["vertices"];
  for (std::size_t i = 0; i < dag.size(); ++i) verts[i]["color"] = coloring.colors[i];
  return j;
}

std::string ascii_map(const DagGraph& dag, const DagColoring& coloring) {
  if (dag.size() == 0) return {};
  Window box{dag.root().vertex.x, dag.root().vertex.x, dag.root().vertex.t,
             dag.root().vertex.t};
  for (const auto& n : dag.nodes()) {
    box.x_min = std::min(box.x_min, n.vertex.x);
    box.x_max = std::max(box.x_max, n.vertex.x);
    box.t_min = std::min(box.t_min, n.vertex.t);
    box.t_max = std::max(box.t_max, n.vertex.t);
  }
  const auto width = static_cast<std::size_t>(box.x_max - box.x_min + 1);
  std::vector<std::string> rows(static_cast<std::size_t>(box.t_max - box.t_min + 1),
                                std::string(width, '.'));
  auto glyph = [](Color c) -> char {
    if (c < 10) return static_cast<char>('0' + c);
    if (c < 36) return static_cast<char>('a' + (c - 10));
    return '#';
  };
  for (std::size_t i = 0; i < dag.size(); ++i) {
    const Vertex& v = dag.nodes()[i].vertex;
    rows[static_cast<std::size_t>(box.t_max - v.t)][static_cast<std::size_t>(v.x - box.x_min)] =
        glyph(coloring.colors[i]);
  }
  std::string out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out += "t=" + std::to_string(box.t_max - static_cast<std::int64_t>(r)) + "\t" + rows[r] + "\n";
  }
  return out;
}

}  // namespace vmp
