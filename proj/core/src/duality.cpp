#include "vmp/duality.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <boost/math/special_functions/gamma.hpp>

#include "vmp/parallel.hpp"

namespace vmp {

void validate_query_points(std::span<const QueryPoint> points) {
  if (points.empty()) throw InvalidArgument("no query points");
  for (const auto& v : points) {
    if (v.t < 0) throw InvalidArgument("query point with negative time");
    if (parity_of(v) != Parity::Odd) {
      throw InvalidArgument("query point (" + std::to_string(v.x) + ", " + std::to_string(v.t) +
                            ") is not on the odd sublattice");
    }
  }
}

JointColorLaw JointColorLaw::from_samples(std::span<const ColorTuple> samples) {
  if (samples.empty()) throw InvalidArgument("no samples");
  JointColorLaw law(samples.front().size());
  const double mass = 1.0 / static_cast<double>(samples.size());
  for (const auto& s : samples) law.add(s, mass);
  return law;
}

void JointColorLaw::add(const ColorTuple& tuple, double mass) {
  if (tuple.size() != k_) throw InvalidArgument("tuple length differs from the law's k");
  probs_[tuple] += mass;
}

double JointColorLaw::operator()(const ColorTuple& tuple) const {
  const auto it = probs_.find(tuple);
  return it == probs_.end() ? 0.0 : it->second;
}

double JointColorLaw::total() const {
  double s = 0.0;
  for (const auto& [t, p] : probs_) s += p;
  return s;
}

void JointColorLaw::validate(double tol) const {
  for (const auto& [t, p] : probs_) {
    if (p < 0.0) throw InvalidProbability("negative probability in joint law");
  }
  if (std::abs(total() - 1.0) > tol) throw InvalidProbability("joint law does not sum to 1");
}

JointColorLaw JointColorLaw::marginal(std::span<const std::size_t> which) const {
  JointColorLaw out(which.size());
  ColorTuple key(which.size());
  for (const auto& [t, p] : probs_) {
    for (std::size_t i = 0; i < which.size(); ++i) key[i] = t.at(which[i]);
    out.add(key, p);
  }
  return out;
}

double total_variation(const JointColorLaw& a, const JointColorLaw& b) {
  double s = 0.0;
  for (const auto& [t, p] : a.probabilities()) s += std::abs(p - b(t));
  for (const auto& [t, p] : b.probabilities()) {
    if (a.probabilities().count(t) == 0) s += std::abs(p);
  }
  return 0.5 * s;
}

ColorTuple forward_sample(std::span<const QueryPoint> points, const VmpParams& params,
                          std::uint64_t seed) {
  validate_query_points(points);
  const Window w = dependence_window(points);
  const ColorField field = simulate(params, w.x_min, w.x_max, w.t_max, seed, Parity::Odd);
  ColorTuple out;
  out.reserve(points.size());
  for (const auto& v : points) out.push_back(field.at(v));
  return out;
}

ColorTuple dual_sample(std::span<const QueryPoint> points, const VmpParams& params,
                       std::uint64_t seed) {
  validate_query_points(points);
  const LazyNet net(dependence_window(points), params.b, params.kappa, seed,
                    Orientation::Backward, Parity::Odd);
  ColorTuple out;
  out.reserve(points.size());
  for (const auto& v : points) {
    out.push_back(color_root_via_reduction(build_dag(net, v, 0), params.noise));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

using StateMap = std::map<std::vector<Color>, double>;

struct Interval {
  std::int64_t lo;
  std::int64_t hi;
  std::size_t sites() const { return static_cast<std::size_t>((hi - lo) / 2 + 1); }
};

Interval cone_slice(std::span<const QueryPoint> points, std::int64_t s) {
  Interval iv{0, -1};
  bool any = false;
  for (const auto& p : points) {
    if (p.t < s) continue;
    const std::int64_t r = p.t - s;
    if (!any) {
      iv = {p.x - r, p.x + r};
      any = true;
    } else {
      iv.lo = std::min(iv.lo, p.x - r);
      iv.hi = std::max(iv.hi, p.x + r);
    }
  }
  return iv;
}

void check_states(std::size_t q, std::size_t sites, std::size_t max_states) {
  double n = 1.0;
  for (std::size_t i = 0; i < sites; ++i) n *= static_cast<double>(q);
  if (n > static_cast<double>(max_states)) {
    throw StateSpaceError("forward oracle would track " + std::to_string(q) + "^" +
                          std::to_string(sites) + " slice configurations");
  }
}

}  // namespace

JointColorLaw exact_forward_law(std::span<const QueryPoint> points, const VmpParams& params,
                                std::size_t max_states) {
  validate_query_points(points);
  params.validate();
  const std::size_t k = points.size();
  const auto q = static_cast<std::size_t>(params.q());
  std::int64_t t_max = 0;
  for (const auto& p : points) t_max = std::max(t_max, p.t);

  std::vector<std::vector<std::vector<double>>> kernel(q + 1, std::vector<std::vector<double>>(q + 1));
  for (std::size_t l = 1; l <= q; ++l) {
    for (std::size_t r = 1; r <= q; ++r) {
      kernel[l][r] =
          transition_distribution(params, static_cast<Color>(l), static_cast<Color>(r)).weights();
    }
  }

  auto record = [&](std::vector<Color>& key, const Interval& iv, std::int64_t s) {
    for (std::size_t i = 0; i < k; ++i) {
      if (points[i].t == s) key[i] = key[k + static_cast<std::size_t>((points[i].x - iv.lo) / 2)];
    }
  };

  // Initial slice: product of lambda.
  Interval iv = cone_slice(points, 0);
  check_states(q, iv.sites(), max_states);
  StateMap states;
  {
    std::vector<std::pair<std::vector<Color>, double>> partial{{std::vector<Color>(k, 0), 1.0}};
    for (std::size_t i = 0; i < iv.sites(); ++i) {
      std::vector<std::pair<std::vector<Color>, double>> next;
      for (const auto& [key, p] : partial) {
        for (std::size_t c = 1; c <= q; ++c) {
          const double m = params.lambda()[static_cast<Color>(c)];
          if (m == 0.0) continue;
          auto key2 = key;
          key2.push_back(static_cast<Color>(c));
          next.emplace_back(std::move(key2), p * m);
        }
      }
      partial = std::move(next);
    }
    for (auto& [key, p] : partial) {
      record(key, iv, 0);
      states[key] += p;
    }
  }

  for (std::int64_t s = 0; s < t_max; ++s) {
    const Interval nv = cone_slice(points, s + 1);
    check_states(q, nv.sites(), max_states);
    StateMap next_states;
    for (const auto& [key, p] : states) {
      std::vector<std::pair<std::vector<Color>, double>> partial{
          {std::vector<Color>(key.begin(), key.begin() + static_cast<std::ptrdiff_t>(k)), p}};
      for (std::int64_t x = nv.lo; x <= nv.hi; x += 2) {
        const Color left = key[k + static_cast<std::size_t>((x - 1 - iv.lo) / 2)];
        const Color right = key[k + static_cast<std::size_t>((x + 1 - iv.lo) / 2)];
        const auto& law = kernel[left][right];
        std::vector<std::pair<std::vector<Color>, double>> next;
        next.reserve(partial.size() * q);
        for (const auto& [pk, pp] : partial) {
          for (std::size_t c = 1; c <= q; ++c) {
            if (law[c - 1] == 0.0) continue;
            auto key2 = pk;
            key2.push_back(static_cast<Color>(c));
            next.emplace_back(std::move(key2), pp * law[c - 1]);
          }
        }
        partial = std::move(next);
      }
      for (auto& [nk, np] : partial) {
        record(nk, nv, s + 1);
        next_states[nk] += np;
      }
    }
    states = std::move(next_states);
    iv = nv;
  }

  JointColorLaw out(k);
  for (const auto& [key, p] : states) {
    out.add(std::vector<Color>(key.begin(), key.begin() + static_cast<std::ptrdiff_t>(k)), p);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace detail {

JointColorLaw union_color_law(std::vector<UnionNode> nodes, std::span<const QueryPoint> roots,
                              const ColoringRule& rule, std::int64_t horizon) {
  rule.validate();
  std::sort(nodes.begin(), nodes.end(), [](const UnionNode& a, const UnionNode& b) {
    return std::tie(a.vertex.t, a.vertex.x) < std::tie(b.vertex.t, b.vertex.x);
  });
  std::map<Vertex, std::size_t> index;
  for (std::size_t i = 0; i < nodes.size(); ++i) index.emplace(nodes[i].vertex, i);

  const std::size_t n = nodes.size();
  std::vector<std::array<std::int64_t, 2>> kids(n, {-1, -1});
  std::vector<std::uint8_t> kid_count(n, 0);
  std::vector<int> pending_parents(n, 0);
  std::vector<bool> pinned(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (nodes[i].vertex.t == horizon || nodes[i].outcome == Arrow::None) continue;
    const ArrowTargets tg = arrow_targets(nodes[i].vertex, nodes[i].outcome, Orientation::Backward);
    for (std::uint8_t c = 0; c < tg.count; ++c) {
      const auto it = index.find(tg.to[c]);
      if (it == index.end()) throw InvalidArgument("union graph is missing a child vertex");
      kids[i][c] = static_cast<std::int64_t>(it->second);
      ++pending_parents[it->second];
    }
    kid_count[i] = tg.count;
  }
  std::vector<std::size_t> root_nodes;
  for (const auto& r : roots) {
    const auto it = index.find(r);
    if (it == index.end()) throw InvalidArgument("query point is not in the union graph");
    root_nodes.push_back(it->second);
    pinned[it->second] = true;
  }

  // Joint law of the live nodes' colors; slot[i] is node i's position in the key.
  std::vector<std::int64_t> slot(n, -1);
  std::vector<std::size_t> live;
  StateMap states{{{}, 1.0}};
  const auto q = static_cast<std::size_t>(rule.q());
  for (std::size_t i = 0; i < n; ++i) {
    StateMap next;
    for (const auto& [key, p] : states) {
      auto emit = [&](Color c, double m) {
        if (m == 0.0) return;
        auto key2 = key;
        key2.push_back(c);
        next[key2] += p * m;
      };
      auto emit_law = [&](const ColorDistribution& d) {
        for (std::size_t c = 1; c <= q; ++c) emit(static_cast<Color>(c), d[static_cast<Color>(c)]);
      };
      if (nodes[i].vertex.t == horizon) {
        emit_law(rule.lambda);
      } else if (nodes[i].outcome == Arrow::None) {
        emit_law(rule.p);
      } else if (kid_count[i] == 1) {
        emit(key[static_cast<std::size_t>(slot[static_cast<std::size_t>(kids[i][0])])], 1.0);
      } else {
        const Color l = key[static_cast<std::size_t>(slot[static_cast<std::size_t>(kids[i][0])])];
        const Color r = key[static_cast<std::size_t>(slot[static_cast<std::size_t>(kids[i][1])])];
        if (l == r) {
          emit(l, 1.0);
        } else {
          emit_law(rule.g.at(l, r));
        }
      }
    }
    states = std::move(next);
    slot[i] = static_cast<std::int64_t>(live.size());
    live.push_back(i);

    // Drop children whose parents are all processed.
    std::vector<std::size_t> drop;
    for (std::uint8_t c = 0; c < kid_count[i]; ++c) {
      const auto child = static_cast<std::size_t>(kids[i][c]);
      if (--pending_parents[child] == 0 && !pinned[child]) drop.push_back(child);
    }
    if (pending_parents[i] == 0 && !pinned[i]) drop.push_back(i);
    std::sort(drop.begin(), drop.end());
    drop.erase(std::unique(drop.begin(), drop.end()), drop.end());
    if (!drop.empty()) {
      std::vector<bool> remove(live.size(), false);
      for (std::size_t d : drop) remove[static_cast<std::size_t>(slot[d])] = true;
      StateMap reduced;
      for (const auto& [key, p] : states) {
        std::vector<Color> key2;
        key2.reserve(key.size());
        for (std::size_t j = 0; j < key.size(); ++j) {
          if (!remove[j]) key2.push_back(key[j]);
        }
        reduced[key2] += p;
      }
      states = std::move(reduced);
      std::vector<std::size_t> live2;
      for (std::size_t j = 0; j < live.size(); ++j) {
        if (!remove[j]) live2.push_back(live[j]);
      }
      live = std::move(live2);
      for (std::size_t d : drop) slot[d] = -1;
      for (std::size_t j = 0; j < live.size(); ++j) slot[live[j]] = static_cast<std::int64_t>(j);
    }
  }

  JointColorLaw out(roots.size());
  ColorTuple tuple(roots.size());
  for (const auto& [key, p] : states) {
    for (std::size_t r = 0; r < root_nodes.size(); ++r) {
      tuple[r] = key[static_cast<std::size_t>(slot[root_nodes[r]])];
    }
    out.add(tuple, p);
  }
  return out;
}

}  // namespace detail

JointColorLaw exact_dual_law(std::span<const QueryPoint> points, const VmpParams& params,
                             std::size_t max_vertices) {
  validate_query_points(points);
  params.validate();
  {
    std::map<Vertex, bool> cone;
    for (const auto& p : points) {
      for (std::int64_t s = 1; s <= p.t; ++s) {
        for (std::int64_t y = p.x - (p.t - s); y <= p.x + (p.t - s); y += 2) cone[{y, s}] = true;
      }
    }
    if (cone.size() > max_vertices) {
      throw StateSpaceError("dual oracle cone holds " + std::to_string(cone.size()) +
                            " vertices, more than the limit of " + std::to_string(max_vertices));
    }
  }

  const std::array<std::pair<Arrow, double>, 4> outcomes{{{Arrow::LeftOnly, params.w / 2},
                                                          {Arrow::RightOnly, params.w / 2},
                                                          {Arrow::Both, params.b},
                                                          {Arrow::None, params.kappa}}};
  JointColorLaw mixture(points.size());
  std::function<void(std::vector<Vertex>, std::map<Vertex, Arrow>, double)> expand =
      [&](std::vector<Vertex> stack, std::map<Vertex, Arrow> assigned, double prob) {
        while (!stack.empty()) {
          const Vertex v = stack.back();
          stack.pop_back();
          if (assigned.count(v) != 0) continue;
          if (v.t == 0) {
            assigned.emplace(v, Arrow::None);
            continue;
          }
          for (const auto& [a, pa] : outcomes) {
            if (pa == 0.0) continue;
            auto assigned2 = assigned;
            assigned2.emplace(v, a);
            auto stack2 = stack;
            const ArrowTargets tg = arrow_targets(v, a, Orientation::Backward);
            for (std::uint8_t c = 0; c < tg.count; ++c) stack2.push_back(tg.to[c]);
            expand(std::move(stack2), std::move(assigned2), prob * pa);
          }
          return;
        }
        std::vector<detail::UnionNode> nodes;
        nodes.reserve(assigned.size());
        for (const auto& [v, a] : assigned) nodes.push_back({v, a});
        const JointColorLaw law = detail::union_color_law(std::move(nodes), points, params.noise);
        for (const auto& [t, p] : law.probabilities()) mixture.add(t, prob * p);
      };
  expand(std::vector<Vertex>(points.begin(), points.end()), {}, 1.0);
  return mixture;
}

JointColorLaw sampled_dual_law(std::span<const QueryPoint> points, const VmpParams& params,
                               std::size_t fields, std::uint64_t seed) {
  validate_query_points(points);
  if (fields == 0) throw InvalidArgument("sampled dual law needs at least one field");
  const Window w = dependence_window(points);
  JointColorLaw mixture(points.size());
  for (std::size_t i = 0; i < fields; ++i) {
    const LazyNet net(w, params.b, params.kappa, derive_seed(seed, 3, i), Orientation::Backward,
                      Parity::Odd);
    const JointColorLaw law = conditional_dual_law(net, points, params.noise);
    for (const auto& [t, p] : law.probabilities()) mixture.add(t, p / static_cast<double>(fields));
  }
  return mixture;
}

// ---------------------------------------------------------------------------

std::map<ColorTuple, std::size_t> tally(std::span<const ColorTuple> samples) {
  std::map<ColorTuple, std::size_t> out;
  for (const auto& s : samples) ++out[s];
  return out;
}

ChiSquareResult chi_square_from_pairs(std::span<const std::pair<double, double>> categories) {
  ChiSquareResult r;
  double n1 = 0.0, n2 = 0.0;
  for (const auto& [a, b] : categories) {
    n1 += a;
    n2 += b;
  }
  if (n1 == 0.0 || n2 == 0.0) throw InvalidArgument("chi-square needs two non-empty samples");
  r.n1 = static_cast<std::size_t>(n1);
  r.n2 = static_cast<std::size_t>(n2);
  const double n = n1 + n2;
  double tvd = 0.0;
  std::vector<std::pair<double, double>> bins;
  std::pair<double, double> rest{0.0, 0.0};
  bool have_rest = false;
  for (const auto& c : categories) {
    tvd += std::abs(c.first / n1 - c.second / n2);
    const double total = c.first + c.second;
    if (std::min(n1, n2) * total / n >= 5.0) {
      bins.push_back(c);
    } else {
      rest.first += c.first;
      rest.second += c.second;
      have_rest = true;
    }
  }
  r.tvd = 0.5 * tvd;
  if (have_rest) {
    if (std::min(n1, n2) * (rest.first + rest.second) / n >= 5.0 || bins.empty()) {
      bins.push_back(rest);
    } else {
      auto smallest = std::min_element(bins.begin(), bins.end(), [](const auto& x, const auto& y) {
        return x.first + x.second < y.first + y.second;
      });
      smallest->first += rest.first;
      smallest->second += rest.second;
    }
  }
  r.categories = bins.size();
  if (bins.size() < 2) return r;
  for (const auto& [o1, o2] : bins) {
    const double total = o1 + o2;
    const double e1 = n1 * total / n;
    const double e2 = n2 * total / n;
    r.statistic += (o1 - e1) * (o1 - e1) / e1 + (o2 - e2) * (o2 - e2) / e2;
  }
  r.dof = static_cast<int>(bins.size()) - 1;
  r.p_value = boost::math::gamma_q(0.5 * r.dof, 0.5 * r.statistic);
  return r;
}

ChiSquareResult two_sample_chi_square(const std::map<ColorTuple, std::size_t>& a,
                                      const std::map<ColorTuple, std::size_t>& b) {
  std::map<ColorTuple, std::pair<double, double>> joint;
  for (const auto& [t, c] : a) joint[t].first += static_cast<double>(c);
  for (const auto& [t, c] : b) joint[t].second += static_cast<double>(c);
  std::vector<std::pair<double, double>> categories;
  categories.reserve(joint.size());
  for (const auto& [t, c] : joint) categories.push_back(c);
  return chi_square_from_pairs(categories);
}

std::vector<ColorTuple> forward_samples(std::span<const QueryPoint> points,
                                        const VmpParams& params, std::size_t n,
                                        std::uint64_t seed, std::uint64_t stream,
                                        unsigned workers) {
  validate_query_points(points);
  return parallel_map<ColorTuple>(n, workers, [&](std::size_t i) {
    return forward_sample(points, params, derive_seed(seed, stream, i));
  });
}

std::vector<ColorTuple> dual_samples(std::span<const QueryPoint> points,
                                     const VmpParams& params, std::size_t n,
                                     std::uint64_t seed, std::uint64_t stream,
                                     unsigned workers) {
  validate_query_points(points);
  return parallel_map<ColorTuple>(n, workers, [&](std::size_t i) {
    return dual_sample(points, params, derive_seed(seed, stream, i));
  });
}

GofReport duality_gof_test(const std::string& setting, std::span<const QueryPoint> points,
                           const VmpParams& forward, const VmpParams& dual, std::size_t trials,
                           std::uint64_t seed, unsigned workers) {
  const auto fwd = forward_samples(points, forward, trials, seed, kForwardStream, workers);
  const auto dl = dual_samples(points, dual, trials, seed, kDualStream, workers);
  return GofReport{setting, two_sample_chi_square(tally(fwd), tally(dl))};
}

nlohmann::json to_json(const GofReport& report) {
  return nlohmann::json{{"setting", report.setting},   {"statistic", report.test.statistic},
                        {"dof", report.test.dof},       {"p_value", report.test.p_value},
                        {"tvd", report.test.tvd},       {"n", report.test.n1}};
}

}  // namespace vmp
