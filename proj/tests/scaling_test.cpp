#include <cmath>
#include <sstream>

#include <doctest.h>

#include "support.hpp"
#include "vmp/scaling.hpp"

using namespace vmp;

namespace {

ColoringRule uniform_rule(int q) {
  return ColoringRule{BoundaryTable::uniform(q), ColorDistribution::uniform(q),
                      ColorDistribution::uniform(q)};
}

/// Separation points by definition on a materialized forward field: survival
/// and reachability by plain recursion, then the two extremal surviving
/// paths walked side by side.
std::size_t separation_by_definition(const ArrowField& f, std::int64_t S, std::int64_t T,
                                     std::int64_t x_lo, std::int64_t x_hi) {
  const std::int64_t lo = x_lo - (T - S), hi = x_hi + (T - S);
  auto in_box = [&](const Vertex& v) { return v.x >= lo && v.x <= hi && f.contains(v); };
  std::map<Vertex, bool> survive_memo;
  std::function<bool(const Vertex&)> survives = [&](const Vertex& v) -> bool {
    if (!in_box(v)) return false;
    if (v.t == T) return true;
    if (auto it = survive_memo.find(v); it != survive_memo.end()) return it->second;
    bool ok = false;
    const ArrowTargets tg = arrow_targets(v, f.outcome(v), Orientation::Forward);
    for (std::uint8_t k = 0; k < tg.count; ++k) ok = ok || survives(tg.to[k]);
    return survive_memo[v] = ok;
  };
  std::set<Vertex> reached;
  std::vector<Vertex> frontier;
  for (std::int64_t x = lo; x <= hi; ++x) {
    if (in_box(Vertex{x, S})) frontier.push_back(Vertex{x, S});
  }
  while (!frontier.empty()) {
    const Vertex v = frontier.back();
    frontier.pop_back();
    if (!reached.insert(v).second || v.t == T) continue;
    const ArrowTargets tg = arrow_targets(v, f.outcome(v), Orientation::Forward);
    for (std::uint8_t k = 0; k < tg.count; ++k) {
      if (in_box(tg.to[k])) frontier.push_back(tg.to[k]);
    }
  }
  auto step = [&](const Vertex& v, bool leftmost) {
    const ArrowTargets tg = arrow_targets(v, f.outcome(v), Orientation::Forward);
    std::optional<Vertex> best;
    for (std::uint8_t k = 0; k < tg.count; ++k) {
      if (!survives(tg.to[k])) continue;
      if (!best || (leftmost ? tg.to[k].x < best->x : tg.to[k].x > best->x)) best = tg.to[k];
    }
    return *best;
  };
  std::size_t count = 0;
  for (const Vertex& z : reached) {
    if (z.t <= S || z.t >= T || z.x < x_lo || z.x > x_hi) continue;
    if (f.outcome(z) != Arrow::Both) continue;
    Vertex l{z.x - 1, z.t + 1}, r{z.x + 1, z.t + 1};
    if (!survives(l) || !survives(r)) continue;
    bool met = false;
    while (l.t < T && !met) {
      l = step(l, true);
      r = step(r, false);
      met = l == r;
    }
    count += !met;
  }
  return count;
}

}  // namespace

TEST_SUITE("scaling") {

TEST_CASE("snapping continuum points") {
  CHECK(snap(0.0, 0.0, 1.0) == Vertex{-1, 0});
  CHECK(snap(0.5, 1.0, 0.5) == Vertex{1, 4});
  SplitMix64 rng(6);
  for (int i = 0; i < 2000; ++i) {
    const double x = 4.0 * rng.uniform() - 2.0;
    const double t = 2.0 * rng.uniform();
    for (double eps : {0.25, 0.0625, 0.01}) {
      const Vertex v = snap(x, t, eps);
      REQUIRE(parity_of(v) == Parity::Odd);
      REQUIRE(std::abs(eps * v.x - x) <= eps + 1e-12);
      REQUIRE(std::abs(eps * eps * v.t - t) <= eps * eps + 1e-12);
    }
  }
  CHECK_THROWS_AS(snap(0.0, -1.0, 0.5), InvalidArgument);
  CHECK_THROWS_AS(snap(0.0, 1.0, 0.0), InvalidArgument);
}

TEST_CASE("schedules rescale branching and killing") {
  const ScalingSchedule s = ScalingSchedule::dyadic(2, 6, 1.5, 3.0, uniform_rule(3));
  REQUIRE(s.levels() == 5);
  for (std::size_t n = 0; n < s.levels(); ++n) {
    CHECK(s.eps[n] == std::ldexp(1.0, -static_cast<int>(n) - 2));
    CHECK(s.branching(n) / s.eps[n] == 1.5);
    CHECK(s.killing(n) / (s.eps[n] * s.eps[n]) == 3.0);
    const VmpParams p = s.level(n);
    CHECK(p.w + p.b + p.kappa == doctest::Approx(1.0).epsilon(1e-15));
  }
  ScalingSchedule bad = s;
  bad.eps = {0.25, 0.5};
  CHECK_THROWS(bad.validate());
  CHECK_THROWS(ScalingSchedule::dyadic(0, 2, 3.0, 0.0, uniform_rule(2)).validate());
}

TEST_CASE("interface census on hand slices") {
  SUBCASE("monochrome") {
    const ColorSlice s{1, 0, std::vector<Color>(8, 3)};
    CHECK(interface_census(s, 1, 14).count() == 0);
  }
  SUBCASE("alternating colors") {
    const ColorSlice s{1, 0, {1, 2, 1, 2, 1, 2, 1, 2}};  // sites 0..14
    const InterfaceCensus c = interface_census(s, 1, 14, 0.5);
    CHECK(c.positions == std::vector<std::int64_t>{1, 3, 5, 7, 9, 11, 13});
    CHECK(c.interval_lengths == std::vector<double>(6, 1.0));
  }
  SUBCASE("two boundaries") {
    const ColorSlice s{1, 0, {1, 1, 2, 2, 2, 3}};  // sites 0..10
    const InterfaceCensus c = interface_census(s, 1, 10);
    CHECK(c.positions == std::vector<std::int64_t>{3, 9});
    CHECK(c.interval_lengths == std::vector<double>{6.0});
    // Position 9 falls outside [1, 9).
    CHECK(interface_census(s, 1, 9).positions == std::vector<std::int64_t>{3});
  }
  SUBCASE("the slice must cover the window") {
    const ColorSlice s{1, 0, {1, 1, 2}};
    CHECK_THROWS_AS(interface_census(s, 1, 10), WindowError);
  }
}

TEST_CASE("every level censuses the same length") {
  // [x_lo, x_hi) holds exactly x_hi - x_lo positions of either parity class.
  for (std::int64_t t : {0, 1, 2, 3}) {
    for (std::int64_t x_lo : {-3, -2, 0, 1}) {
      const std::int64_t x_hi = x_lo + 16;
      std::int64_t first = x_lo - 1;
      if (parity_of(Vertex{first, t}) != Parity::Odd) ++first;
      ColorSlice s{t, first, {}};
      for (std::int64_t x = first; x <= x_hi + 1; x += 2) s.colors.push_back(static_cast<Color>(1 + ((x - first) / 2) % 2));
      CHECK(interface_census(s, x_lo, x_hi).count() == 8);
    }
  }
}

TEST_CASE("multiplicity histogram") {
  const ColorSlice s{1, 0, {1, 1, 2, 2, 3, 3}};  // pairs at 1, 3, 5, 7, 9
  const MultiplicityHistogram h = max_colors_check(s, 1, 10);
  CHECK(h.histogram[1] == 3);
  CHECK(h.histogram[2] == 2);
  CHECK(h.pairs() == 5);
}

TEST_CASE("dual slice equals the forward slice path by path") {
  for (const VmpParams& p : {potts_params(0.7, 3), potts_params(2.0, 2)}) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const std::int64_t t = 9, x_lo = -6, x_hi = 7;
      const Window w = slice_window(x_lo, x_hi, t);
      const ColorField fwd = simulate(p, w.x_min, w.x_max, t, seed);
      const LazyNet net(w, p.b, p.kappa, seed, Orientation::Backward);
      const ColorSlice dual = dual_slice(net, p.noise, t, x_lo, x_hi);
      const ColorSlice& last = fwd.at_time(t);
      for (std::size_t i = 0; i < dual.colors.size(); ++i) {
        const std::int64_t x = dual.x_min + 2 * static_cast<std::int64_t>(i);
        REQUIRE(dual.colors[i] == last.at(x));
      }
    }
  }
}

TEST_CASE("separation census") {
  SUBCASE("no branching, no separation points") {
    const LazyNet net(Window{-40, 40, 0, 30}, 0.0, 0.2, 1, Orientation::Forward);
    CHECK(separation_point_census(net, 2, 30, -5, 5) == 0);
  }
  SUBCASE("certain killing leaves nothing to separate") {
    const LazyNet net(Window{-40, 40, 0, 30}, 0.0, 1.0, 1, Orientation::Forward);
    CHECK(separation_point_census(net, 2, 30, -5, 5) == 0);
  }
  SUBCASE("agrees with the definition on random fields") {
    std::size_t total = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const double b = 0.05 + 0.4 * static_cast<double>(seed % 5) / 4.0;
      const double kappa = 0.02 * static_cast<double>(seed % 3);
      const ArrowField f = sample_arrow_field(Window{-30, 30, 0, 22}, b, kappa, seed);
      const std::size_t got = separation_point_census(f, 2, 22, -6, 6);
      REQUIRE(got == separation_by_definition(f, 2, 22, -6, 6));
      total += got;
    }
    CHECK(total > 0);
  }
  SUBCASE("guards") {
    const LazyNet small(Window{-5, 5, 0, 10}, 0.3, 0.0, 1, Orientation::Forward);
    CHECK_THROWS_AS(separation_point_census(small, 0, 10, -2, 2), WindowError);
    const LazyNet backward(Window{-40, 40, 0, 30}, 0.3, 0.0, 1, Orientation::Backward);
    CHECK_THROWS_AS(separation_point_census(backward, 0, 10, -2, 2), InvalidArgument);
  }
}

TEST_CASE("budget guard") {
  const double eps = 0.125;
  const Window w = slice_window(-1, 9, 32);  // box [0, 1] x [0, 0.5]
  CHECK_NOTHROW(check_budget(w, 1.0, 0.5, eps));
  CHECK_THROWS_AS(check_budget(slice_window(-1, 9, 320), 1.0, 0.5, eps), StateSpaceError);
}

TEST_CASE("pure voter keeps the initial one-point marginal at every level") {
  const ColorDistribution lambda({0.6, 0.3, 0.1});
  const ScalingSchedule s = ScalingSchedule::dyadic(
      2, 4, 0.0, 0.0, ColoringRule{BoundaryTable::uniform(3), lambda, ColorDistribution::uniform(3)});
  const std::array<std::pair<double, double>, 1> pts{{{0.0, 0.5}}};
  const std::size_t n = 20000;
  const MarginalReport r = marginal_convergence_experiment(s, pts, n, 5, 1, 50);
  for (const LevelMarginal& level : r.levels) {
    for (Color c = 1; c <= 3; ++c) {
      const double got = level.law({c});
      CHECK(std::abs(got - lambda[c]) <= 4.0 * std::sqrt(lambda[c] * (1.0 - lambda[c]) / n));
    }
  }
}

TEST_CASE("strong killing drives the marginal to p") {
  SUBCASE("exact small-t oracle") {
    // Without branching the dual is one path, killed at each of its t
    // vertices above time 0 with probability kappa.
    const ColorDistribution lambda({0.7, 0.2, 0.1}), p({0.1, 0.1, 0.8});
    const VmpParams params = VmpParams::make(0.0, 0.4, BoundaryTable::uniform(3), p, lambda);
    for (std::int64_t t = 1; t <= 4; ++t) {
      const std::vector<QueryPoint> pt{{t % 2 == 0 ? 1 : 0, t}};
      const JointColorLaw law = exact_dual_law(pt, params);
      const double survive = std::pow(0.6, static_cast<double>(t));
      for (Color c = 1; c <= 3; ++c) {
        CHECK(law({c}) == doctest::Approx((1.0 - survive) * p[c] + survive * lambda[c]).epsilon(1e-12));
      }
    }
  }
  SUBCASE("all levels") {
    const ColorDistribution lambda({0.7, 0.2, 0.1}), p({0.1, 0.1, 0.8});
    const ScalingSchedule s =
        ScalingSchedule::dyadic(3, 5, 0.0, 20.0, ColoringRule{BoundaryTable::uniform(3), lambda, p});
    const std::array<std::pair<double, double>, 1> pts{{{0.0, 0.5}}};
    const MarginalReport r = marginal_convergence_experiment(s, pts, 10000, 8, 1, 50);
    for (const LevelMarginal& level : r.levels) {
      JointColorLaw target(1);
      for (Color c = 1; c <= 3; ++c) target.add({c}, p[c]);
      CHECK(total_variation(level.law, target) <= 0.02);
    }
  }
}

TEST_CASE("two-color marginals settle as the scale shrinks") {
  const ScalingSchedule s = ScalingSchedule::dyadic(
      2, 6, 1.5, 3.0,
      ColoringRule{BoundaryTable::uniform(2), ColorDistribution({0.8, 0.2}), ColorDistribution::uniform(2)});
  const std::array<std::pair<double, double>, 1> pts{{{0.0, 0.5}}};
  const MarginalReport r = marginal_convergence_experiment(s, pts, 4000, 42, 1, 200);
  REQUIRE(r.consecutive.size() == 4);
  for (const TvdInterval& i : r.consecutive) {
    MESSAGE("tvd " << i.tvd << " [" << i.ci_low << ", " << i.ci_high << "]");
    CHECK(i.ci_low <= i.tvd);
    CHECK(i.tvd <= i.ci_high);
  }
  CHECK(r.non_increasing());
}

TEST_CASE("interface experiment") {
  SUBCASE("a point-mass initial law without noise has no interfaces") {
    const ScalingSchedule s = ScalingSchedule::dyadic(
        2, 4, 0.0, 0.0,
        ColoringRule{BoundaryTable::uniform(3), ColorDistribution::point_mass(3, 2),
                     ColorDistribution::uniform(3)});
    for (const LevelInterfaces& level : interface_experiment(s, 0.5, 0.0, 1.0, 20, 1)) {
      for (std::size_t c : level.counts) CHECK(c == 0);
    }
  }
  SUBCASE("worker count does not change the counts") {
    const ScalingSchedule s = ScalingSchedule::dyadic(2, 4, 1.5, 3.0, uniform_rule(3));
    const auto one = interface_experiment(s, 0.5, 0.0, 1.0, 40, 9, 1);
    const auto four = interface_experiment(s, 0.5, 0.0, 1.0, 40, 9, 4);
    REQUIRE(one.size() == 3);
    for (std::size_t n = 0; n < one.size(); ++n) {
      CHECK(one[n].counts == four[n].counts);
      CHECK(one[n].double_sites == four[n].double_sites);
      CHECK(one[n].x_hi - one[n].x_lo == static_cast<std::int64_t>(std::llround(1.0 / one[n].eps)));
    }
    std::ostringstream os;
    write_interface_csv(os, one);
    CHECK(os.str().rfind("level,eps,mean_count,var_count,mean_interval,double_density\n", 0) == 0);
  }
}

TEST_CASE("separation counts settle as the scale shrinks") {
  // At these coarse levels the mean count still grows by a visible
  // discretization bias, but by less at each refinement.
  const ScalingSchedule s = ScalingSchedule::dyadic(2, 4, 1.0, 1.0, uniform_rule(2));
  const auto counts = separation_experiment(s, 0.25, 0.75, 0.0, 1.0, 1000, 3);
  REQUIRE(counts.size() == 3);
  std::vector<double> mean;
  for (const auto& c : counts) {
    double sum = 0.0;
    for (std::size_t v : c) sum += static_cast<double>(v);
    mean.push_back(sum / static_cast<double>(c.size()));
    MESSAGE("mean count " << mean.back());
  }
  CHECK(mean[0] > 0.0);
  CHECK(mean[1] > mean[0]);
  CHECK(mean[2] > mean[1]);
  CHECK(mean[2] - mean[1] < mean[1] - mean[0]);
}

TEST_CASE("count comparison") {
  const std::vector<std::size_t> a{0, 1, 1, 2, 2, 2, 3, 3, 3, 3};
  CHECK(compare_counts(a, a).p_value == 1.0);
}

TEST_CASE("schedule config") {
  const nlohmann::json j = {{"eps", {0.25, 0.125}}, {"b", 1.0}, {"kappa", 2.0}, {"q", 3}};
  const ScalingSchedule s = schedule_from_json(j);
  CHECK(s.levels() == 2);
  CHECK(s.killing(1) == doctest::Approx(2.0 / 64));
  nlohmann::json bad = j;
  bad["b"] = "fast";
  CHECK_THROWS_WITH_AS(schedule_from_json(bad), doctest::Contains("$.b"), ParseError);
}

}  // TEST_SUITE
