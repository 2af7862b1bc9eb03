#pragma once

// Diffusive rescaling experiments: schedules of lattice levels, snapping of
// continuum points, interface and separation-point censuses, and cross-level
// comparison of color marginals.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vmp/duality.hpp"

namespace vmp {

/// Levels eps_n with b_n = b eps_n and kappa_n = kappa eps_n^2; g, p and lambda
/// are held fixed across levels.
struct ScalingSchedule {
  std::vector<double> eps;  // strictly decreasing, positive
  double b = 0.0;
  double kappa = 0.0;
  ColoringRule noise;

  /// eps_n = 2^-n for n = first..last.
  static ScalingSchedule dyadic(int first, int last, double b, double kappa, ColoringRule noise);

  std::size_t levels() const noexcept { return eps.size(); }
  double branching(std::size_t n) const { return b * eps.at(n); }
  double killing(std::size_t n) const { return kappa * eps.at(n) * eps.at(n); }
  VmpParams level(std::size_t n) const;
  /// Throws InvalidArgument / InvalidProbability.
  void validate() const;
};

/// Nearest odd vertex to (x/eps, t/eps^2) with time >= 0, among vertices
/// within one lattice unit in each coordinate; ties go to the smaller (x, t).
Vertex snap(double x, double t, double eps);

struct InterfaceCensus {
  /// Boundary between same-parity neighbors x and x+2 is recorded at x+1.
  std::vector<std::int64_t> positions;
  /// Lengths of the intervals between consecutive boundaries, times eps.
  std::vector<double> interval_lengths;
  std::size_t count() const noexcept { return positions.size(); }
};

/// Boundaries of the slice whose position lies in [x_lo, x_hi). Every level
/// thus measures the same length x_hi - x_lo; throws WindowError unless the
/// slice holds the sites on both sides of each such position.
InterfaceCensus interface_census(const ColorSlice& slice, std::int64_t x_lo, std::int64_t x_hi,
                                 double eps = 1.0);

/// Per adjacent pair with midpoint in [x_lo, x_hi): multiplicity 1 when the
/// two one-sided colors agree, 2 otherwise. histogram[m] counts pairs of
/// multiplicity m.
struct MultiplicityHistogram {
  std::array<std::size_t, 3> histogram{};
  std::size_t pairs() const noexcept { return histogram[1] + histogram[2]; }
};
MultiplicityHistogram max_colors_check(const ColorSlice& slice, std::int64_t x_lo,
                                       std::int64_t x_hi);

/// Colors of the sublattice sites of [x_lo, x_hi] at time t, read off the
/// backward net through memoized dual coloring.
template <NetView Net>
ColorSlice dual_slice(const Net& net, const ColoringRule& rule, std::int64_t t,
                      std::int64_t x_lo, std::int64_t x_hi);

/// Branching points z at time t in (S, T), x in [x_lo, x_hi], reachable from
/// the time-S slice, such that the leftmost path from z's left child and the
/// rightmost path from its right child both survive to time T and never meet.
/// Survival and reachability are exact on the lattice. `net` must be
/// forward-oriented and contain [x_lo - (T-S), x_hi + (T-S)] x [S, T].
template <NetView Net>
std::size_t separation_point_census(const Net& net, std::int64_t S, std::int64_t T,
                                    std::int64_t x_lo, std::int64_t x_hi);

/// Throws StateSpaceError when the measured vertex count of a level's window
/// is not within a factor 2 of (x-extent/eps + 2 t-extent/eps^2)(t-extent/eps^2)/2,
/// the box plus its dependence cones on one sublattice.
void check_budget(const Window& window, double x_extent, double t_extent, double eps);

/// Window of the backward net needed to color [x_lo, x_hi] at time t.
Window slice_window(std::int64_t x_lo, std::int64_t x_hi, std::int64_t t);

struct LevelInterfaces {
  double eps;
  std::int64_t time;  // lattice time of the slice
  std::int64_t x_lo;
  std::int64_t x_hi;
  std::vector<std::size_t> counts;  // one per trial
  std::vector<std::size_t> double_sites;
  double mean_interval = 0.0;  // rescaled
};

/// Interface counts of the slice at continuum time t over continuum
/// x in [x_min, x_max], per level and trial. Trial i of level n uses
/// derive_seed(seed, 100 + n, i).
std::vector<LevelInterfaces> interface_experiment(const ScalingSchedule& schedule, double t,
                                                  double x_min, double x_max,
                                                  std::size_t trials, std::uint64_t seed,
                                                  unsigned workers = 1);

struct LevelMarginal {
  double eps;
  std::vector<Vertex> snapped;
  std::vector<ColorTuple> samples;
  JointColorLaw law;
};

struct TvdInterval {
  double tvd;
  double ci_low;
  double ci_high;
};

struct MarginalReport {
  std::vector<LevelMarginal> levels;
  std::vector<TvdInterval> consecutive;  // consecutive[n] compares levels n and n+1

  /// ci_low of each TVD is at most ci_high of the previous one.
  bool non_increasing() const;
};

/// Dual samples at the snapped points per level (trial i of level n uses
/// derive_seed(seed, 200 + n, i)), with percentile bootstrap 95% intervals
/// for consecutive-level TVDs.
MarginalReport marginal_convergence_experiment(const ScalingSchedule& schedule,
                                               std::span<const std::pair<double, double>> points,
                                               std::size_t trials, std::uint64_t seed,
                                               unsigned workers = 1,
                                               std::size_t bootstrap = 400);

/// Per-level separation point counts in the continuum box [x_min, x_max] x
/// (S, T). Trial i of level n uses derive_seed(seed, 300 + n, i).
std::vector<std::vector<std::size_t>> separation_experiment(const ScalingSchedule& schedule,
                                                            double S, double T, double x_min,
                                                            double x_max, std::size_t trials,
                                                            std::uint64_t seed,
                                                            unsigned workers = 1);

/// Two-sample chi-square on integer-valued samples.
ChiSquareResult compare_counts(std::span<const std::size_t> a, std::span<const std::size_t> b);

/// `level,eps,estimate,tvd,ci_low,ci_high`; estimate is the space-separated
/// probability vector over color tuples in lexicographic order.
void write_marginal_csv(std::ostream& os, const MarginalReport& report);
/// Columns: eps, tvd, ci_low, ci_high (one line per consecutive pair).
void write_marginal_dat(std::ostream& os, const MarginalReport& report);
/// `level,eps,mean_count,var_count,mean_interval,double_density`
void write_interface_csv(std::ostream& os, std::span<const LevelInterfaces> levels);

ScalingSchedule schedule_from_json(const nlohmann::json& j, const std::string& path = "$");

// ---------------------------------------------------------------------------

template <NetView Net>
ColorSlice dual_slice(const Net& net, const ColoringRule& rule, std::int64_t t,
                      std::int64_t x_lo, std::int64_t x_hi) {
  NetColorer<Net> colorer(net, rule);
  std::int64_t x = x_lo;
  if (parity_of(Vertex{x, t}) != net.parity()) ++x;
  ColorSlice out{t, x, {}};
  for (; x <= x_hi; x += 2) out.colors.push_back(colorer.color(Vertex{x, t}));
  return out;
}

template <NetView Net>
std::size_t separation_point_census(const Net& net, std::int64_t S, std::int64_t T,
                                    std::int64_t x_lo, std::int64_t x_hi) {
  if (net.orientation() != Orientation::Forward) {
    throw InvalidArgument("separation census needs a forward-oriented net");
  }
  if (!(S < T) || x_lo > x_hi) throw InvalidArgument("separation census needs S < T and a box");
  const std::int64_t lo = x_lo - (T - S);
  const std::int64_t hi = x_hi + (T - S);
  const Window& w = net.window();
  if (lo < w.x_min || hi > w.x_max || S < w.t_min || T > w.t_max) {
    throw WindowError("separation census box plus cones exceeds the net window");
  }
  const auto width = static_cast<std::size_t>(hi - lo + 1);
  const auto rows = static_cast<std::size_t>(T - S + 1);
  auto cell = [&](std::int64_t x, std::int64_t t) {
    return static_cast<std::size_t>(t - S) * width + static_cast<std::size_t>(x - lo);
  };
  auto inside = [&](std::int64_t x) { return x >= lo && x <= hi; };

  std::vector<Arrow> arrow(width * rows, Arrow::None);
  std::vector<std::uint8_t> reach(width * rows, 0), survive(width * rows, 0);
  for (std::int64_t t = S; t <= T; ++t) {
    for (std::int64_t x = lo; x <= hi; ++x) {
      const Vertex v{x, t};
      if (net.contains(v)) arrow[cell(x, t)] = net.outcome(v);
    }
  }
  for (std::int64_t x = lo; x <= hi; ++x) {
    if (net.contains(Vertex{x, S})) reach[cell(x, S)] = 1;
    if (net.contains(Vertex{x, T})) survive[cell(x, T)] = 1;
  }
  for (std::int64_t t = S; t < T; ++t) {
    for (std::int64_t x = lo; x <= hi; ++x) {
      if (!reach[cell(x, t)]) continue;
      const ArrowTargets tg = arrow_targets(Vertex{x, t}, arrow[cell(x, t)], Orientation::Forward);
      for (std::uint8_t c = 0; c < tg.count; ++c) {
        if (inside(tg.to[c].x)) reach[cell(tg.to[c].x, t + 1)] = 1;
      }
    }
  }
  for (std::int64_t t = T - 1; t >= S; --t) {
    for (std::int64_t x = lo; x <= hi; ++x) {
      if (!net.contains(Vertex{x, t})) continue;
      const ArrowTargets tg = arrow_targets(Vertex{x, t}, arrow[cell(x, t)], Orientation::Forward);
      for (std::uint8_t c = 0; c < tg.count; ++c) {
        if (inside(tg.to[c].x) && survive[cell(tg.to[c].x, t + 1)]) survive[cell(x, t)] = 1;
      }
    }
  }
  // Extremal surviving continuation from v; prefer = -1 goes left first.
  auto next_on = [&](std::int64_t x, std::int64_t t, int prefer) -> std::int64_t {
    const ArrowTargets tg = arrow_targets(Vertex{x, t}, arrow[cell(x, t)], Orientation::Forward);
    std::int64_t best = 0;
    bool found = false;
    for (std::uint8_t c = 0; c < tg.count; ++c) {
      const std::int64_t y = tg.to[c].x;
      if (!inside(y) || !survive[cell(y, t + 1)]) continue;
      if (!found || (prefer < 0 ? y < best : y > best)) best = y;
      found = true;
    }
    return best;
  };
  std::size_t count = 0;
  for (std::int64_t t = S + 1; t < T; ++t) {
    for (std::int64_t x = x_lo; x <= x_hi; ++x) {
      if (!net.contains(Vertex{x, t}) || !reach[cell(x, t)]) continue;
      if (arrow[cell(x, t)] != Arrow::Both) continue;
      std::int64_t l = x - 1, r = x + 1;
      if (!survive[cell(l, t + 1)] || !survive[cell(r, t + 1)]) continue;
      bool met = false;
      for (std::int64_t s = t + 1; s < T && !met; ++s) {
        l = next_on(l, s, -1);
        r = next_on(r, s, +1);
        met = l == r;
      }
      if (!met) ++count;
    }
  }
  return count;
}

}  // namespace vmp
