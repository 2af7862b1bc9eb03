#include "vmp/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

#include "vmp/config.hpp"
#include "vmp/parallel.hpp"

namespace vmp {

ScalingSchedule ScalingSchedule::dyadic(int first, int last, double b, double kappa,
                                        ColoringRule noise) {
  if (first > last) throw InvalidArgument("dyadic schedule needs first <= last");
  ScalingSchedule s;
  for (int n = first; n <= last; ++n) s.eps.push_back(std::ldexp(1.0, -n));
  s.b = b;
  s.kappa = kappa;
  s.noise = std::move(noise);
  s.validate();
  return s;
}

VmpParams ScalingSchedule::level(std::size_t n) const {
  return VmpParams::make(branching(n), killing(n), noise.g, noise.p, noise.lambda);
}

void ScalingSchedule::validate() const {
  if (eps.empty()) throw InvalidArgument("schedule has no levels");
  if (!(b >= 0.0) || !(kappa >= 0.0)) throw InvalidProbability("b and kappa must be non-negative");
  for (std::size_t n = 0; n < eps.size(); ++n) {
    if (!(eps[n] > 0.0)) throw InvalidArgument("eps levels must be positive");
    if (n > 0 && !(eps[n] < eps[n - 1])) throw InvalidArgument("eps levels must decrease");
    validate_branch_kill(branching(n), killing(n));
  }
  noise.validate();
}

Vertex snap(double x, double t, double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("snap needs eps > 0");
  if (!(t >= 0.0)) throw InvalidArgument("snap needs t >= 0");
  const double X = x / eps;
  const double T = t / (eps * eps);
  const auto x_lo = static_cast<std::int64_t>(std::ceil(X - 1.0));
  const auto x_hi = static_cast<std::int64_t>(std::floor(X + 1.0));
  const auto t_lo = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(T - 1.0)));
  const auto t_hi = static_cast<std::int64_t>(std::floor(T + 1.0));
  Vertex best{};
  double best_d = std::numeric_limits<double>::infinity();
  for (std::int64_t xi = x_lo; xi <= x_hi; ++xi) {
    for (std::int64_t ti = t_lo; ti <= t_hi; ++ti) {
      const Vertex v{xi, ti};
      if (parity_of(v) != Parity::Odd) continue;
      const double dx = static_cast<double>(xi) - X;
      const double dt = static_cast<double>(ti) - T;
      const double d = dx * dx + dt * dt;
      // Candidates are visited in lexicographic order, so strict < keeps the
      // smallest on ties.
      if (d < best_d) {
        best_d = d;
        best = v;
      }
    }
  }
  return best;
}

namespace {

/// First and last site whose pair midpoint lies in [x_lo, x_hi).
std::pair<std::int64_t, std::int64_t> census_sites(const ColorSlice& slice, std::int64_t x_lo,
                                                   std::int64_t x_hi) {
  std::int64_t first = x_lo - 1;
  if (parity_of(Vertex{first, slice.t}) != slice.parity()) ++first;
  // Pairs (x, x+2) with x+1 < x_hi end at or before x_hi.
  std::int64_t last = x_hi;
  if (parity_of(Vertex{last, slice.t}) != slice.parity()) --last;
  if (last - 2 < first) return {first, first};
  if (!slice.contains(first) || !slice.contains(last)) {
    throw WindowError("slice does not cover the census range");
  }
  return {first, last};
}

}  // namespace

InterfaceCensus interface_census(const ColorSlice& slice, std::int64_t x_lo, std::int64_t x_hi,
                                 double eps) {
  InterfaceCensus out;
  const auto [first, last] = census_sites(slice, x_lo, x_hi);
  for (std::int64_t x = first; x + 2 <= last; x += 2) {
    if (slice.at(x) != slice.at(x + 2)) out.positions.push_back(x + 1);
  }
  for (std::size_t i = 1; i < out.positions.size(); ++i) {
    out.interval_lengths.push_back(eps *
                                   static_cast<double>(out.positions[i] - out.positions[i - 1]));
  }
  return out;
}

MultiplicityHistogram max_colors_check(const ColorSlice& slice, std::int64_t x_lo,
                                       std::int64_t x_hi) {
  MultiplicityHistogram h;
  const auto [first, last] = census_sites(slice, x_lo, x_hi);
  for (std::int64_t x = first; x + 2 <= last; x += 2) {
    ++h.histogram[slice.at(x) == slice.at(x + 2) ? 1 : 2];
  }
  return h;
}

Window slice_window(std::int64_t x_lo, std::int64_t x_hi, std::int64_t t) {
  return Window{x_lo - t, x_hi + t, 0, t};
}

void check_budget(const Window& window, double x_extent, double t_extent, double eps) {
  const double steps = t_extent / (eps * eps);
  const double expected = (x_extent / eps + 2.0 * steps) * steps / 2.0;
  const double measured = static_cast<double>(sublattice_size(window, Parity::Odd));
  if (expected <= 0.0 || measured > 2.0 * expected || measured < 0.5 * expected) {
    throw StateSpaceError("level window holds " + std::to_string(measured) +
                          " vertices, expected about " + std::to_string(expected));
  }
}

std::vector<LevelInterfaces> interface_experiment(const ScalingSchedule& schedule, double t,
                                                  double x_min, double x_max,
                                                  std::size_t trials, std::uint64_t seed,
                                                  unsigned workers) {
  schedule.validate();
  if (!(x_min < x_max)) throw InvalidArgument("interface experiment needs x_min < x_max");
  std::vector<LevelInterfaces> out;
  for (std::size_t n = 0; n < schedule.levels(); ++n) {
    const double eps = schedule.eps[n];
    LevelInterfaces level;
    level.eps = eps;
    level.time = snap(x_min, t, eps).t;
    level.x_lo = static_cast<std::int64_t>(std::ceil(x_min / eps));
    level.x_hi = static_cast<std::int64_t>(std::floor(x_max / eps));
    const Window window = slice_window(level.x_lo - 1, level.x_hi + 1, level.time);
    check_budget(window, x_max - x_min, t, eps);
    const double b = schedule.branching(n);
    const double kappa = schedule.killing(n);
    struct Trial {
      std::size_t count = 0;
      std::size_t doubles = 0;
      double length_sum = 0.0;
      std::size_t lengths = 0;
    };
    const auto results = parallel_map<Trial>(trials, workers, [&](std::size_t i) {
      const LazyNet net(window, b, kappa, derive_seed(seed, 100 + n, i), Orientation::Backward,
                        Parity::Odd);
      const ColorSlice slice =
          dual_slice(net, schedule.noise, level.time, level.x_lo - 1, level.x_hi + 1);
      const InterfaceCensus census = interface_census(slice, level.x_lo, level.x_hi, eps);
      Trial r;
      r.count = census.count();
      r.doubles = max_colors_check(slice, level.x_lo, level.x_hi).histogram[2];
      for (double len : census.interval_lengths) r.length_sum += len;
      r.lengths = census.interval_lengths.size();
      return r;
    });
    double length_sum = 0.0;
    std::size_t lengths = 0;
    for (const Trial& r : results) {
      level.counts.push_back(r.count);
      level.double_sites.push_back(r.doubles);
      length_sum += r.length_sum;
      lengths += r.lengths;
    }
    level.mean_interval = lengths == 0 ? 0.0 : length_sum / static_cast<double>(lengths);
    out.push_back(std::move(level));
  }
  return out;
}

bool MarginalReport::non_increasing() const {
  for (std::size_t i = 1; i < consecutive.size(); ++i) {
    if (consecutive[i].ci_low > consecutive[i - 1].ci_high) return false;
  }
  return true;
}

namespace {

double sample_tvd(std::span<const ColorTuple> a, std::span<const std::size_t> ia,
                  std::span<const ColorTuple> b, std::span<const std::size_t> ib) {
  std::map<ColorTuple, std::pair<double, double>> joint;
  for (std::size_t i : ia) joint[a[i]].first += 1.0;
  for (std::size_t i : ib) joint[b[i]].second += 1.0;
  double s = 0.0;
  const double na = static_cast<double>(ia.size());
  const double nb = static_cast<double>(ib.size());
  for (const auto& [t, c] : joint) s += std::abs(c.first / na - c.second / nb);
  return 0.5 * s;
}

double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

MarginalReport marginal_convergence_experiment(const ScalingSchedule& schedule,
                                               std::span<const std::pair<double, double>> points,
                                               std::size_t trials, std::uint64_t seed,
                                               unsigned workers, std::size_t bootstrap) {
  schedule.validate();
  if (points.empty()) throw InvalidArgument("no continuum points");
  if (trials == 0) throw InvalidArgument("marginal experiment needs trials");
  MarginalReport report;
  for (std::size_t n = 0; n < schedule.levels(); ++n) {
    LevelMarginal level;
    level.eps = schedule.eps[n];
    for (const auto& [x, t] : points) level.snapped.push_back(snap(x, t, level.eps));
    const VmpParams params = schedule.level(n);
    level.samples = parallel_map<ColorTuple>(trials, workers, [&](std::size_t i) {
      return dual_sample(level.snapped, params, derive_seed(seed, 200 + n, i));
    });
    level.law = JointColorLaw::from_samples(level.samples);
    report.levels.push_back(std::move(level));
  }
  std::vector<std::size_t> identity(trials);
  for (std::size_t i = 0; i < trials; ++i) identity[i] = i;
  for (std::size_t n = 0; n + 1 < report.levels.size(); ++n) {
    const auto& a = report.levels[n].samples;
    const auto& b = report.levels[n + 1].samples;
    TvdInterval iv{sample_tvd(a, identity, b, identity), 0.0, 0.0};
    SplitMix64 rng(derive_seed(seed, 400 + n, 0));
    std::vector<double> boot;
    boot.reserve(bootstrap);
    std::vector<std::size_t> ia(trials), ib(trials);
    for (std::size_t r = 0; r < bootstrap; ++r) {
      for (auto& i : ia) i = static_cast<std::size_t>(rng.below(trials));
      for (auto& i : ib) i = static_cast<std::size_t>(rng.below(trials));
      boot.push_back(sample_tvd(a, ia, b, ib));
    }
    if (!boot.empty()) {
      iv.ci_low = percentile(boot, 0.025);
      iv.ci_high = percentile(boot, 0.975);
    } else {
      iv.ci_low = iv.ci_high = iv.tvd;
    }
    report.consecutive.push_back(iv);
  }
  return report;
}

std::vector<std::vector<std::size_t>> separation_experiment(const ScalingSchedule& schedule,
                                                            double S, double T, double x_min,
                                                            double x_max, std::size_t trials,
                                                            std::uint64_t seed,
                                                            unsigned workers) {
  schedule.validate();
  if (!(S >= 0.0 && S < T)) throw InvalidArgument("separation experiment needs 0 <= S < T");
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t n = 0; n < schedule.levels(); ++n) {
    const double eps = schedule.eps[n];
    const auto s = static_cast<std::int64_t>(std::llround(S / (eps * eps)));
    const auto t = static_cast<std::int64_t>(std::llround(T / (eps * eps)));
    const auto x_lo = static_cast<std::int64_t>(std::ceil(x_min / eps));
    const auto x_hi = static_cast<std::int64_t>(std::floor(x_max / eps));
    const Window window{x_lo - (t - s), x_hi + (t - s), s, t};
    const double b = schedule.branching(n);
    const double kappa = schedule.killing(n);
    out.push_back(parallel_map<std::size_t>(trials, workers, [&](std::size_t i) {
      const LazyNet net(window, b, kappa, derive_seed(seed, 300 + n, i), Orientation::Forward,
                        Parity::Odd);
      return separation_point_census(net, s, t, x_lo, x_hi);
    }));
  }
  return out;
}

ChiSquareResult compare_counts(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  std::map<std::size_t, std::pair<double, double>> joint;
  for (std::size_t v : a) joint[v].first += 1.0;
  for (std::size_t v : b) joint[v].second += 1.0;
  std::vector<std::pair<double, double>> categories;
  for (const auto& [v, c] : joint) categories.push_back(c);
  return chi_square_from_pairs(categories);
}

void write_marginal_csv(std::ostream& os, const MarginalReport& report) {
  std::map<ColorTuple, bool> support;
  for (const auto& l : report.levels) {
    for (const auto& [t, p] : l.law.probabilities()) support[t] = true;
  }
  os << "level,eps,estimate,tvd,ci_low,ci_high\n";
  for (std::size_t n = 0; n < report.levels.size(); ++n) {
    const auto& l = report.levels[n];
    os << n << ',' << l.eps << ',';
    bool first = true;
    for (const auto& [t, unused] : support) {
      os << (first ? "" : " ") << l.law(t);
      first = false;
    }
    if (n == 0) {
      os << ",,,\n";
    } else {
      const auto& c = report.consecutive[n - 1];
      os << ',' << c.tvd << ',' << c.ci_low << ',' << c.ci_high << '\n';
    }
  }
}

void write_marginal_dat(std::ostream& os, const MarginalReport& report) {
  os << "# eps tvd ci_low ci_high\n";
  for (std::size_t n = 0; n < report.consecutive.size(); ++n) {
    const auto& c = report.consecutive[n];
    os << report.levels[n + 1].eps << ' ' << c.tvd << ' ' << c.ci_low << ' ' << c.ci_high << '\n';
  }
}

void write_interface_csv(std::ostream& os, std::span<const LevelInterfaces> levels) {
  os << "level,eps,mean_count,var_count,mean_interval,double_density\n";
  for (std::size_t n = 0; n < levels.size(); ++n) {
    const auto& l = levels[n];
    double mean = 0.0, var = 0.0, doubles = 0.0;
    const double m = static_cast<double>(l.counts.size());
    for (std::size_t c : l.counts) mean += static_cast<double>(c) / m;
    for (std::size_t c : l.counts) var += (static_cast<double>(c) - mean) * (static_cast<double>(c) - mean);
    if (l.counts.size() > 1) var /= m - 1.0;
    for (std::size_t d : l.double_sites) doubles += static_cast<double>(d) / m;
    const double extent = l.eps * static_cast<double>(l.x_hi - l.x_lo);  // census length
    os << n << ',' << l.eps << ',' << mean << ',' << var << ',' << l.mean_interval << ','
       << (extent > 0 ? doubles / extent : 0.0) << '\n';
  }
}

ScalingSchedule schedule_from_json(const nlohmann::json& j, const std::string& path) {
  using namespace vmp::config;
  reject_unknown(j, {"eps", "dyadic", "b", "kappa", "q", "g", "p", "lambda"}, path);
  ScalingSchedule s;
  if (const nlohmann::json* e = optional_member(j, "eps")) {
    s.eps = as_number_array(*e, child_path(path, "eps"));
  } else if (const nlohmann::json* d = optional_member(j, "dyadic")) {
    const std::string at = child_path(path, "dyadic");
    require_array(*d, at);
    if (d->size() != 2) throw ParseError(at + ": expected array of 2 integers");
    const auto first = as_integer((*d)[0], child_path(at, std::size_t{0}));
    const auto last = as_integer((*d)[1], child_path(at, std::size_t{1}));
    if (first < 0 || last > 30 || first > last) {
      throw ParseError(at + ": expected 0 <= first <= last <= 30");
    }
    for (auto n = first; n <= last; ++n) s.eps.push_back(std::ldexp(1.0, -static_cast<int>(n)));
  } else {
    throw ParseError(path + ": one of \"eps\" or \"dyadic\" is required");
  }
  s.b = as_number(member(j, "b", path), child_path(path, "b"));
  s.kappa = as_number(member(j, "kappa", path), child_path(path, "kappa"));
  nlohmann::json noise{{"model", "simple"}, {"b", 0.0}, {"kappa", 0.0}};
  noise["q"] = member(j, "q", path);
  for (const char* key : {"g", "p", "lambda"}) {
    if (const nlohmann::json* v = optional_member(j, key)) noise[key] = *v;
  }
  s.noise = params_from_json(noise, path).noise;
  try {
    s.validate();
  } catch (const Error& e) {
    throw ParseError(path + ": " + e.what());
  }
  return s;
}

}  // namespace vmp
