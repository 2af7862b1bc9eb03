#include "vmp/verify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "vmp/parallel.hpp"

namespace vmp {

namespace {

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

/// g_{k,l} = (1 - gamma) delta_k + gamma delta_l: the left color wins more
/// often than the right one.
BoundaryTable left_biased(int q, double gamma) {
  return BoundaryTable::from_function(q, [&](Color k, Color l) {
    std::vector<double> w(static_cast<std::size_t>(q), 0.0);
    w[k - 1u] += 1.0 - gamma;
    w[l - 1u] += gamma;
    return ColorDistribution(std::move(w));
  });
}

/// lambda_i proportional to i.
ColorDistribution ramp(int q) {
  std::vector<double> w(static_cast<std::size_t>(q));
  const double total = q * (q + 1) / 2.0;
  for (int i = 0; i < q; ++i) w[static_cast<std::size_t>(i)] = (i + 1) / total;
  return ColorDistribution(std::move(w));
}

VmpParams skewed(int q, double b, double kappa, double gamma) {
  return VmpParams::make(b, kappa, left_biased(q, gamma), ColorDistribution::uniform(q), ramp(q));
}

VmpParams potts_skewed(double beta, int q, double gamma) {
  const PottsRates r = potts_rates(beta, q);
  return VmpParams::make(r.b, r.kappa, left_biased(q, gamma), ColorDistribution::uniform(q),
                         ramp(q));
}

CriterionReport make_report(int id, std::string name, bool passed, std::string summary,
                            nlohmann::json details) {
  return CriterionReport{id, std::move(name), passed, std::move(summary), std::move(details)};
}

// Fuzzed backward graphs ---------------------------------------------------

struct FuzzCase {
  LazyNet net;
  RootedDag dag;
  ColoringRule rule;
};

FuzzCase fuzz_case(std::uint64_t seed, std::size_t index) {
  static constexpr std::array<std::pair<double, double>, 12> grid{{{0.05, 0.0},
                                                                   {0.2, 0.0},
                                                                   {0.5, 0.0},
                                                                   {0.8, 0.0},
                                                                   {0.05, 0.05},
                                                                   {0.2, 0.02},
                                                                   {0.4, 0.1},
                                                                   {0.6, 0.2},
                                                                   {0.3, 0.3},
                                                                   {0.1, 0.5},
                                                                   {0.9, 0.1},
                                                                   {0.5, 0.05}}};
  SplitMix64 rng(seed);
  const auto [b, kappa] = grid[index % grid.size()];
  const std::int64_t T = 1 + static_cast<std::int64_t>(rng.below(10));
  const std::int64_t x = T % 2 == 0 ? 1 : 0;
  LazyNet net(Window{x - T, x + T, 0, T}, b, kappa, rng(), Orientation::Backward);
  RootedDag dag = build_dag(net, Vertex{x, T});
  const int q = 2 + static_cast<int>(index % 3);
  ColoringRule rule{left_biased(q, 0.3), ramp(q), ColorDistribution::uniform(q)};
  return FuzzCase{std::move(net), std::move(dag), std::move(rule)};
}

std::vector<Vertex> sorted(std::vector<Vertex> v) {
  std::sort(v.begin(), v.end());
  return v;
}

/// Children-first order drawn uniformly among the ready vertices at each step.
std::vector<std::int32_t> random_topological_order(const DagGraph& dag, SplitMix64& rng) {
  const std::size_t n = dag.size();
  std::vector<int> pending(n, 0);
  std::vector<std::vector<std::int32_t>> parents(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto kids = dag.node(static_cast<std::int32_t>(i)).child_span();
    for (std::size_t k = 0; k < kids.size(); ++k) {
      if (k == 1 && kids[1] == kids[0]) continue;
      ++pending[i];
      parents[static_cast<std::size_t>(kids[k])].push_back(static_cast<std::int32_t>(i));
    }
  }
  std::vector<std::int32_t> ready, order;
  for (std::size_t i = 0; i < n; ++i) {
    if (pending[i] == 0) ready.push_back(static_cast<std::int32_t>(i));
  }
  while (!ready.empty()) {
    const std::size_t pick = rng.below(ready.size());
    const std::int32_t v = ready[pick];
    ready[pick] = ready.back();
    ready.pop_back();
    order.push_back(v);
    for (std::int32_t p : parents[static_cast<std::size_t>(v)]) {
      if (--pending[static_cast<std::size_t>(p)] == 0) ready.push_back(p);
    }
  }
  return order;
}

}  // namespace

nlohmann::json to_json(const CriterionReport& report) {
  return {{"id", report.id},
          {"name", report.name},
          {"passed", report.passed},
          {"summary", report.summary},
          {"details", report.details}};
}

// 1-3 ----------------------------------------------------------------------

CriterionReport verify_potts_simplex() {
  double worst = 0.0;
  for (double beta : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) {
    for (int q = 2; q <= 6; ++q) {
      const PottsRates r = potts_rates(beta, q);
      worst = std::max(worst, std::abs(r.w + r.b + r.kappa - 1.0));
    }
  }
  return make_report(1, "potts simplex identity", worst <= 1e-12,
                     "max |w+b+kappa-1| = " + fmt_double(worst) + " (tol 1e-12)",
                     {{"max_deviation", worst}});
}

CriterionReport verify_potts_anchors() {
  const double beta = 10.0;
  double worst_kappa = 0.0, worst_b = 0.0;
  for (int q = 2; q <= 6; ++q) {
    const PottsRates r = potts_rates(beta, q);
    worst_kappa = std::max(worst_kappa, std::abs(r.kappa * std::exp(2 * beta) - q) / q);
    worst_b = std::max(worst_b, std::abs(r.b * std::exp(beta) - q / 2.0) / q);
  }
  const bool ok = worst_kappa <= 1e-6 && worst_b <= 1e-3;
  return make_report(2, "potts scaling anchors", ok,
                     "max |kappa e^2b - q|/q = " + fmt_double(worst_kappa) +
                         ", max |b e^b - q/2|/q = " + fmt_double(worst_b),
                     {{"kappa_relative", worst_kappa}, {"b_relative", worst_b}});
}

CriterionReport verify_detailed_balance() {
  double worst = 0.0;
  for (double beta : {0.5, 1.0, 3.0}) {
    for (int q = 2; q <= 6; ++q) worst = std::max(worst, potts_detailed_balance_residual(beta, q));
  }
  return make_report(3, "detailed balance", worst <= 1e-10,
                     "max residual = " + fmt_double(worst) + " (tol 1e-10)",
                     {{"max_residual", worst}});
}

// 4 ------------------------------------------------------------------------

CriterionReport verify_decompositions() {
  const std::vector<std::vector<std::pair<std::int64_t, double>>> kernels{
      {{-1, 0.5}, {1, 0.5}}, {{-2, 0.25}, {-1, 0.25}, {1, 0.25}, {2, 0.25}}};
  // Every state configuration on offsets -2..2.
  auto neighborhoods = [] {
    std::vector<std::array<int, 5>> out;
    for (int m = 0; m < 32; ++m) {
      std::array<int, 5> s{};
      for (int i = 0; i < 5; ++i) s[static_cast<std::size_t>(i)] = (m >> i) & 1;
      out.push_back(s);
    }
    return out;
  }();
  auto density = [](const std::vector<std::pair<std::int64_t, double>>& kernel,
                    const std::array<int, 5>& s, int state) {
    double f = 0.0;
    for (const auto& [y, k] : kernel) f += k * (s[static_cast<std::size_t>(y + 2)] == state);
    return f;
  };

  double lv_worst = 0.0;
  std::size_t lv_cases = 0;
  for (const auto& kernel : kernels) {
    for (double alpha : {0.0, 0.25, 0.5, 0.9, 1.0}) {
      for (double eps : {0.0, 0.1, 0.5, 1.0}) {
        const GeneralVmpSpec spec = lotka_volterra_decomposition(alpha, eps, kernel);
        for (const auto& s : neighborhoods) {
          const Neighborhood eta = [&s](std::int64_t y) { return s[static_cast<std::size_t>(y + 2)]; };
          const StateLaw got = spec.transition(eta);
          const ColorDistribution want =
              lotka_volterra_transition(s[2], density(kernel, s, 1), alpha, eps);
          for (std::size_t st = 0; st < 2; ++st) {
            lv_worst = std::max(lv_worst, std::abs(got[st] - want.weights()[st]));
          }
          ++lv_cases;
        }
      }
    }
  }

  double nbv_worst = 0.0;
  std::size_t nbv_cases = 0;
  for (const auto& kernel : kernels) {
    for (double alpha : {0.0, 0.3, 0.7, 1.0}) {
      for (double b : {0.5, 1.0, 2.0}) {
        for (double kappa : {0.0, 0.5, 1.0}) {
          for (int n = 4; n <= 8; ++n) {
            const NbvDecomposition d =
                noisy_biased_voter_decomposition(alpha, b, kappa, std::ldexp(1.0, -n));
            const GeneralVmpSpec spec = d.spec(kernel);
            for (const auto& s : neighborhoods) {
              // State 0 is color 1.
              const Neighborhood eta = [&s](std::int64_t y) {
                return s[static_cast<std::size_t>(y + 2)];
              };
              const double f1 = density(kernel, s, 0);
              const ColorDistribution want =
                  noisy_biased_voter_transition(f1, alpha, d.b_eps, d.kappa_eps);
              const StateLaw got = spec.transition(eta);
              nbv_worst = std::max({nbv_worst, std::abs(got[0] - want[1]),
                                    std::abs(got[1] - want[2]),
                                    std::abs(d.reconstruct_one(f1) - want[1])});
              ++nbv_cases;
            }
          }
        }
      }
    }
  }

  const std::vector<double> eps{0x1p-4, 0x1p-5, 0x1p-6, 0x1p-7, 0x1p-8};
  double min_slope = std::numeric_limits<double>::infinity();
  nlohmann::json slopes = nlohmann::json::array();
  for (double alpha : {0.3, 0.7}) {
    for (double b : {0.5, 1.0, 2.0}) {
      for (double kappa : {0.5, 1.0}) {
        const double s = nbv_remainder_slope(alpha, b, kappa, eps);
        min_slope = std::min(min_slope, s);
        slopes.push_back({{"alpha", alpha}, {"b", b}, {"kappa", kappa}, {"slope", s}});
      }
    }
  }
  const bool ok = lv_worst <= 1e-12 && nbv_worst <= 1e-12 && min_slope >= 2.9;
  return make_report(4, "decomposition exactness", ok,
                     "LV max err " + fmt_double(lv_worst) + ", NBV max err " +
                         fmt_double(nbv_worst) + ", min remainder slope " +
                         fmt_double(min_slope) + " (>= 2.9)",
                     {{"lv_max_error", lv_worst},
                      {"lv_cases", lv_cases},
                      {"nbv_max_error", nbv_worst},
                      {"nbv_cases", nbv_cases},
                      {"min_slope", min_slope},
                      {"slopes", slopes}});
}

// 5 ------------------------------------------------------------------------

std::vector<OracleInstance> oracle_instances() {
  const double ln2 = std::numbers::ln2;
  return {
      {"potts q3 beta=ln2 one point", potts_params(ln2, 3), {{0, 1}}},
      {"potts q3 beta=ln2 pair", potts_params(ln2, 3, ramp(3)), {{0, 1}, {1, 2}}},
      {"potts q2 beta=ln2 pair", potts_params(ln2, 2), {{0, 1}, {2, 1}}},
      {"potts q2 beta=1", potts_params(1.0, 2, ramp(2)), {{1, 2}}},
      {"skewed q2", skewed(2, 0.5, 0.1, 0.2), {{0, 1}, {1, 2}}},
      {"skewed q3 crossing", skewed(3, 0.4, 0.2, 0.1), {{1, 0}, {0, 1}}},
      {"skewed q3 same time", skewed(3, 0.3, 0.3, 0.25), {{-1, 2}, {1, 2}}},
      {"voter with noise q2", skewed(2, 0.0, 0.2, 0.2), {{0, 1}, {1, 2}}},
      {"no killing q3", skewed(3, 0.6, 0.0, 0.1), {{0, 1}, {2, 1}}},
      {"heavy killing q3", skewed(3, 0.2, 0.7, 0.3), {{-1, 2}}},
      {"pure branching q2", skewed(2, 1.0, 0.0, 0.2), {{0, 1}, {1, 2}}},
      {"pure killing q3", skewed(3, 0.0, 1.0, 0.2), {{0, 1}, {2, 1}}},
      {"pure voter q3", skewed(3, 0.0, 0.0, 0.2), {{1, 2}, {-1, 2}}},
  };
}

CriterionReport verify_oracle_equivalence() {
  double worst = 0.0;
  nlohmann::json rows = nlohmann::json::array();
  for (const OracleInstance& inst : oracle_instances()) {
    const double tvd =
        total_variation(exact_forward_law(inst.points, inst.params),
                        exact_dual_law(inst.points, inst.params));
    worst = std::max(worst, tvd);
    rows.push_back({{"instance", inst.name}, {"tvd", tvd}});
  }
  return make_report(5, "duality oracle equivalence", worst <= 1e-10,
                     std::to_string(rows.size()) + " instances, max TVD " + fmt_double(worst) +
                         " (tol 1e-10)",
                     {{"max_tvd", worst}, {"instances", rows}});
}

// 6 ------------------------------------------------------------------------

std::vector<GofSetting> gof_settings() {
  const std::vector<QueryPoint> A{{0, 1}, {1, 2}};
  const std::vector<QueryPoint> B{{1, 0}, {0, 1}};
  const std::vector<QueryPoint> C{{-1, 2}, {0, 3}};
  const std::vector<QueryPoint> D{{0, 1}, {3, 2}};
  const std::vector<QueryPoint> E{{-1, 0}, {0, 1}, {1, 2}};
  const std::vector<QueryPoint> F{{0, 3}, {1, 4}};
  const double ln2 = std::numbers::ln2;
  return {
      {"q2 b0.3 k0.05 A", skewed(2, 0.3, 0.05, 0.1), A},
      {"q2 b0.6 k0.2 B", skewed(2, 0.6, 0.2, 0.1), B},
      {"q2 b0.5 k0.1 C", skewed(2, 0.5, 0.1, 0.2), C},
      {"q2 b0.6 k0.05 D", skewed(2, 0.6, 0.05, 0.1), D},
      {"q2 b0.4 k0.1 E", skewed(2, 0.4, 0.1, 0.2), E},
      {"q2 b0.5 k0.05 F", skewed(2, 0.5, 0.05, 0.1), F},
      {"q3 b0.3 k0.2 A", skewed(3, 0.3, 0.2, 0.1), A},
      {"q3 b0.6 k0.05 B", skewed(3, 0.6, 0.05, 0.25), B},
      {"q3 b0.4 k0.1 C", skewed(3, 0.4, 0.1, 0.1), C},
      {"q3 b0.6 k0.2 D", skewed(3, 0.6, 0.2, 0.1), D},
      {"q3 b0.3 k0.05 E", skewed(3, 0.3, 0.05, 0.1), E},
      {"q3 b0.5 k0.1 F", skewed(3, 0.5, 0.1, 0.2), F},
      {"q4 b0.3 k0.05 A", skewed(4, 0.3, 0.05, 0.1), A},
      {"q4 b0.5 k0.2 B", skewed(4, 0.5, 0.2, 0.2), B},
      {"q4 b0.6 k0.05 C", skewed(4, 0.6, 0.05, 0.1), C},
      {"q4 b0.4 k0.1 E", skewed(4, 0.4, 0.1, 0.1), E},
      {"potts-rates q3 beta=ln2 A", potts_skewed(ln2, 3, 0.1), A},
      {"potts-rates q2 beta=1 B", potts_skewed(1.0, 2, 0.1), B},
      {"potts-rates q3 beta=1.5 C", potts_skewed(1.5, 3, 0.1), C},
      {"potts-rates q4 beta=2 E", potts_skewed(2.0, 4, 0.1), E},
  };
}

CriterionReport verify_duality_gate(const VerifyOptions& options, GofGateOutcome* outcome) {
  GofGateOutcome out;
  const std::vector<GofSetting> settings = gof_settings();
  std::size_t null_pass = 0, corrupt_fail = 0;
  double min_tvd = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < settings.size(); ++s) {
    const GofSetting& set = settings[s];
    VmpParams corrupted = set.params;
    corrupted.noise.g = set.params.g().transposed();
    const double tvd = total_variation(exact_forward_law(set.points, set.params),
                                       exact_forward_law(set.points, corrupted));
    out.corruption_tvd.push_back(tvd);
    min_tvd = std::min(min_tvd, tvd);

    const std::uint64_t seed = derive_seed(options.seed, 500, s);
    const auto fwd = forward_samples(set.points, set.params, options.gof_trials, seed,
                                     kForwardStream, options.workers);
    const auto dual = dual_samples(set.points, set.params, options.gof_trials, seed, kDualStream,
                                   options.workers);
    const auto bad = dual_samples(set.points, corrupted, options.gof_trials, seed, 4,
                                  options.workers);
    const auto fwd_tally = tally(fwd);
    out.null_reports.push_back({set.name, two_sample_chi_square(fwd_tally, tally(dual))});
    out.corrupted_reports.push_back(
        {set.name + " corrupted", two_sample_chi_square(fwd_tally, tally(bad))});
    null_pass += out.null_reports.back().passed() ? 1 : 0;
    corrupt_fail += out.corrupted_reports.back().passed() ? 0 : 1;
  }
  const std::size_t n = settings.size();
  const bool ok = null_pass + 2 >= n && corrupt_fail + 2 >= n && min_tvd >= 0.01;
  nlohmann::json details{{"settings", n},
                         {"null_passed", null_pass},
                         {"corrupted_failed", corrupt_fail},
                         {"min_corruption_tvd", min_tvd},
                         {"trials", options.gof_trials}};
  if (outcome) *outcome = std::move(out);
  return make_report(6, "duality statistical gate", ok,
                     "null passes " + std::to_string(null_pass) + "/" + std::to_string(n) +
                         ", corrupted fails " + std::to_string(corrupt_fail) + "/" +
                         std::to_string(n) + " (need 18 each), min exact corruption TVD " +
                         fmt_double(min_tvd),
                     std::move(details));
}

// 7-8 ----------------------------------------------------------------------

CriterionReport verify_reduction(const VerifyOptions& options) {
  struct Row {
    bool colors_agree = false;
    bool dominators_agree = false;
    int brute = -1;  // -1 not run, 0 disagree, 1 agree
    std::size_t size = 0;
  };
  const auto rows = parallel_map<Row>(options.fuzz_dags, options.workers, [&](std::size_t i) {
    const FuzzCase c = fuzz_case(derive_seed(options.seed, 600, i), i);
    Row r;
    r.size = c.dag.size();
    const Color full = color_dag(c.dag, c.rule).root();
    const Color by_flow = color_dag(reduce(c.dag, RelevanceMethod::MaxFlow), c.rule).root();
    const Color by_dom = color_dag(reduce(c.dag, RelevanceMethod::Dominators), c.rule).root();
    r.colors_agree = full == by_flow && full == by_dom;
    const auto flow = sorted(relevant_points(c.dag));
    r.dominators_agree = flow == sorted(relevant_points_by_dominators(c.dag));
    if (c.dag.size() <= 12) r.brute = flow == sorted(relevant_points_brute_force(c.dag)) ? 1 : 0;
    return r;
  });
  std::size_t color_ok = 0, dom_ok = 0, brute_run = 0, brute_ok = 0, max_size = 0;
  for (const Row& r : rows) {
    color_ok += r.colors_agree;
    dom_ok += r.dominators_agree;
    brute_run += r.brute >= 0;
    brute_ok += r.brute == 1;
    max_size = std::max(max_size, r.size);
  }
  const std::size_t n = rows.size();
  const bool ok = color_ok == n && dom_ok == n && brute_ok == brute_run && brute_run > 0;
  return make_report(7, "reduction equivalence", ok,
                     "root colors " + std::to_string(color_ok) + "/" + std::to_string(n) +
                         ", max-flow = brute force on " + std::to_string(brute_ok) + "/" +
                         std::to_string(brute_run) + " small graphs",
                     {{"dags", n},
                      {"root_colors_identical", color_ok},
                      {"dominators_match_max_flow", dom_ok},
                      {"brute_force_checked", brute_run},
                      {"brute_force_match", brute_ok},
                      {"largest_dag", max_size}});
}

CriterionReport verify_order_consistency(const VerifyOptions& options) {
  struct Row {
    bool orders_agree = true;
    bool consistent = false;
  };
  const auto rows = parallel_map<Row>(options.order_dags, options.workers, [&](std::size_t i) {
    // Redraw until the graph has a vertex below the root.
    FuzzCase c = fuzz_case(derive_seed(options.seed, 700, i), i);
    for (std::uint64_t attempt = 1; c.dag.size() < 2; ++attempt) {
      c = fuzz_case(derive_seed(options.seed, 700, i) + attempt, i);
    }
    SplitMix64 rng(derive_seed(options.seed, 701, i));
    Row r;
    const DagColoring base = color_dag(c.dag, c.rule);
    for (std::size_t k = 0; k < options.orders_per_dag; ++k) {
      const auto order = random_topological_order(c.dag, rng);
      if (color_dag(c.dag, c.rule, order).colors != base.colors) r.orders_agree = false;
    }
    // Prefer an internal vertex; fall back to a leaf.
    std::vector<std::int32_t> inner, others;
    for (std::size_t v = 1; v < c.dag.size(); ++v) {
      const auto idx = static_cast<std::int32_t>(v);
      (is_leaf(c.dag.node(idx).kind) ? others : inner).push_back(idx);
    }
    const auto& pool = inner.empty() ? others : inner;
    const std::int32_t pick = pool[rng.below(pool.size())];
    const RootedDag sub = build_dag(c.net, c.dag.node(pick).vertex);
    r.consistent = color_dag(sub, c.rule).root() == base.colors[static_cast<std::size_t>(pick)];
    return r;
  });
  std::size_t orders_ok = 0, consistent = 0;
  for (const Row& r : rows) {
    orders_ok += r.orders_agree;
    consistent += r.consistent;
  }
  const std::size_t n = rows.size();
  return make_report(8, "order independence and consistency", orders_ok == n && consistent == n,
                     "order-independent " + std::to_string(orders_ok) + "/" + std::to_string(n) +
                         ", sub-graph consistent " + std::to_string(consistent) + "/" +
                         std::to_string(n),
                     {{"dags", n},
                      {"orders_per_dag", options.orders_per_dag},
                      {"order_independent", orders_ok},
                      {"subgraph_consistent", consistent}});
}

// 9 ------------------------------------------------------------------------

ScalingSchedule coarsening_schedule() {
  ColoringRule noise{BoundaryTable::uniform(3), ColorDistribution({0.7, 0.2, 0.1}),
                     ColorDistribution::uniform(3)};
  return ScalingSchedule::dyadic(3, 6, 1.5, 3.0, std::move(noise));
}

CriterionReport verify_coarsening(const VerifyOptions& options, CoarseningOutcome* outcome) {
  const ScalingSchedule schedule = coarsening_schedule();
  CoarseningOutcome out;
  out.interfaces = interface_experiment(schedule, 0.5, 0.0, 1.0, options.coarsening_trials,
                                        options.seed, options.workers);
  const std::size_t last = out.interfaces.size() - 1;
  out.finest = compare_counts(out.interfaces[last - 1].counts, out.interfaces[last].counts);
  const std::pair<double, double> point{0.5, 0.5};
  out.marginals = marginal_convergence_experiment(
      schedule, std::span(&point, 1), options.coarsening_trials, options.seed, options.workers,
      options.bootstrap);

  const bool counts_ok = out.finest.p_value >= 0.01;
  const bool monotone = out.marginals.non_increasing();
  nlohmann::json tvds = nlohmann::json::array();
  std::string tvd_text;
  for (const TvdInterval& t : out.marginals.consecutive) {
    tvds.push_back({{"tvd", t.tvd}, {"ci_low", t.ci_low}, {"ci_high", t.ci_high}});
    tvd_text += (tvd_text.empty() ? "" : ", ") + fmt_double(t.tvd);
  }
  nlohmann::json details{{"trials", options.coarsening_trials},
                         {"finest_statistic", out.finest.statistic},
                         {"finest_dof", out.finest.dof},
                         {"finest_p_value", out.finest.p_value},
                         {"marginal_tvds", tvds}};
  std::string summary = "finest-level interface counts p = " + fmt_double(out.finest.p_value) +
                        " (>= 0.01), consecutive marginal TVDs " + tvd_text +
                        (monotone ? " non-increasing within CIs" : " NOT non-increasing");
  if (outcome) *outcome = std::move(out);
  return make_report(9, "coarsening diagnostics", counts_ok && monotone, std::move(summary),
                     std::move(details));
}

// Whole suite --------------------------------------------------------------

bool VerificationRun::passed() const {
  return std::all_of(criteria.begin(), criteria.end(),
                     [](const CriterionReport& c) { return c.passed; });
}

VerificationRun run_verification(const VerifyOptions& options) {
  VerificationRun run;
  run.criteria.push_back(verify_potts_simplex());
  run.criteria.push_back(verify_potts_anchors());
  run.criteria.push_back(verify_detailed_balance());
  run.criteria.push_back(verify_decompositions());
  run.criteria.push_back(verify_oracle_equivalence());
  run.criteria.push_back(verify_duality_gate(options, &run.gof));
  run.criteria.push_back(verify_reduction(options));
  run.criteria.push_back(verify_order_consistency(options));
  run.criteria.push_back(verify_coarsening(options, &run.coarsening));
  return run;
}

std::vector<std::string> write_verification(const VerificationRun& run,
                                            const std::filesystem::path& dir) {
  auto open = [&](const std::string& name) {
    std::ofstream os(dir / name);
    if (!os) throw Error("cannot write " + (dir / name).string());
    return os;
  };
  {
    nlohmann::json criteria = nlohmann::json::array();
    for (const CriterionReport& c : run.criteria) criteria.push_back(to_json(c));
    auto os = open("results.json");
    os << nlohmann::json{{"passed", run.passed()}, {"criteria", criteria}}.dump(2) << '\n';
  }
  {
    auto os = open("gof.jsonl");
    for (std::size_t i = 0; i < run.gof.null_reports.size(); ++i) {
      os << to_json(run.gof.null_reports[i]).dump() << '\n';
      os << to_json(run.gof.corrupted_reports[i]).dump() << '\n';
    }
  }
  {
    auto os = open("interfaces.csv");
    write_interface_csv(os, run.coarsening.interfaces);
  }
  {
    auto os = open("marginals.csv");
    write_marginal_csv(os, run.coarsening.marginals);
  }
  {
    auto os = open("marginals.dat");
    write_marginal_dat(os, run.coarsening.marginals);
  }
  return {"results.json", "gof.jsonl", "interfaces.csv", "marginals.csv", "marginals.dat"};
}

}  // namespace vmp
