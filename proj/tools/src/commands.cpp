#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "run_context.hpp"
#include "vmp/config.hpp"
#include "vmp/verify.hpp"

namespace vmp::cli {

namespace {

using nlohmann::json;
using namespace vmp::config;

std::vector<QueryPoint> parse_points(const json& j, const std::string& path) {
  require_array(j, path);
  std::vector<QueryPoint> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string at = child_path(path, i);
    const json& p = require_array(j[i], at);
    if (p.size() != 2) throw ParseError(at + ": expected array of 2 integers [x, t]");
    out.push_back({as_integer(p[0], child_path(at, std::size_t{0})),
                   as_integer(p[1], child_path(at, std::size_t{1}))});
  }
  try {
    validate_query_points(out);
  } catch (const Error& e) {
    throw ParseError(path + ": " + e.what());
  }
  return out;
}

std::size_t count_field(const json& cfg, const std::string& key, std::size_t fallback,
                        std::size_t minimum = 1) {
  const json* v = optional_member(cfg, key);
  if (!v) return fallback;
  const std::uint64_t n = as_unsigned(*v, child_path("$", key));
  if (n < minimum) {
    throw ParseError(child_path("$", key) + ": expected integer >= " + std::to_string(minimum));
  }
  return static_cast<std::size_t>(n);
}

double number_field(const json& cfg, const std::string& key, double fallback) {
  const json* v = optional_member(cfg, key);
  return v ? as_number(*v, child_path("$", key)) : fallback;
}

std::string read_file(const std::string& path, const std::string& field) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParseError(field + ": cannot open file " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string point_label(const QueryPoint& p) {
  return "c_" + std::to_string(p.x) + "_" + std::to_string(p.t);
}

json law_json(const JointColorLaw& law) {
  json rows = json::array();
  for (const auto& [tuple, prob] : law.probabilities()) {
    json colors = json::array();
    for (Color c : tuple) colors.push_back(static_cast<int>(c));
    rows.push_back({{"colors", colors}, {"probability", prob}});
  }
  return rows;
}

std::string ascii_if_small(const DagGraph& dag, const DagColoring& coloring) {
  return dag.size() <= 400 ? ascii_map(dag, coloring) : std::string();
}

}  // namespace

// ---------------------------------------------------------------------------

int run_simulate(RunContext& ctx) {
  const json& cfg = ctx.config();
  reject_unknown(cfg, {"model", "x_min", "x_max", "steps"}, "$");
  const VmpParams params = params_from_json(member(cfg, "model", "$"), "$.model");
  const auto x_min = as_integer(member(cfg, "x_min", "$"), "$.x_min");
  const auto x_max = as_integer(member(cfg, "x_max", "$"), "$.x_max");
  const auto steps = as_integer(member(cfg, "steps", "$"), "$.steps");
  if (x_min > x_max) throw ParseError("$.x_max: expected integer >= $.x_min");
  if (steps < 0) throw ParseError("$.steps: expected integer >= 0");

  const ColorField field = simulate(params, x_min, x_max, steps, ctx.seed());
  std::ostringstream csv;
  write_csv(csv, field);
  ctx.write("field.csv", csv.str());

  // The genealogy of the run as a reproducible arrow-field fixture.
  const Window window{x_min, x_max, 0, steps};
  if (sublattice_size(window, Parity::Odd) <= 200000) {
    const LazyNet net(window, params.b, params.kappa, ctx.seed(), Orientation::Backward);
    ctx.write("net.field", to_text(net.materialize()));
  }
  const ColorSlice& last = field.slices.back();
  std::cout << "simulated " << field.slices.size() << " slices; final slice t=" << last.t
            << " covers x in [" << last.x_min << ", " << last.x_max() << "]\n";
  return kOk;
}

int run_dual_sample(RunContext& ctx) {
  const json& cfg = ctx.config();
  reject_unknown(cfg, {"model", "points", "samples"}, "$");
  const VmpParams params = params_from_json(member(cfg, "model", "$"), "$.model");
  const auto points = parse_points(member(cfg, "points", "$"), "$.points");
  const std::size_t n = count_field(cfg, "samples", 1);

  const auto samples = dual_samples(points, params, n, ctx.seed(), kDualStream, ctx.workers());
  std::ostringstream csv;
  csv << "trial";
  for (const auto& p : points) csv << ',' << point_label(p);
  csv << '\n';
  for (std::size_t i = 0; i < samples.size(); ++i) {
    csv << i;
    for (Color c : samples[i]) csv << ',' << static_cast<int>(c);
    csv << '\n';
  }
  ctx.write("samples.csv", csv.str());
  ctx.write("law.json",
            json{{"n", n}, {"law", law_json(JointColorLaw::from_samples(samples))}}.dump(2) + "\n");

  // Graphs of the first trial, one per point.
  const LazyNet net(dependence_window(points), params.b, params.kappa,
                    derive_seed(ctx.seed(), kDualStream, 0), Orientation::Backward);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const RootedDag dag = build_dag(net, points[i]);
    const DagColoring coloring = color_dag(dag, params.noise);
    const ReducedDag reduced = reduce(dag);
    json j = to_json(dag, coloring);
    j["reduced"] = to_json(reduced);
    const std::string stem = "graph_" + std::to_string(i);
    ctx.write(stem + ".json", j.dump(2) + "\n");
    ctx.write(stem + ".dot", to_dot(dag, stem));
    ctx.write(stem + "_reduced.dot", to_dot(reduced, stem + "_reduced"));
    const std::string map = ascii_if_small(dag, coloring);
    std::cout << "point (" << points[i].x << ", " << points[i].t << "): " << dag.size()
              << " vertices, " << reduced.size() << " after reduction, root color "
              << static_cast<int>(coloring.root()) << '\n'
              << map;
  }
  return kOk;
}

int run_check_duality(RunContext& ctx) {
  const json& cfg = ctx.config();
  reject_unknown(cfg, {"model", "points", "trials", "exact"}, "$");
  const VmpParams params = params_from_json(member(cfg, "model", "$"), "$.model");
  const auto points = parse_points(member(cfg, "points", "$"), "$.points");
  const std::size_t trials = count_field(cfg, "trials", 10000);
  const json* exact_flag = optional_member(cfg, "exact");
  const bool exact = exact_flag ? as_bool(*exact_flag, "$.exact") : true;

  const GofReport report =
      duality_gof_test("check-duality", points, params, params, trials, ctx.seed(), ctx.workers());
  std::string lines = to_json(report).dump() + "\n";
  bool ok = report.passed();
  std::cout << "chi-square " << report.test.statistic << " on " << report.test.dof
            << " dof, p = " << report.test.p_value << ", TVD = " << report.test.tvd
            << (report.passed() ? " (pass)" : " (FAIL)") << '\n';
  if (exact) {
    try {
      const double tvd = total_variation(exact_forward_law(points, params),
                                         exact_dual_law(points, params));
      lines += json{{"setting", "exact-oracles"}, {"tvd", tvd}}.dump() + "\n";
      ok = ok && tvd <= 1e-10;
      std::cout << "exact forward vs exact dual TVD = " << tvd << (tvd <= 1e-10 ? " (pass)" : " (FAIL)")
                << '\n';
    } catch (const StateSpaceError& e) {
      lines += json{{"setting", "exact-oracles"}, {"skipped", e.what()}}.dump() + "\n";
      std::cout << "exact oracles skipped: " << e.what() << '\n';
    }
  }
  ctx.write("report.jsonl", lines);
  return ok ? kOk : kGate;
}

int run_reduce_graph(RunContext& ctx) {
  const json& cfg = ctx.config();
  reject_unknown(cfg, {"fixture", "field", "root", "q", "method"}, "$");
  RelevanceMethod method = RelevanceMethod::Dominators;
  if (const json* m = optional_member(cfg, "method")) {
    const std::string s = as_string(*m, "$.method");
    if (s == "max-flow") {
      method = RelevanceMethod::MaxFlow;
    } else if (s != "dominators") {
      throw ParseError("$.method: expected \"dominators\" or \"max-flow\", got \"" + s + "\"");
    }
  }

  DagGraph dag;
  if (const json* f = optional_member(cfg, "fixture")) {
    const std::string path = as_string(*f, "$.fixture");
    json j;
    try {
      j = json::parse(read_file(path, "$.fixture"));
    } catch (const json::parse_error& e) {
      throw ParseError("$.fixture: " + path + " is not valid JSON: " + e.what());
    }
    dag = dag_from_json(j);
  } else if (const json* f = optional_member(cfg, "field")) {
    const std::string path = as_string(*f, "$.field");
    const ArrowField field = parse_arrow_field(read_file(path, "$.field"));
    const json& r = require_array(member(cfg, "root", "$"), "$.root");
    if (r.size() != 2) throw ParseError("$.root: expected array of 2 integers [x, t]");
    const Vertex root{as_integer(r[0], "$.root[0]"), as_integer(r[1], "$.root[1]")};
    dag = build_dag(field, root);
  } else {
    throw ParseError("$: one of \"fixture\" or \"field\" is required");
  }

  const ReducedDag reduced = reduce(dag, method);
  json out = to_json(reduced);
  json relevant = json::array();
  const auto points =
      method == RelevanceMethod::MaxFlow ? relevant_points(dag) : relevant_points_by_dominators(dag);
  for (const Vertex& v : points) relevant.push_back({{"x", v.x}, {"t", v.t}});
  out["relevant"] = relevant;

  int status = kOk;
  json full = to_json(dag);
  if (const json* qv = optional_member(cfg, "q")) {
    const auto q = as_integer(*qv, "$.q");
    if (q < 2 || q > kMaxColors) throw ParseError("$.q: expected integer in [2, 255]");
    const int qi = static_cast<int>(q);
    const ColoringRule rule{BoundaryTable::uniform(qi), ColorDistribution::uniform(qi),
                            ColorDistribution::uniform(qi)};
    const DagColoring full_colors = color_dag(dag, rule);
    const DagColoring reduced_colors = color_dag(reduced, rule);
    full = to_json(dag, full_colors);
    out = to_json(reduced, reduced_colors);
    out["relevant"] = relevant;
    out["root_color"] = static_cast<int>(reduced_colors.root());
    std::cout << ascii_if_small(dag, full_colors);
    std::cout << "root color: full graph " << static_cast<int>(full_colors.root())
              << ", reduced graph " << static_cast<int>(reduced_colors.root()) << '\n';
    if (full_colors.root() != reduced_colors.root()) status = kGate;
  }
  std::cout << dag.size() << " vertices reduced to " << reduced.size() << " ("
            << relevant.size() << " relevant separation points)\n";
  ctx.write("graph.json", full.dump(2) + "\n");
  ctx.write("graph.dot", to_dot(dag, "graph"));
  ctx.write("reduced.json", out.dump(2) + "\n");
  ctx.write("reduced.dot", to_dot(reduced, "reduced"));
  return status;
}

int run_potts_params(RunContext& ctx) {
  const json& cfg = ctx.config();
  reject_unknown(cfg, {"beta", "q", "lambda"}, "$");
  json model{{"model", "potts"}};
  model["beta"] = member(cfg, "beta", "$");
  model["q"] = member(cfg, "q", "$");
  if (const json* l = optional_member(cfg, "lambda")) model["lambda"] = *l;
  const VmpParams params = params_from_json(model, "$");
  char line[160];
  std::snprintf(line, sizeof line, "(w,b,kappa)=(%.3g,%.3g,%.3g)\n", params.w, params.b,
                params.kappa);
  std::cout << line;
  json j = to_json(params);
  ctx.write("params.json", j.dump(2) + "\n");
  return kOk;
}

int run_scaling_experiment(RunContext& ctx) {
  const json& cfg = ctx.config();
  reject_unknown(cfg,
                 {"schedule", "experiment", "trials", "t", "x_min", "x_max", "points", "bootstrap",
                  "S", "T"},
                 "$");
  const ScalingSchedule schedule = schedule_from_json(member(cfg, "schedule", "$"), "$.schedule");
  const std::string kind = as_string(member(cfg, "experiment", "$"), "$.experiment");
  const std::size_t trials = count_field(cfg, "trials", 1000);
  const double x_min = number_field(cfg, "x_min", 0.0);
  const double x_max = number_field(cfg, "x_max", 1.0);
  if (!(x_min < x_max)) throw ParseError("$.x_max: expected number > $.x_min");

  if (kind == "interfaces") {
    const double t = number_field(cfg, "t", 0.5);
    if (!(t > 0)) throw ParseError("$.t: expected number > 0");
    const auto levels =
        interface_experiment(schedule, t, x_min, x_max, trials, ctx.seed(), ctx.workers());
    std::ostringstream csv;
    write_interface_csv(csv, levels);
    ctx.write("interfaces.csv", csv.str());
    json comparisons = json::array();
    for (std::size_t n = 0; n + 1 < levels.size(); ++n) {
      const ChiSquareResult r = compare_counts(levels[n].counts, levels[n + 1].counts);
      comparisons.push_back({{"levels", {n, n + 1}},
                             {"statistic", r.statistic},
                             {"dof", r.dof},
                             {"p_value", r.p_value},
                             {"tvd", r.tvd}});
      std::cout << "levels " << n << "-" << n + 1 << ": p = " << r.p_value << '\n';
    }
    ctx.write("comparisons.json", comparisons.dump(2) + "\n");
  } else if (kind == "marginals") {
    std::vector<std::pair<double, double>> pts;
    const json& p = require_array(member(cfg, "points", "$"), "$.points");
    for (std::size_t i = 0; i < p.size(); ++i) {
      const std::string at = child_path("$.points", i);
      const auto xy = as_number_array(p[i], at);
      if (xy.size() != 2) throw ParseError(at + ": expected array of 2 numbers [x, t]");
      pts.emplace_back(xy[0], xy[1]);
    }
    if (pts.empty()) throw ParseError("$.points: expected non-empty array");
    const MarginalReport report = marginal_convergence_experiment(
        schedule, pts, trials, ctx.seed(), ctx.workers(), count_field(cfg, "bootstrap", 400));
    std::ostringstream csv, dat;
    write_marginal_csv(csv, report);
    write_marginal_dat(dat, report);
    ctx.write("marginals.csv", csv.str());
    ctx.write("marginals.dat", dat.str());
    for (const TvdInterval& t : report.consecutive) {
      std::cout << "TVD " << t.tvd << " [" << t.ci_low << ", " << t.ci_high << "]\n";
    }
    std::cout << (report.non_increasing() ? "non-increasing within CIs\n"
                                          : "NOT non-increasing within CIs\n");
  } else if (kind == "separation") {
    const double S = number_field(cfg, "S", 0.25);
    const double T = number_field(cfg, "T", 0.5);
    if (!(S >= 0 && S < T)) throw ParseError("$.T: expected 0 <= $.S < $.T");
    const auto counts =
        separation_experiment(schedule, S, T, x_min, x_max, trials, ctx.seed(), ctx.workers());
    std::ostringstream csv;
    csv << "level,eps,mean_count,var_count\n";
    for (std::size_t n = 0; n < counts.size(); ++n) {
      double mean = 0.0, sq = 0.0;
      for (std::size_t c : counts[n]) {
        mean += static_cast<double>(c);
        sq += static_cast<double>(c) * static_cast<double>(c);
      }
      const double k = static_cast<double>(counts[n].size());
      mean /= k;
      csv << n << ',' << schedule.eps[n] << ',' << mean << ',' << sq / k - mean * mean << '\n';
    }
    ctx.write("separation.csv", csv.str());
  } else {
    throw ParseError("$.experiment: expected \"interfaces\", \"marginals\" or \"separation\", got \"" +
                     kind + "\"");
  }
  return kOk;
}

int run_verify_all(RunContext& ctx) {
  const json& cfg = ctx.config();
  reject_unknown(cfg,
                 {"gof_trials", "fuzz_dags", "order_dags", "orders_per_dag", "coarsening_trials",
                  "bootstrap"},
                 "$");
  VerifyOptions o;
  o.seed = ctx.seed();
  o.workers = ctx.workers();
  o.gof_trials = count_field(cfg, "gof_trials", o.gof_trials);
  o.fuzz_dags = count_field(cfg, "fuzz_dags", o.fuzz_dags);
  o.order_dags = count_field(cfg, "order_dags", o.order_dags);
  o.orders_per_dag = count_field(cfg, "orders_per_dag", o.orders_per_dag);
  o.coarsening_trials = count_field(cfg, "coarsening_trials", o.coarsening_trials, 2);
  o.bootstrap = count_field(cfg, "bootstrap", o.bootstrap);

  const VerificationRun run = run_verification(o);
  for (const std::string& name : write_verification(run, ctx.out())) ctx.record(name);
  for (const CriterionReport& c : run.criteria) {
    std::cout << (c.passed ? "[PASS] " : "[FAIL] ") << c.id << ' ' << c.name << ": " << c.summary
              << '\n';
  }
  return run.passed() ? kOk : kGate;
}

}  // namespace vmp::cli
