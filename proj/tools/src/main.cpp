// vmp: command-line driver for simulation, dual sampling, graph reduction,
// scaling experiments and the verification suite.
//
// Every sub-command reads an optional JSON config (--config); flags mirror the
// config fields and take precedence. Exit codes: 0 success, 2 config error,
// 3 window or state-space guard, 4 statistical or equivalence gate failure.

#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "run_context.hpp"
#include "vmp/config.hpp"
#include "vmp/errors.hpp"
#include "vmp/version.hpp"

namespace {

using nlohmann::json;
using vmp::cli::ConfigError;

/// A flag that, when given, overwrites one config field.
struct Override {
  CLI::Option* option;
  std::function<void(json&)> apply;
};

struct Command {
  std::string name;
  CLI::App* app = nullptr;
  std::vector<Override> overrides;
  std::function<int(vmp::cli::RunContext&)> run;
};

template <typename T>
void mirror(Command& c, const std::string& flag, const std::string& field, const std::string& help) {
  auto value = std::make_shared<T>();
  CLI::Option* opt = c.app->add_option(flag, *value, help + " (config: " + field + ")");
  c.overrides.push_back({opt, [value, field](json& j) { j[field] = *value; }});
}

/// --point X,T (repeatable) mirrors "points".
void mirror_points(Command& c) {
  auto value = std::make_shared<std::vector<std::string>>();
  CLI::Option* opt =
      c.app->add_option("--point", *value, "query point X,T; repeatable (config: points)");
  c.overrides.push_back({opt, [value](json& j) {
                           json pts = json::array();
                           for (const std::string& s : *value) {
                             const auto comma = s.find(',');
                             if (comma == std::string::npos) {
                               throw ConfigError("--point: expected X,T, got \"" + s + "\"");
                             }
                             try {
                               pts.push_back({std::stoll(s.substr(0, comma)),
                                              std::stoll(s.substr(comma + 1))});
                             } catch (const std::exception&) {
                               throw ConfigError("--point: expected integers X,T, got \"" + s +
                                                 "\"");
                             }
                           }
                           j["points"] = pts;
                         }});
}

/// --beta / --q build a Potts "model" block when the config has none.
void mirror_potts_model(Command& c) {
  auto beta = std::make_shared<double>();
  auto q = std::make_shared<int>();
  CLI::Option* b = c.app->add_option("--beta", *beta, "Potts inverse temperature (config: model.beta)");
  CLI::Option* qo = c.app->add_option("--q", *q, "number of colors (config: model.q)");
  c.overrides.push_back({b, [beta](json& j) {
                           if (!j.contains("model")) j["model"] = {{"model", "potts"}};
                           j["model"]["beta"] = *beta;
                         }});
  c.overrides.push_back({qo, [q](json& j) {
                           if (!j.contains("model")) j["model"] = {{"model", "potts"}};
                           j["model"]["q"] = *q;
                         }});
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream is(path);
  if (!is) throw ConfigError("--config: cannot open " + path);
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError("--config: " + path + " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) {
    throw ConfigError("$: expected object, got " + vmp::config::type_name(j));
  }
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Voter model perturbations: forward chain, dual coloring and scaling diagnostics"};
  app.set_version_flag("--version", std::string(vmp::kVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed_flag = 0;
  unsigned workers = 1;
  std::string out_dir = "vmp-out";

  std::vector<Command> commands;
  auto add = [&](std::string name, std::string help, std::function<int(vmp::cli::RunContext&)> run) {
    Command c;
    c.name = name;
    c.app = app.add_subcommand(name, help);
    c.run = std::move(run);
    commands.push_back(std::move(c));
    return &commands.back();
  };
  commands.reserve(7);

  Command* sim = add("simulate", "run the forward chain on a window", vmp::cli::run_simulate);
  mirror_potts_model(*sim);
  mirror<std::int64_t>(*sim, "--x-min", "x_min", "left end of the initial window");
  mirror<std::int64_t>(*sim, "--x-max", "x_max", "right end of the initial window");
  mirror<std::int64_t>(*sim, "--steps", "steps", "number of time steps");

  Command* dual = add("dual-sample", "color the backward graphs of query points",
                      vmp::cli::run_dual_sample);
  mirror_potts_model(*dual);
  mirror_points(*dual);
  mirror<std::uint64_t>(*dual, "--samples", "samples", "number of independent samples");

  Command* check = add("check-duality", "forward vs dual goodness-of-fit and exact oracles",
                       vmp::cli::run_check_duality);
  mirror_potts_model(*check);
  mirror_points(*check);
  mirror<std::uint64_t>(*check, "--trials", "trials", "samples per side");
  mirror<bool>(*check, "--exact", "exact", "also compare the exact oracles");

  Command* red = add("reduce-graph", "reduce a backward graph to its relevant separation points",
                     vmp::cli::run_reduce_graph);
  mirror<std::string>(*red, "--fixture", "fixture", "graph JSON file");
  mirror<std::string>(*red, "--field", "field", "arrow field text file (backward)");
  mirror<int>(*red, "--q", "q", "color both graphs with uniform noise on q colors");
  mirror<std::string>(*red, "--method", "method", "relevance test: dominators or max-flow");
  {
    auto root = std::make_shared<std::vector<std::int64_t>>();
    CLI::Option* opt = red->app->add_option("--root", *root, "root X T for --field (config: root)")
                           ->expected(2)
                           ->delimiter(',');
    red->overrides.push_back({opt, [root](json& j) { j["root"] = *root; }});
  }

  Command* potts = add("potts-params", "Potts (w, b, kappa) for given beta and q",
                       vmp::cli::run_potts_params);
  mirror<double>(*potts, "--beta", "beta", "inverse temperature");
  mirror<int>(*potts, "--q", "q", "number of colors");

  Command* scal = add("scaling-experiment", "interface, marginal or separation-point diagnostics",
                      vmp::cli::run_scaling_experiment);
  mirror<std::string>(*scal, "--experiment", "experiment", "interfaces, marginals or separation");
  mirror<std::uint64_t>(*scal, "--trials", "trials", "trials per level");
  mirror<double>(*scal, "--t", "t", "rescaled time of the interface census");
  mirror<std::uint64_t>(*scal, "--bootstrap", "bootstrap", "bootstrap resamples");

  Command* ver = add("verify-all", "run the invariant, oracle and statistical suite",
                     vmp::cli::run_verify_all);
  mirror<std::uint64_t>(*ver, "--gof-trials", "gof_trials", "samples per duality setting");
  mirror<std::uint64_t>(*ver, "--fuzz-dags", "fuzz_dags", "fuzzed graphs for the reduction check");
  mirror<std::uint64_t>(*ver, "--order-dags", "order_dags", "graphs for the order check");
  mirror<std::uint64_t>(*ver, "--coarsening-trials", "coarsening_trials", "trials per level");

  CLI::Option* seed_opt = nullptr;
  std::vector<CLI::Option*> seed_opts;
  for (Command& c : commands) {
    c.app->add_option("--config", config_path, "JSON config file");
    seed_opt = c.app->add_option("--seed", seed_flag, "64-bit master seed (config: seed)");
    seed_opts.push_back(seed_opt);
    c.app->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    c.app->add_option("--out", out_dir, "output directory (created if missing)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : vmp::cli::kConfig;
  }

  std::unique_ptr<vmp::cli::RunContext> ctx;
  auto finish = [&](const std::string& status, int code) {
    if (ctx) {
      try {
        ctx->write_manifest(status);
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
      }
    }
    return code;
  };

  for (std::size_t k = 0; k < commands.size(); ++k) {
    Command& c = commands[k];
    if (!c.app->parsed()) continue;
    try {
      json cfg = load_config(config_path);
      for (const Override& o : c.overrides) {
        if (o.option->count() > 0) o.apply(cfg);
      }
      std::optional<std::uint64_t> seed;
      if (seed_opts[k]->count() > 0) {
        seed = seed_flag;
      } else if (const json* s = vmp::config::optional_member(cfg, "seed")) {
        seed = vmp::config::as_unsigned(*s, "$.seed");
      }
      cfg.erase("seed");
      ctx = std::make_unique<vmp::cli::RunContext>(c.name, cfg, seed, workers, out_dir);
      const int code = c.run(*ctx);
      if (code == vmp::cli::kGate) std::cerr << "gate failure: see " << out_dir << '\n';
      return finish(code == vmp::cli::kOk ? "ok" : "gate-failure", code);
    } catch (const ConfigError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return finish("config-error", vmp::cli::kConfig);
    } catch (const vmp::ParseError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return finish("config-error", vmp::cli::kConfig);
    } catch (const vmp::InvalidArgument& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return finish("config-error", vmp::cli::kConfig);
    } catch (const vmp::InvalidProbability& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return finish("config-error", vmp::cli::kConfig);
    } catch (const vmp::WindowError& e) {
      std::cerr << "guard: " << e.what() << '\n';
      return finish("guard", vmp::cli::kGuard);
    } catch (const vmp::StateSpaceError& e) {
      std::cerr << "guard: " << e.what() << '\n';
      return finish("guard", vmp::cli::kGuard);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return finish("error", vmp::cli::kFailure);
    }
  }
  return vmp::cli::kFailure;
}
