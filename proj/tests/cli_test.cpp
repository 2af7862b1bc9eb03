#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <doctest.h>
#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;  // stdout and stderr
};

Run run(const std::string& args) {
  const std::string cmd = std::string(VMP_CLI) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe)) out += buf;
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(VMP_SCRATCH) / name;
  fs::remove_all(p);
  fs::create_directories(p.parent_path());
  return p;
}

fs::path write_config(const std::string& name, const json& j) {
  const fs::path p = fs::path(VMP_SCRATCH) / (name + ".json");
  fs::create_directories(p.parent_path());
  std::ofstream(p) << j.dump();
  return p;
}

json read_json(const fs::path& p) {
  std::ifstream is(p);
  return json::parse(is);
}

/// Every file of the run directory except the manifest is listed exactly once.
void check_manifest(const fs::path& dir, const std::string& command) {
  const json m = read_json(dir / "manifest.json");
  CHECK(m.at("command") == command);
  CHECK(m.at("config_hash").get<std::string>().rfind("fnv1a64:", 0) == 0);
  CHECK(m.at("versions").contains("vmp"));
  CHECK(m.at("wall_time_seconds").is_number());
  CHECK(m.contains("seed"));
  std::multiset<std::string> listed;
  for (const auto& a : m.at("artifacts")) listed.insert(a.get<std::string>());
  std::multiset<std::string> present;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().filename() != "manifest.json") present.insert(e.path().filename().string());
  }
  CHECK(listed == present);
}

const json kPotts = {{"model", "potts"}, {"beta", 1.0}, {"q", 3}};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("simulate writes a field and a manifest") {
  const fs::path out = scratch("simulate");
  const fs::path cfg =
      write_config("simulate", {{"model", kPotts}, {"x_min", -10}, {"x_max", 10}, {"steps", 6}});
  const Run r = run("simulate --config " + cfg.string() + " --seed 3 --out " + out.string());
  REQUIRE(r.code == 0);
  CHECK(r.out.find("final slice t=6") != std::string::npos);
  std::ifstream csv(out / "field.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "t,x,color");
  check_manifest(out, "simulate");
  CHECK(read_json(out / "manifest.json").at("seed") == 3);
}

TEST_CASE("flags override config fields") {
  const fs::path out = scratch("override");
  const fs::path cfg = write_config(
      "override", {{"model", kPotts}, {"x_min", -10}, {"x_max", 10}, {"steps", 6}, {"seed", 8}});
  const Run r = run("simulate --config " + cfg.string() + " --steps 2 --out " + out.string());
  REQUIRE(r.code == 0);
  const json m = read_json(out / "manifest.json");
  CHECK(m.at("seed") == 8);
  CHECK(m.at("config").at("steps") == 2);
}

TEST_CASE("configuration errors exit with 2") {
  const fs::path cfg =
      write_config("noseed", {{"model", kPotts}, {"x_min", -10}, {"x_max", 10}, {"steps", 6}});
  SUBCASE("missing seed") {
    const Run r = run("simulate --config " + cfg.string() + " --out " + scratch("noseed").string());
    CHECK(r.code == 2);
    CHECK(r.out.find("$.seed") != std::string::npos);
  }
  SUBCASE("wrong type names the field and the expected type") {
    const fs::path bad = write_config(
        "badtype", {{"model", {{"model", "potts"}, {"beta", "hot"}, {"q", 3}}},
                    {"x_min", -10}, {"x_max", 10}, {"steps", 6}});
    const Run r = run("simulate --config " + bad.string() + " --seed 1 --out " +
                      scratch("badtype").string());
    CHECK(r.code == 2);
    CHECK(r.out.find("$.model.beta: expected number, got string") != std::string::npos);
  }
  SUBCASE("even query point") {
    const fs::path bad = write_config("parity", {{"model", kPotts}, {"points", {{0, 0}}}});
    const Run r = run("dual-sample --config " + bad.string() + " --seed 1 --out " +
                      scratch("parity").string());
    CHECK(r.code == 2);
  }
  SUBCASE("unknown field") {
    const fs::path bad = write_config("unknown", {{"model", kPotts}, {"x_min", 0}, {"x_max", 4},
                                                  {"steps", 1}, {"stpes", 2}});
    const Run r = run("simulate --config " + bad.string() + " --seed 1 --out " +
                      scratch("unknown").string());
    CHECK(r.code == 2);
    CHECK(r.out.find("$.stpes") != std::string::npos);
  }
  SUBCASE("unreadable config") {
    CHECK(run("simulate --config /nonexistent.json --seed 1 --out " + scratch("nofile").string())
              .code == 2);
  }
  SUBCASE("a failed run still writes its manifest") {
    const fs::path out = scratch("noseed-manifest");
    run("simulate --config " + cfg.string() + " --out " + out.string());
    CHECK(read_json(out / "manifest.json").at("status") == "config-error");
  }
}

TEST_CASE("guards exit with 3") {
  SUBCASE("window too narrow for the requested steps") {
    const fs::path out = scratch("narrow");
    const Run r = run("simulate --seed 1 --x-min 0 --x-max 4 --steps 10 --beta 1 --q 3 --out " +
                      out.string());
    CHECK(r.code == 3);
    CHECK(read_json(out / "manifest.json").at("status") == "guard");
  }
  SUBCASE("exact oracle state space") {
    const fs::path cfg = write_config(
        "oracle-guard",
        {{"model", kPotts}, {"points", {{1, 40}, {3, 40}, {5, 40}}}, {"trials", 10}, {"exact", true}});
    const Run r = run("check-duality --config " + cfg.string() + " --seed 1 --out " +
                      scratch("oracle-guard").string());
    // The exact comparison is skipped rather than aborting the run.
    CHECK(r.code == 0);
    CHECK(r.out.find("exact oracles skipped") != std::string::npos);
  }
}

TEST_CASE("a failed statistical gate exits with 4") {
  // Fifty samples per side cannot detect the corrupted dual, so the power
  // half of the duality gate fails.
  const fs::path out = scratch("gate");
  const fs::path cfg = write_config("gate", {{"gof_trials", 50}, {"fuzz_dags", 20}, {"order_dags", 5},
                                             {"orders_per_dag", 2}, {"coarsening_trials", 20},
                                             {"bootstrap", 20}});
  const Run r = run("verify-all --config " + cfg.string() + " --seed 42 --out " + out.string());
  CHECK(r.code == 4);
  CHECK(r.out.find("[FAIL] 6") != std::string::npos);
  CHECK(read_json(out / "manifest.json").at("status") == "gate-failure");
  CHECK(read_json(out / "results.json").is_object());
  check_manifest(out, "verify-all");
}

TEST_CASE("Potts parameters") {
  const fs::path out = scratch("potts");
  const Run r = run("potts-params --beta 0.6931471805599453 --q 3 --out " + out.string());
  REQUIRE(r.code == 0);
  CHECK(r.out == "(w,b,kappa)=(0.4,0.1,0.5)\n");
  const json p = read_json(out / "params.json");
  CHECK(std::abs(p.at("b").get<double>() - 0.1) < 1e-12);
  check_manifest(out, "potts-params");
}

TEST_CASE("reduce-graph reproduces the reduced fixture") {
  const fs::path out = scratch("reduce");
  const Run r = run("reduce-graph --fixture " + std::string(VMP_FIXTURE_DIR) +
                    "/config7.json --q 3 --out " + out.string());
  REQUIRE(r.code == 0);
  const json got = read_json(out / "reduced.json");
  const json want = read_json(fs::path(VMP_FIXTURE_DIR) / "config8.json");
  auto vertex_set = [](const json& list) {
    std::set<std::pair<int, int>> s;
    for (const auto& v : list) s.emplace(v.at("x"), v.at("t"));
    return s;
  };
  CHECK(vertex_set(got.at("relevant")) == vertex_set(want.at("relevant")));
  CHECK(got.at("root_color") == want.at("root_color"));
  // Compare edges by endpoint vertices, since indices may be ordered differently.
  auto edge_set = [](const json& g) {
    std::set<std::tuple<int, int, int, int, int>> s;
    for (const auto& e : g.at("edges")) {
      const json& a = g.at("vertices")[e.at("parent").get<std::size_t>()];
      const json& b = g.at("vertices")[e.at("child").get<std::size_t>()];
      s.emplace(a.at("x"), a.at("t"), b.at("x"), b.at("t"), e.value("multiplicity", 1));
    }
    return s;
  };
  CHECK(edge_set(got) == edge_set(want));
  std::ifstream dot(out / "reduced.dot");
  std::stringstream ss;
  ss << dot.rdbuf();
  CHECK(ss.str().find("x2") != std::string::npos);
  check_manifest(out, "reduce-graph");
}

TEST_CASE("dual samples do not depend on the worker count") {
  const fs::path cfg =
      write_config("dual", {{"model", kPotts}, {"points", {{0, 5}, {2, 5}}}, {"samples", 200}});
  const fs::path a = scratch("dual-1"), b = scratch("dual-3");
  REQUIRE(run("dual-sample --config " + cfg.string() + " --seed 4 --workers 1 --out " + a.string())
              .code == 0);
  REQUIRE(run("dual-sample --config " + cfg.string() + " --seed 4 --workers 3 --out " + b.string())
              .code == 0);
  auto slurp = [](const fs::path& p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
  };
  CHECK(slurp(a / "samples.csv") == slurp(b / "samples.csv"));
  check_manifest(a, "dual-sample");
}

TEST_CASE("check-duality passes on a Potts model") {
  const fs::path out = scratch("check");
  const fs::path cfg =
      write_config("check", {{"model", kPotts}, {"points", {{0, 3}, {2, 3}}}, {"trials", 5000}});
  const Run r = run("check-duality --config " + cfg.string() + " --seed 11 --out " + out.string());
  CHECK(r.code == 0);
  check_manifest(out, "check-duality");
}

TEST_CASE("scaling experiment writes its table") {
  const fs::path out = scratch("scaling");
  const fs::path cfg = write_config(
      "scaling", {{"experiment", "interfaces"}, {"schedule", {{"dyadic", {2, 3}}, {"b", 1.0}, {"kappa", 1.0}, {"q", 2}}},
                  {"trials", 20}, {"t", 0.5}, {"x_min", 0.0}, {"x_max", 1.0}});
  const Run r = run("scaling-experiment --config " + cfg.string() + " --seed 2 --out " + out.string());
  CHECK(r.code == 0);
  CHECK(fs::exists(out / "interfaces.csv"));
  check_manifest(out, "scaling-experiment");
}

}  // TEST_SUITE
