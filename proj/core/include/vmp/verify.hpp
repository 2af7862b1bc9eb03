#pragma once

// The invariant, oracle and statistical gate suite shared by `verify-all` and
// the acceptance tests. Every check is a pure function of its options, so a
// run is reproducible from the seed whatever the worker count.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vmp/scaling.hpp"

namespace vmp {

struct VerifyOptions {
  std::uint64_t seed = 42;
  unsigned workers = 1;
  std::size_t gof_trials = 100000;
  std::size_t fuzz_dags = 10000;
  std::size_t order_dags = 1000;
  std::size_t orders_per_dag = 10;
  std::size_t coarsening_trials = 2000;
  std::size_t bootstrap = 400;
};

struct CriterionReport {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string summary;  // one line, human readable
  nlohmann::json details;
};

nlohmann::json to_json(const CriterionReport& report);

/// w + b + kappa = 1 over the beta x q grid.
CriterionReport verify_potts_simplex();
/// kappa e^{2 beta} -> q and b e^beta -> q/2 at beta = 10.
CriterionReport verify_potts_anchors();
/// Detailed balance of the Potts rates against exp(-beta dH).
CriterionReport verify_detailed_balance();
/// Lotka-Volterra and noisy biased voter decompositions reproduce the direct
/// laws; the NBV remainder decays with order >= 2.9.
CriterionReport verify_decompositions();

struct OracleInstance {
  std::string name;
  VmpParams params;
  std::vector<QueryPoint> points;
};
/// Small enumerable instances: q in {2, 3}, t <= 2, at most two points.
std::vector<OracleInstance> oracle_instances();
/// Exact forward and exact dual laws agree on every oracle instance.
CriterionReport verify_oracle_equivalence();

struct GofSetting {
  std::string name;
  VmpParams params;
  std::vector<QueryPoint> points;
};
/// Twenty settings with asymmetric boundary noise, so that the corrupted dual
/// (g transposed) has a different law at the query points.
std::vector<GofSetting> gof_settings();

struct GofGateOutcome {
  std::vector<GofReport> null_reports;       // forward vs dual
  std::vector<GofReport> corrupted_reports;  // forward vs dual with g transposed
  std::vector<double> corruption_tvd;        // exact, per setting
};
/// Forward against dual samples on every setting, and the same forward
/// samples against the corrupted dual.
CriterionReport verify_duality_gate(const VerifyOptions& options,
                                    GofGateOutcome* outcome = nullptr);

/// Full and reduced graphs give the same root color on fuzzed graphs; the
/// max-flow, dominator and brute-force relevance tests agree.
CriterionReport verify_reduction(const VerifyOptions& options);
/// Colorings do not depend on the topological order and agree with the
/// coloring of each sub-graph.
CriterionReport verify_order_consistency(const VerifyOptions& options);

/// The coarsening schedule: q = 3, (b, kappa) = (1.5, 3), uniform g and p,
/// lambda = (0.7, 0.2, 0.1), eps = 2^-3 .. 2^-6.
ScalingSchedule coarsening_schedule();

struct CoarseningOutcome {
  std::vector<LevelInterfaces> interfaces;
  ChiSquareResult finest;  // interface counts of the two finest levels
  MarginalReport marginals;
};
/// Interface counts at time 0.5 on [0, 1] and one-point marginals at
/// (0.5, 0.5) per level.
CriterionReport verify_coarsening(const VerifyOptions& options,
                                  CoarseningOutcome* outcome = nullptr);

struct VerificationRun {
  std::vector<CriterionReport> criteria;
  GofGateOutcome gof;
  CoarseningOutcome coarsening;

  bool passed() const;
};

VerificationRun run_verification(const VerifyOptions& options);

/// Writes results.json, gof.jsonl, interfaces.csv, marginals.csv and
/// marginals.dat into `dir`; returns the file names in that order.
std::vector<std::string> write_verification(const VerificationRun& run,
                                            const std::filesystem::path& dir);

}  // namespace vmp
