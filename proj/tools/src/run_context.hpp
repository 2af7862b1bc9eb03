#pragma once

// Shared plumbing of the `vmp` sub-commands: the effective config, seed and
// output directory of one run, artifact bookkeeping and the run manifest.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace vmp::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfig = 2, kGuard = 3, kGate = 4 };

/// A malformed or incomplete run configuration (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 64-bit FNV-1a of a byte string, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

class RunContext {
 public:
  RunContext(std::string command, nlohmann::json config, std::optional<std::uint64_t> seed,
             unsigned workers, std::filesystem::path out);

  const std::string& command() const noexcept { return command_; }
  const nlohmann::json& config() const noexcept { return config_; }
  unsigned workers() const noexcept { return workers_; }
  const std::filesystem::path& out() const noexcept { return out_; }

  /// The seed; throws ConfigError when the run has none.
  std::uint64_t seed() const;
  bool has_seed() const noexcept { return seed_.has_value(); }

  /// Writes `content` to out/name and records it as an artifact.
  void write(const std::string& name, const std::string& content);
  /// Records a file written by other means.
  void record(const std::string& name);

  /// Writes manifest.json: config hash, seed, versions, wall time, artifacts.
  void write_manifest(const std::string& status);

 private:
  std::string command_;
  nlohmann::json config_;
  std::optional<std::uint64_t> seed_;
  unsigned workers_;
  std::filesystem::path out_;
  std::vector<std::string> artifacts_;
  std::chrono::steady_clock::time_point start_;
};

/// Sub-command entry points; each returns an exit code.
int run_simulate(RunContext& ctx);
int run_dual_sample(RunContext& ctx);
int run_check_duality(RunContext& ctx);
int run_reduce_graph(RunContext& ctx);
int run_potts_params(RunContext& ctx);
int run_scaling_experiment(RunContext& ctx);
int run_verify_all(RunContext& ctx);

}  // namespace vmp::cli
