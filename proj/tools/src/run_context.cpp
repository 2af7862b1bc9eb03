#include "run_context.hpp"

#include <cstdio>
#include <fstream>

#include <CLI11.hpp>

#include "vmp/version.hpp"

namespace vmp::cli {

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunContext::RunContext(std::string command, nlohmann::json config,
                       std::optional<std::uint64_t> seed, unsigned workers,
                       std::filesystem::path out)
    : command_(std::move(command)),
      config_(std::move(config)),
      seed_(seed),
      workers_(workers == 0 ? 1 : workers),
      out_(std::move(out)),
      start_(std::chrono::steady_clock::now()) {
  std::error_code ec;
  std::filesystem::create_directories(out_, ec);
  if (ec || !std::filesystem::is_directory(out_)) {
    throw ConfigError("--out: cannot create directory " + out_.string());
  }
}

std::uint64_t RunContext::seed() const {
  if (!seed_) throw ConfigError("$.seed: required field is missing (pass --seed or set it in --config)");
  return *seed_;
}

void RunContext::write(const std::string& name, const std::string& content) {
  std::ofstream os(out_ / name, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + (out_ / name).string());
  os << content;
  record(name);
}

void RunContext::record(const std::string& name) {
  if (std::find(artifacts_.begin(), artifacts_.end(), name) == artifacts_.end()) {
    artifacts_.push_back(name);
  }
}

void RunContext::write_manifest(const std::string& status) {
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  nlohmann::json m{
      {"command", command_},
      {"status", status},
      {"seed", seed_ ? nlohmann::json(*seed_) : nlohmann::json(nullptr)},
      {"workers", workers_},
      {"config_hash", "fnv1a64:" + fnv1a_hex(config_.dump())},
      {"config", config_},
      {"versions",
       {{"vmp", kVersion},
        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
        {"cli11", CLI11_VERSION},
        {"compiler", __VERSION__}}},
      {"wall_time_seconds", wall},
      {"artifacts", artifacts_},
  };
  std::ofstream os(out_ / "manifest.json");
  if (!os) throw std::runtime_error("cannot write manifest in " + out_.string());
  os << m.dump(2) << '\n';
}

}  // namespace vmp::cli
