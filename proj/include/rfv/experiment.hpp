#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rfv/evolution.hpp"
#include "rfv/robot.hpp"
#include "rfv/sysid.hpp"

namespace rfv::experiment {

/// Invalid configuration; `key` is the dotted path of the offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

enum class Kind { sysid, robot, inspect };

std::string to_string(Kind kind);

struct SysidSection {
  std::size_t episode_length = 250;
  sysid::SignalRange range;
  /// Optional CSV files; empty means the built-in generators.
  std::filesystem::path train_reference;
  std::filesystem::path test_reference;
};

struct RobotSection {
  bool apriori = true;
  std::size_t steps = 500;
  std::size_t test_steps = 800;
  bool stop_at_target = false;
  /// Scenario files; empty means the built-in maze suite.
  std::vector<std::filesystem::path> scenarios;
  std::filesystem::path test_scenario;
};

struct InspectSection {
  std::filesystem::path system;
  std::size_t axis_x = 0;
  std::size_t axis_y = 1;
  std::size_t resolution = 51;
  /// Values of the coordinates off the grid axes; empty means domain centre.
  std::vector<double> fixed;
};

struct ExperimentConfig {
  Kind kind = Kind::sysid;
  std::uint64_t seed = 1;
  std::size_t repetitions = 1;
  std::filesystem::path output_dir;
  /// Best-so-far checkpoint period in generations; the final generation is
  /// always written.
  std::size_t checkpoint_every = 50;
  evolution::GaConfig ga;
  SysidSection sysid;
  RobotSection robot;
  InspectSection inspect;

  /// Fully resolved form, defaults included. The hash is taken over it.
  nlohmann::json to_json() const;
  /// First 16 hex digits of the SHA-256 of the compact resolved JSON.
  std::string hash() const;
  void validate() const;
};

/// Parses a config document. Unknown keys and type errors raise ConfigError
/// with the key path. Relative paths resolve against `base_dir`.
ExperimentConfig parse_config(const nlohmann::json& doc, Kind kind, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path, Kind kind);

enum class ExistingOutput { refuse, suffix };

struct RunOptions {
  std::size_t jobs = 1;
  ExistingOutput existing = ExistingOutput::refuse;
  /// Progress and the summary row go here when set.
  std::ostream* log = nullptr;
};

struct RepetitionResult {
  std::uint64_t seed = 0;
  /// GA fitness of the best-ever individual (higher is better).
  double best_fitness = 0.0;
  /// Reported metric: training RMS for sysid, fitness for robot.
  double metric = 0.0;
  /// Held-out metric: test RMS for sysid, test-maze fitness for robot.
  double test_metric = 0.0;
  std::size_t rule_count = 0;
  double wall_seconds = 0.0;
};

struct RunSummary {
  std::string config_hash;
  std::filesystem::path output_dir;
  std::vector<RepetitionResult> repetitions;
  double mean = 0.0;
  /// Lowest RMS for sysid, highest fitness for robot.
  double best = 0.0;
  double variance = 0.0;
  double wall_seconds = 0.0;
  /// Paths relative to output_dir, in the order written.
  std::vector<std::string> files;
};

/// Picks the output directory: `requested` if absent or empty, otherwise
/// refuses or appends -1, -2, ... as configured.
std::filesystem::path claim_output_dir(const std::filesystem::path& requested, ExistingOutput policy);

/// Runs `repetitions` GA runs with seeds seed, seed + 1, ... and writes
/// stats, checkpoints, traces or episode logs, the summary and a manifest.
RunSummary run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

/// Membership grid and rule metadata of a saved system.
RunSummary run_inspect(const ExperimentConfig& cfg, const RunOptions& options = {});

/// Built-in or file-backed scenario suite of a robot section.
std::vector<robot::Scenario> training_scenarios(const RobotSection& section);
robot::Scenario test_scenario(const RobotSection& section);

}  // namespace rfv::experiment
