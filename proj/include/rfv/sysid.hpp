#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "rfv/evolution.hpp"
#include "rfv/system.hpp"

namespace rfv::sysid {

/// Controller inputs (y_p(t), y_r(t+1)), one output u(t), one internal unit.
inline const Dimensions kDims{2, 1, 1};

/// Fitness returned when a controller cannot be assembled or the plant diverges.
inline constexpr double kWorstFitness = -1e6;

/// Plant outputs beyond this magnitude abort the episode.
inline constexpr double kDivergenceBound = 1e3;

struct PlantState {
  double y_t = 0.0;
  double y_tm1 = 0.0;
};

/// y(t+1) = y(t) y(t-1) (y(t) + 2.5) / (1 + y(t)^2 + y(t-1)^2) + u.
double plant_step(const PlantState& s, double u);

/// Training reference: 0.6 y(t) + 0.2 y(t-1) + 0.2 sin(2 pi t / 25) + 0.4 sin(pi t / 32).
double reference_step(double y_t, double y_tm1, long t);

/// Held-out evaluation reference (a substitute for the graphical test signal):
/// 0.6 y(t) + 0.2 y(t-1) + 0.3 sin(2 pi t / 20) + 0.3 sin(pi t / 45).
double test_reference_step(double y_t, double y_tm1, long t);

using ReferenceStep = std::function<double(double, double, long)>;

/// y_r(1..length) from zero initial conditions; element t is the target for step t.
std::vector<double> reference_signal(std::size_t length, const ReferenceStep& step);

/// Reads a user-supplied reference: one value per row, from a single column
/// or a column named `y_r`. Lines starting with '#' are skipped.
std::vector<double> load_signal_csv(const std::filesystem::path& path);

struct SignalRange {
  double lower = -3.0;
  double upper = 3.0;

  double normalize(double y) const { return (y - lower) / (upper - lower); }
};

/// Widens `range` symmetrically to cover the signal; returns true if it had to.
bool widen_to_cover(SignalRange& range, const std::vector<double>& signal);

struct SysidConfig {
  std::size_t episode_length = 250;
  SignalRange range;
  /// Targets y_r(t+1); when empty, the training reference is generated.
  std::vector<double> reference;

  /// Targets in use: `reference` or the generated training signal.
  std::vector<double> targets() const;
  void validate() const;
};

struct TraceRow {
  std::size_t t = 0;
  double y_r = 0.0;  ///< y_r(t+1)
  double y_p = 0.0;  ///< y_p(t+1)
  double u = 0.0;    ///< u(t)
  double rms_running = 0.0;
};

struct EpisodeResult {
  double rms = 0.0;
  bool diverged = false;
  std::vector<TraceRow> trace;
};

/// Controller signature: (y_p(t), y_r(t+1), t) -> u(t), in plant units.
using Controller = std::function<double(double, double, std::size_t)>;

EpisodeResult run_episode(const Controller& controller, const SysidConfig& cfg);

/// Runs an RFV controller after reset_state; inputs are normalized with cfg.range.
EpisodeResult run_episode(RfvSystem& system, const SysidConfig& cfg);

/// -RMS on the training episode; kWorstFitness on assembly failure or divergence.
double sysid_fitness(const evolution::Individual& ind, const SysidConfig& cfg);

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace, const std::string& provenance = {});

}  // namespace rfv::sysid
