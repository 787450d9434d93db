#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rfv/evolution.hpp"
#include "rfv/system.hpp"

namespace rfv::robot {

/// Inputs (L, C, R, B, G), outputs (left motor, right motor), one internal unit.
inline const Dimensions kDims{5, 1, 2};

/// Khepera-like platform constants; lengths in mm, time in s.
namespace khepera {
inline constexpr double kRadius = 27.5;
inline constexpr double kWheelBase = 53.0;
inline constexpr double kMaxWheelSpeed = 80.0;
inline constexpr double kTimeStep = 0.1;
inline constexpr double kSensorRange = 50.0;
inline constexpr double kLightRange = 300.0;
inline constexpr std::size_t kSensorCount = 8;
/// Sensor bearings in degrees, counter-clockwise from the heading:
/// left pair, front pair, right pair, back pair.
inline constexpr std::array<double, kSensorCount> kSensorBearingsDeg{85.0, 45.0, 10.0, -10.0, -45.0, -85.0, -170.0, 170.0};
}  // namespace khepera

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct Segment {
  Vec2 a;
  Vec2 b;
};

struct Light {
  Vec2 position;
  bool on = false;
};

struct RobotPose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

struct Scenario {
  std::string name;
  std::vector<Segment> walls;
  std::vector<Light> lights;
  RobotPose start;
  Vec2 target;
};

struct SensorReading {
  std::array<double, khepera::kSensorCount> proximity{};
  double ambient_light = 0.0;

  double max_proximity() const;
};

/// Wraps an angle into (-pi, pi].
double wrap_angle(double theta);

double point_segment_distance(Vec2 p, const Segment& s);

SensorReading sense(const Scenario& scenario, const RobotPose& pose);

/// (mean left pair, mean front pair, mean right pair, mean back pair, light).
std::array<double, 5> controller_inputs(const SensorReading& reading);

struct StepOutcome {
  RobotPose pose;
  bool collided = false;
};

/// Differential-drive update over one time step; motors are clamped to [0, 1].
/// A move that brings any wall closer than the robot radius is reverted.
StepOutcome step_robot(const Scenario& scenario, const RobotPose& pose, double left, double right);

/// v * (1 - a) * (1 - d).
double step_term(double speed, double activation, double distance);

struct LogRow {
  std::size_t t = 0;
  RobotPose pose;
  SensorReading reading;
  double left = 0.0;
  double right = 0.0;
  double h1 = 0.0;
  double term = 0.0;
};

struct EpisodeLog {
  std::vector<LogRow> rows;
};

struct EpisodeOptions {
  std::size_t steps = 500;
  /// End the episode once the normalized target distance drops below 0.02.
  bool stop_at_target = false;
  bool record = false;
};

struct EpisodeResult {
  double fitness_sum = 0.0;
  std::size_t steps_taken = 0;
  bool collided = false;
  EpisodeLog log;
};

EpisodeResult fitness_episode(RfvSystem& system, const Scenario& scenario, const EpisodeOptions& options = {});

/// Mean per-step term over all scenarios: (1 / (e s)) sum of episode sums.
/// Returns 0 when the controller cannot be assembled.
double robot_fitness(const evolution::Individual& ind, std::span<const Scenario> scenarios, std::size_t steps,
                     const evolution::AprioriSet& apriori, bool stop_at_target = false);

/// The six expert rules over (L, C, R, B, G, y1) with outputs (v1, v2, y1).
evolution::AprioriSet load_apriori_table();

void write_episode_csv(std::ostream& out, const EpisodeLog& log, const std::string& provenance = {});

/// Corridor maze: a start leg heading +y, one T-intersection per letter of
/// `turns` ('L' or 'R'), then a room holding the target. A light before each
/// intersection is on for a left turn and off for a right turn.
/// Lengths in mm, all multiples of 50; the corridor width a multiple of 100.
struct MazeLayout {
  int corridor = 200;
  int leg = 600;
  int stub = 200;
  int final_leg = 400;
  int room = 600;
  int behind_start = 150;
};

Scenario corridor_maze(const std::string& turns, const std::string& name, const MazeLayout& layout = {});

/// Four training mazes (LRL, LRR, RLL, RLR) and a held-out maze (RLRL).
std::vector<Scenario> default_training_scenarios();
Scenario default_test_scenario();

nlohmann::json scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(const nlohmann::json& doc);
Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

}  // namespace rfv::robot
