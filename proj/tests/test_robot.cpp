#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "rfv/robot.hpp"

using namespace rfv;
using namespace rfv::robot;

namespace {

constexpr double kPi = std::numbers::pi;

Scenario open_arena() {
  Scenario s;
  s.name = "open";
  s.start = {0.0, 0.0, 0.0};
  s.target = {1000.0, 0.0};
  return s;
}

// Wall across the heading (+x) at the given x.
Scenario wall_ahead(double x) {
  Scenario s = open_arena();
  s.walls.push_back({{x, -500.0}, {x, 500.0}});
  return s;
}

// Controller with one constant rule per corner pair; outputs everywhere (l, r).
RfvSystem constant_controller(double left, double right) {
  std::vector<FuzzyRule> rules;
  const std::vector<double> out{left, right, 0.0};
  rules.push_back(FuzzyRule::constant({0.2, 0.2, 0.2, 0.2, 0.2, 0.2}, out));
  rules.push_back(FuzzyRule::constant({0.8, 0.8, 0.8, 0.8, 0.8, 0.8}, out));
  return RfvSystem(kDims, rules);
}

evolution::Individual constant_individual(double left, double right) {
  evolution::Individual ind;
  ind.rules = constant_controller(left, right).rules();
  return ind;
}

}  // namespace

TEST(Geometry, WrapAngle) {
  EXPECT_DOUBLE_EQ(wrap_angle(3 * kPi), kPi);
  EXPECT_DOUBLE_EQ(wrap_angle(-kPi), kPi);
  EXPECT_DOUBLE_EQ(wrap_angle(kPi / 2 + 4 * kPi), kPi / 2);
  EXPECT_NEAR(wrap_angle(-2.5 * kPi), -kPi / 2, 1e-15);
  EXPECT_DOUBLE_EQ(point_segment_distance({0, 3}, {{-1, 0}, {1, 0}}), 3.0);
  EXPECT_DOUBLE_EQ(point_segment_distance({4, 4}, {{-1, 0}, {1, 0}}), 5.0);
}

TEST(Sense, EmptyArenaReadsNothing) {
  const SensorReading r = sense(open_arena(), {0, 0, 0.3});
  for (double p : r.proximity) EXPECT_EQ(p, 0.0);
  EXPECT_EQ(r.ambient_light, 0.0);
}

TEST(Sense, WallAtRangeReadsZeroOnFrontPair) {
  using namespace khepera;
  // The +-10 degree rays leave the rim and meet x = X after (X - R cos) / cos.
  const double c = std::cos(10.0 * kPi / 180.0);
  const SensorReading r = sense(wall_ahead((kSensorRange + kRadius) * c), {0, 0, 0});
  EXPECT_NEAR(r.proximity[2], 0.0, 1e-12);
  EXPECT_NEAR(r.proximity[3], 0.0, 1e-12);
  const SensorReading closer = sense(wall_ahead((0.5 * kSensorRange + kRadius) * c), {0, 0, 0});
  EXPECT_NEAR(closer.proximity[2], 0.5, 1e-12);
  EXPECT_NEAR(closer.proximity[3], 0.5, 1e-12);
}

TEST(Sense, TouchingLeftWallSaturatesLeftSensor) {
  Scenario s = open_arena();
  s.walls.push_back({{-500.0, khepera::kRadius + 0.01}, {500.0, khepera::kRadius + 0.01}});
  const SensorReading r = sense(s, {0, 0, 0});
  EXPECT_GT(r.proximity[0], 0.99);
  EXPECT_EQ(r.proximity[5], 0.0);
  EXPECT_GT(r.max_proximity(), 0.99);
}

TEST(Sense, LightFalloffAndStatus) {
  Scenario s = open_arena();
  s.lights.push_back({{150.0, 0.0}, true});
  s.lights.push_back({{10.0, 0.0}, false});
  s.lights.push_back({{0.0, 240.0}, true});
  EXPECT_NEAR(sense(s, {0, 0, 0}).ambient_light, 0.5, 1e-15);
  EXPECT_EQ(sense(s, {0, -400, 0}).ambient_light, 0.0);
}

TEST(Sense, MirrorSwapsLeftAndRight) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-90.0, 90.0);
  for (int trial = 0; trial < 200; ++trial) {
    Scenario s = open_arena();
    Scenario m = open_arena();
    for (int k = 0; k < 4; ++k) {
      Segment w{{u(rng), u(rng)}, {u(rng), u(rng)}};
      if (point_segment_distance({0, 0}, w) < khepera::kRadius) continue;
      s.walls.push_back(w);
      m.walls.push_back({{w.a.x, -w.a.y}, {w.b.x, -w.b.y}});
    }
    const SensorReading a = sense(s, {0, 0, 0});
    const SensorReading b = sense(m, {0, 0, 0});
    for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(a.proximity[i], b.proximity[5 - i], 1e-12);
    EXPECT_NEAR(a.proximity[6], b.proximity[7], 1e-12);
    EXPECT_NEAR(a.proximity[7], b.proximity[6], 1e-12);
  }
}

TEST(Inputs, PairMeans) {
  SensorReading zero;
  for (double v : controller_inputs(zero)) EXPECT_EQ(v, 0.0);
  SensorReading ones;
  ones.proximity.fill(1.0);
  const auto in1 = controller_inputs(ones);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(in1[i], 1.0);
  EXPECT_EQ(in1[4], 0.0);
  SensorReading hand;
  hand.proximity[0] = 0.2;
  hand.proximity[1] = 0.4;
  hand.ambient_light = 0.7;
  const auto in2 = controller_inputs(hand);
  EXPECT_NEAR(in2[0], 0.3, 1e-15);
  EXPECT_EQ(in2[1], 0.0);
  EXPECT_EQ(in2[4], 0.7);
}

TEST(Kinematics, StraightAdvance) {
  const StepOutcome o = step_robot(open_arena(), {0, 0, 0}, 1.0, 1.0);
  EXPECT_FALSE(o.collided);
  EXPECT_NEAR(o.pose.x, 8.0, 1e-12);
  EXPECT_NEAR(o.pose.y, 0.0, 1e-12);
  EXPECT_EQ(o.pose.theta, 0.0);
  const StepOutcome clamped = step_robot(open_arena(), {0, 0, 0}, 3.0, 1.5);
  EXPECT_NEAR(clamped.pose.x, 8.0, 1e-12);
}

TEST(Kinematics, ArcAboutTheRightWheel) {
  const RobotPose start{10.0, -20.0, 0.7};
  const StepOutcome o = step_robot(open_arena(), start, 1.0, 0.0);
  EXPECT_NEAR(o.pose.theta - start.theta, -khepera::kMaxWheelSpeed * khepera::kTimeStep / khepera::kWheelBase, 1e-12);
  // The right wheel sits half a wheel base to the right of the centre.
  auto right_wheel = [](const RobotPose& p) {
    const double h = 0.5 * khepera::kWheelBase;
    return Vec2{p.x + h * std::sin(p.theta), p.y - h * std::cos(p.theta)};
  };
  EXPECT_NEAR(right_wheel(o.pose).x, right_wheel(start).x, 1e-12);
  EXPECT_NEAR(right_wheel(o.pose).y, right_wheel(start).y, 1e-12);
}

TEST(Kinematics, CollisionRevertsPose) {
  const RobotPose start{0.0, 0.0, 0.0};
  const StepOutcome o = step_robot(wall_ahead(khepera::kRadius + 4.0), start, 1.0, 1.0);
  EXPECT_TRUE(o.collided);
  EXPECT_EQ(o.pose.x, start.x);
  EXPECT_EQ(o.pose.y, start.y);
  EXPECT_EQ(o.pose.theta, start.theta);
  EXPECT_FALSE(step_robot(wall_ahead(khepera::kRadius + 9.0), start, 1.0, 1.0).collided);
}

TEST(Kinematics, NeverEndsInsideAWall) {
  const Scenario maze = default_training_scenarios()[0];
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> motor(0.0, 1.0);
  RobotPose pose = maze.start;
  int collisions = 0;
  for (int t = 0; t < 20000; ++t) {
    const StepOutcome o = step_robot(maze, pose, motor(rng), motor(rng));
    collisions += o.collided ? 1 : 0;
    pose = o.pose;
    for (const Segment& w : maze.walls) ASSERT_GE(point_segment_distance({pose.x, pose.y}, w), khepera::kRadius);
  }
  EXPECT_GT(collisions, 0);
}

TEST(Fitness, StepTermExamples) {
  EXPECT_EQ(step_term(1.0, 0.0, 0.0), 1.0);
  EXPECT_EQ(step_term(1.0, 1.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(step_term(1.0, 0.0, 0.5) + step_term(0.5, 0.5, 0.25), 0.6875);
}

TEST(Fitness, OpenRunAccumulatesDistanceWeightedSpeed) {
  RfvSystem sys = constant_controller(1.0, 1.0);
  const Scenario s = open_arena();
  EpisodeOptions opt;
  opt.steps = 50;
  opt.record = true;
  const EpisodeResult r = fitness_episode(sys, s, opt);
  EXPECT_FALSE(r.collided);
  ASSERT_EQ(r.log.rows.size(), 50u);
  double sum = 0.0;
  for (const LogRow& row : r.log.rows) {
    // A little weight leaks to the bounding simplex, so the motors sit just below 1.
    EXPECT_NEAR(row.left, 1.0, 1e-3);
    EXPECT_EQ(row.left, row.right);
    EXPECT_NEAR(row.pose.y, 0.0, 1e-12);
    const double d = (1000.0 - row.pose.x) / 1000.0;
    EXPECT_NEAR(row.term, row.left * (1.0 - d), 1e-12);
    sum += row.term;
  }
  EXPECT_NEAR(r.fitness_sum, sum, 1e-12);
}

TEST(Fitness, CollisionStepScoresZeroAndEnds) {
  RfvSystem sys = constant_controller(1.0, 1.0);
  EpisodeOptions opt;
  opt.steps = 100;
  opt.record = true;
  const EpisodeResult r = fitness_episode(sys, wall_ahead(200.0), opt);
  EXPECT_TRUE(r.collided);
  EXPECT_LT(r.steps_taken, 100u);
  ASSERT_EQ(r.log.rows.size(), r.steps_taken);
  EXPECT_EQ(r.log.rows.back().term, 0.0);
  for (const LogRow& row : r.log.rows) {
    EXPECT_GE(row.term, 0.0);
    EXPECT_LE(row.term, 1.0);
  }
}

TEST(Fitness, StopAtTargetIsOptional) {
  Scenario s = open_arena();
  s.target = {80.0, 0.0};
  RfvSystem sys = constant_controller(1.0, 1.0);
  EpisodeOptions opt;
  opt.steps = 30;
  EXPECT_EQ(fitness_episode(sys, s, opt).steps_taken, 30u);
  opt.stop_at_target = true;
  EXPECT_EQ(fitness_episode(sys, s, opt).steps_taken, 10u);
}

TEST(Fitness, EpisodesAreDeterministic) {
  const Scenario s = default_training_scenarios()[1];
  RfvSystem sys = RfvSystem(kDims, load_apriori_table().rules);
  EpisodeOptions opt;
  opt.steps = 200;
  opt.record = true;
  const EpisodeResult a = fitness_episode(sys, s, opt);
  const EpisodeResult b = fitness_episode(sys, s, opt);
  std::ostringstream oa, ob;
  write_episode_csv(oa, a.log);
  write_episode_csv(ob, b.log);
  EXPECT_EQ(oa.str(), ob.str());
}

TEST(Fitness, RobotFitnessDefinition) {
  const auto scenarios = default_training_scenarios();
  const auto one = std::span<const Scenario>(scenarios.data(), 1);
  const evolution::Individual ind = constant_individual(0.9, 0.7);
  RfvSystem sys = constant_controller(0.9, 0.7);
  EpisodeOptions opt;
  opt.steps = 120;
  EXPECT_DOUBLE_EQ(robot_fitness(ind, one, 120, {}), fitness_episode(sys, scenarios[0], opt).fitness_sum / 120.0);
  std::mt19937_64 rng(6);
  evolution::GaConfig cfg;
  cfg.population_size = 6;
  evolution::Rng erng(6);
  for (const auto& random : evolution::init_population(cfg, kDims, geometry::Box::unit(6), erng)) {
    const double f = robot_fitness(random, scenarios, 100, load_apriori_table());
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0);
  }
}

TEST(Fitness, ImmediateCollisionAndBadControllersScoreZero) {
  Scenario boxed = open_arena();
  boxed.walls.push_back({{khepera::kRadius + 3.0, -100.0}, {khepera::kRadius + 3.0, 100.0}});
  const std::vector<Scenario> all{boxed, boxed};
  EXPECT_EQ(robot_fitness(constant_individual(1.0, 1.0), all, 50, {}), 0.0);
  evolution::Individual dup = constant_individual(1.0, 1.0);
  dup.rules[1].site = dup.rules[0].site;
  EXPECT_EQ(robot_fitness(dup, all, 50, {}), 0.0);
  EXPECT_THROW(robot_fitness(dup, {}, 50, {}), ModelError);
}

TEST(Apriori, TableRows) {
  const auto set = load_apriori_table();
  ASSERT_EQ(set.rules.size(), 6u);
  for (const FuzzyRule& r : set.rules) {
    EXPECT_TRUE(r.frozen);
    EXPECT_NO_THROW(r.validate(kDims));
    for (std::size_t row = 0; row < 3; ++row) {
      for (std::size_t col = 1; col < r.columns(); ++col) EXPECT_EQ(r.at(row, col), 0.0);
    }
  }
  auto constants = [](const FuzzyRule& r) { return std::vector<double>{r.at(0, 0), r.at(1, 0), r.at(2, 0)}; };
  EXPECT_EQ(set.rules[0].site, (geometry::Point{0, 0, 0, 0, 0, 0}));
  EXPECT_EQ(constants(set.rules[0]), (std::vector<double>{1, 1, 0}));
  EXPECT_EQ(set.rules[1].site, (geometry::Point{0, 0, 0, 0, 0, 1}));
  EXPECT_EQ(constants(set.rules[1])[2], 1.0);
  EXPECT_EQ(set.rules[2].site, (geometry::Point{0, 0, 0, 0, 1, 0}));
  EXPECT_EQ(constants(set.rules[2]), (std::vector<double>{1, 1, 1}));
  EXPECT_EQ(set.rules[4].site, (geometry::Point{0, 1, 0, 0, 0, 0}));
  EXPECT_EQ(constants(set.rules[4]), (std::vector<double>{1, 0, 0}));
  EXPECT_EQ(set.rules[5].site, (geometry::Point{0, 1, 0, 0, 0, 1}));
  EXPECT_EQ(constants(set.rules[5]), (std::vector<double>{0, 1, 0}));
}

TEST(Apriori, LightLatchesAndTheJunctionClears) {
  // Sites are jittered by ~1e-9 of the box width, so queries at a site are that far off.
  constexpr double kAtSite = 1e-8;
  RfvSystem sys(kDims, load_apriori_table().rules);
  auto step = [&](std::array<double, 5> in) { return sys.infer_step(in); };
  // Light seen: the R_3 site, flag set.
  StepResult r = step({0, 0, 0, 0, 1});
  EXPECT_NEAR(sys.state()[0], 1.0, kAtSite);
  // Dark corridor with the flag set: the R_2 site keeps it.
  r = step({0, 0, 0, 0, 0});
  EXPECT_NEAR(sys.state()[0], 1.0, kAtSite);
  EXPECT_NEAR(r.external_outputs[0], 1.0, kAtSite);
  // Wall ahead with the flag set: R_6 turns left and clears the flag.
  r = step({0, 1, 0, 0, 0});
  EXPECT_NEAR(r.external_outputs[0], 0.0, kAtSite);
  EXPECT_NEAR(r.external_outputs[1], 1.0, kAtSite);
  EXPECT_NEAR(sys.state()[0], 0.0, kAtSite);
  // Wall ahead without the flag: R_5 turns right.
  r = step({0, 1, 0, 0, 0});
  EXPECT_NEAR(r.external_outputs[0], 1.0, kAtSite);
  EXPECT_NEAR(r.external_outputs[1], 0.0, kAtSite);
}

TEST(Maze, LayoutAndLights) {
  const Scenario s = corridor_maze("LRR", "m");
  ASSERT_EQ(s.lights.size(), 3u);
  EXPECT_TRUE(s.lights[0].on);
  EXPECT_FALSE(s.lights[1].on);
  EXPECT_FALSE(s.lights[2].on);
  const MazeLayout lay;
  EXPECT_EQ(s.lights[0].position.x, 0.0);
  EXPECT_EQ(s.lights[0].position.y, lay.leg / 2.0);
  for (const Segment& w : s.walls) {
    EXPECT_GE(point_segment_distance({s.start.x, s.start.y}, w), 0.5 * lay.corridor - 1e-9);
    EXPECT_GE(point_segment_distance(s.target, w), 0.5 * lay.room - 1e-9);
    EXPECT_TRUE(w.a.x == w.b.x || w.a.y == w.b.y);
  }
  EXPECT_EQ(s.start.theta, kPi / 2);
}

TEST(Maze, MirroredTurnsMirrorTheArena) {
  const Scenario a = corridor_maze("LRL", "a");
  const Scenario b = corridor_maze("RLR", "b");
  ASSERT_EQ(a.walls.size(), b.walls.size());
  EXPECT_EQ(a.target.x, -b.target.x);
  EXPECT_EQ(a.target.y, b.target.y);
  const SensorReading ra = sense(a, {0.0, 300.0, kPi / 2});
  const SensorReading rb = sense(b, {0.0, 300.0, kPi / 2});
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(ra.proximity[i], rb.proximity[5 - i], 1e-12);
}

TEST(Maze, InvalidLayoutsAreRejected) {
  EXPECT_THROW(corridor_maze("LX", "m"), ModelError);
  MazeLayout odd;
  odd.leg = 630;
  EXPECT_THROW(corridor_maze("L", "m", odd), ModelError);
  MazeLayout narrow;
  narrow.corridor = 150;
  EXPECT_THROW(corridor_maze("L", "m", narrow), ModelError);
  MazeLayout zero;
  zero.stub = 0;
  EXPECT_THROW(corridor_maze("L", "m", zero), ModelError);
}

TEST(Maze, DefaultSuite) {
  const auto train = default_training_scenarios();
  ASSERT_EQ(train.size(), 4u);
  std::set<std::string> names;
  for (const Scenario& s : train) {
    EXPECT_EQ(s.lights.size(), 3u);
    names.insert(s.name);
  }
  EXPECT_EQ(names.size(), 4u);
  EXPECT_EQ(default_test_scenario().lights.size(), 4u);
}

TEST(ScenarioJson, RoundTripAndErrors) {
  const Scenario s = default_test_scenario();
  const Scenario back = scenario_from_json(nlohmann::json::parse(scenario_to_json(s).dump()));
  EXPECT_EQ(back.name, s.name);
  ASSERT_EQ(back.walls.size(), s.walls.size());
  for (std::size_t i = 0; i < s.walls.size(); ++i) {
    EXPECT_EQ(back.walls[i].a.x, s.walls[i].a.x);
    EXPECT_EQ(back.walls[i].b.y, s.walls[i].b.y);
  }
  EXPECT_EQ(back.start.theta, s.start.theta);
  EXPECT_EQ(back.lights.size(), s.lights.size());
  EXPECT_EQ(back.lights[1].on, s.lights[1].on);

  nlohmann::json bad = scenario_to_json(s);
  bad["walls"].push_back({0.0, -10.0, 0.0, 10.0});
  EXPECT_THROW(scenario_from_json(bad), ModelError);
  EXPECT_THROW(scenario_from_json(nlohmann::json{{"walls", 3}}), ModelError);
  nlohmann::json no_target = scenario_to_json(s);
  no_target.erase("target");
  EXPECT_THROW(scenario_from_json(no_target), ModelError);

  const auto path = std::filesystem::temp_directory_path() / "rfv_scenario_test.json";
  save_scenario(s, path);
  EXPECT_EQ(scenario_to_json(load_scenario(path)), scenario_to_json(s));
  std::filesystem::remove(path);
  EXPECT_THROW(load_scenario(path), ModelError);
}

TEST(EpisodeCsv, Header) {
  std::ostringstream out;
  write_episode_csv(out, {});
  EXPECT_EQ(out.str(), "t,x,y,theta,s0,s1,s2,s3,s4,s5,s6,s7,light,mL,mR,h1,term\r\n");
}

TEST(Maze, ShippedFilesMatchTheGenerator) {
  const std::filesystem::path dir = std::filesystem::path(RFV_SOURCE_DIR) / "data" / "scenarios";
  auto expected = default_training_scenarios();
  expected.push_back(default_test_scenario());
  for (const Scenario& s : expected) {
    SCOPED_TRACE(s.name);
    EXPECT_EQ(scenario_to_json(load_scenario(dir / (s.name + ".json"))), scenario_to_json(s));
  }
}
