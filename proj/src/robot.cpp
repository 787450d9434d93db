#include "rfv/robot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <limits>
#include <numbers>
#include <optional>
#include <set>
#include <utility>

#include "rfv/csv.hpp"

namespace rfv::robot {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

// Distance along the ray origin + t * dir to the segment, or +inf.
double ray_hit(Vec2 origin, Vec2 dir, const Segment& s) {
  const double ex = s.b.x - s.a.x;
  const double ey = s.b.y - s.a.y;
  const double denom = dir.x * ey - dir.y * ex;
  const double wx = s.a.x - origin.x;
  const double wy = s.a.y - origin.y;
  if (std::abs(denom) < 1e-12) return std::numeric_limits<double>::infinity();
  const double t = (wx * ey - wy * ex) / denom;
  const double u = (wx * dir.y - wy * dir.x) / denom;
  if (t < 0.0 || u < 0.0 || u > 1.0) return std::numeric_limits<double>::infinity();
  return t;
}

double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

double SensorReading::max_proximity() const { return *std::max_element(proximity.begin(), proximity.end()); }

double wrap_angle(double theta) {
  double t = std::fmod(theta, 2.0 * std::numbers::pi);
  if (t <= -std::numbers::pi) t += 2.0 * std::numbers::pi;
  if (t > std::numbers::pi) t -= 2.0 * std::numbers::pi;
  return t;
}

double point_segment_distance(Vec2 p, const Segment& s) {
  const double ex = s.b.x - s.a.x;
  const double ey = s.b.y - s.a.y;
  const double len2 = ex * ex + ey * ey;
  double u = len2 > 0.0 ? ((p.x - s.a.x) * ex + (p.y - s.a.y) * ey) / len2 : 0.0;
  u = std::clamp(u, 0.0, 1.0);
  return std::hypot(p.x - (s.a.x + u * ex), p.y - (s.a.y + u * ey));
}

SensorReading sense(const Scenario& scenario, const RobotPose& pose) {
  using namespace khepera;
  SensorReading r;
  const Vec2 center{pose.x, pose.y};
  // Only walls within reach of the sensor rays matter.
  std::vector<const Segment*> near;
  for (const Segment& s : scenario.walls) {
    if (point_segment_distance(center, s) <= kRadius + kSensorRange) near.push_back(&s);
  }
  for (std::size_t i = 0; i < kSensorCount; ++i) {
    const double bearing = pose.theta + kSensorBearingsDeg[i] * kDegToRad;
    const Vec2 dir{std::cos(bearing), std::sin(bearing)};
    const Vec2 origin{pose.x + kRadius * dir.x, pose.y + kRadius * dir.y};
    double hit = std::numeric_limits<double>::infinity();
    for (const Segment* s : near) hit = std::min(hit, ray_hit(origin, dir, *s));
    r.proximity[i] = std::clamp(1.0 - hit / kSensorRange, 0.0, 1.0);
  }
  for (const Light& l : scenario.lights) {
    if (!l.on) continue;
    r.ambient_light = std::max(r.ambient_light, std::clamp(1.0 - distance(center, l.position) / kLightRange, 0.0, 1.0));
  }
  return r;
}

std::array<double, 5> controller_inputs(const SensorReading& r) {
  const auto& p = r.proximity;
  return {0.5 * (p[0] + p[1]), 0.5 * (p[2] + p[3]), 0.5 * (p[4] + p[5]), 0.5 * (p[6] + p[7]),
          std::clamp(r.ambient_light, 0.0, 1.0)};
}

StepOutcome step_robot(const Scenario& scenario, const RobotPose& pose, double left, double right) {
  using namespace khepera;
  left = std::clamp(left, 0.0, 1.0);
  right = std::clamp(right, 0.0, 1.0);
  const double v = kMaxWheelSpeed * 0.5 * (left + right);
  const double omega = kMaxWheelSpeed * (right - left) / kWheelBase;
  RobotPose next = pose;
  if (std::abs(omega) < 1e-12) {
    next.x += v * kTimeStep * std::cos(pose.theta);
    next.y += v * kTimeStep * std::sin(pose.theta);
  } else {
    const double turned = pose.theta + omega * kTimeStep;
    next.x += v / omega * (std::sin(turned) - std::sin(pose.theta));
    next.y -= v / omega * (std::cos(turned) - std::cos(pose.theta));
    next.theta = turned;
  }
  next.theta = wrap_angle(next.theta);
  const Vec2 c{next.x, next.y};
  for (const Segment& s : scenario.walls) {
    if (point_segment_distance(c, s) < kRadius) return {pose, true};
  }
  return {next, false};
}

double step_term(double speed, double activation, double distance) {
  return speed * (1.0 - activation) * (1.0 - distance);
}

EpisodeResult fitness_episode(RfvSystem& system, const Scenario& scenario, const EpisodeOptions& options) {
  if (system.dims() != kDims) throw ModelError("robot controller must have dims (l=5, r=1, m=2)");
  system.reset_state();
  EpisodeResult result;
  if (options.record) result.log.rows.reserve(options.steps);
  RobotPose pose = scenario.start;
  SensorReading reading = sense(scenario, pose);
  const Vec2 target = scenario.target;
  const double start_distance = std::max(distance({pose.x, pose.y}, target), 1e-9);

  for (std::size_t t = 0; t < options.steps; ++t) {
    const auto inputs = controller_inputs(reading);
    double left = 0.0;
    double right = 0.0;
    try {
      const StepResult out = system.infer_step(inputs);
      left = out.external_outputs[0];
      right = out.external_outputs[1];
    } catch (const ModelError&) {
      result.collided = true;
      break;
    }
    if (!std::isfinite(left) || !std::isfinite(right)) {
      result.collided = true;
      break;
    }
    left = std::clamp(left, 0.0, 1.0);
    right = std::clamp(right, 0.0, 1.0);
    const StepOutcome moved = step_robot(scenario, pose, left, right);
    result.steps_taken = t + 1;
    const double h1 = system.state().empty() ? 0.0 : system.state()[0];
    if (moved.collided) {
      result.collided = true;
      if (options.record) result.log.rows.push_back({t, pose, reading, left, right, h1, 0.0});
      break;
    }
    pose = moved.pose;
    reading = sense(scenario, pose);
    const double dist = distance({pose.x, pose.y}, target) / start_distance;
    const double term = step_term(0.5 * (left + right), reading.max_proximity(), std::min(1.0, dist));
    result.fitness_sum += term;
    if (options.record) result.log.rows.push_back({t, pose, reading, left, right, h1, term});
    if (options.stop_at_target && dist < 0.02) break;
  }
  return result;
}

double robot_fitness(const evolution::Individual& ind, std::span<const Scenario> scenarios, std::size_t steps,
                     const evolution::AprioriSet& apriori, bool stop_at_target) {
  if (scenarios.empty() || steps == 0) throw ModelError("robot fitness needs at least one scenario and one step");
  std::optional<RfvSystem> system;
  try {
    system.emplace(evolution::assemble(ind, apriori, kDims, geometry::Box::unit(kDims.rule_inputs())));
  } catch (const geometry::GeometryError&) {
    return 0.0;
  } catch (const ModelError&) {
    return 0.0;
  }
  EpisodeOptions options;
  options.steps = steps;
  options.stop_at_target = stop_at_target;
  double total = 0.0;
  for (const Scenario& s : scenarios) total += fitness_episode(*system, s, options).fitness_sum;
  return total / (static_cast<double>(scenarios.size()) * static_cast<double>(steps));
}

evolution::AprioriSet load_apriori_table() {
  // Site over (L, C, R, B, G, y1); constant outputs for (v1, v2, y1). Every
  // non-constant coefficient in the table is zero.
  struct Row {
    std::array<double, 6> site;
    std::array<double, 3> outputs;
  };
  static constexpr std::array<Row, 6> kTable{{
      {{0, 0, 0, 0, 0, 0}, {1, 1, 0}},
      {{0, 0, 0, 0, 0, 1}, {1, 1, 1}},
      {{0, 0, 0, 0, 1, 0}, {1, 1, 1}},
      {{0, 0, 0, 0, 1, 1}, {1, 1, 1}},
      {{0, 1, 0, 0, 0, 0}, {1, 0, 0}},
      {{0, 1, 0, 0, 0, 1}, {0, 1, 0}},
  }};
  evolution::AprioriSet set;
  for (const Row& row : kTable) {
    set.rules.push_back(FuzzyRule::constant(geometry::Point(row.site.begin(), row.site.end()), row.outputs, true));
  }
  return set;
}

void write_episode_csv(std::ostream& out, const EpisodeLog& log, const std::string& provenance) {
  csv::Writer w(out);
  if (!provenance.empty()) w.comment(provenance);
  std::vector<std::string> header{"t", "x", "y", "theta"};
  for (std::size_t i = 0; i < khepera::kSensorCount; ++i) header.push_back("s" + std::to_string(i));
  for (const char* name : {"light", "mL", "mR", "h1", "term"}) header.emplace_back(name);
  w.header(header);
  for (const LogRow& r : log.rows) {
    std::vector<double> values{static_cast<double>(r.t), r.pose.x, r.pose.y, r.pose.theta};
    values.insert(values.end(), r.reading.proximity.begin(), r.reading.proximity.end());
    values.insert(values.end(), {r.reading.ambient_light, r.left, r.right, r.h1, r.term});
    w.row(values);
  }
}

namespace {

// Maze layout on a 50 mm grid; free space is a union of axis-aligned
// rectangles and walls are the free/blocked cell borders.
constexpr int kCell = 50;

struct IVec {
  int x = 0;
  int y = 0;
};

IVec operator+(IVec a, IVec b) { return {a.x + b.x, a.y + b.y}; }
IVec operator*(IVec a, int k) { return {a.x * k, a.y * k}; }
IVec turn_left(IVec d) { return {-d.y, d.x}; }
IVec turn_right(IVec d) { return {d.y, -d.x}; }

class FreeSpace {
 public:
  void rect(int x0, int y0, int x1, int y1) {
    if (x0 > x1) std::swap(x0, x1);
    if (y0 > y1) std::swap(y0, y1);
    for (int i = x0 / kCell; i < x1 / kCell; ++i) {
      for (int j = y0 / kCell; j < y1 / kCell; ++j) cells_.insert({i, j});
    }
  }

  // Corridor of standard width along the axis-aligned segment p -> q.
  void corridor(IVec p, IVec q, int width) {
    const int h = width / 2;
    if (p.x == q.x) {
      rect(p.x - h, std::min(p.y, q.y), p.x + h, std::max(p.y, q.y));
    } else {
      rect(std::min(p.x, q.x), p.y - h, std::max(p.x, q.x), p.y + h);
    }
  }

  void square(IVec c, int side) { rect(c.x - side / 2, c.y - side / 2, c.x + side / 2, c.y + side / 2); }

  std::vector<Segment> walls() const {
    // Unit edges keyed by the fixed coordinate, then merged into runs.
    std::map<int, std::set<int>> horizontal;
    std::map<int, std::set<int>> vertical;
    for (const auto& [i, j] : cells_) {
      if (!cells_.count({i, j - 1})) horizontal[j].insert(i);
      if (!cells_.count({i, j + 1})) horizontal[j + 1].insert(i);
      if (!cells_.count({i - 1, j})) vertical[i].insert(j);
      if (!cells_.count({i + 1, j})) vertical[i + 1].insert(j);
    }
    std::vector<Segment> out;
    auto emit = [&](const std::map<int, std::set<int>>& edges, bool is_horizontal) {
      for (const auto& [fixed, starts] : edges) {
        auto it = starts.begin();
        while (it != starts.end()) {
          const int first = *it;
          int last = first;
          for (++it; it != starts.end() && *it == last + 1; ++it) last = *it;
          const double f = fixed * kCell;
          const double a = first * kCell;
          const double b = (last + 1) * kCell;
          out.push_back(is_horizontal ? Segment{{a, f}, {b, f}} : Segment{{f, a}, {f, b}});
        }
      }
    };
    emit(horizontal, true);
    emit(vertical, false);
    return out;
  }

 private:
  std::set<std::pair<int, int>> cells_;
};

Vec2 to_vec(IVec v) { return {static_cast<double>(v.x), static_cast<double>(v.y)}; }

}  // namespace

Scenario corridor_maze(const std::string& turns, const std::string& name, const MazeLayout& layout) {
  for (int v : {layout.corridor / 2, layout.leg, layout.stub, layout.final_leg, layout.room / 2, layout.behind_start}) {
    if (v <= 0 || v % kCell != 0) throw ModelError("maze lengths must be positive multiples of 50 mm");
  }
  const int width = layout.corridor;
  FreeSpace space;
  Scenario s;
  s.name = name;
  IVec pos{0, 0};
  IVec dir{0, 1};
  s.start = {0.0, 0.0, std::numbers::pi / 2.0};
  space.corridor(pos + dir * -layout.behind_start, pos, width);
  for (char c : turns) {
    if (c != 'L' && c != 'R') throw ModelError("maze turns must be 'L' or 'R'");
    const IVec junction = pos + dir * layout.leg;
    space.corridor(pos, junction, width);
    space.square(junction, width);
    s.lights.push_back({to_vec(pos + dir * (layout.leg / 2)), c == 'L'});
    const IVec chosen = c == 'L' ? turn_left(dir) : turn_right(dir);
    const IVec other = c == 'L' ? turn_right(dir) : turn_left(dir);
    space.corridor(junction, junction + other * (width / 2 + layout.stub), width);
    pos = junction;
    dir = chosen;
  }
  const IVec leg_end = pos + dir * layout.final_leg;
  space.corridor(pos, leg_end, width);
  const IVec room = pos + dir * (layout.final_leg + layout.room / 2);
  space.square(room, layout.room);
  s.target = to_vec(room);
  s.walls = space.walls();
  return s;
}

std::vector<Scenario> default_training_scenarios() {
  return {corridor_maze("LRL", "maze-LRL"), corridor_maze("LRR", "maze-LRR"), corridor_maze("RLL", "maze-RLL"),
          corridor_maze("RLR", "maze-RLR")};
}

Scenario default_test_scenario() { return corridor_maze("RLRL", "maze-RLRL-test"); }

nlohmann::json scenario_to_json(const Scenario& s) {
  nlohmann::json walls = nlohmann::json::array();
  for (const Segment& w : s.walls) walls.push_back({w.a.x, w.a.y, w.b.x, w.b.y});
  nlohmann::json lights = nlohmann::json::array();
  for (const Light& l : s.lights) lights.push_back({{"position", {l.position.x, l.position.y}}, {"on", l.on}});
  return {{"name", s.name},
          {"walls", std::move(walls)},
          {"lights", std::move(lights)},
          {"start", {{"x", s.start.x}, {"y", s.start.y}, {"theta", s.start.theta}}},
          {"target", {{"x", s.target.x}, {"y", s.target.y}}}};
}

Scenario scenario_from_json(const nlohmann::json& doc) {
  try {
    Scenario s;
    s.name = doc.value("name", std::string("scenario"));
    for (const auto& w : doc.at("walls")) {
      if (!w.is_array() || w.size() != 4) throw ModelError("scenario wall must be [x1, y1, x2, y2]");
      s.walls.push_back({{w[0].get<double>(), w[1].get<double>()}, {w[2].get<double>(), w[3].get<double>()}});
    }
    if (doc.contains("lights")) {
      for (const auto& l : doc.at("lights")) {
        const auto& p = l.at("position");
        s.lights.push_back({{p.at(0).get<double>(), p.at(1).get<double>()}, l.at("on").get<bool>()});
      }
    }
    const auto& st = doc.at("start");
    s.start = {st.at("x").get<double>(), st.at("y").get<double>(), st.value("theta", 0.0)};
    s.start.theta = wrap_angle(s.start.theta);
    const auto& tg = doc.at("target");
    s.target = {tg.at("x").get<double>(), tg.at("y").get<double>()};
    for (const Segment& w : s.walls) {
      for (double v : {w.a.x, w.a.y, w.b.x, w.b.y}) {
        if (!std::isfinite(v)) throw ModelError("scenario wall coordinates must be finite");
      }
      if (point_segment_distance({s.start.x, s.start.y}, w) < khepera::kRadius) {
        throw ModelError("scenario start pose collides with a wall");
      }
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("malformed scenario: ") + e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open scenario " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(path.string() + ": " + e.what());
  }
  return scenario_from_json(doc);
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ModelError("cannot open " + path.string() + " for writing");
  out << scenario_to_json(scenario).dump(2) << '\n';
}

}  // namespace rfv::robot
