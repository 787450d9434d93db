#include "rfv/sysid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "rfv/csv.hpp"

namespace rfv::sysid {

double plant_step(const PlantState& s, double u) {
  const double y = s.y_t;
  const double yp = s.y_tm1;
  return y * yp * (y + 2.5) / (1.0 + y * y + yp * yp) + u;
}

double reference_step(double y_t, double y_tm1, long t) {
  const double tt = static_cast<double>(t);
  return 0.6 * y_t + 0.2 * y_tm1 + 0.2 * std::sin(2.0 * std::numbers::pi * tt / 25.0) +
         0.4 * std::sin(std::numbers::pi * tt / 32.0);
}

double test_reference_step(double y_t, double y_tm1, long t) {
  const double tt = static_cast<double>(t);
  return 0.6 * y_t + 0.2 * y_tm1 + 0.3 * std::sin(2.0 * std::numbers::pi * tt / 20.0) +
         0.3 * std::sin(std::numbers::pi * tt / 45.0);
}

std::vector<double> reference_signal(std::size_t length, const ReferenceStep& step) {
  std::vector<double> out;
  out.reserve(length);
  double y = 0.0;
  double y_prev = 0.0;
  for (std::size_t t = 0; t < length; ++t) {
    const double next = step(y, y_prev, static_cast<long>(t));
    out.push_back(next);
    y_prev = y;
    y = next;
  }
  return out;
}

std::vector<double> load_signal_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open signal file " + path.string());
  std::vector<double> out;
  std::string line;
  std::ptrdiff_t column = -1;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto fields = csv::split_record(line);
    if (first) {
      first = false;
      const auto it = std::find(fields.begin(), fields.end(), "y_r");
      if (it != fields.end()) {
        column = it - fields.begin();
        continue;
      }
      if (fields.size() != 1) throw ModelError(path.string() + ": expected one column or a 'y_r' header");
      column = 0;
      try {
        std::stod(fields[0]);
      } catch (const std::exception&) {
        continue;  // single-column header
      }
    }
    if (static_cast<std::size_t>(column) >= fields.size()) throw ModelError(path.string() + ": short row");
    try {
      out.push_back(std::stod(fields[static_cast<std::size_t>(column)]));
    } catch (const std::exception&) {
      throw ModelError(path.string() + ": malformed number '" + fields[static_cast<std::size_t>(column)] + "'");
    }
    if (!std::isfinite(out.back())) throw ModelError(path.string() + ": non-finite value");
  }
  if (out.empty()) throw ModelError(path.string() + ": no samples");
  return out;
}

bool widen_to_cover(SignalRange& range, const std::vector<double>& signal) {
  double extent = std::max(std::abs(range.lower), std::abs(range.upper));
  bool widened = false;
  for (double y : signal) {
    if (y < range.lower || y > range.upper) {
      extent = std::max(extent, std::abs(y) * 1.1);
      widened = true;
    }
  }
  if (widened) {
    range.lower = std::min(range.lower, -extent);
    range.upper = std::max(range.upper, extent);
  }
  return widened;
}

std::vector<double> SysidConfig::targets() const {
  if (!reference.empty()) {
    std::vector<double> out(reference.begin(),
                            reference.begin() + static_cast<std::ptrdiff_t>(std::min(reference.size(), episode_length)));
    return out;
  }
  return reference_signal(episode_length, reference_step);
}

void SysidConfig::validate() const {
  if (episode_length < 2) throw ModelError("episode_length must be at least 2");
  if (!(range.upper > range.lower)) throw ModelError("normalization range is empty");
  if (!reference.empty() && reference.size() < episode_length) {
    throw ModelError("reference signal is shorter than episode_length");
  }
}

EpisodeResult run_episode(const Controller& controller, const SysidConfig& cfg) {
  cfg.validate();
  const std::vector<double> targets = cfg.targets();
  EpisodeResult result;
  result.trace.reserve(targets.size());
  PlantState plant;
  double sq_sum = 0.0;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const double u = controller(plant.y_t, targets[t], t);
    const double y_next = plant_step(plant, u);
    if (!std::isfinite(u) || !std::isfinite(y_next) || std::abs(y_next) > kDivergenceBound) {
      result.diverged = true;
      result.rms = std::numeric_limits<double>::infinity();
      return result;
    }
    const double err = targets[t] - y_next;
    sq_sum += err * err;
    result.trace.push_back({t, targets[t], y_next, u, std::sqrt(sq_sum / static_cast<double>(t + 1))});
    plant = {y_next, plant.y_t};
  }
  result.rms = std::sqrt(sq_sum / static_cast<double>(targets.size()));
  return result;
}

EpisodeResult run_episode(RfvSystem& system, const SysidConfig& cfg) {
  if (system.dims() != kDims) throw ModelError("sysid controller must have dims (l=2, r=1, m=1)");
  system.reset_state();
  const SignalRange range = cfg.range;
  try {
    return run_episode(
        [&](double y_p, double y_r_next, std::size_t) {
          const double x[2] = {range.normalize(y_p), range.normalize(y_r_next)};
          return system.infer_step(x).external_outputs[0];
        },
        cfg);
  } catch (const ModelError&) {
    EpisodeResult failed;
    failed.diverged = true;
    failed.rms = std::numeric_limits<double>::infinity();
    return failed;
  }
}

double sysid_fitness(const evolution::Individual& ind, const SysidConfig& cfg) {
  try {
    RfvSystem system = evolution::assemble(ind, {}, kDims, geometry::Box::unit(kDims.rule_inputs()));
    const EpisodeResult r = run_episode(system, cfg);
    if (r.diverged) return kWorstFitness;
    return -r.rms;
  } catch (const geometry::GeometryError&) {
    return kWorstFitness;
  } catch (const ModelError&) {
    return kWorstFitness;
  }
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace, const std::string& provenance) {
  csv::Writer w(out);
  if (!provenance.empty()) w.comment(provenance);
  w.header({"t", "y_r", "y_p", "u", "rms_running"});
  for (const TraceRow& r : trace) w.row({static_cast<double>(r.t), r.y_r, r.y_p, r.u, r.rms_running});
}

}  // namespace rfv::sysid
