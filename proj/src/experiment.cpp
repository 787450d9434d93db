#include "rfv/experiment.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include "rfv/csv.hpp"
#include "rfv/serialization.hpp"

namespace rfv::experiment {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(Kind kind) {
  switch (kind) {
    case Kind::sysid:
      return "sysid";
    case Kind::robot:
      return "robot";
    case Kind::inspect:
      return "inspect";
  }
  return "?";
}

namespace {

// Reads one JSON object, remembering which keys were used so the rest can be
// reported as unknown.
class Section {
 public:
  Section(const json* doc, std::string path) : doc_(doc), path_(std::move(path)) {
    if (doc_ && !doc_->is_object()) throw ConfigError(path_, "expected an object");
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    used_.insert(key);
    if (!doc_) return nullptr;
    const auto it = doc_->find(key);
    return it == doc_->end() ? nullptr : &*it;
  }

  void read(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(key_path(key), "expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) throw ConfigError(key_path(key), "expected a finite number");
    }
  }

  void read(const std::string& key, std::size_t& out) {
    if (const json* v = find(key)) {
      if (!non_negative_integer(*v)) throw ConfigError(key_path(key), "expected a non-negative integer");
      out = v->get<std::size_t>();
    }
  }

  void read(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(key_path(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void read(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw ConfigError(key_path(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  void read_path(const std::string& key, fs::path& out, const fs::path& base) {
    std::string s;
    read(key, s);
    if (!s.empty()) out = resolve(s, base);
  }

  void read_pair(const std::string& key, double& a, double& b) {
    if (const json* v = find(key)) {
      if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) {
        throw ConfigError(key_path(key), "expected [low, high]");
      }
      a = (*v)[0].get<double>();
      b = (*v)[1].get<double>();
    }
  }

  void read_pair(const std::string& key, std::size_t& a, std::size_t& b) {
    if (const json* v = find(key)) {
      if (!v->is_array() || v->size() != 2 || !non_negative_integer((*v)[0]) || !non_negative_integer((*v)[1])) {
        throw ConfigError(key_path(key), "expected [low, high] with non-negative integers");
      }
      a = (*v)[0].get<std::size_t>();
      b = (*v)[1].get<std::size_t>();
    }
  }

  void read_numbers(const std::string& key, std::vector<double>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) throw ConfigError(key_path(key), "expected an array of numbers");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_number()) throw ConfigError(key_path(key) + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back((*v)[i].get<double>());
      }
    }
  }

  void read_paths(const std::string& key, std::vector<fs::path>& out, const fs::path& base) {
    if (const json* v = find(key)) {
      if (!v->is_array()) throw ConfigError(key_path(key), "expected an array of file names");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_string()) throw ConfigError(key_path(key) + "[" + std::to_string(i) + "]", "expected a string");
        out.push_back(resolve((*v)[i].get<std::string>(), base));
      }
    }
  }

  Section child(const std::string& key) { return Section(find(key), key_path(key)); }

  void finish() const {
    if (!doc_) return;
    for (const auto& [key, value] : doc_->items()) {
      if (!used_.count(key)) throw ConfigError(key_path(key), "unknown key");
    }
  }

  static bool non_negative_integer(const json& v) {
    return v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0);
  }

  static fs::path resolve(const std::string& s, const fs::path& base) {
    const fs::path p(s);
    return (p.is_absolute() || base.empty() ? p : base / p).lexically_normal();
  }

 private:
  const json* doc_;
  std::string path_;
  std::set<std::string> used_;
};

std::string sha256_prefix(const std::string& text) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < 8 && i < length; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

json paths_json(const std::vector<fs::path>& paths) {
  json out = json::array();
  for (const fs::path& p : paths) out.push_back(p.generic_string());
  return out;
}

// Every file goes through here so the manifest is complete.
class OutputDir {
 public:
  OutputDir(fs::path root, std::string provenance) : root_(std::move(root)), provenance_(std::move(provenance)) {}

  std::ofstream open(const std::string& relative) {
    const fs::path path = root_ / relative;
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    files_.push_back(relative);
    return out;
  }

  void write_json(const std::string& relative, const json& doc) {
    std::ofstream out = open(relative);
    out << doc.dump(2) << '\n';
    if (!out) throw std::runtime_error("failed writing " + (root_ / relative).string());
  }

  const fs::path& root() const noexcept { return root_; }
  const std::string& provenance() const noexcept { return provenance_; }
  const std::vector<std::string>& files() const noexcept { return files_; }

 private:
  fs::path root_;
  std::string provenance_;
  std::vector<std::string> files_;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void summarize(RunSummary& summary, bool lower_is_better) {
  const auto& reps = summary.repetitions;
  if (reps.empty()) return;
  double sum = 0.0;
  summary.best = reps.front().metric;
  for (const RepetitionResult& r : reps) {
    sum += r.metric;
    summary.best = lower_is_better ? std::min(summary.best, r.metric) : std::max(summary.best, r.metric);
  }
  const double n = static_cast<double>(reps.size());
  summary.mean = sum / n;
  double sq = 0.0;
  for (const RepetitionResult& r : reps) sq += (r.metric - summary.mean) * (r.metric - summary.mean);
  summary.variance = reps.size() > 1 ? sq / (n - 1.0) : 0.0;
}

void write_summary(OutputDir& out, const RunSummary& summary, const std::string& kind) {
  {
    std::ofstream f = out.open("repetitions.csv");
    csv::Writer w(f);
    w.comment(out.provenance());
    w.header({"seed", "best_fitness", "metric", "test_metric", "rule_count", "wall_seconds"});
    for (const RepetitionResult& r : summary.repetitions) {
      w.row({static_cast<double>(r.seed), r.best_fitness, r.metric, r.test_metric, static_cast<double>(r.rule_count),
             r.wall_seconds});
    }
  }
  std::ofstream f = out.open("summary.csv");
  csv::Writer w(f);
  w.comment(out.provenance());
  w.header({"experiment", "repetitions", "mean", "best", "variance", "wall_seconds", "config_hash"});
  w.row(std::vector<std::string>{kind, std::to_string(summary.repetitions.size()), csv::format_double(summary.mean),
                                 csv::format_double(summary.best), csv::format_double(summary.variance),
                                 csv::format_double(summary.wall_seconds), summary.config_hash});
}

void write_manifest(OutputDir& out, const ExperimentConfig& cfg, RunSummary& summary) {
  std::vector<std::string> files = out.files();
  files.push_back("manifest.json");
  json doc{{"experiment", to_string(cfg.kind)},
           {"config_hash", summary.config_hash},
           {"files", files},
           {"summary",
            {{"mean", summary.mean},
             {"best", summary.best},
             {"variance", summary.variance},
             {"wall_seconds", summary.wall_seconds}}}};
  out.write_json("manifest.json", doc);
  summary.files = out.files();
}

}  // namespace

json ExperimentConfig::to_json() const {
  json ga_doc{{"population_size", ga.population_size},
              {"generations", ga.generations},
              {"p_crossover", ga.p_crossover},
              {"p_mutation", ga.p_mutation},
              {"p_structural", ga.p_structural},
              {"tournament_size", ga.tournament_size},
              {"elite_count", ga.elite_count},
              {"sigma_site", ga.sigma_site},
              {"sigma_coeff", ga.sigma_coeff},
              {"min_rules", ga.min_rules},
              {"max_rules", ga.max_rules},
              {"init_rule_range", {ga.init_rule_range.first, ga.init_rule_range.second}}};
  json doc{{"experiment", experiment::to_string(kind)},
           {"seed", seed},
           {"repetitions", repetitions},
           {"output_dir", output_dir.generic_string()},
           {"checkpoint_every", checkpoint_every},
           {"ga", ga_doc}};
  if (kind == Kind::sysid) {
    doc["sysid"] = {{"episode_length", sysid.episode_length},
                    {"range", {sysid.range.lower, sysid.range.upper}},
                    {"train_reference", sysid.train_reference.generic_string()},
                    {"test_reference", sysid.test_reference.generic_string()}};
  } else if (kind == Kind::robot) {
    doc["robot"] = {{"apriori", robot.apriori},
                    {"steps", robot.steps},
                    {"test_steps", robot.test_steps},
                    {"stop_at_target", robot.stop_at_target},
                    {"scenarios", paths_json(robot.scenarios)},
                    {"test_scenario", robot.test_scenario.generic_string()}};
  } else {
    doc["inspect"] = {{"system", inspect.system.generic_string()},
                      {"axes", {inspect.axis_x, inspect.axis_y}},
                      {"resolution", inspect.resolution},
                      {"fixed", inspect.fixed}};
  }
  return doc;
}

std::string ExperimentConfig::hash() const {
  json doc = to_json();
  doc.erase("output_dir");
  return sha256_prefix(doc.dump());
}

void ExperimentConfig::validate() const {
  auto wrap = [](const std::string& key, auto&& check) {
    try {
      check();
    } catch (const ModelError& e) {
      throw ConfigError(key, e.what());
    }
  };
  if (repetitions < 1) throw ConfigError("repetitions", "must be at least 1");
  if (output_dir.empty()) throw ConfigError("output_dir", "required (or pass --out-dir)");
  if (kind == Kind::inspect) {
    if (inspect.system.empty()) throw ConfigError("inspect.system", "required (or pass --system)");
    if (inspect.resolution < 2) throw ConfigError("inspect.resolution", "must be at least 2");
    if (inspect.axis_x == inspect.axis_y) throw ConfigError("inspect.axes", "the two axes must differ");
    return;
  }
  wrap("ga", [&] { ga.validate(); });
  if (kind == Kind::sysid) {
    sysid::SysidConfig sc;
    sc.episode_length = sysid.episode_length;
    sc.range = sysid.range;
    wrap("sysid", [&] { sc.validate(); });
  } else {
    if (robot.steps < 1) throw ConfigError("robot.steps", "must be at least 1");
    if (robot.test_steps < 1) throw ConfigError("robot.test_steps", "must be at least 1");
  }
}

ExperimentConfig parse_config(const json& doc, Kind kind, const fs::path& base_dir) {
  ExperimentConfig cfg;
  cfg.kind = kind;
  Section top(&doc, "");
  std::string declared;
  top.read("experiment", declared);
  if (!declared.empty() && declared != to_string(kind)) {
    throw ConfigError("experiment", "config is for '" + declared + "', not '" + to_string(kind) + "'");
  }
  std::string description;
  top.read("description", description);
  top.read("seed", cfg.seed);
  top.read("repetitions", cfg.repetitions);
  top.read_path("output_dir", cfg.output_dir, base_dir);
  top.read("checkpoint_every", cfg.checkpoint_every);

  Section ga = top.child("ga");
  ga.read("population_size", cfg.ga.population_size);
  ga.read("generations", cfg.ga.generations);
  ga.read("p_crossover", cfg.ga.p_crossover);
  ga.read("p_mutation", cfg.ga.p_mutation);
  ga.read("p_structural", cfg.ga.p_structural);
  ga.read("tournament_size", cfg.ga.tournament_size);
  ga.read("elite_count", cfg.ga.elite_count);
  ga.read("sigma_site", cfg.ga.sigma_site);
  ga.read("sigma_coeff", cfg.ga.sigma_coeff);
  ga.read("min_rules", cfg.ga.min_rules);
  ga.read("max_rules", cfg.ga.max_rules);
  ga.read_pair("init_rule_range", cfg.ga.init_rule_range.first, cfg.ga.init_rule_range.second);
  ga.finish();
  for (const auto& [key, value] : {std::pair{"p_crossover", cfg.ga.p_crossover}, std::pair{"p_mutation", cfg.ga.p_mutation},
                                   std::pair{"p_structural", cfg.ga.p_structural}}) {
    if (value < 0.0 || value > 1.0) throw ConfigError(std::string("ga.") + key, "must lie in [0, 1]");
  }

  Section sy = top.child("sysid");
  sy.read("episode_length", cfg.sysid.episode_length);
  sy.read_pair("range", cfg.sysid.range.lower, cfg.sysid.range.upper);
  sy.read_path("train_reference", cfg.sysid.train_reference, base_dir);
  sy.read_path("test_reference", cfg.sysid.test_reference, base_dir);
  sy.finish();

  Section ro = top.child("robot");
  ro.read("apriori", cfg.robot.apriori);
  ro.read("steps", cfg.robot.steps);
  ro.read("test_steps", cfg.robot.test_steps);
  ro.read("stop_at_target", cfg.robot.stop_at_target);
  ro.read_paths("scenarios", cfg.robot.scenarios, base_dir);
  ro.read_path("test_scenario", cfg.robot.test_scenario, base_dir);
  ro.finish();

  Section in = top.child("inspect");
  in.read_path("system", cfg.inspect.system, base_dir);
  in.read_pair("axes", cfg.inspect.axis_x, cfg.inspect.axis_y);
  in.read("resolution", cfg.inspect.resolution);
  in.read_numbers("fixed", cfg.inspect.fixed);
  in.finish();

  top.finish();
  return cfg;
}

ExperimentConfig load_config(const fs::path& path, Kind kind) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("", path.string() + ": " + e.what());
  }
  return parse_config(doc, kind, path.parent_path());
}

fs::path claim_output_dir(const fs::path& requested, ExistingOutput policy) {
  auto taken = [](const fs::path& p) { return fs::exists(p) && !(fs::is_directory(p) && fs::is_empty(p)); };
  if (!taken(requested)) {
    fs::create_directories(requested);
    return requested;
  }
  if (policy == ExistingOutput::refuse) {
    throw std::runtime_error("output directory " + requested.string() +
                             " already holds results (use --existing suffix or another --out-dir)");
  }
  for (int k = 1;; ++k) {
    fs::path candidate = requested;
    candidate += "-" + std::to_string(k);
    if (!taken(candidate)) {
      fs::create_directories(candidate);
      return candidate;
    }
  }
}

std::vector<robot::Scenario> training_scenarios(const RobotSection& section) {
  if (section.scenarios.empty()) return robot::default_training_scenarios();
  std::vector<robot::Scenario> out;
  for (const fs::path& p : section.scenarios) out.push_back(robot::load_scenario(p));
  return out;
}

robot::Scenario test_scenario(const RobotSection& section) {
  return section.test_scenario.empty() ? robot::default_test_scenario() : robot::load_scenario(section.test_scenario);
}

namespace {

sysid::SysidConfig sysid_config(const SysidSection& s, const fs::path& reference, sysid::ReferenceStep generator,
                                std::ostream* log) {
  sysid::SysidConfig cfg;
  cfg.episode_length = s.episode_length;
  cfg.range = s.range;
  cfg.reference = reference.empty() ? sysid::reference_signal(s.episode_length, generator)
                                    : sysid::load_signal_csv(reference);
  if (sysid::widen_to_cover(cfg.range, cfg.reference) && log) {
    *log << "warning: reference leaves the normalization range; widened to [" << cfg.range.lower << ", "
         << cfg.range.upper << "]\n";
  }
  cfg.validate();
  return cfg;
}

}  // namespace

RunSummary run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
  if (cfg.kind == Kind::inspect) return run_inspect(cfg, options);
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  std::ostream* log = options.log;

  // Inputs are loaded before any output is created.
  sysid::SysidConfig train_cfg;
  sysid::SysidConfig test_cfg;
  std::vector<robot::Scenario> scenarios;
  robot::Scenario held_out;
  evolution::AprioriSet apriori;
  Dimensions dims;
  if (cfg.kind == Kind::sysid) {
    train_cfg = sysid_config(cfg.sysid, cfg.sysid.train_reference, sysid::reference_step, log);
    test_cfg = sysid_config(cfg.sysid, cfg.sysid.test_reference, sysid::test_reference_step, log);
    dims = sysid::kDims;
  } else {
    scenarios = training_scenarios(cfg.robot);
    held_out = test_scenario(cfg.robot);
    if (cfg.robot.apriori) apriori = robot::load_apriori_table();
    dims = robot::kDims;
  }
  const geometry::Box domain = geometry::Box::unit(dims.rule_inputs());

  RunSummary summary;
  summary.config_hash = cfg.hash();
  OutputDir out(claim_output_dir(cfg.output_dir, options.existing), "config " + summary.config_hash);
  summary.output_dir = out.root();
  {
    json resolved = cfg.to_json();
    resolved["output_dir"] = out.root().generic_string();
    resolved["config_hash"] = summary.config_hash;
    out.write_json("config.json", resolved);
  }

  std::ofstream stats_file = out.open("stats.csv");
  csv::Writer stats(stats_file);
  stats.comment(out.provenance());
  stats.header({"generation", "best_fitness", "mean_fitness", "best_rule_count", "mean_rule_count", "seed"});

  evolution::FitnessFn fitness;
  if (cfg.kind == Kind::sysid) {
    fitness = [&](const evolution::Individual& ind) { return sysid::sysid_fitness(ind, train_cfg); };
  } else {
    fitness = [&](const evolution::Individual& ind) {
      return robot::robot_fitness(ind, scenarios, cfg.robot.steps, apriori, cfg.robot.stop_at_target);
    };
  }

  for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
    const auto rep_start = std::chrono::steady_clock::now();
    const std::uint64_t seed = cfg.seed + rep;
    evolution::GaConfig ga = cfg.ga;
    ga.seed = seed;
    evolution::Rng rng(seed);
    const std::string tag = "seed" + std::to_string(seed);

    auto checkpoint = [&](std::size_t generation, const evolution::Individual& best) {
      json doc{{"config_hash", summary.config_hash},
               {"seed", seed},
               {"generation", generation},
               {"fitness", best.fitness ? json(*best.fitness) : json(nullptr)},
               {"evolved_rules", best.rule_count()}};
      try {
        doc["system"] = system_to_json(evolution::assemble(best, apriori, dims, domain));
      } catch (const std::exception& e) {
        doc["system"] = nullptr;
        doc["error"] = e.what();
      }
      char name[64];
      std::snprintf(name, sizeof name, "checkpoints/%s_gen%05zu.json", tag.c_str(), generation);
      out.write_json(name, doc);
    };

    evolution::RunOptions ro;
    ro.jobs = options.jobs;
    ro.on_generation = [&](const evolution::GenerationStats& s, const evolution::Individual& best) {
      stats.row({static_cast<double>(s.generation), s.best_fitness, s.mean_fitness,
                 static_cast<double>(s.best_rule_count), s.mean_rule_count, static_cast<double>(seed)});
      const bool due = cfg.checkpoint_every > 0 && s.generation % cfg.checkpoint_every == 0;
      if (due || s.generation == ga.generations) checkpoint(s.generation, best);
    };
    const evolution::GaResult result = evolution::run_ga(ga, apriori, dims, domain, fitness, rng, ro);
    stats_file.flush();

    RepetitionResult rr;
    rr.seed = seed;
    rr.best_fitness = *result.best.fitness;
    rr.rule_count = result.best.rule_count();
    RfvSystem system = evolution::assemble(result.best, apriori, dims, domain);
    if (cfg.kind == Kind::sysid) {
      const sysid::EpisodeResult train = sysid::run_episode(system, train_cfg);
      const sysid::EpisodeResult test = sysid::run_episode(system, test_cfg);
      rr.metric = train.rms;
      rr.test_metric = test.rms;
      {
        std::ofstream f = out.open("traces/" + tag + "_train.csv");
        sysid::write_trace_csv(f, train.trace, out.provenance());
      }
      std::ofstream f = out.open("traces/" + tag + "_test.csv");
      sysid::write_trace_csv(f, test.trace, out.provenance());
    } else {
      robot::EpisodeOptions eo;
      eo.steps = cfg.robot.test_steps;
      eo.record = true;
      const robot::EpisodeResult ep = robot::fitness_episode(system, held_out, eo);
      rr.metric = rr.best_fitness;
      rr.test_metric = ep.fitness_sum / static_cast<double>(cfg.robot.test_steps);
      std::ofstream f = out.open("episodes/" + tag + "_" + held_out.name + ".csv");
      robot::write_episode_csv(f, ep.log, out.provenance());
    }
    rr.wall_seconds = seconds_since(rep_start);
    summary.repetitions.push_back(rr);
    if (log) {
      *log << to_string(cfg.kind) << " repetition " << rep + 1 << "/" << cfg.repetitions << " seed " << seed
           << ": best fitness " << rr.best_fitness << ", " << (cfg.kind == Kind::sysid ? "test RMS " : "test fitness ")
           << rr.test_metric << ", " << rr.rule_count << " evolved rules (" << rr.wall_seconds << " s)\n";
    }
  }

  summarize(summary, cfg.kind == Kind::sysid);
  summary.wall_seconds = seconds_since(start);
  write_summary(out, summary, to_string(cfg.kind));
  write_manifest(out, cfg, summary);
  if (log) {
    *log << "summary (" << (cfg.kind == Kind::sysid ? "training RMS" : "fitness") << "): mean " << summary.mean
         << "  best " << summary.best << "  var " << summary.variance << "  wall " << summary.wall_seconds
         << " s  config " << summary.config_hash << "\n"
         << "outputs in " << summary.output_dir.string() << "\n";
  }
  return summary;
}

namespace {

// A saved system, or the "system" entry of a checkpoint.
RfvSystem load_inspected_system(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open system file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ModelError(path.string() + ": " + e.what());
  }
  if (doc.is_object() && doc.contains("system")) {
    if (doc["system"].is_null()) throw ModelError(path.string() + ": checkpoint holds no system");
    return system_from_json(doc["system"]);
  }
  return system_from_json(doc);
}

}  // namespace

RunSummary run_inspect(const ExperimentConfig& cfg, const RunOptions& options) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const InspectSection& in = cfg.inspect;
  RfvSystem system = load_inspected_system(in.system);
  const geometry::Triangulation& tri = system.triangulation();
  const std::size_t d = tri.dimension();
  if (in.axis_x >= d || in.axis_y >= d) {
    throw ConfigError("inspect.axes", "axes must be below the input dimension " + std::to_string(d));
  }
  const geometry::Box& box = system.domain();
  std::vector<double> base(d);
  for (std::size_t j = 0; j < d; ++j) base[j] = 0.5 * (box.lower[j] + box.upper[j]);
  if (!in.fixed.empty()) {
    if (in.fixed.size() != d) throw ConfigError("inspect.fixed", "needs one value per input dimension");
    base = in.fixed;
  }

  RunSummary summary;
  summary.config_hash = cfg.hash();
  OutputDir out(claim_output_dir(cfg.output_dir, options.existing), "config " + summary.config_hash);
  summary.output_dir = out.root();
  const std::size_t n = system.rules().size();
  {
    std::ofstream f = out.open("membership_grid.csv");
    csv::Writer w(f);
    w.comment(out.provenance());
    std::vector<std::string> header{"x" + std::to_string(in.axis_x), "x" + std::to_string(in.axis_y)};
    for (std::size_t k = 0; k < n; ++k) header.push_back("mu" + std::to_string(k));
    header.emplace_back("mu_sum");
    w.header(header);
    const std::size_t res = in.resolution;
    std::vector<double> q = base;
    for (std::size_t i = 0; i < res; ++i) {
      for (std::size_t j = 0; j < res; ++j) {
        const double fx = static_cast<double>(i) / static_cast<double>(res - 1);
        const double fy = static_cast<double>(j) / static_cast<double>(res - 1);
        q[in.axis_x] = box.lower[in.axis_x] + fx * (box.upper[in.axis_x] - box.lower[in.axis_x]);
        q[in.axis_y] = box.lower[in.axis_y] + fy * (box.upper[in.axis_y] - box.lower[in.axis_y]);
        const std::vector<double> mu = tri.membership_vector(q);
        std::vector<double> row{q[in.axis_x], q[in.axis_y]};
        double sum = 0.0;
        for (double m : mu) {
          row.push_back(m);
          sum += m;
        }
        row.push_back(sum);
        w.row(row);
      }
    }
  }
  {
    std::ofstream f = out.open("rules.csv");
    csv::Writer w(f);
    w.comment(out.provenance());
    std::vector<std::string> header{"rule", "frozen"};
    for (std::size_t j = 0; j < d; ++j) header.push_back("site" + std::to_string(j));
    header.emplace_back("neighbors");
    w.header(header);
    const auto neighbors = tri.site_neighbors();
    for (std::size_t k = 0; k < n; ++k) {
      const FuzzyRule& r = system.rules()[k];
      std::vector<std::string> row{std::to_string(k), r.frozen ? "1" : "0"};
      for (double v : r.site) row.push_back(csv::format_double(v));
      std::string list;
      for (std::size_t nb : neighbors[k]) list += (list.empty() ? "" : " ") + std::to_string(nb);
      row.push_back(list);
      w.row(row);
    }
  }
  {
    std::ofstream vertices = out.open("vertices.csv");
    std::ofstream simplices = out.open("simplices.csv");
    vertices << "# " << out.provenance() << "\r\n";
    simplices << "# " << out.provenance() << "\r\n";
    tri.dump_csv(vertices, simplices);
  }
  summary.wall_seconds = seconds_since(start);
  write_manifest(out, cfg, summary);
  if (options.log) {
    *options.log << "inspected " << n << " rules over a " << in.resolution << "x" << in.resolution << " grid; outputs in "
                 << summary.output_dir.string() << "\n";
  }
  return summary;
}

}  // namespace rfv::experiment
