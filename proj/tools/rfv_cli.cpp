#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "rfv/experiment.hpp"

namespace {

namespace ex = rfv::experiment;

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::optional<std::size_t> repetitions;
  std::string apriori;
  std::size_t jobs = 1;
  std::string existing = "refuse";
  std::string system;
  std::optional<std::size_t> resolution;
  std::vector<std::size_t> axes;
};

std::size_t default_jobs() {
  if (const char* env = std::getenv("RFV_JOBS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring RFV_JOBS='" << env << "'\n";
  }
  return 1;
}

void add_common(CLI::App* cmd, Flags& f, bool experiment) {
  cmd->add_option("--config", f.config, "JSON experiment file")->check(CLI::ExistingFile);
  cmd->add_option("--out-dir", f.out_dir, "Output directory (overrides output_dir)");
  cmd->add_option("--existing", f.existing, "When the output directory already holds results")
      ->check(CLI::IsMember({"refuse", "suffix"}));
  if (!experiment) return;
  cmd->add_option("--seed", f.seed, "Seed of the first repetition");
  cmd->add_option("--repetitions", f.repetitions, "Independent runs, seeds seed, seed+1, ...");
  cmd->add_option("--jobs", f.jobs, "Fitness evaluation threads (default: RFV_JOBS or 1)")
      ->check(CLI::PositiveNumber);
}

ex::ExperimentConfig build_config(ex::Kind kind, const Flags& f) {
  ex::ExperimentConfig cfg = f.config.empty() ? ex::parse_config(nlohmann::json::object(), kind)
                                              : ex::load_config(f.config, kind);
  if (f.seed) cfg.seed = *f.seed;
  if (f.repetitions) cfg.repetitions = *f.repetitions;
  if (!f.out_dir.empty()) cfg.output_dir = f.out_dir;
  if (!f.apriori.empty()) cfg.robot.apriori = f.apriori == "on";
  if (!f.system.empty()) cfg.inspect.system = f.system;
  if (f.resolution) cfg.inspect.resolution = *f.resolution;
  if (!f.axes.empty()) {
    cfg.inspect.axis_x = f.axes[0];
    cfg.inspect.axis_y = f.axes[1];
  }
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recurrent fuzzy Voronoi controllers: evolution experiments and inspection"};
  app.require_subcommand(1);
  Flags f;
  f.jobs = default_jobs();

  CLI::App* sysid = app.add_subcommand("sysid", "Evolve controllers for the nonlinear plant tracking benchmark");
  add_common(sysid, f, true);
  CLI::App* robot = app.add_subcommand("robot", "Evolve light-following maze controllers");
  add_common(robot, f, true);
  robot->add_option("--apriori", f.apriori, "Include the six expert rules")->check(CLI::IsMember({"on", "off"}));
  CLI::App* inspect = app.add_subcommand("inspect", "Membership grid and rule metadata of a saved system");
  add_common(inspect, f, false);
  inspect->add_option("--system", f.system, "System JSON (a checkpoint's \"system\" or a saved system)");
  inspect->add_option("--resolution", f.resolution, "Grid points per axis");
  inspect->add_option("--axes", f.axes, "Two input indices spanning the grid")->expected(2)->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  const ex::Kind kind = sysid->parsed() ? ex::Kind::sysid : robot->parsed() ? ex::Kind::robot : ex::Kind::inspect;
  ex::ExperimentConfig cfg;
  try {
    cfg = build_config(kind, f);
  } catch (const ex::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }

  ex::RunOptions options;
  options.jobs = f.jobs;
  options.existing = f.existing == "suffix" ? ex::ExistingOutput::suffix : ex::ExistingOutput::refuse;
  options.log = &std::cout;
  try {
    ex::run_experiment(cfg, options);
  } catch (const ex::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return 0;
}
