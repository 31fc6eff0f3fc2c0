// hardball <experiment> [--config PATH] [--seed N] [--jobs N] [--out DIR] [--<key> VALUE ...]
//
// Every configuration key is also a flag; flags win over the config file.

#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "hardball/errors.hpp"
#include "hardball/experiments.hpp"

namespace {

const char* const kKeys[] = {"n_balls",        "dim",          "torus_side",  "radius",        "masses",
                             "mass_min",       "mass_max",     "allow_zero_mass", "n_collisions", "total_time",
                             "segment_length", "ensemble_size", "min_richness", "jacobian",     "rank_tol",
                             "renorm_every",   "frame_size",   "tol_zero",    "resync_every",  "tangent_policy",
                             "horizon_cap"};

}  // namespace

int main(int argc, char** argv) {
  using namespace hardball;
  CLI::App app{"Hard-ball systems on a torus: simulation, neutral-space sufficiency, Lyapunov spectra"};
  std::string experiment, config_path, out_dir;
  std::uint64_t seed = 0;
  int jobs = 0;
  app.add_option("experiment", experiment, "simulate | sufficiency | lyapunov | richness | selftest")->required();
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--seed", seed, "seed (ensemble members use seed, seed+1, ...)");
  app.add_option("--jobs", jobs, "worker threads for ensembles")->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "output directory");
  std::map<std::string, std::string> overrides;
  for (const char* key : kKeys) app.add_option(std::string("--") + key, overrides[key], "overrides the config key");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_code(ErrorCode::Config);
  }

  RunConfig config;
  try {
    if (!config_path.empty()) config = load_config(config_path);
    for (const auto& [key, value] : overrides)
      if (app.count("--" + key) > 0) apply_setting(config, key, value);
    config.experiment = parse_experiment(experiment);
    if (app.count("--seed") > 0) config.seed = seed;
    if (app.count("--jobs") > 0) config.jobs = jobs;
    if (app.count("--out") > 0) config.out_dir = out_dir;
  } catch (const Error& ex) {
    std::cerr << "hardball: " << ex.what() << "\n";
    return exit_code(ex.code());
  }
  return run_experiment(config, std::cout, std::cerr);
}
