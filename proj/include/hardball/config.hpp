#pragma once

// Run configuration: one `key = value` per line, `#` starts a comment,
// blank lines are ignored. Vectors are comma or whitespace separated.
//
//   n_balls = 3
//   dim = 2
//   torus_side = 1.0
//   radius = 0.15
//   masses = 1, 1, 2.3        # or `random`, drawn per seed from [mass_min, mass_max]
//   seed = 42
//
// Every key can be overridden from the command line with the same name.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hardball/dynamics.hpp"
#include "hardball/model.hpp"
#include "hardball/neutral.hpp"

namespace hardball {

enum class Experiment { Simulate, Sufficiency, Lyapunov, Richness, Selftest };

std::string to_string(Experiment e);
/// Throws Error{Config}.
Experiment parse_experiment(const std::string& name);

struct RunConfig {
  SystemParams params;
  bool random_masses = false;
  double mass_min = 0.5;
  double mass_max = 2.0;
  std::uint64_t seed = 1;
  Experiment experiment = Experiment::Simulate;

  std::optional<std::int64_t> n_collisions;
  std::optional<double> total_time;
  int segment_length = 20;
  int ensemble_size = 100;
  /// Richness needed for a segment to count in the survey; default ceil(C(N)).
  std::optional<long long> min_richness;
  JacobianMode jacobian = JacobianMode::Off;
  double rank_tol = 1e-8;

  int renorm_every = 10;
  int frame_size = 0;
  std::optional<double> tol_zero;

  DynamicsOptions dynamics;
  int jobs = 1;
  std::string out_dir = ".";
};

/// Ordered key/value pairs of a config text. Throws Error{Config} with the
/// line number on malformed lines or duplicate keys.
std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text);

/// Throws Error{Config} on unknown keys or unparsable values.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

RunConfig load_config(const std::string& path);
RunConfig config_from_text(const std::string& text);

/// Knob and parameter checks; random masses are checked against their range.
/// Throws Error{Config} or the validation errors of the model.
void validate_config(const RunConfig& config);

/// Masses for one ensemble member.
SystemParams params_for_seed(const RunConfig& config, std::uint64_t seed);

/// Canonical `key = value` rendering, loadable by config_from_text.
std::string render_config(const RunConfig& config);

}  // namespace hardball
