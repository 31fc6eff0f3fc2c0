#include "hardball/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "hardball/io.hpp"

namespace hardball {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& what) {
  throw Error(ErrorCode::Config, "key '" + key + "': " + what + " (got '" + value + "')");
}

template <class Int>
Int parse_int(const std::string& key, const std::string& value) {
  Int out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value, "expected an integer");
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value, "expected a number");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  bad_value(key, value, "expected true or false");
}

std::vector<double> parse_reals(const std::string& key, const std::string& value) {
  std::string flat = value;
  std::replace(flat.begin(), flat.end(), ',', ' ');
  std::istringstream in(flat);
  std::vector<double> out;
  for (std::string tok; in >> tok;) out.push_back(parse_real(key, tok));
  if (out.empty()) bad_value(key, value, "expected a list of numbers");
  return out;
}

}  // namespace

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::Simulate: return "simulate";
    case Experiment::Sufficiency: return "sufficiency";
    case Experiment::Lyapunov: return "lyapunov";
    case Experiment::Richness: return "richness";
    case Experiment::Selftest: return "selftest";
  }
  return "simulate";
}

Experiment parse_experiment(const std::string& name) {
  for (auto e : {Experiment::Simulate, Experiment::Sufficiency, Experiment::Lyapunov, Experiment::Richness,
                 Experiment::Selftest})
    if (to_string(e) == name) return e;
  throw Error(ErrorCode::Config, "unknown experiment '" + name + "'");
}

std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::set<std::string> seen;
  std::istringstream in(text);
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::Config, "line " + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw Error(ErrorCode::Config, "line " + std::to_string(line_no) + ": empty key or value");
    if (!seen.insert(key).second)
      throw Error(ErrorCode::Config, "line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

void apply_setting(RunConfig& c, const std::string& key, const std::string& value) {
  if (key == "n_balls") c.params.n_balls = parse_int<int>(key, value);
  else if (key == "dim") c.params.dim = parse_int<int>(key, value);
  else if (key == "torus_side") c.params.torus_side = parse_real(key, value);
  else if (key == "radius") c.params.radius = parse_real(key, value);
  else if (key == "masses") {
    if (value == "random") {
      c.random_masses = true;
      c.params.masses.clear();
    } else {
      c.random_masses = false;
      c.params.masses = parse_reals(key, value);
    }
  } else if (key == "mass_min") c.mass_min = parse_real(key, value);
  else if (key == "mass_max") c.mass_max = parse_real(key, value);
  else if (key == "allow_zero_mass") c.params.allow_zero_mass = parse_bool(key, value);
  else if (key == "seed") c.seed = parse_int<std::uint64_t>(key, value);
  else if (key == "experiment") c.experiment = parse_experiment(value);
  else if (key == "n_collisions") c.n_collisions = parse_int<std::int64_t>(key, value);
  else if (key == "total_time") c.total_time = parse_real(key, value);
  else if (key == "segment_length") c.segment_length = parse_int<int>(key, value);
  else if (key == "ensemble_size") c.ensemble_size = parse_int<int>(key, value);
  else if (key == "min_richness") c.min_richness = parse_int<long long>(key, value);
  else if (key == "jacobian") {
    if (value == "off") c.jacobian = JacobianMode::Off;
    else if (value == "double") c.jacobian = JacobianMode::Double;
    else if (value == "extended") c.jacobian = JacobianMode::Extended;
    else if (value == "deep") c.jacobian = JacobianMode::Deep;
    else bad_value(key, value, "expected off, double, extended or deep");
  } else if (key == "rank_tol") c.rank_tol = parse_real(key, value);
  else if (key == "renorm_every") c.renorm_every = parse_int<int>(key, value);
  else if (key == "frame_size") c.frame_size = parse_int<int>(key, value);
  else if (key == "tol_zero") c.tol_zero = parse_real(key, value);
  else if (key == "resync_every") c.dynamics.resync_every = parse_int<std::int64_t>(key, value);
  else if (key == "tangent_policy") {
    if (value == "abort") c.dynamics.tangent_policy = TangentPolicy::Abort;
    else if (value == "nudge") c.dynamics.tangent_policy = TangentPolicy::Nudge;
    else bad_value(key, value, "expected abort or nudge");
  } else if (key == "horizon_cap") c.dynamics.horizon_cap = parse_real(key, value);
  else if (key == "jobs") c.jobs = parse_int<int>(key, value);
  else if (key == "out") c.out_dir = value;
  else throw Error(ErrorCode::Config, "unknown key '" + key + "'");
}

RunConfig config_from_text(const std::string& text) {
  RunConfig c;
  for (const auto& [k, v] : parse_config_text(text)) apply_setting(c, k, v);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, "cannot read config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return config_from_text(text.str());
}

void validate_config(const RunConfig& c) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorCode::Config, what);
  };
  require(c.segment_length > 0, "segment_length must be positive");
  require(c.ensemble_size > 0, "ensemble_size must be positive");
  require(c.renorm_every > 0, "renorm_every must be positive");
  require(c.frame_size >= 0, "frame_size must be non-negative");
  require(c.jobs > 0, "jobs must be positive");
  require(c.rank_tol > 0.0 && c.rank_tol < 1.0, "rank_tol must lie in (0, 1)");
  require(!c.n_collisions || *c.n_collisions > 0, "n_collisions must be positive");
  require(!c.total_time || *c.total_time > 0.0, "total_time must be positive");
  require(!c.tol_zero || *c.tol_zero > 0.0, "tol_zero must be positive");
  require(!c.min_richness || *c.min_richness >= 0, "min_richness must be non-negative");
  require(c.dynamics.resync_every >= 0, "resync_every must be non-negative");
  require(!c.out_dir.empty(), "out must name a directory");
  if (c.random_masses) {
    require(c.mass_min > 0.0 && c.mass_max >= c.mass_min, "need 0 < mass_min <= mass_max");
    SystemParams probe = c.params;
    probe.masses.assign(std::size_t(std::max(c.params.n_balls, 0)), c.mass_min);
    validate(probe);
  } else {
    validate(c.params);
  }
  require(c.frame_size <= 2 * c.params.coordinates(), "frame_size exceeds 2 n_balls dim");
}

SystemParams params_for_seed(const RunConfig& c, std::uint64_t seed) {
  SystemParams p = c.params;
  if (c.random_masses) p.masses = sample_masses(p.n_balls, c.mass_min, c.mass_max, seed);
  return p;
}

std::string render_config(const RunConfig& c) {
  std::ostringstream o;
  o << "experiment = " << to_string(c.experiment) << "\n";
  o << "n_balls = " << c.params.n_balls << "\n";
  o << "dim = " << c.params.dim << "\n";
  o << "torus_side = " << format_real(c.params.torus_side) << "\n";
  o << "radius = " << format_real(c.params.radius) << "\n";
  if (c.random_masses) {
    o << "masses = random\n";
    o << "mass_min = " << format_real(c.mass_min) << "\n";
    o << "mass_max = " << format_real(c.mass_max) << "\n";
  } else {
    o << "masses =";
    for (std::size_t k = 0; k < c.params.masses.size(); ++k)
      o << (k ? ", " : " ") << format_real(c.params.masses[k]);
    o << "\n";
  }
  if (c.params.allow_zero_mass) o << "allow_zero_mass = true\n";
  o << "seed = " << c.seed << "\n";
  if (c.n_collisions) o << "n_collisions = " << *c.n_collisions << "\n";
  if (c.total_time) o << "total_time = " << format_real(*c.total_time) << "\n";
  o << "segment_length = " << c.segment_length << "\n";
  o << "ensemble_size = " << c.ensemble_size << "\n";
  if (c.min_richness) o << "min_richness = " << *c.min_richness << "\n";
  const char* jac[] = {"off", "double", "extended", "deep"};
  o << "jacobian = " << jac[static_cast<int>(c.jacobian)] << "\n";
  o << "rank_tol = " << format_real(c.rank_tol) << "\n";
  o << "renorm_every = " << c.renorm_every << "\n";
  o << "frame_size = " << c.frame_size << "\n";
  if (c.tol_zero) o << "tol_zero = " << format_real(*c.tol_zero) << "\n";
  o << "resync_every = " << c.dynamics.resync_every << "\n";
  o << "tangent_policy = " << (c.dynamics.tangent_policy == TangentPolicy::Abort ? "abort" : "nudge") << "\n";
  return o.str();
}

}  // namespace hardball
