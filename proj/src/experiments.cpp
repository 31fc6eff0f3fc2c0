#include "hardball/experiments.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "hardball/combinatorics.hpp"
#include "hardball/lyapunov.hpp"
#include "hardball/selftest.hpp"

namespace hardball {

using nlohmann::json;

namespace {

json base_summary(const RunConfig& c) {
  json s;
  s["schema_version"] = kSummarySchema;
  s["experiment"] = to_string(c.experiment);
  s["seed"] = c.seed;
  s["params"] = params_to_json(c.params);
  if (c.random_masses) s["params"]["masses"] = "random";
  s["config"] = render_config(c);
  return s;
}

std::filesystem::path prepare_out_dir(const RunConfig& c) {
  std::filesystem::path dir(c.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw Error(ErrorCode::Config, "output directory '" + c.out_dir + "' is not writable");
  return dir;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Config, "cannot write '" + path.string() + "'");
  return out;
}

Metadata common_metadata(const RunConfig& c) {
  Metadata m{{"n_balls", std::to_string(c.params.n_balls)},
             {"dim", std::to_string(c.params.dim)},
             {"torus_side", format_real(c.params.torus_side)},
             {"radius", format_real(c.params.radius)}};
  if (c.random_masses) {
    m.emplace_back("masses", "random");
    m.emplace_back("mass_min", format_real(c.mass_min));
    m.emplace_back("mass_max", format_real(c.mass_max));
  } else {
    std::string masses;
    for (std::size_t k = 0; k < c.params.masses.size(); ++k) masses += (k ? "," : "") + format_real(c.params.masses[k]);
    m.emplace_back("masses", masses);
  }
  m.emplace_back("seed", std::to_string(c.seed));
  return m;
}

}  // namespace

std::vector<std::uint64_t> ensemble_seeds(const RunConfig& c) {
  std::vector<std::uint64_t> out;
  for (int k = 0; k < c.ensemble_size; ++k) out.push_back(c.seed + static_cast<std::uint64_t>(k));
  return out;
}

OrbitSegment simulate_segment(const SystemParams& params, const PhaseState& state, std::int64_t collisions,
                              JacobianMode precision, const DynamicsOptions& dynamics) {
  const StopCondition stop{collisions, std::nullopt};
  switch (precision) {
    case JacobianMode::Extended:
      return segment_cast<double>(simulate<Extended>(params, state_cast<Extended>(state), stop, dynamics));
    case JacobianMode::Deep:
      return segment_cast<double>(simulate<Deep>(params, state_cast<Deep>(state), stop, dynamics));
    default:
      return simulate<double>(params, state, stop, dynamics);
  }
}

long long effective_min_richness(const RunConfig& c) {
  return c.min_richness ? *c.min_richness : richness_requirement(c.params.n_balls);
}

SurveyRow survey_member(const RunConfig& c, std::uint64_t seed) {
  SurveyRow row;
  row.seed = seed;
  row.min_richness = effective_min_richness(c);
  try {
    const SystemParams p = params_for_seed(c, seed);
    row.masses = p.masses;
    const PhaseState state = sample_initial_state(p, seed);
    const OrbitSegment seg = simulate_segment(p, state, c.segment_length, c.jacobian, c.dynamics);
    NeutralOptions nopt;
    nopt.rank_tol = c.rank_tol;
    JacobianOptions jopt;
    jopt.rank_tol = c.rank_tol;
    jopt.parallel = false;  // members already run in parallel
    jopt.dynamics = c.dynamics;
    row.analysis = analyze_segment(seg, nopt, c.jacobian, jopt);
    if (!row.analysis->methods_agree) row.message = row.analysis->diagnostic;
  } catch (const Error& ex) {
    row.status = std::string(to_string(ex.code()));
    row.message = ex.what();
    row.analysis.reset();
  }
  return row;
}

RichnessRow richness_member(const RunConfig& c, std::uint64_t seed) {
  RichnessRow row;
  row.seed = seed;
  row.requirement = effective_min_richness(c);
  try {
    const SystemParams p = params_for_seed(c, seed);
    const OrbitSegment seg = simulate<double>(p, sample_initial_state(p, seed),
                                              StopCondition{c.segment_length, std::nullopt}, c.dynamics);
    const SymbolicScheme scheme = scheme_of(seg);
    row.summary = summarize(scheme);
    row.violation = check_property_A(scheme);
  } catch (const Error& ex) {
    row.status = std::string(to_string(ex.code()));
    row.message = ex.what();
  }
  return row;
}

CommandOutcome cmd_simulate(const RunConfig& c, std::ostream& log) {
  if (!c.n_collisions && !c.total_time) throw Error(ErrorCode::Config, "simulate needs n_collisions or total_time");
  const auto dir = prepare_out_dir(c);
  const SystemParams p = params_for_seed(c, c.seed);
  const PhaseState start = sample_initial_state(p, c.seed);
  const OrbitSegment seg = simulate<double>(p, start, StopCondition{c.n_collisions, c.total_time}, c.dynamics);
  {
    auto out = open_out(dir / "events.jsonl");
    write_events(out, seg);
  }
  const auto h0 = conserved(start, p);
  const auto h1 = conserved(seg.final, p);
  double residue = 0.0, momentum_drift = 0.0;
  for (const auto& e : seg.events) residue = std::max(residue, std::abs(e.contact_residue));
  for (int k = 0; k < p.dim; ++k) momentum_drift = std::max(momentum_drift, std::abs(h1.momentum[k] - h0.momentum[k]));
  const ReplayReport rep = replay(seg, c.dynamics);

  CommandOutcome res;
  res.summary = base_summary(c);
  res.summary["params"]["masses"] = p.masses;
  res.summary["event_count"] = seg.size();
  res.summary["final_time"] = seg.final.time;
  res.summary["energy"] = h1.energy;
  res.summary["momentum"] = h1.momentum;
  res.summary["energy_drift"] = std::abs(h1.energy - h0.energy);
  res.summary["momentum_drift"] = momentum_drift;
  res.summary["max_contact_residue"] = residue;
  res.summary["replay_velocity_deviation"] = rep.max_velocity_deviation;
  write_json_file((dir / "summary.json").string(), res.summary);
  log << "simulate: " << seg.size() << " collisions, |dH| " << format_real(std::abs(h1.energy - h0.energy))
      << ", max contact residue " << format_real(residue) << "\n";
  return res;
}

CommandOutcome cmd_sufficiency(const RunConfig& c, std::ostream& log) {
  const auto dir = prepare_out_dir(c);
  const auto seeds = ensemble_seeds(c);
  const auto rows = ensemble_map(seeds, [&](std::uint64_t s) { return survey_member(c, s); }, c.jobs);
  const long long need = effective_min_richness(c);
  const SurveyAggregate agg = aggregate_survey(rows, need);

  Metadata meta = common_metadata(c);
  meta.emplace_back("segment_length", std::to_string(c.segment_length));
  meta.emplace_back("ensemble_size", std::to_string(c.ensemble_size));
  meta.emplace_back("min_richness", std::to_string(need));
  {
    auto out = open_out(dir / "survey.tsv");
    write_survey(out, rows, agg, meta);
  }
  CommandOutcome res;
  res.summary = base_summary(c);
  res.summary["aggregate"] = aggregate_to_json(agg);
  json failures = json::array();
  for (const auto& r : rows)
    if (!r.analysis) failures.push_back({{"seed", r.seed}, {"status", r.status}, {"message", r.message}});
  res.summary["failures"] = failures;
  json disagreements = json::array();
  for (const auto& r : rows)
    if (r.analysis && !r.analysis->methods_agree) disagreements.push_back({{"seed", r.seed}, {"diagnostic", r.message}});
  res.summary["disagreements"] = disagreements;
  res.summary["rich_fraction"] = agg.rich > 0 ? double(agg.rich_sufficient) / agg.rich : 0.0;
  write_json_file((dir / "summary.json").string(), res.summary);
  log << "sufficiency: richness >= " << need << ": " << agg.rich_sufficient << "/" << agg.rich << " sufficient ("
      << agg.failed << " failed seeds)" << (agg.tainted ? " TAINTED: neutral-space methods disagree" : "") << "\n";
  if (agg.tainted) res.exit_code = exit_code(ErrorCode::MethodDisagreement);
  return res;
}

CommandOutcome cmd_lyapunov(const RunConfig& c, std::ostream& log) {
  if (!c.total_time) throw Error(ErrorCode::Config, "lyapunov needs total_time");
  const auto dir = prepare_out_dir(c);
  const SystemParams p = params_for_seed(c, c.seed);
  LyapunovOptions opt;
  opt.renorm_every = c.renorm_every;
  opt.frame_size = c.frame_size;
  opt.dynamics = c.dynamics;
  const Spectrum result = lyapunov_spectrum(p, sample_initial_state(p, c.seed), *c.total_time, opt);
  const double tol = c.tol_zero ? *c.tol_zero : default_tol_zero(result);
  const VerdictReport verdict = relevant_nonzero(result, tol);

  Metadata meta = common_metadata(c);
  meta.emplace_back("total_time", format_real(*c.total_time));
  meta.emplace_back("renorm_every", std::to_string(c.renorm_every));
  meta.emplace_back("frame_size", std::to_string(result.frame_size));
  meta.emplace_back("tol_zero", format_real(tol));
  meta.emplace_back("verdict", to_string(verdict.verdict));
  {
    auto out = open_out(dir / "spectrum.tsv");
    write_spectrum(out, result, meta);
  }
  CommandOutcome res;
  res.summary = base_summary(c);
  res.summary["params"]["masses"] = p.masses;
  res.summary["exponents"] = result.exponents;
  res.summary["convergence"] = result.convergence;
  res.summary["collisions"] = result.collisions;
  res.summary["renormalizations"] = result.renormalizations;
  res.summary["max_gram_error"] = result.max_gram_error;
  res.summary["tol_zero"] = tol;
  res.summary["near_zero"] = verdict.near_zero;
  res.summary["expected_zero"] = verdict.expected_zero;
  res.summary["relevant"] = verdict.relevant;
  res.summary["pairing_defect"] = result.full_frame() ? json(pairing_defect(result)) : json(nullptr);
  res.summary["verdict"] = to_string(verdict.verdict);
  res.summary["reason"] = verdict.reason;
  write_json_file((dir / "summary.json").string(), res.summary);
  log << "lyapunov: lambda_1 " << format_real(result.exponents.front()) << ", " << verdict.near_zero
      << " exponents below tol_zero " << format_real(tol) << ", verdict " << to_string(verdict.verdict) << " ("
      << verdict.reason << ")\n";
  return res;
}

CommandOutcome cmd_richness(const RunConfig& c, std::ostream& log) {
  const auto dir = prepare_out_dir(c);
  const auto seeds = ensemble_seeds(c);
  const auto rows = ensemble_map(seeds, [&](std::uint64_t s) { return richness_member(c, s); }, c.jobs);
  Metadata meta = common_metadata(c);
  meta.emplace_back("segment_length", std::to_string(c.segment_length));
  meta.emplace_back("threshold_C", [&] {
    const Rational t = threshold_C(c.params.n_balls);
    return std::to_string(t.numerator()) + "/" + std::to_string(t.denominator());
  }());
  {
    auto out = open_out(dir / "richness.tsv");
    write_richness(out, rows, meta);
  }
  int rich = 0, violations = 0, failed = 0;
  for (const auto& r : rows) {
    if (!r.summary) {
      ++failed;
      continue;
    }
    if (r.summary->richness >= r.requirement) ++rich;
    if (r.violation) ++violations;
  }
  CommandOutcome res;
  res.summary = base_summary(c);
  res.summary["requirement"] = effective_min_richness(c);
  res.summary["segments"] = rows.size();
  res.summary["rich"] = rich;
  res.summary["failed"] = failed;
  res.summary["property_a_violations"] = violations;
  write_json_file((dir / "summary.json").string(), res.summary);
  log << "richness: " << rich << "/" << rows.size() << " segments reach " << effective_min_richness(c) << ", "
      << violations << " Property (A) violations\n";
  // real orbits always have Property (A)
  if (violations > 0) res.exit_code = exit_code(ErrorCode::MethodDisagreement);
  return res;
}

CommandOutcome cmd_selftest(const RunConfig& c, std::ostream& log) {
  const auto suites = run_selftests();
  CommandOutcome res;
  res.summary = base_summary(c);
  json list = json::array();
  bool all = true;
  for (const auto& s : suites) {
    log << (s.passed ? "PASS " : "FAIL ") << s.name << ": " << s.detail << "\n";
    list.push_back({{"name", s.name}, {"passed", s.passed}, {"detail", s.detail}});
    all = all && s.passed;
  }
  res.summary["suites"] = list;
  res.summary["passed"] = all;
  const auto dir = prepare_out_dir(c);
  write_json_file((dir / "summary.json").string(), res.summary);
  if (!all) res.exit_code = exit_code(ErrorCode::MethodDisagreement);
  return res;
}

int run_experiment(const RunConfig& c, std::ostream& log, std::ostream& err) {
  try {
    if (c.experiment != Experiment::Selftest) validate_config(c);
    switch (c.experiment) {
      case Experiment::Simulate: return cmd_simulate(c, log).exit_code;
      case Experiment::Sufficiency: return cmd_sufficiency(c, log).exit_code;
      case Experiment::Lyapunov: return cmd_lyapunov(c, log).exit_code;
      case Experiment::Richness: return cmd_richness(c, log).exit_code;
      case Experiment::Selftest: return cmd_selftest(c, log).exit_code;
    }
  } catch (const Error& ex) {
    err << "hardball: " << ex.what() << "\n";
    return exit_code(ex.code());
  } catch (const std::exception& ex) {
    err << "hardball: internal error: " << ex.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace hardball
