#pragma once

#include <cstdint>
#include <exception>
#include <iosfwd>
#include <optional>
#include <vector>

#include <omp.h>

#include <json.hpp>

#include "hardball/config.hpp"
#include "hardball/io.hpp"

namespace hardball {

/// seed, seed + 1, ..., seed + ensemble_size - 1.
std::vector<std::uint64_t> ensemble_seeds(const RunConfig& config);

/// Reference ensemble map: members in seed order on the calling thread.
template <class F>
auto ensemble_serial(const std::vector<std::uint64_t>& seeds, F&& member) {
  using R = decltype(member(seeds.front()));
  std::vector<R> out;
  out.reserve(seeds.size());
  for (auto s : seeds) out.push_back(member(s));
  return out;
}

/// Same results as ensemble_serial, members spread over `jobs` threads. Each
/// member owns its trajectory; results land in seed order. The first member
/// exception (in seed order) is rethrown after all members finish.
template <class F>
auto ensemble_parallel(const std::vector<std::uint64_t>& seeds, F&& member, int jobs) {
  using R = decltype(member(seeds.front()));
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(seeds.size());
  std::vector<std::optional<R>> slots(seeds.size());
  std::vector<std::exception_ptr> failures(seeds.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    try {
      slots[k].emplace(member(seeds[k]));
    } catch (...) {
      failures[k] = std::current_exception();
    }
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);
  std::vector<R> out;
  out.reserve(seeds.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

template <class F>
auto ensemble_map(const std::vector<std::uint64_t>& seeds, F&& member, int jobs) {
  if (jobs <= 1) return ensemble_serial(seeds, member);
  return ensemble_parallel(seeds, member, jobs);
}

/// Simulates a segment of `collisions` events. With an Extended or Deep
/// Jacobian oracle the orbit is computed in that precision (and rounded), so
/// the oracle's re-simulation follows the same collision sequence.
OrbitSegment simulate_segment(const SystemParams& params, const PhaseState& state, std::int64_t collisions,
                              JacobianMode precision, const DynamicsOptions& dynamics = {});

long long effective_min_richness(const RunConfig& config);

/// Per-seed errors are recorded in the row, never thrown.
SurveyRow survey_member(const RunConfig& config, std::uint64_t seed);
RichnessRow richness_member(const RunConfig& config, std::uint64_t seed);

struct CommandOutcome {
  int exit_code = 0;
  nlohmann::json summary;
};

/// Each command writes its files into config.out_dir (summary.json plus
/// events.jsonl, survey.tsv, spectrum.tsv or richness.tsv).
CommandOutcome cmd_simulate(const RunConfig& config, std::ostream& log);
CommandOutcome cmd_sufficiency(const RunConfig& config, std::ostream& log);
CommandOutcome cmd_lyapunov(const RunConfig& config, std::ostream& log);
CommandOutcome cmd_richness(const RunConfig& config, std::ostream& log);
CommandOutcome cmd_selftest(const RunConfig& config, std::ostream& log);

/// Validates, dispatches on config.experiment and maps errors to exit codes
/// with a diagnostic on `err`.
int run_experiment(const RunConfig& config, std::ostream& log, std::ostream& err);

}  // namespace hardball
