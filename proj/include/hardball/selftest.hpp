#pragma once

#include <string>
#include <vector>

#include "hardball/model.hpp"
#include "hardball/neutral.hpp"

namespace hardball {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Velocity update at contact; the conservation suite takes it as a
/// parameter so a mutated law can be shown to fail.
using CollisionLaw = void (*)(PhaseState& state, const SystemParams& params, int i, int j, const Lattice& a);
void standard_collision_law(PhaseState& state, const SystemParams& params, int i, int j, const Lattice& a);

/// Replays simulated segments through `law`; checks energy and momentum per
/// collision (1e-13), the contact residue (1e-10) and that the pair recedes.
SuiteResult conservation_suite(CollisionLaw law = standard_collision_law);
/// Extended-precision round trip: forward, reverse, same duration back.
SuiteResult reversal_suite();
/// CPF identity and advance system against the direct kernel on random
/// unequal-mass segments.
SuiteResult cpf_suite(MassFraction fraction = standard_mass_fraction);
SuiteResult example_vectors_suite();
/// Greedy richness against brute force, C(N) closed form, Property (A).
SuiteResult richness_suite();

std::vector<SuiteResult> run_selftests();

}  // namespace hardball
