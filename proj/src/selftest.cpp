#include "hardball/selftest.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "hardball/combinatorics.hpp"
#include "hardball/dynamics.hpp"
#include "hardball/synthetic.hpp"

namespace hardball {

void standard_collision_law(PhaseState& s, const SystemParams& p, int i, int j, const Lattice& a) {
  collide_in_place(s, p, i, j, a);
}

namespace {

SystemParams small_system(int n_balls, std::uint64_t seed) {
  SystemParams p;
  p.n_balls = n_balls;
  p.dim = 2;
  p.torus_side = 1.0;
  p.radius = n_balls == 2 ? 0.15 : 0.1;
  p.masses = sample_masses(n_balls, 0.5, 2.0, seed);
  return p;
}

template <class... Args>
std::string cat(Args&&... args) {
  std::ostringstream o;
  o.precision(3);
  (o << ... << args);
  return o.str();
}

}  // namespace

SuiteResult conservation_suite(CollisionLaw law) {
  SuiteResult out{"conservation", true, ""};
  double worst_h = 0.0, worst_p = 0.0, worst_contact = 0.0;
  int collisions = 0;
  try {
    for (int n_balls : {2, 3})
      for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const SystemParams p = small_system(n_balls, seed);
        const OrbitSegment seg = simulate<double>(p, sample_initial_state(p, seed), StopCondition{200, std::nullopt});
        PhaseState s = seg.initial;
        for (const auto& e : seg.events) {
          const double dt = e.time - s.time;
          for (std::size_t k = 0; k < s.positions.size(); ++k) s.positions[k] += dt * s.velocities[k];
          s.time = e.time;
          double dd = 0.0, u_after = 0.0;
          std::vector<double> d(p.dim);
          for (int c = 0; c < p.dim; ++c) {
            d[c] = s.position(e.i)[c] - s.position(e.j)[c] - p.torus_side * double(e.adjustment[c]);
            dd += d[c] * d[c];
          }
          worst_contact = std::max(worst_contact, std::abs(dd - 4 * p.radius * p.radius));
          s.velocities = e.pre_velocities;
          const auto before = conserved(s, p);
          law(s, p, e.i, e.j, e.adjustment);
          const auto after = conserved(s, p);
          worst_h = std::max(worst_h, std::abs(after.energy - before.energy));
          for (int c = 0; c < p.dim; ++c)
            worst_p = std::max(worst_p, std::abs(after.momentum[c] - before.momentum[c]));
          for (int c = 0; c < p.dim; ++c) u_after += (s.velocity(e.i)[c] - s.velocity(e.j)[c]) * d[c];
          if (!(u_after > 0.0)) out.passed = false;
          s.velocities = e.post_velocities;  // stay on the recorded orbit
          ++collisions;
        }
      }
  } catch (const Error& ex) {
    out.passed = false;
    out.detail = ex.what();
    return out;
  }
  if (worst_h > 1e-13 || worst_p > 1e-13 || worst_contact > 1e-10) out.passed = false;
  out.detail = cat(collisions, " collisions, max |dH| ", worst_h, ", max |dP| ", worst_p, ", max contact residue ",
                   worst_contact);
  return out;
}

SuiteResult reversal_suite() {
  SuiteResult out{"reversal", true, ""};
  double worst = 0.0;
  try {
    for (std::uint64_t seed = 1; seed <= 2; ++seed) {
      const SystemParams p = small_system(3, seed);
      const auto start = state_cast<Extended>(sample_initial_state(p, seed));
      const auto probe = simulate<Extended>(p, start, StopCondition{61, std::nullopt});
      const double duration = to_double((probe.events[59].time + probe.events[60].time) / 2 - start.time);
      const auto fwd = simulate<Extended>(p, start, StopCondition{std::nullopt, duration});
      const auto back = simulate<Extended>(p, reverse(fwd.final), StopCondition{std::nullopt, duration});
      for (std::size_t k = 0; k < start.positions.size(); ++k)
        worst = std::max(worst, std::abs(to_double(back.final.positions[k] - start.positions[k])));
      bool mirrored = fwd.size() == back.size();
      for (std::size_t k = 0; mirrored && k < fwd.size(); ++k) {
        const auto& a = fwd.events[k];
        const auto& b = back.events[fwd.size() - 1 - k];
        mirrored = a.i == b.i && a.j == b.j;
      }
      if (!mirrored) out.passed = false;
    }
  } catch (const Error& ex) {
    out.passed = false;
    out.detail = ex.what();
    return out;
  }
  if (worst > 1e-6) out.passed = false;
  out.detail = cat("max position error ", worst);
  return out;
}

SuiteResult cpf_suite(MassFraction fraction) {
  SuiteResult out{"cpf identity", true, ""};
  double worst_cpf = 0.0, worst_adv = 0.0;
  int mismatches = 0;
  try {
    for (int n_balls : {3, 4})
      for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        const SystemParams p = small_system(n_balls, seed);
        const OrbitSegment seg = simulate<double>(p, sample_initial_state(p, seed), StopCondition{20, std::nullopt});
        const NeutralBasis basis = neutral_direct(seg);
        const AdvanceSystem sys = advance_system(seg, {}, fraction);
        const int p_sigma = components(scheme_of(seg).pairs, n_balls).count;
        worst_cpf = std::max(worst_cpf, cpf_verify(seg, basis, fraction));
        worst_adv = std::max(worst_adv, advance_residual(sys, basis));
        if (sys.dim_neutral != basis.dim) ++mismatches;
        if (sys.equations != static_cast<int>(seg.size()) + p_sigma - n_balls) ++mismatches;
      }
  } catch (const Error& ex) {
    out.passed = false;
    out.detail = ex.what();
    return out;
  }
  if (worst_cpf > 1e-9 || worst_adv > 1e-10 || mismatches > 0) out.passed = false;
  out.detail = cat("max CPF residual ", worst_cpf, ", max advance residual ", worst_adv, ", ", mismatches,
                   " dimension or equation-count mismatches");
  return out;
}

SuiteResult example_vectors_suite() {
  SuiteResult out{"example vectors", true, ""};
  std::ostringstream detail;
  try {
    for (int n_balls : {3, 4}) {
      const OrbitSegment seg = cancelling_tree_segment(n_balls, 2, 3, 2, 5);
      const SegmentAnalysis a = analyze_segment(seg);
      const bool ok = a.dim_alpha == n_balls - 1 && a.dim_direct == 2 + n_balls - 1 && a.dim_cpf == a.dim_direct;
      if (!ok) out.passed = false;
      detail << "tree N=" << n_balls << ": dim alpha " << a.dim_alpha << ", dim " << a.dim_direct << "; ";
    }
    const OrbitSegment seg = massless_path_segment(4, 2, 3, 5);
    const NeutralBasis basis = neutral_direct(seg);
    const SegmentAnalysis a = analyze_segment(seg);
    // (v_1 - v_2, 0, ..., 0) must lie in the kernel
    Eigen::VectorXd w = Eigen::VectorXd::Zero(seg.params.coordinates());
    for (int c = 0; c < 2; ++c) w(c) = seg.initial.velocities[c] - seg.initial.velocities[2 + c];
    w.normalize();
    const double off = (w - basis.basis * (basis.basis.transpose() * w)).norm();
    if (a.sufficient || a.dim_direct < 2 + 2 || off > 1e-10 || a.dim_cpf != a.dim_direct) out.passed = false;
    detail << "massless path: dim " << a.dim_direct << ", sufficient " << a.sufficient << ", distance of the extra vector "
           << off;
  } catch (const Error& ex) {
    out.passed = false;
    out.detail = ex.what();
    return out;
  }
  out.detail = detail.str();
  return out;
}

SuiteResult richness_suite() {
  SuiteResult out{"richness", true, ""};
  std::mt19937_64 rng(2024);
  int compared = 0, wrong = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    const int n_balls = 2 + static_cast<int>(rng() % 3);
    const std::size_t len = 1 + rng() % 10;
    std::vector<BallPair> sigma;
    for (std::size_t k = 0; k < len; ++k) {
      const int a = static_cast<int>(rng() % n_balls);
      int b = static_cast<int>(rng() % (n_balls - 1));
      if (b >= a) ++b;
      sigma.emplace_back(std::min(a, b), std::max(a, b));
    }
    ++compared;
    if (richness(sigma, n_balls) != richness_exhaustive(sigma, n_balls)) ++wrong;
  }
  int closed_form_wrong = 0;
  for (int n = 3; n <= 8; ++n) {
    long long factorial = 1;
    for (int k = 2; k <= n; ++k) factorial *= k;
    if (threshold_C(n) != Rational(3 * factorial, 1LL << (n - 1))) ++closed_form_wrong;
  }
  SymbolicScheme twice{4, {{0, 1}, {0, 1}}, {{0, 0}, {0, 0}}, {0.5, 0.0}};
  SymbolicScheme sandwich{4, {{0, 1}, {2, 3}, {0, 1}}, {{0, 0}, {0, 0}, {0, 0}}, {0.5, 0.25, -0.25}};
  const auto v1 = check_property_A(twice);
  const auto v2 = check_property_A(sandwich);
  const bool flagged = v1 && v1->k == 1 && v1->l == 2 && v2 && v2->k == 1 && v2->l == 3;
  if (wrong > 0 || closed_form_wrong > 0 || !flagged) out.passed = false;
  out.detail = cat(compared, " random sequences, ", wrong, " greedy/exhaustive mismatches, ", closed_form_wrong,
                   " C(N) closed-form mismatches, synthetic violations ", flagged ? "flagged" : "missed");
  return out;
}

std::vector<SuiteResult> run_selftests() {
  return {conservation_suite(), reversal_suite(), cpf_suite(), example_vectors_suite(), richness_suite()};
}

}  // namespace hardball
