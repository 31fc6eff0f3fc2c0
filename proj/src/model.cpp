#include "hardball/model.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace hardball {

bool SystemParams::all_masses_positive() const {
  for (double m : masses)
    if (!(m > 0.0)) return false;
  return true;
}

void validate(const SystemParams& p) {
  if (p.n_balls < 2) throw Error(ErrorCode::BadDimension, "n_balls must be at least 2");
  if (p.dim < 2) throw Error(ErrorCode::BadDimension, "dim must be at least 2");
  if (static_cast<int>(p.masses.size()) != p.n_balls)
    throw Error(ErrorCode::BadDimension, "masses has " + std::to_string(p.masses.size()) +
                                             " entries, expected " + std::to_string(p.n_balls));
  if (!(p.torus_side > 0.0) || !(p.radius > 0.0))
    throw Error(ErrorCode::OverlapGeometry, "torus_side and radius must be positive");
  if (!(4.0 * p.radius < p.torus_side))
    throw Error(ErrorCode::OverlapGeometry, "4r must be smaller than L");
  int positive = 0;
  for (double m : p.masses) {
    if (!std::isfinite(m) || m < 0.0) throw Error(ErrorCode::DegenerateMasses, "masses must be finite and >= 0");
    if (m > 0.0) ++positive;
  }
  if (positive < 2) throw Error(ErrorCode::DegenerateMasses, "at least two masses must be positive");
  if (positive < p.n_balls && !p.allow_zero_mass)
    throw Error(ErrorCode::ZeroMass, "zero masses require allow_zero_mass");
}

PhaseState sample_initial_state(const SystemParams& p, std::uint64_t seed, const SamplerOptions& opt) {
  validate(p);
  if (!p.all_masses_positive())
    throw Error(ErrorCode::ZeroMass, "the standard sampler needs strictly positive masses");

  const int n = p.n_balls;
  const int d = p.dim;
  const double L = p.torus_side;
  const double min_dist = 2.0 * p.radius + opt.margin * L;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, L);
  std::normal_distribution<double> gauss(0.0, 1.0);

  PhaseState s(n, d);
  std::int64_t attempts = 0;
  for (int i = 0; i < n; ++i) {
    for (;;) {
      if (++attempts > opt.max_attempts)
        throw Error(ErrorCode::PackingTimeout,
                    "rejection sampling exceeded " + std::to_string(opt.max_attempts) + " attempts");
      for (auto& x : s.position(i)) x = uniform(rng);
      bool ok = true;
      for (int j = 0; j < i && ok; ++j) ok = torus_distance(s, i, j, L) >= min_dist;
      if (ok) break;
    }
  }

  for (auto& v : s.velocities) v = gauss(rng);
  const double total_mass = std::accumulate(p.masses.begin(), p.masses.end(), 0.0);
  for (int c = 0; c < d; ++c) {
    double momentum = 0.0;
    for (int i = 0; i < n; ++i) momentum += p.masses[i] * s.velocity(i)[c];
    const double drift = momentum / total_mass;
    for (int i = 0; i < n; ++i) s.velocity(i)[c] -= drift;
  }
  double twice_energy = 0.0;
  for (int i = 0; i < n; ++i)
    for (double v : s.velocity(i)) twice_energy += p.masses[i] * v * v;
  const double scale = 1.0 / std::sqrt(twice_energy);
  for (auto& v : s.velocities) v *= scale;
  return s;
}

std::vector<double> sample_masses(int n_balls, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x6d617373ULL);
  std::uniform_real_distribution<double> uniform(lo, hi);
  std::vector<double> m(n_balls);
  for (auto& x : m) x = uniform(rng);
  return m;
}

HatState to_hat(const PhaseState& s, const SystemParams& p) {
  if (!p.all_masses_positive()) throw Error(ErrorCode::ZeroMass, "hat coordinates need positive masses");
  HatState h{s.n_balls, s.dim, s.positions, s.velocities};
  for (int i = 0; i < s.n_balls; ++i) {
    const double w = std::sqrt(p.masses[i]);
    for (int c = 0; c < s.dim; ++c) {
      h.positions[i * s.dim + c] *= w;
      h.velocities[i * s.dim + c] *= w;
    }
  }
  return h;
}

}  // namespace hardball
