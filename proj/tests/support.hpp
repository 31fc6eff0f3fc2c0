#pragma once

// Shared fixtures and the finite-difference oracle for the tangent map.

#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "hardball/dynamics.hpp"
#include "hardball/lyapunov.hpp"
#include "hardball/model.hpp"

namespace hardball::testing {

inline SystemParams system(int n_balls, std::vector<double> masses, double radius = 0.1, double side = 1.0) {
  SystemParams p;
  p.n_balls = n_balls;
  p.dim = 2;
  p.torus_side = side;
  p.radius = radius;
  p.masses = std::move(masses);
  return p;
}

inline SystemParams random_mass_system(int n_balls, std::uint64_t seed, double radius = 0.1) {
  return system(n_balls, sample_masses(n_balls, 0.5, 2.0, seed), radius);
}

/// Segment computed in Deep precision from the double initial state and
/// rounded: its events are accurate to double even after many collisions.
inline OrbitSegment accurate_segment(const SystemParams& p, std::uint64_t seed, std::int64_t collisions) {
  const PhaseState s = sample_initial_state(p, seed);
  return segment_cast<double>(simulate<Deep>(p, state_cast<Deep>(s), StopCondition{collisions, std::nullopt}));
}

struct TangentComparison {
  double relative_error = 0.0;
  double growth = 0.0;  // |J delta| for the unit input delta
};

/// Propagates a random unit tangent vector across `events` collisions,
/// starting midway between collisions `skip` and `skip + 1`, with the tangent
/// map, and compares against central differences of the nonlinear flow run
/// in 120-digit arithmetic.
inline TangentComparison tangent_vs_finite_difference(const SystemParams& p, const PhaseState& start, int skip,
                                                      int events, std::uint64_t seed) {
  using X = Extended;
  const auto x0 = state_cast<X>(start);
  const auto ref = simulate<X>(p, x0, StopCondition{skip + events + 1, std::nullopt});
  if (static_cast<int>(ref.size()) < skip + events + 1) throw Error(ErrorCode::SingularSegment, "orbit too short");
  const X t_a = skip == 0 ? x0.time : (ref.events[skip - 1].time + ref.events[skip].time) / 2;
  const X t_b = (ref.events[skip + events - 1].time + ref.events[skip + events].time) / 2;
  const auto at_a = simulate<X>(p, x0, StopCondition{std::nullopt, to_double(t_a - x0.time)}).final;
  const double duration = to_double(t_b - at_a.time);

  const int half = p.coordinates();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::VectorXd delta(2 * half);
  for (auto& x : delta) x = g(rng);
  delta.normalize();

  const X eps("1e-30");
  auto run = [&](const X& sign) {
    auto s = at_a;
    for (int k = 0; k < half; ++k) {
      s.positions[k] += sign * eps * X(delta(k));
      s.velocities[k] += sign * eps * X(delta(half + k));
    }
    return simulate<X>(p, s, StopCondition{std::nullopt, duration});
  };
  const auto plus = run(X(1));
  const auto minus = run(X(-1));
  if (static_cast<int>(plus.size()) != events || static_cast<int>(minus.size()) != events)
    throw Error(ErrorCode::SchemeChanged, "perturbed orbit changed its collisions");
  Eigen::VectorXd fd(2 * half);
  for (int k = 0; k < half; ++k) {
    fd(k) = to_double((plus.final.positions[k] - minus.final.positions[k]) / (2 * eps));
    fd(half + k) = to_double((plus.final.velocities[k] - minus.final.velocities[k]) / (2 * eps));
  }

  const auto window = segment_cast<double>(simulate<X>(p, at_a, StopCondition{std::nullopt, duration}));
  Eigen::MatrixXd frame = delta;
  X t = at_a.time;
  for (const auto& e : window.events) {
    apply_tangent_flight(to_double(X(e.time) - t), frame);
    apply_tangent_collision(e, p, frame);
    t = X(e.time);
  }
  apply_tangent_flight(to_double(at_a.time + X(duration) - t), frame);
  return {(frame.col(0) - fd).norm() / fd.norm(), fd.norm()};
}

}  // namespace hardball::testing
