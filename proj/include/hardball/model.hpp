#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hardball/errors.hpp"
#include "hardball/scalar.hpp"

namespace hardball {

/// Outer geometric data of the system: N equal balls of radius r with
/// masses m_i on the flat torus of side L in dimension nu.
struct SystemParams {
  int n_balls = 2;
  int dim = 2;
  double torus_side = 1.0;
  double radius = 0.1;
  std::vector<double> masses;
  /// Admits m_i = 0 (the analytic zero-mass collision law). Analysis only.
  bool allow_zero_mass = false;

  int coordinates() const { return n_balls * dim; }
  bool all_masses_positive() const;
};

/// Throws Error{BadDimension | OverlapGeometry | DegenerateMasses | ZeroMass}.
void validate(const SystemParams& params);

/// Integer image index selecting a periodic copy of the torus.
using Lattice = std::vector<long>;

/// A point of the flow in the Euclidean lift: positions are continuous in
/// time and never wrapped back into the fundamental cell.
template <class T>
struct BasicPhaseState {
  int n_balls = 0;
  int dim = 0;
  std::vector<T> positions;   // n_balls x dim, row-major
  std::vector<T> velocities;  // n_balls x dim, row-major
  T time = T(0);

  BasicPhaseState() = default;
  BasicPhaseState(int n, int d)
      : n_balls(n), dim(d), positions(std::size_t(n) * d, T(0)),
        velocities(std::size_t(n) * d, T(0)) {}

  std::span<T> position(int i) { return {positions.data() + std::size_t(i) * dim, std::size_t(dim)}; }
  std::span<const T> position(int i) const {
    return {positions.data() + std::size_t(i) * dim, std::size_t(dim)};
  }
  std::span<T> velocity(int i) { return {velocities.data() + std::size_t(i) * dim, std::size_t(dim)}; }
  std::span<const T> velocity(int i) const {
    return {velocities.data() + std::size_t(i) * dim, std::size_t(dim)};
  }

  bool operator==(const BasicPhaseState&) const = default;
};

using PhaseState = BasicPhaseState<double>;

template <class T>
struct BasicCollisionEvent {
  std::int64_t index = 0;  // 1-based position in the orbit segment
  T time = T(0);
  int i = 0;  // i < j, 0-based ball labels
  int j = 0;
  Lattice adjustment;           // a_k: q_i - q_j - L*a_k is the contact vector
  std::vector<T> pre_velocities;   // all balls, just before the collision
  std::vector<T> post_velocities;  // all balls, just after
  std::vector<T> impact_normal;    // unit vector along q_i - q_j - L*a_k
  T contact_residue = T(0);        // ||q_i - q_j - L*a_k||^2 - 4r^2
};

using CollisionEvent = BasicCollisionEvent<double>;

template <class T>
struct BasicOrbitSegment {
  SystemParams params;
  BasicPhaseState<T> initial;
  std::vector<BasicCollisionEvent<T>> events;
  BasicPhaseState<T> final;

  std::size_t size() const { return events.size(); }
};

using OrbitSegment = BasicOrbitSegment<double>;

/// Mass-rescaled coordinates q_hat = sqrt(m) q, v_hat = sqrt(m) v in which the
/// system becomes a semi-dispersing billiard with orthogonal reflections.
struct HatState {
  int n_balls = 0;
  int dim = 0;
  std::vector<double> positions;
  std::vector<double> velocities;
};

struct SamplerOptions {
  std::int64_t max_attempts = 1'000'000;
  /// Extra clearance above 2r, in units of L.
  double margin = 1e-9;
};

/// Deterministic for a fixed seed. Velocities are normalized to P = 0 and
/// sum m_i |v_i|^2 = 1 (H = 1/2). Throws Error{PackingTimeout}.
PhaseState sample_initial_state(const SystemParams& params, std::uint64_t seed,
                                const SamplerOptions& options = {});

/// Masses drawn uniformly from [lo, hi].
std::vector<double> sample_masses(int n_balls, double lo, double hi, std::uint64_t seed);

/// Throws Error{ZeroMass} when a mass vanishes.
HatState to_hat(const PhaseState& state, const SystemParams& params);

template <class T>
struct TorusSeparation {
  std::vector<T> separation;  // q_a - q_b - L*image, components in [-L/2, L/2)
  Lattice image;
};

/// Minimum-image reduction with the half-open convention [-L/2, L/2).
template <class T>
TorusSeparation<T> torus_separation(std::span<const T> q_a, std::span<const T> q_b, const T& L) {
  TorusSeparation<T> out;
  out.separation.resize(q_a.size());
  out.image.resize(q_a.size());
  const T half = L / 2;
  for (std::size_t c = 0; c < q_a.size(); ++c) {
    const T d = q_a[c] - q_b[c];
    long a = floor_to_long(d / L + T(0.5));
    T s = d - L * T(a);
    // floor of the rounded quotient can land one cell off at the boundary
    if (s >= half) {
      ++a;
      s = d - L * T(a);
    } else if (s < -half) {
      --a;
      s = d - L * T(a);
    }
    out.separation[c] = s;
    out.image[c] = a;
  }
  return out;
}

/// Pairwise torus distance of two ball centers.
template <class T>
T torus_distance(const BasicPhaseState<T>& state, int i, int j, const T& L) {
  const auto sep = torus_separation<T>(state.position(i), state.position(j), L);
  T s = T(0);
  for (const auto& x : sep.separation) s += x * x;
  return sqrt_of(s);
}

template <class U, class T>
BasicPhaseState<U> state_cast(const BasicPhaseState<T>& s) {
  BasicPhaseState<U> out(s.n_balls, s.dim);
  for (std::size_t k = 0; k < s.positions.size(); ++k) {
    out.positions[k] = U(s.positions[k]);
    out.velocities[k] = U(s.velocities[k]);
  }
  out.time = U(s.time);
  return out;
}

template <class U, class T>
BasicOrbitSegment<U> segment_cast(const BasicOrbitSegment<T>& seg) {
  auto cast_vec = [](const std::vector<T>& v) {
    std::vector<U> out(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) out[k] = U(v[k]);
    return out;
  };
  BasicOrbitSegment<U> out;
  out.params = seg.params;
  out.initial = state_cast<U>(seg.initial);
  out.final = state_cast<U>(seg.final);
  out.events.reserve(seg.events.size());
  for (const auto& e : seg.events) {
    BasicCollisionEvent<U> c;
    c.index = e.index;
    c.time = U(e.time);
    c.i = e.i;
    c.j = e.j;
    c.adjustment = e.adjustment;
    c.pre_velocities = cast_vec(e.pre_velocities);
    c.post_velocities = cast_vec(e.post_velocities);
    c.impact_normal = cast_vec(e.impact_normal);
    c.contact_residue = U(e.contact_residue);
    out.events.push_back(std::move(c));
  }
  return out;
}

}  // namespace hardball
