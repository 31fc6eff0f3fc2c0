#pragma once

// Exact event-driven evolution of the hard ball flow in the Euclidean lift.
//
// Free flight is q <- q + tau v. A collision of the pair {i, j} at image a is
// the smaller positive root of ||q_i - q_j + tau (v_i - v_j) - L a||^2 = 4r^2,
// after which the relative velocity is reflected across the contact plane
// while the total momentum m_i v_i + m_j v_j is kept.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "hardball/errors.hpp"
#include "hardball/model.hpp"
#include "hardball/scalar.hpp"

namespace hardball {

enum class TangentPolicy { Abort, Nudge };

struct DynamicsOptions {
  /// Relative discriminant below which an approach counts as grazing.
  double tangent_eps = 1e-12;
  /// Distinct collisions closer than this (times max(1, t)) are an error.
  double simultaneous_eps = 1e-12;
  /// Events per unit time that indicate a numerical fault.
  double max_events_per_unit_time = 1e6;
  /// Upper bound on the prediction horizon of a pair.
  double horizon_cap = std::numeric_limits<double>::infinity();
  /// Relative tolerance of the contact precondition of apply_collision.
  double contact_eps = 1e-8;
  TangentPolicy tangent_policy = TangentPolicy::Abort;
  double nudge = 1e-9;
  /// Renormalize H to 1/2 and P to 0 every this many events; 0 disables.
  std::int64_t resync_every = 0;
};

struct StopCondition {
  std::optional<std::int64_t> collisions;
  /// Measured from the time of the initial state.
  std::optional<double> duration;
};

template <class T>
struct PairPrediction {
  T tau = T(0);
  Lattice adjustment;
  T discriminant = T(0);
  bool tangential = false;
};

template <class T>
struct Conserved {
  T energy = T(0);
  std::vector<T> momentum;
};

struct EngineStats {
  std::int64_t collisions = 0;
  std::int64_t rechecks = 0;
  std::int64_t nudges = 0;
  std::int64_t resyncs = 0;
};

namespace detail {

// Contact prediction for one pair given positions/velocities at a common time.
template <class T>
std::optional<PairPrediction<T>> predict_contact(std::span<const T> qi, std::span<const T> qj,
                                                 std::span<const T> vi, std::span<const T> vj,
                                                 const T& L, const T& r, const T& horizon,
                                                 double tangent_eps) {
  const std::size_t dim = qi.size();
  std::vector<T> dv(dim);
  T speed2 = T(0);
  for (std::size_t c = 0; c < dim; ++c) {
    dv[c] = vi[c] - vj[c];
    speed2 += dv[c] * dv[c];
  }
  if (speed2 == T(0)) return std::nullopt;

  const auto center = torus_separation<T>(qi, qj, L).image;
  const T reach = sqrt_of(speed2) * horizon + 2 * r;
  const T four_r2 = 4 * r * r;

  std::optional<PairPrediction<T>> best;
  Lattice a(dim);
  std::vector<T> d(dim);
  std::vector<int> offset(dim, -1);
  for (;;) {
    T dd = T(0);
    T b = T(0);
    for (std::size_t c = 0; c < dim; ++c) {
      a[c] = center[c] + offset[c];
      d[c] = qi[c] - qj[c] - L * T(a[c]);
      dd += d[c] * d[c];
      b += d[c] * dv[c];
    }
    if (b < T(0) && dd <= reach * reach) {
      const T cterm = dd - four_r2;
      const T disc = b * b - speed2 * cterm;
      if (disc >= T(0)) {
        PairPrediction<T> p;
        p.discriminant = disc;
        p.adjustment = a;
        if (disc < T(tangent_eps) * b * b) {
          p.tangential = true;
          p.tau = -b / speed2;
        } else {
          // smaller root of speed2 tau^2 + 2 b tau + cterm = 0, cancellation free
          p.tau = cterm / (-b + sqrt_of(disc));
        }
        if (p.tau < T(0)) p.tau = T(0);
        if (p.tau <= horizon && (!best || p.tau < best->tau)) best = std::move(p);
      }
    }
    std::size_t c = 0;
    while (c < dim && offset[c] == 1) offset[c++] = -1;
    if (c == dim) break;
    ++offset[c];
  }
  return best;
}

template <class T>
T pair_horizon(std::span<const T> vi, std::span<const T> vj, const T& L, double cap) {
  T speed2 = T(0);
  for (std::size_t c = 0; c < vi.size(); ++c) speed2 += (vi[c] - vj[c]) * (vi[c] - vj[c]);
  if (speed2 == T(0)) return T(cap);
  const T h = L / (2 * sqrt_of(speed2));
  return (std::isinf(cap) || h < T(cap)) ? h : T(cap);
}

}  // namespace detail

/// Earliest collision of the pair within the horizon over the image window
/// round((q_i - q_j)/L) + {-1,0,1}^nu. The window is complete as long as the
/// horizon does not exceed L/(2|v_i - v_j|) and 4r < L.
/// Throws Error{TangentialApproach} when the earliest root is grazing.
template <class T>
std::optional<PairPrediction<T>> pair_collision_time(const BasicPhaseState<T>& s, const SystemParams& p,
                                                     int i, int j, const T& horizon,
                                                     const DynamicsOptions& opt = {}) {
  auto pred = detail::predict_contact<T>(s.position(i), s.position(j), s.velocity(i), s.velocity(j),
                                         T(p.torus_side), T(p.radius), horizon, opt.tangent_eps);
  if (pred && pred->tangential)
    throw Error(ErrorCode::TangentialApproach,
                "pair {" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "} grazes");
  return pred;
}

/// Velocity update of an elastic collision in place. The contact vector is
/// d = q_i - q_j - L a with |d| = 2r. A zero mass ball reflects off its
/// partner while the partner keeps its velocity.
/// Throws Error{NotInContact | RecedingPair | DegenerateMasses}.
template <class T>
void collide_in_place(BasicPhaseState<T>& s, const SystemParams& p, int i, int j, const Lattice& a,
                      const DynamicsOptions& opt = {}) {
  const int dim = s.dim;
  const T L(p.torus_side);
  const T r(p.radius);
  std::vector<T> d(dim);
  T dd = T(0);
  T u = T(0);
  for (int c = 0; c < dim; ++c) {
    d[c] = s.position(i)[c] - s.position(j)[c] - L * T(a[c]);
    dd += d[c] * d[c];
    u += (s.velocity(i)[c] - s.velocity(j)[c]) * d[c];
  }
  const T four_r2 = 4 * r * r;
  if (abs_of(dd - four_r2) > T(opt.contact_eps) * four_r2)
    throw Error(ErrorCode::NotInContact, "pair {" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                             "} is not in contact");
  if (!(u < T(0)))
    throw Error(ErrorCode::RecedingPair,
                "pair {" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "} is not approaching");

  const T mi(p.masses[i]);
  const T mj(p.masses[j]);
  if (mi + mj == T(0)) throw Error(ErrorCode::DegenerateMasses, "colliding pair has zero total mass");
  // the measured |d|^2 stands in for 4r^2 so the reflection is exactly orthogonal
  T ci, cj;
  if (mi == T(0)) {
    ci = 2 * u / dd;
    cj = T(0);
  } else if (mj == T(0)) {
    ci = T(0);
    cj = 2 * u / dd;
  } else {
    ci = 2 * mj * u / ((mi + mj) * dd);
    cj = 2 * mi * u / ((mi + mj) * dd);
  }
  for (int c = 0; c < dim; ++c) {
    s.velocity(i)[c] -= ci * d[c];
    s.velocity(j)[c] += cj * d[c];
  }
}

template <class T>
BasicPhaseState<T> apply_collision(const BasicPhaseState<T>& s, const SystemParams& p, int i, int j,
                                   const Lattice& a, const DynamicsOptions& opt = {}) {
  BasicPhaseState<T> out = s;
  collide_in_place(out, p, i, j, a, opt);
  return out;
}

template <class T>
Conserved<T> conserved(const BasicPhaseState<T>& s, const SystemParams& p) {
  Conserved<T> out;
  out.momentum.assign(s.dim, T(0));
  for (int i = 0; i < s.n_balls; ++i) {
    const T m(p.masses[i]);
    for (int c = 0; c < s.dim; ++c) {
      const T v = s.velocity(i)[c];
      out.energy += m * v * v / 2;
      out.momentum[c] += m * v;
    }
  }
  return out;
}

/// Time reversal: velocities negated, positions and time kept.
template <class T>
BasicPhaseState<T> reverse(const BasicPhaseState<T>& s) {
  BasicPhaseState<T> out = s;
  for (auto& v : out.velocities) v = -v;
  return out;
}

/// Event-driven engine for one trajectory. Positions are advanced only at
/// collisions and at the final time, so replaying the recorded collision
/// times reproduces the run bit for bit.
template <class T>
class Engine {
 public:
  Engine(SystemParams params, BasicPhaseState<T> state, DynamicsOptions options = {})
      : params_(std::move(params)), state_(std::move(state)), options_(options),
        generation_(params_.n_balls, 0), window_start_(state_.time) {
    validate(params_);
    if (state_.n_balls != params_.n_balls || state_.dim != params_.dim)
      throw Error(ErrorCode::BadDimension, "state does not match params");
    const T L(params_.torus_side);
    const T min2 = T(4 * params_.radius * params_.radius) * T(1 - 1e-9);
    for (int i = 0; i < params_.n_balls; ++i)
      for (int j = i + 1; j < params_.n_balls; ++j) {
        const T d = torus_distance(state_, i, j, L);
        if (d * d < min2) throw Error(ErrorCode::OverlapGeometry, "initial state has overlapping balls");
      }
    predict_all(state_.time);
  }

  const BasicPhaseState<T>& state() const { return state_; }
  const SystemParams& params() const { return params_; }
  const EngineStats& stats() const { return stats_; }

  /// Processes the next collision if it happens no later than t_limit and
  /// returns it; otherwise flies freely to t_limit and returns nullopt.
  std::optional<BasicCollisionEvent<T>> advance(std::optional<T> t_limit = std::nullopt) {
    for (;;) {
      if (queue_.empty()) {
        if (!t_limit) throw Error(ErrorCode::SingularSegment, "no future events and no time limit");
        fly_to(*t_limit);
        return std::nullopt;
      }
      Entry e = queue_.top();
      if (!valid(e)) {
        queue_.pop();
        continue;
      }
      if (t_limit && e.time > *t_limit) {
        fly_to(*t_limit);
        return std::nullopt;
      }
      queue_.pop();
      switch (e.kind) {
        case Kind::Recheck:
          ++stats_.rechecks;
          predict(e.i, e.j, e.time);
          continue;
        case Kind::Tangential:
          if (options_.tangent_policy == TangentPolicy::Abort)
            throw Error(ErrorCode::TangentialApproach,
                        "grazing collision of pair {" + std::to_string(e.i + 1) + "," +
                            std::to_string(e.j + 1) + "}");
          nudge(e);
          continue;
        case Kind::Collision:
          check_simultaneous(e);
          return collide(e);
      }
    }
  }

 private:
  enum class Kind { Collision, Recheck, Tangential };

  struct Entry {
    T time;
    int i;
    int j;
    Lattice adjustment;
    std::uint64_t gen_i;
    std::uint64_t gen_j;
    Kind kind;
  };

  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.time != b.time) return a.time > b.time;
      if (a.i != b.i) return a.i > b.i;
      return a.j > b.j;
    }
  };

  bool valid(const Entry& e) const { return e.gen_i == generation_[e.i] && e.gen_j == generation_[e.j]; }

  std::vector<T> position_at(int i, const T& t) const {
    std::vector<T> q(state_.position(i).begin(), state_.position(i).end());
    const T dt = t - state_.time;
    if (dt != T(0))
      for (int c = 0; c < state_.dim; ++c) q[c] += dt * state_.velocity(i)[c];
    return q;
  }

  void predict(int i, int j, const T& now) {
    const T L(params_.torus_side);
    const auto vi = state_.velocity(i);
    const auto vj = state_.velocity(j);
    const T horizon = detail::pair_horizon<T>(vi, vj, L, options_.horizon_cap);
    const auto qi = position_at(i, now);
    const auto qj = position_at(j, now);
    auto pred = detail::predict_contact<T>(std::span<const T>(qi), std::span<const T>(qj), vi, vj, L,
                                           T(params_.radius), horizon, options_.tangent_eps);
    if (pred) {
      queue_.push(Entry{now + pred->tau, i, j, std::move(pred->adjustment), generation_[i], generation_[j],
                        pred->tangential ? Kind::Tangential : Kind::Collision});
    } else if (!(horizon >= T(std::numeric_limits<double>::max()))) {
      queue_.push(Entry{now + horizon, i, j, {}, generation_[i], generation_[j], Kind::Recheck});
    }
  }

  void predict_all(const T& now) {
    for (int i = 0; i < params_.n_balls; ++i)
      for (int j = i + 1; j < params_.n_balls; ++j) predict(i, j, now);
  }

  void predict_ball(int b, const T& now) {
    for (int k = 0; k < params_.n_balls; ++k)
      if (k != b) predict(std::min(b, k), std::max(b, k), now);
  }

  void fly_to(const T& t) {
    const T dt = t - state_.time;
    if (dt != T(0))
      for (std::size_t k = 0; k < state_.positions.size(); ++k) state_.positions[k] += dt * state_.velocities[k];
    state_.time = t;
  }

  void check_simultaneous(const Entry& e) {
    using std::max;
    const T window = T(options_.simultaneous_eps) * max(T(1), abs_of(e.time));
    std::vector<Entry> held;
    while (!queue_.empty() && queue_.top().time <= e.time + window) {
      Entry other = queue_.top();
      queue_.pop();
      if (!valid(other)) continue;
      if (other.kind != Kind::Recheck && (other.i != e.i || other.j != e.j))
        throw Error(ErrorCode::SimultaneousCollision,
                    "pairs {" + std::to_string(e.i + 1) + "," + std::to_string(e.j + 1) + "} and {" +
                        std::to_string(other.i + 1) + "," + std::to_string(other.j + 1) +
                        "} collide at the same time");
      held.push_back(std::move(other));
    }
    for (auto& h : held) queue_.push(std::move(h));
  }

  BasicCollisionEvent<T> collide(const Entry& e) {
    fly_to(e.time);
    BasicCollisionEvent<T> ev;
    ev.index = ++stats_.collisions;
    ev.time = e.time;
    ev.i = e.i;
    ev.j = e.j;
    ev.adjustment = e.adjustment;
    ev.pre_velocities = state_.velocities;

    const int dim = state_.dim;
    const T L(params_.torus_side);
    const T r(params_.radius);
    T dd = T(0);
    ev.impact_normal.resize(dim);
    for (int c = 0; c < dim; ++c) {
      ev.impact_normal[c] = state_.position(e.i)[c] - state_.position(e.j)[c] - L * T(e.adjustment[c]);
      dd += ev.impact_normal[c] * ev.impact_normal[c];
    }
    ev.contact_residue = dd - 4 * r * r;
    const T norm = sqrt_of(dd);
    for (auto& x : ev.impact_normal) x /= norm;

    collide_in_place(state_, params_, e.i, e.j, e.adjustment, options_);
    ev.post_velocities = state_.velocities;
    ++generation_[e.i];
    ++generation_[e.j];

    guard_accumulation(e.time);
    if (options_.resync_every > 0 && stats_.collisions % options_.resync_every == 0) {
      resync();
      predict_all(e.time);
    } else {
      predict_ball(e.i, e.time);
      predict_ball(e.j, e.time);
    }
    return ev;
  }

  void guard_accumulation(const T& t) {
    if (t >= window_start_ + T(1)) {
      using std::floor;
      window_start_ = floor(t);
      window_count_ = 0;
    }
    if (++window_count_ > options_.max_events_per_unit_time)
      throw Error(ErrorCode::AccumulationGuard,
                  "more than " + std::to_string(options_.max_events_per_unit_time) +
                      " collisions per unit time; collision times cannot accumulate on true orbits");
  }

  void resync() {
    ++stats_.resyncs;
    const auto cq = conserved(state_, params_);
    T total_mass = T(0);
    for (double m : params_.masses) total_mass += T(m);
    for (int i = 0; i < state_.n_balls; ++i)
      for (int c = 0; c < state_.dim; ++c) state_.velocity(i)[c] -= cq.momentum[c] / total_mass;
    const auto after = conserved(state_, params_);
    const T scale = T(1) / sqrt_of(2 * after.energy);
    for (auto& v : state_.velocities) v *= scale;
    for (auto& g : generation_) ++g;
  }

  void nudge(const Entry& e) {
    ++stats_.nudges;
    fly_to(e.time);
    auto v = state_.velocity(e.i);
    T speed2 = T(0);
    for (const auto& x : v) speed2 += x * x;
    // rotate-free perturbation of the first component, scaled to the speed
    v[0] += T(options_.nudge) * (speed2 > T(0) ? sqrt_of(speed2) : T(1));
    ++generation_[e.i];
    predict_ball(e.i, e.time);
  }

  SystemParams params_;
  BasicPhaseState<T> state_;
  DynamicsOptions options_;
  std::vector<std::uint64_t> generation_;
  std::priority_queue<Entry, std::vector<Entry>, Later> queue_;
  EngineStats stats_;
  T window_start_;
  double window_count_ = 0;
};

/// Runs the engine until the stop condition is met. At least one of the
/// two limits must be set.
template <class T>
BasicOrbitSegment<T> simulate(const SystemParams& params, const BasicPhaseState<T>& state,
                              const StopCondition& stop, const DynamicsOptions& options = {}) {
  if (!stop.collisions && !stop.duration)
    throw Error(ErrorCode::Config, "simulate needs a collision count or a duration");
  Engine<T> engine(params, state, options);
  BasicOrbitSegment<T> seg;
  seg.params = params;
  seg.initial = state;
  std::optional<T> t_end;
  if (stop.duration) t_end = state.time + T(*stop.duration);
  while (!stop.collisions || static_cast<std::int64_t>(seg.events.size()) < *stop.collisions) {
    auto ev = engine.advance(t_end);
    if (!ev) break;
    seg.events.push_back(std::move(*ev));
  }
  seg.final = engine.state();
  return seg;
}

struct ReplayReport {
  double max_velocity_deviation = 0.0;  // relative to the largest speed
  double max_contact_residue = 0.0;
};

/// Replays the recorded collision times, pairs and adjustment vectors from
/// the initial state through free flight and the collision law, and compares
/// with the stored velocities.
template <class T>
ReplayReport replay(const BasicOrbitSegment<T>& seg, const DynamicsOptions& options = {}) {
  ReplayReport out;
  BasicPhaseState<T> s = seg.initial;
  double vmax = 0.0;
  for (const auto& v : s.velocities) vmax = std::max(vmax, std::abs(to_double(v)));
  if (vmax == 0.0) vmax = 1.0;
  const T L(seg.params.torus_side);
  const T r(seg.params.radius);
  for (const auto& e : seg.events) {
    const T dt = e.time - s.time;
    if (dt != T(0))
      for (std::size_t k = 0; k < s.positions.size(); ++k) s.positions[k] += dt * s.velocities[k];
    s.time = e.time;
    T dd = T(0);
    for (int c = 0; c < s.dim; ++c) {
      const T d = s.position(e.i)[c] - s.position(e.j)[c] - L * T(e.adjustment[c]);
      dd += d * d;
    }
    out.max_contact_residue = std::max(out.max_contact_residue, std::abs(to_double(dd - 4 * r * r)));
    for (std::size_t k = 0; k < s.velocities.size(); ++k)
      out.max_velocity_deviation = std::max(
          out.max_velocity_deviation, std::abs(to_double(s.velocities[k] - e.pre_velocities[k])) / vmax);
    collide_in_place(s, seg.params, e.i, e.j, e.adjustment, options);
    for (std::size_t k = 0; k < s.velocities.size(); ++k)
      out.max_velocity_deviation = std::max(
          out.max_velocity_deviation, std::abs(to_double(s.velocities[k] - e.post_velocities[k])) / vmax);
  }
  return out;
}

extern template class Engine<double>;
extern template class Engine<Extended>;
extern template class Engine<Deep>;

}  // namespace hardball
