#include "hardball/synthetic.hpp"

#include <cmath>
#include <random>

namespace hardball {

void reflect_velocities(std::vector<double>& v, const SystemParams& p, int i, int j, const std::vector<double>& n) {
  const int dim = p.dim;
  double u = 0.0;
  for (int c = 0; c < dim; ++c) u += (v[i * dim + c] - v[j * dim + c]) * n[c];
  const double mi = p.masses[i];
  const double mj = p.masses[j];
  double ci, cj;
  if (mi == 0.0 && mj == 0.0) throw Error(ErrorCode::DegenerateMasses, "colliding pair has zero total mass");
  if (mi == 0.0) {
    ci = 2.0;
    cj = 0.0;
  } else if (mj == 0.0) {
    ci = 0.0;
    cj = 2.0;
  } else {
    ci = 2.0 * mj / (mi + mj);
    cj = 2.0 * mi / (mi + mj);
  }
  for (int c = 0; c < dim; ++c) {
    v[i * dim + c] -= ci * u * n[c];
    v[j * dim + c] += cj * u * n[c];
  }
}

OrbitSegment synthetic_segment(const SystemParams& p, const std::vector<double>& v0,
                               const std::vector<SyntheticCollision>& cs) {
  validate(p);
  OrbitSegment seg;
  seg.params = p;
  seg.initial = PhaseState(p.n_balls, p.dim);
  seg.initial.velocities = v0;
  std::vector<double> v = v0;
  double t = 0.0;
  for (std::size_t k = 0; k < cs.size(); ++k) {
    const auto& c = cs[k];
    if (c.i < 0 || c.j <= c.i || c.j >= p.n_balls) throw Error(ErrorCode::BadDimension, "invalid synthetic pair");
    t += c.tau;
    CollisionEvent e;
    e.index = static_cast<std::int64_t>(k) + 1;
    e.time = t;
    e.i = c.i;
    e.j = c.j;
    e.adjustment.assign(p.dim, 0);
    e.pre_velocities = v;
    reflect_velocities(v, p, c.i, c.j, c.normal);
    e.post_velocities = v;
    e.impact_normal = c.normal;
    seg.events.push_back(std::move(e));
  }
  seg.final = PhaseState(p.n_balls, p.dim);
  seg.final.velocities = v;
  seg.final.time = t;
  return seg;
}

namespace {

std::vector<double> random_unit(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<double> n(dim);
  double s = 0.0;
  for (auto& x : n) {
    x = g(rng);
    s += x * x;
  }
  for (auto& x : n) x /= std::sqrt(s);
  return n;
}

// Normal that makes the pair approach under the current velocities.
std::vector<double> approaching_normal(const std::vector<double>& v, int dim, int i, int j, std::mt19937_64& rng) {
  auto n = random_unit(dim, rng);
  double u = 0.0;
  for (int c = 0; c < dim; ++c) u += (v[i * dim + c] - v[j * dim + c]) * n[c];
  if (u > 0.0)
    for (auto& x : n) x = -x;
  return n;
}

std::vector<double> random_velocities(int n_balls, int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<double> v(std::size_t(n_balls) * dim);
  for (auto& x : v) x = g(rng);
  return v;
}

}  // namespace

OrbitSegment cancelling_tree_segment(int n_balls, int dim, int blocks, int run_length, std::uint64_t seed) {
  if (run_length < 2 || run_length % 2 != 0) throw Error(ErrorCode::Config, "run_length must be even and positive");
  SystemParams p;
  p.n_balls = n_balls;
  p.dim = dim;
  p.torus_side = 1.0;
  p.radius = 0.1;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mass(0.5, 2.0), slot(0.1, 1.0);
  for (int b = 0; b < n_balls; ++b) p.masses.push_back(mass(rng));

  std::vector<double> v0 = random_velocities(n_balls, dim, rng);
  std::vector<double> v = v0;
  std::vector<SyntheticCollision> cs;
  for (int block = 0; block < blocks; ++block)
    for (int k = 0; k + 1 < n_balls; ++k) {
      SyntheticCollision c{k, k + 1, slot(rng), approaching_normal(v, dim, k, k + 1, rng)};
      for (int r = 0; r < run_length; ++r) {
        cs.push_back(c);
        reflect_velocities(v, p, c.i, c.j, c.normal);
        c.tau = 0.0;
      }
    }
  return synthetic_segment(p, v0, cs);
}

OrbitSegment massless_path_segment(int n_balls, int dim, int blocks, std::uint64_t seed) {
  // two positive masses are required, so with m_1 = m_3 = 0 at least four balls
  if (n_balls < 4) throw Error(ErrorCode::BadDimension, "the massless configuration needs four balls");
  SystemParams p;
  p.n_balls = n_balls;
  p.dim = dim;
  p.torus_side = 1.0;
  p.radius = 0.1;
  p.allow_zero_mass = true;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mass(0.5, 2.0), slot(0.1, 1.0);
  for (int b = 0; b < n_balls; ++b) p.masses.push_back(mass(rng));
  p.masses[0] = 0.0;
  p.masses[2] = 0.0;

  std::vector<double> v0 = random_velocities(n_balls, dim, rng);
  std::vector<double> v = v0;
  std::vector<SyntheticCollision> cs;
  for (int block = 0; block < blocks; ++block)
    for (int k = 0; k + 1 < n_balls; ++k) {
      SyntheticCollision c{k, k + 1, slot(rng), approaching_normal(v, dim, k, k + 1, rng)};
      reflect_velocities(v, p, c.i, c.j, c.normal);
      cs.push_back(std::move(c));
    }
  return synthetic_segment(p, v0, cs);
}

}  // namespace hardball
