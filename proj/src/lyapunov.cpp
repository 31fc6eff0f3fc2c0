#include "hardball/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace hardball {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd mass_metric_weights(const SystemParams& p) {
  const int coords = p.coordinates();
  VectorXd w(2 * coords);
  for (int b = 0; b < p.n_balls; ++b)
    for (int c = 0; c < p.dim; ++c) {
      w(b * p.dim + c) = p.masses[b];
      w(coords + b * p.dim + c) = p.masses[b];
    }
  return w;
}

MatrixXd mass_gram(const TangentFrame& frame, const SystemParams& p) {
  const VectorXd w = mass_metric_weights(p);
  return frame.vectors.transpose() * w.asDiagonal() * frame.vectors;
}

void apply_tangent_flight(double tau, MatrixXd& frame) {
  const Eigen::Index coords = frame.rows() / 2;
  frame.topRows(coords) += tau * frame.bottomRows(coords);
}

void apply_tangent_collision(const CollisionEvent& e, const SystemParams& p, MatrixXd& frame) {
  const int dim = p.dim;
  const Eigen::Index coords = p.coordinates();
  const double mi = p.masses[e.i];
  const double mj = p.masses[e.j];
  double ci, cj;  // v_i' = v_i - ci u n, v_j' = v_j + cj u n
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

  const VectorXd n = Eigen::Map<const VectorXd>(e.impact_normal.data(), dim);
  auto pre = [&](int b) { return Eigen::Map<const VectorXd>(e.pre_velocities.data() + b * dim, dim); };
  auto post = [&](int b) { return Eigen::Map<const VectorXd>(e.post_velocities.data() + b * dim, dim); };
  const VectorXd dv = pre(e.i) - pre(e.j);
  const double u = dv.dot(n);
  if (!(std::abs(u) > 1e-12 * dv.norm()))
    throw Error(ErrorCode::TangentialEvent, "collision " + std::to_string(e.index) + " is tangential");
  const VectorXd jump_i = post(e.i) - pre(e.i);
  const VectorXd jump_j = post(e.j) - pre(e.j);
  const double two_r = 2.0 * p.radius;

  for (Eigen::Index col = 0; col < frame.cols(); ++col) {
    auto x = frame.col(col);
    auto qi = x.segment(e.i * dim, dim);
    auto qj = x.segment(e.j * dim, dim);
    auto wi = x.segment(coords + e.i * dim, dim);
    auto wj = x.segment(coords + e.j * dim, dim);

    const VectorXd dq = qi - qj;
    const double dt = -n.dot(dq) / u;  // shift of the collision time
    const VectorXd dn = (dq + dt * dv) / two_r;
    const VectorXd dw = wi - wj;
    const VectorXd d_un = (dw.dot(n) + dv.dot(dn)) * n + u * dn;

    wi -= ci * d_un;
    wj += cj * d_un;
    qi -= dt * jump_i;
    qj -= dt * jump_j;
  }
}

MatrixXd tangent_collision_map(const CollisionEvent& e, const SystemParams& p) {
  MatrixXd m = MatrixXd::Identity(2 * p.coordinates(), 2 * p.coordinates());
  apply_tangent_collision(e, p, m);
  return m;
}

namespace {

// QR in hat coordinates (rows scaled by sqrt of the mass metric); returns
// log |R_kk| and replaces the frame with the orthonormalized one.
VectorXd renormalize(MatrixXd& frame, const VectorXd& sqrt_w) {
  MatrixXd scaled = sqrt_w.asDiagonal() * frame;
  Eigen::HouseholderQR<MatrixXd> qr(scaled);
  const Eigen::Index m = frame.cols();
  const MatrixXd r = qr.matrixQR().topRows(m);
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(frame.rows(), m);
  VectorXd logs(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const double rkk = r(k, k);
    logs(k) = std::log(std::abs(rkk));
    if (rkk < 0.0) q.col(k) = -q.col(k);
  }
  frame = sqrt_w.cwiseInverse().asDiagonal() * q;
  return logs;
}

}  // namespace

Spectrum lyapunov_spectrum(const SystemParams& params, const PhaseState& state, double total_time,
                           const LyapunovOptions& opt) {
  validate(params);
  if (!params.all_masses_positive())
    throw Error(ErrorCode::ZeroMass, "the mass metric needs strictly positive masses");
  if (!(total_time > 0.0) || opt.renorm_every < 1) throw Error(ErrorCode::Config, "total_time and renorm_every must be positive");
  const int full = 2 * params.coordinates();
  const int m = opt.frame_size == 0 ? full : opt.frame_size;
  if (m < 1 || m > full) throw Error(ErrorCode::Config, "frame size must lie in [1, 2 N nu]");

  const VectorXd sqrt_w = mass_metric_weights(params).cwiseSqrt();
  MatrixXd frame(full, m);
  {
    std::mt19937_64 rng(opt.frame_seed);
    std::normal_distribution<double> gauss;
    for (Eigen::Index c = 0; c < frame.cols(); ++c)
      for (Eigen::Index r = 0; r < frame.rows(); ++r) frame(r, c) = gauss(rng);
    renormalize(frame, sqrt_w);
  }

  Spectrum out;
  out.n_balls = params.n_balls;
  out.dim = params.dim;
  out.frame_size = m;
  out.total_time = total_time;
  VectorXd sums = VectorXd::Zero(m);
  VectorXd half_sums;
  double half_time = 0.0;

  auto orthonormalize = [&](double now) {
    sums += renormalize(frame, sqrt_w);
    ++out.renormalizations;
    TangentFrame f{frame};
    const double err = (mass_gram(f, params) - MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff();
    out.max_gram_error = std::max(out.max_gram_error, err);
    const double elapsed = now - state.time;
    if (half_sums.size() == 0 && elapsed >= total_time / 2) {
      half_sums = sums;
      half_time = elapsed;
    }
    if (out.renormalizations % 64 == 0 && elapsed > 0.0) {
      std::vector<double> running(sums.data(), sums.data() + m);
      for (auto& x : running) x /= elapsed;
      out.history.emplace_back(elapsed, std::move(running));
    }
  };

  Engine<double> engine(params, state, opt.dynamics);
  const double t_end = state.time + total_time;
  double t_prev = state.time;
  int since_renorm = 0;
  for (;;) {
    auto ev = engine.advance(t_end);
    if (!ev) {
      apply_tangent_flight(t_end - t_prev, frame);
      orthonormalize(t_end);
      break;
    }
    apply_tangent_flight(ev->time - t_prev, frame);
    apply_tangent_collision(*ev, params, frame);
    t_prev = ev->time;
    ++out.collisions;
    ++since_renorm;
    if (since_renorm >= opt.renorm_every ||
        (sqrt_w.asDiagonal() * frame).colwise().norm().maxCoeff() > opt.stretch_limit) {
      orthonormalize(t_prev);
      since_renorm = 0;
    }
  }

  std::vector<double> lambda(m), conv(m);
  for (int k = 0; k < m; ++k) {
    lambda[k] = sums(k) / total_time;
    if (half_sums.size() == m && half_time > 0.0 && half_time < total_time) {
      const double first = half_sums(k) / half_time;
      const double second = (sums(k) - half_sums(k)) / (total_time - half_time);
      conv[k] = std::abs(first - second);
    } else {
      conv[k] = std::abs(lambda[k]);
    }
  }
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return lambda[a] > lambda[b]; });
  for (int k : order) {
    out.exponents.push_back(lambda[k]);
    out.convergence.push_back(conv[k]);
    out.log_stretch.push_back(sums(k));
  }
  return out;
}

double pairing_defect(const Spectrum& s) {
  double worst = 0.0;
  const std::size_t m = s.exponents.size();
  for (std::size_t k = 0; k < m; ++k) worst = std::max(worst, std::abs(s.exponents[k] + s.exponents[m - 1 - k]));
  return worst;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
    case Verdict::Unavailable: return "unavailable";
  }
  return "unavailable";
}

double default_tol_zero(const Spectrum& s) {
  if (s.exponents.empty() || !(s.total_time > 0.0)) return 0.0;
  return 5.0 * std::abs(s.exponents.front()) / std::sqrt(s.total_time);
}

VerdictReport relevant_nonzero(const Spectrum& s, double tol_zero) {
  VerdictReport out;
  out.tol_zero = tol_zero;
  out.expected_zero = 2 * s.dim + 2;
  out.relevant = 2 * (s.n_balls * s.dim - s.dim - 1);
  if (!s.full_frame() || static_cast<int>(s.exponents.size()) != s.frame_size) {
    out.reason = "partial frame: only the top exponents are available";
    return out;
  }

  std::vector<double> mags;
  for (double x : s.exponents) mags.push_back(std::abs(x));
  std::sort(mags.begin(), mags.end());
  for (double a : mags) {
    if (a < tol_zero) ++out.near_zero;
  }
  const bool gray = std::any_of(mags.begin(), mags.end(), [&](double a) { return a >= tol_zero && a <= 3 * tol_zero; });
  const std::size_t z = static_cast<std::size_t>(out.expected_zero);
  const double gap = mags.size() > z && z > 0 ? mags[z] - mags[z - 1] : std::numeric_limits<double>::infinity();
  const double worst_conv = s.convergence.empty() ? 0.0 : *std::max_element(s.convergence.begin(), s.convergence.end());

  if (gray) {
    out.verdict = Verdict::Inconclusive;
    out.reason = "an exponent lies in the gray band [tol_zero, 3 tol_zero]";
  } else if (worst_conv > gap) {
    out.verdict = Verdict::Inconclusive;
    out.reason = "half-sample convergence estimate exceeds the spectral gap";
  } else if (out.near_zero == out.expected_zero) {
    out.verdict = Verdict::Pass;
    out.reason = "exactly 2 nu + 2 exponents vanish, all others are separated from zero";
  } else {
    out.verdict = Verdict::Fail;
    out.reason = std::to_string(out.near_zero) + " exponents inside the zero band, expected " +
                 std::to_string(out.expected_zero);
  }
  return out;
}

}  // namespace hardball
