#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hardball/dynamics.hpp"
#include "hardball/model.hpp"

namespace hardball {

/// Columns are tangent vectors (dq; dv) in R^{2 N nu}, first the N nu
/// position components, then the N nu velocity components.
struct TangentFrame {
  Eigen::MatrixXd vectors;
};

/// Diagonal of the mass metric <u, w>_m = sum_i m_i (dq_i . dq'_i + dv_i . dv'_i).
Eigen::VectorXd mass_metric_weights(const SystemParams& params);

/// Gram matrix of a frame in the mass metric.
Eigen::MatrixXd mass_gram(const TangentFrame& frame, const SystemParams& params);

/// Derivative of the collision step at the reference collision time: flight
/// to the perturbed collision time, reflection about the perturbed normal,
/// flight back. Other balls pass through unchanged.
/// Throws Error{TangentialEvent} when the approach speed along the normal vanishes.
Eigen::MatrixXd tangent_collision_map(const CollisionEvent& event, const SystemParams& params);

/// In-place application of the collision derivative to every frame column.
void apply_tangent_collision(const CollisionEvent& event, const SystemParams& params, Eigen::MatrixXd& frame);

/// dq <- dq + tau dv.
void apply_tangent_flight(double tau, Eigen::MatrixXd& frame);

struct LyapunovOptions {
  int renorm_every = 10;
  /// Renormalize earlier once a frame vector has grown by this factor: the
  /// contracting directions shrink by about its inverse and must stay above
  /// double precision relative to the expanding ones.
  double stretch_limit = 1e4;
  /// Number of tangent vectors; 0 means the full 2 N nu frame.
  int frame_size = 0;
  std::uint64_t frame_seed = 7;
  DynamicsOptions dynamics;
};

struct Spectrum {
  int n_balls = 0;
  int dim = 0;
  int frame_size = 0;
  std::vector<double> exponents;    // descending
  std::vector<double> convergence;  // |first half - second half| per exponent
  std::vector<double> log_stretch;  // accumulated log stretch per exponent
  /// (time, running exponent estimates) sampled at renormalizations.
  std::vector<std::pair<double, std::vector<double>>> history;
  double total_time = 0.0;
  std::int64_t collisions = 0;
  std::int64_t renormalizations = 0;
  double max_gram_error = 0.0;  // worst ||G - I|| right after a renormalization

  bool full_frame() const { return frame_size == 2 * n_balls * dim; }
};

Spectrum lyapunov_spectrum(const SystemParams& params, const PhaseState& state, double total_time,
                           const LyapunovOptions& options = {});

/// max_i |lambda_i + lambda_{m+1-i}| over a full frame.
double pairing_defect(const Spectrum& spectrum);

enum class Verdict { Pass, Fail, Inconclusive, Unavailable };

std::string to_string(Verdict v);

struct VerdictReport {
  Verdict verdict = Verdict::Unavailable;
  double tol_zero = 0.0;
  int near_zero = 0;
  int expected_zero = 0;  // 2 nu + 2
  int relevant = 0;       // 2 (N nu - nu - 1)
  std::string reason;
};

/// 5 lambda_1 / sqrt(total_time): finite-time estimates decay like t^{-1/2}.
double default_tol_zero(const Spectrum& spectrum);

/// Pass iff exactly 2 nu + 2 exponents have |lambda| < tol_zero and all others
/// exceed 3 tol_zero. Inconclusive when an exponent sits in the gray band
/// [tol_zero, 3 tol_zero] or a half-sample convergence estimate exceeds the
/// gap between the zero cluster and the rest. Unavailable for partial frames.
VerdictReport relevant_nonzero(const Spectrum& spectrum, double tol_zero);

}  // namespace hardball
