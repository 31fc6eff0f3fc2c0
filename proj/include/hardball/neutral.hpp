#pragma once

// Neutral space of an orbit segment: initial configuration perturbations
// (velocities fixed) that leave the entire velocity history unchanged. At
// every collision the relative displacement of the two partners has to be
// parallel to their incoming relative velocity; the proportionality factor is
// the advance of that collision (how much earlier it happens).
//
// Three routes compute its dimension:
//   neutral_direct   - propagates displacements and advances as unknowns,
//   advance_system   - the Connecting Path Formula system on the advances
//                      alone, with dim N = nu * P_Sigma + dim{alpha},
//   neutral_jacobian - finite differences of the simulated velocity history.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hardball/combinatorics.hpp"
#include "hardball/dynamics.hpp"
#include "hardball/model.hpp"

namespace hardball {

struct NeutralOptions {
  /// Singular values below rank_tol * sigma_max count as zero.
  double rank_tol = 1e-8;
};

struct NeutralBasis {
  Eigen::MatrixXd basis;     // (N nu) x dim, orthonormal initial displacements
  Eigen::MatrixXd advances;  // n x dim, advance of every collision per basis vector
  int dim = 0;
};

/// Throws Error{SingularSegment} if some collision has zero relative velocity.
NeutralBasis neutral_direct(const OrbitSegment& segment, const NeutralOptions& options = {});

/// Weight m_c / (m_b + m_c) entering the Connecting Path Formula.
using MassFraction = double (*)(double m_b, double m_c);
double standard_mass_fraction(double m_b, double m_c);

/// CPF coefficients of the relative displacement q_a - q_b at the end of the
/// prefix consisting of the first `prefix` collisions. Keys are forward
/// 0-based event indices; the value is the summed coefficient Gamma of that
/// event's advance. Throws Error{NotConnectedPair}.
std::map<std::size_t, Eigen::VectorXd> cpf_coefficients(const OrbitSegment& segment, int ball_a, int ball_b,
                                                        std::optional<std::size_t> prefix = std::nullopt,
                                                        MassFraction fraction = standard_mass_fraction);

/// Largest relative mismatch, over basis vectors and connected ball pairs,
/// between the propagated final relative displacement and its CPF expression.
double cpf_verify(const OrbitSegment& segment, const NeutralBasis& basis,
                  MassFraction fraction = standard_mass_fraction);

struct AdvanceSystem {
  Eigen::MatrixXd matrix;             // (nu * equations) x n
  std::vector<std::size_t> closing;   // 0-based indices of the closing collisions
  int equations = 0;                  // number of nu-dimensional vector equations
  int p_sigma = 0;
  int dim_alpha = 0;
  int dim_neutral = 0;                // nu * P_Sigma + dim_alpha
};

/// One vector equation per collision whose partners are already connected
/// by earlier collisions: CPF(relative displacement right before t_k) equals
/// alpha_k times the incoming relative velocity.
AdvanceSystem advance_system(const OrbitSegment& segment, const NeutralOptions& options = {},
                             MassFraction fraction = standard_mass_fraction);

/// Largest residual of the advance equations evaluated on the advance tuples
/// of a basis, relative to the coefficient scale.
double advance_residual(const AdvanceSystem& system, const NeutralBasis& basis);

struct JacobianOptions {
  /// Central-difference step; 0 picks 10^(-digits/3) of the probe scalar.
  double step = 0.0;
  double rank_tol = 1e-8;
  /// The final-velocity block is not renormalized along the orbit, so its
  /// constraints sit far below sigma_max; 0 picks epsilon^(1/3) of the probe scalar.
  double endpoint_rank_tol = 0.0;
  bool parallel = true;
  DynamicsOptions dynamics;
};

struct JacobianResult {
  int dim = 0;           // kernel of the full velocity history
  int dim_endpoint = 0;  // kernel of the final velocities only
  Eigen::VectorXd singular_values;
};

/// Finite-difference oracle of the velocity-history kernel. The segment is
/// re-simulated from its initial state in scalar type T; every probe must
/// reproduce the recorded pairs and adjustment vectors.
/// Throws Error{SchemeChanged}.
template <class T = double>
JacobianResult neutral_jacobian(const OrbitSegment& segment, const JacobianOptions& options = {});

extern template JacobianResult neutral_jacobian<double>(const OrbitSegment&, const JacobianOptions&);
extern template JacobianResult neutral_jacobian<Extended>(const OrbitSegment&, const JacobianOptions&);
extern template JacobianResult neutral_jacobian<Deep>(const OrbitSegment&, const JacobianOptions&);

/// Numerical rank with singular values below tol * sigma_max treated as zero.
int numerical_rank(const Eigen::MatrixXd& m, double tol, Eigen::VectorXd* singular_values = nullptr);

struct SegmentAnalysis {
  SchemeSummary scheme;
  int dim_direct = 0;
  int dim_cpf = 0;
  int dim_alpha = 0;
  int equations = 0;
  std::optional<int> dim_jacobian;
  std::optional<int> dim_endpoint;
  double cpf_residual = 0.0;
  double advance_residual = 0.0;
  bool sufficient = false;
  bool methods_agree = true;
  /// Dimensions over a range of rank_tol values, filled when methods disagree.
  std::string diagnostic;
};

enum class JacobianMode { Off, Double, Extended, Deep };

SegmentAnalysis analyze_segment(const OrbitSegment& segment, const NeutralOptions& options = {},
                                JacobianMode jacobian = JacobianMode::Off,
                                const JacobianOptions& jacobian_options = {});

/// True iff dim N = nu + 1. Throws Error{MethodDisagreement} when the direct
/// kernel and the advance system disagree.
bool is_sufficient(const OrbitSegment& segment, const NeutralOptions& options = {});

}  // namespace hardball
