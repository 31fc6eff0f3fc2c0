#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <boost/rational.hpp>

#include "hardball/model.hpp"

namespace hardball {

/// Unordered pair of 0-based ball labels stored with first < second.
using BallPair = std::pair<int, int>;

/// The combinatorial skeleton (Sigma, A, tau) of an orbit segment.
struct SymbolicScheme {
  int n_balls = 0;
  std::vector<BallPair> pairs;
  std::vector<Lattice> adjustments;
  /// tau_k = t_k - t_{k-1} with t_0 the time of the initial state.
  std::vector<double> time_slots;

  std::size_t size() const { return pairs.size(); }
};

SymbolicScheme scheme_of(const OrbitSegment& segment);

/// Connected components of the collision graph on the vertex set {0..N-1}.
struct Components {
  std::vector<int> label;  // component id per ball, ids are 0..count-1 by first vertex
  int count = 0;
};

Components components(std::span<const BallPair> sigma, int n_balls);

/// Largest number of consecutive disjoint blocks of sigma whose collision
/// graphs each connect all N balls. Greedy: a block closes as soon as it
/// connects everything.
int richness(std::span<const BallPair> sigma, int n_balls);

/// Maximum over every cut of sigma into consecutive blocks that are all
/// connected; 0 when sigma itself is not connected. Exponential in |sigma|.
int richness_exhaustive(std::span<const BallPair> sigma, int n_balls);

using Rational = boost::rational<long long>;

/// Richness threshold C(2) = 1, C(N) = (N/2) max{C(N-1), 3}.
Rational threshold_C(int n_balls);

/// ceil(C(N)), the block count analyses require.
long long richness_requirement(int n_balls);

struct PropertyAViolation {
  std::size_t k = 0;  // 1-based
  std::size_t l = 0;
};

/// Checks that no repeated collision sigma_k = sigma_l with a_k = a_l and
/// disjoint intermediate collisions has tau_l = -(tau_{k+1} + ... + tau_{l-1}).
/// With exact = false the comparison uses 1e-12 times the summed |tau_j|.
std::optional<PropertyAViolation> check_property_A(const SymbolicScheme& scheme, bool exact = false);

struct SchemeSummary {
  std::size_t n = 0;
  int p_sigma = 0;
  int richness = 0;
  bool property_a = true;
};

SchemeSummary summarize(const SymbolicScheme& scheme);

}  // namespace hardball
