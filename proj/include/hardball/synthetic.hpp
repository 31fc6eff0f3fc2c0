#pragma once

// Orbit segments with prescribed velocity histories, built without the
// simulator: pairs, time slots and impact normals are given and the
// velocities follow the collision law (the massless form when a partner has
// zero mass). Positions are not tracked, so these segments exercise the
// neutral-space linear algebra only.

#include <cstdint>
#include <vector>

#include "hardball/model.hpp"

namespace hardball {

struct SyntheticCollision {
  int i = 0;  // 0-based, i < j
  int j = 1;
  double tau = 1.0;            // time slot before this collision
  std::vector<double> normal;  // unit vector along the contact direction
};

/// Velocity update of one collision for the given masses and unit normal.
void reflect_velocities(std::vector<double>& velocities, const SystemParams& params, int i, int j,
                        const std::vector<double>& normal);

OrbitSegment synthetic_segment(const SystemParams& params, const std::vector<double>& initial_velocities,
                               const std::vector<SyntheticCollision>& collisions);

/// Tree collision graph (a path) repeated `blocks` times; every edge occurs
/// as a run of `run_length` (even) identical collisions with zero time slots
/// after the first, so each run's reflections cancel.
OrbitSegment cancelling_tree_segment(int n_balls, int dim, int blocks, int run_length, std::uint64_t seed);

/// Path collision graph {k, k+1} repeated `blocks` times with m_1 = m_3 = 0;
/// n_balls >= 4 keeps two positive masses.
OrbitSegment massless_path_segment(int n_balls, int dim, int blocks, std::uint64_t seed);

}  // namespace hardball
