#include <doctest.h>

#include <cmath>

#include "hardball/lyapunov.hpp"
#include "hardball/neutral.hpp"
#include "support.hpp"

using namespace hardball;
using hardball::testing::system;

namespace {

Spectrum synthetic(std::vector<double> exponents, int frame_size = 8) {
  Spectrum s;
  s.n_balls = 2;
  s.dim = 2;
  s.frame_size = frame_size;
  s.exponents = std::move(exponents);
  s.convergence.assign(s.exponents.size(), 0.0);
  return s;
}

}  // namespace

TEST_SUITE("lyapunov") {
  TEST_CASE("tangent map against finite differences, single events") {
    double worst = 0.0;
    int cases = 0;
    for (int n : {2, 3})
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto p = testing::random_mass_system(n, seed, n == 2 ? 0.15 : 0.1);
        const auto s = sample_initial_state(p, seed);
        for (int k = 1; k <= 10; ++k) {
          worst = std::max(worst, testing::tangent_vs_finite_difference(p, s, k, 1, 100 * seed + k).relative_error);
          ++cases;
        }
      }
    CHECK(cases == 100);
    CHECK(worst <= 1e-6);
  }

  TEST_CASE("tangent map against finite differences, ten events") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      const auto p = testing::random_mass_system(3, seed);
      const auto r = testing::tangent_vs_finite_difference(p, sample_initial_state(p, seed), 2, 10, seed);
      CHECK(r.relative_error <= 1e-5);
    }
  }

  TEST_CASE("flow direction maps to the flow direction") {
    const auto p = testing::random_mass_system(3, 8);
    const auto seg = simulate<double>(p, sample_initial_state(p, 8), StopCondition{20, std::nullopt});
    const int half = p.coordinates();
    for (const auto& e : seg.events) {
      Eigen::VectorXd w = Eigen::VectorXd::Zero(2 * half);
      for (int k = 0; k < half; ++k) w(k) = e.pre_velocities[k];
      const Eigen::VectorXd out = tangent_collision_map(e, p) * w;
      for (int k = 0; k < half; ++k) CHECK(std::abs(out(k) - e.post_velocities[k]) <= 1e-12);
      CHECK(out.tail(half).norm() <= 1e-12);
    }
  }

  TEST_CASE("neutral vectors stay neutral") {
    const auto p = testing::random_mass_system(3, 9);
    const auto seg = simulate<double>(p, sample_initial_state(p, 9), StopCondition{15, std::nullopt});
    const auto b = neutral_direct(seg);
    const int half = p.coordinates();
    // the last column is a generic displacement; rounding in the basis grows
    // at the same rate, so the neutral velocity defect is measured against it
    Eigen::MatrixXd frame = Eigen::MatrixXd::Zero(2 * half, b.dim + 1);
    frame.topLeftCorner(half, b.dim) = b.basis;
    frame.col(b.dim).head(half) = Eigen::VectorXd::LinSpaced(half, -1.0, 1.0).normalized();
    double t = seg.initial.time, worst = 0.0;
    for (const auto& e : seg.events) {
      apply_tangent_flight(e.time - t, frame);
      apply_tangent_collision(e, p, frame);
      const double defect = frame.bottomLeftCorner(half, b.dim).cwiseAbs().maxCoeff();
      worst = std::max(worst, defect / frame.col(b.dim).norm());
      t = e.time;
    }
    CHECK(worst <= 1e-12);
  }

  TEST_CASE("spectrum of two equal balls") {
    const auto p = system(2, {1, 1}, 0.15);
    const auto s = lyapunov_spectrum(p, sample_initial_state(p, 1), 2000.0);
    REQUIRE(s.exponents.size() == 8);
    CHECK(s.full_frame());
    CHECK(s.max_gram_error <= 1e-10);
    CHECK(s.exponents.front() > 1.0);
    CHECK(pairing_defect(s) <= 0.05 * s.exponents.front());
    const auto v = relevant_nonzero(s, default_tol_zero(s));
    CHECK(v.verdict == Verdict::Pass);
    CHECK(v.near_zero == 6);
    CHECK(v.relevant == 2);
  }

  TEST_CASE("short runs and partial frames") {
    const auto p = system(2, {1, 1}, 0.15);
    LyapunovOptions opt;
    opt.frame_size = 3;
    const auto part = lyapunov_spectrum(p, sample_initial_state(p, 1), 500.0, opt);
    CHECK(part.exponents.size() == 3);
    CHECK(relevant_nonzero(part, default_tol_zero(part)).verdict == Verdict::Unavailable);

    const auto brief = lyapunov_spectrum(p, sample_initial_state(p, 1), 2.0);
    CHECK(relevant_nonzero(brief, default_tol_zero(brief)).verdict == Verdict::Inconclusive);
  }

  TEST_CASE("verdict rule") {
    const auto zeros = synthetic(std::vector<double>(8, 0.0));
    CHECK(relevant_nonzero(zeros, 0.1).verdict == Verdict::Fail);

    const auto clean = synthetic({2.5, 0.01, 0.005, 0.0, 0.0, -0.005, -0.01, -2.5});
    CHECK(relevant_nonzero(clean, 0.1).verdict == Verdict::Pass);

    const auto at_tol = synthetic({2.5, 0.1, 0.005, 0.0, 0.0, -0.005, -0.01, -2.5});
    CHECK(relevant_nonzero(at_tol, 0.1).verdict == Verdict::Inconclusive);

    auto noisy = clean;
    noisy.convergence[0] = 5.0;
    CHECK(relevant_nonzero(noisy, 0.1).verdict == Verdict::Inconclusive);

    const auto extra_zero = synthetic({2.5, 0.01, 0.005, 0.0, 0.0, -0.005, -0.01, -0.02});
    CHECK(relevant_nonzero(extra_zero, 0.1).verdict == Verdict::Fail);
  }
}
