#include <doctest.h>

#include <cmath>

#include "hardball/dynamics.hpp"
#include "hardball/model.hpp"
#include "support.hpp"

using namespace hardball;
using hardball::testing::system;

namespace {

ErrorCode code_of(const SystemParams& p) {
  try {
    validate(p);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Schema;  // stands for "no error"
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("validate") {
    CHECK_NOTHROW(validate(system(2, {1, 1})));
    CHECK(code_of(system(2, {1, 1}, 0.3)) == ErrorCode::OverlapGeometry);
    auto zero = system(3, {0, 0, 1});
    zero.allow_zero_mass = true;
    CHECK(code_of(zero) == ErrorCode::DegenerateMasses);
    CHECK(code_of(system(1, {1})) == ErrorCode::BadDimension);
    CHECK(code_of(system(3, {1, 0, 1})) == ErrorCode::ZeroMass);
    auto one_dim = system(2, {1, 1});
    one_dim.dim = 1;
    CHECK(code_of(one_dim) == ErrorCode::BadDimension);
  }

  TEST_CASE("sampled states are normalized, separated and reproducible") {
    for (int n : {2, 3, 4}) {
      const auto p = testing::random_mass_system(n, 42);
      const auto s = sample_initial_state(p, 42);
      const auto c = conserved(s, p);
      CHECK(std::abs(2 * c.energy - 1) <= 1e-14);
      for (double m : c.momentum) CHECK(std::abs(m) <= 1e-14);
      CHECK(s == sample_initial_state(p, 42));
      CHECK_FALSE(s == sample_initial_state(p, 43));
    }
    const auto p = system(2, {1, 1}, 0.2);
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      const auto s = sample_initial_state(p, seed);
      CHECK(torus_distance(s, 0, 1, 1.0) >= 0.4);
    }
  }

  TEST_CASE("hat coordinates") {
    const auto p = system(2, {1, 1});
    const auto s = sample_initial_state(p, 3);
    const auto h = to_hat(s, p);
    CHECK(h.positions == s.positions);
    CHECK(h.velocities == s.velocities);

    const auto p2 = system(2, {4, 1});
    PhaseState w(2, 2);
    w.positions = {0, 0, 0.5, 0.5};
    w.velocities = {1, 0, -4, 0};
    const auto hw = to_hat(w, p2);
    CHECK(hw.velocities[0] == doctest::Approx(2));
    CHECK(hw.velocities[2] == doctest::Approx(-4));
    CHECK(hw.velocities[0] * 2 + hw.velocities[2] * 1 == doctest::Approx(0));

    const auto pr = testing::random_mass_system(3, 9);
    const auto hr = to_hat(sample_initial_state(pr, 9), pr);
    double norm2 = 0;
    for (double v : hr.velocities) norm2 += v * v;
    CHECK(norm2 == doctest::Approx(1).epsilon(1e-14));

    auto zero = system(4, {0, 1, 0, 1});
    zero.allow_zero_mass = true;
    CHECK_THROWS_AS(to_hat(sample_initial_state(zero, 1), zero), Error);
  }

  TEST_CASE("torus separation") {
    auto sep = [](std::vector<double> a, std::vector<double> b) {
      return torus_separation<double>(a, b, 1.0);
    };
    auto same = sep({0.3, 0.7}, {0.3, 0.7});
    CHECK(same.separation == std::vector<double>{0, 0});
    CHECK(same.image == Lattice{0, 0});
    auto wrap = sep({0.9, 0}, {0, 0});
    CHECK(wrap.separation[0] == doctest::Approx(-0.1));
    CHECK(wrap.separation[1] == 0);
    CHECK(wrap.image == Lattice{1, 0});
    auto edge = sep({0, 0.2}, {0.5, 0});
    CHECK(edge.separation[0] == -0.5);
    CHECK(edge.separation[1] == doctest::Approx(0.2));
    CHECK(edge.image == Lattice{0, 0});
    auto plus_half = sep({0.5, 0}, {0, 0});
    CHECK(plus_half.separation[0] == -0.5);
    CHECK(plus_half.image == Lattice{1, 0});
  }
}
