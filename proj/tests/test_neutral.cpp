#include <doctest.h>

#include <cmath>

#include "hardball/combinatorics.hpp"
#include "hardball/neutral.hpp"
#include "hardball/synthetic.hpp"
#include "support.hpp"

using namespace hardball;
using hardball::testing::system;

namespace {

Eigen::VectorXd flow_direction(const OrbitSegment& seg) {
  return Eigen::Map<const Eigen::VectorXd>(seg.initial.velocities.data(), seg.initial.velocities.size());
}

Eigen::VectorXd translation(const OrbitSegment& seg, int axis) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(seg.params.coordinates());
  for (int i = 0; i < seg.params.n_balls; ++i) w(i * seg.params.dim + axis) = 1.0;
  return w;
}

double distance_to_span(const NeutralBasis& b, const Eigen::VectorXd& w) {
  return (w - b.basis * (b.basis.transpose() * w)).norm() / w.norm();
}

OrbitSegment one_collision() {
  const auto p = system(2, {1, 1}, 0.5, 10.0);
  PhaseState s(2, 2);
  s.positions = {0, 0, 3, 0.4};
  s.velocities = {1, 0.2, -1, 0};
  return simulate<double>(p, s, StopCondition{1, std::nullopt});
}

}  // namespace

TEST_SUITE("neutral") {
  TEST_CASE("flow direction and translations are neutral") {
    const auto p = testing::random_mass_system(3, 7);
    const auto seg = simulate<double>(p, sample_initial_state(p, 7), StopCondition{25, std::nullopt});
    const auto b = neutral_direct(seg);
    CHECK(distance_to_span(b, flow_direction(seg)) <= 1e-10);
    CHECK(distance_to_span(b, translation(seg, 0)) <= 1e-10);
    CHECK(distance_to_span(b, translation(seg, 1)) <= 1e-10);
    // advances of the flow direction are all 1, of translations all 0
    const Eigen::VectorXd c_flow = b.basis.transpose() * flow_direction(seg);
    const Eigen::VectorXd c_tr = b.basis.transpose() * translation(seg, 0);
    CHECK((b.advances * c_flow - Eigen::VectorXd::Ones(seg.size())).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((b.advances * c_tr).cwiseAbs().maxCoeff() <= 1e-9);
  }

  TEST_CASE("dimension counts") {
    const auto seg = one_collision();
    REQUIRE(seg.size() == 1);
    CHECK(neutral_direct(seg).dim == 3);
    CHECK(is_sufficient(seg));
    CHECK(neutral_jacobian(seg).dim == 3);

    auto none = seg;
    none.events.clear();
    none.final = none.initial;
    CHECK(neutral_direct(none).dim == 4);
    CHECK(neutral_jacobian(none).dim == 4);
  }

  TEST_CASE("three methods agree on random segments") {
    for (int n : {2, 3})
      for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        const auto p = testing::random_mass_system(n, seed, n == 2 ? 0.15 : 0.1);
        const auto seg = testing::accurate_segment(p, seed, 5 + 3 * seed);
        const auto a = analyze_segment(seg, {}, JacobianMode::Deep);
        CAPTURE(n);
        CAPTURE(seed);
        CHECK(a.dim_cpf == a.dim_direct);
        CHECK(a.dim_jacobian == a.dim_direct);
        CHECK(a.dim_endpoint == a.dim_direct);
        CHECK(a.methods_agree);
        CHECK(a.cpf_residual <= 1e-9);
        CHECK(a.equations == static_cast<int>(seg.size()) + a.scheme.p_sigma - n);
      }
  }

  TEST_CASE("CPF for one collision") {
    const auto seg = one_collision();
    const auto coeff = cpf_coefficients(seg, 0, 1);
    REQUIRE(coeff.size() == 1);
    REQUIRE(coeff.count(0) == 1);
    const auto& post = seg.events[0].post_velocities;
    Eigen::Vector2d expect(post[0] - post[2], post[1] - post[3]);
    CHECK((coeff.at(0) - expect).norm() <= 1e-14);
  }

  TEST_CASE("CPF adjacent mass factor") {
    // path 1-2 closed at event 3; event 2 touches ball 2 from ball 3 in between
    const auto p = system(3, {1.0, 2.0, 0.7});
    const auto seg = simulate<double>(p, sample_initial_state(p, 3), StopCondition{40, std::nullopt});
    const auto b = neutral_direct(seg);
    CHECK(cpf_verify(seg, b) <= 1e-9);
    const auto wrong = [](double mb, double mc) { return mb / (mb + mc); };
    CHECK(cpf_verify(seg, b, wrong) > 1e-6);
  }

  TEST_CASE("collision identity between incoming and outgoing relative velocities") {
    const auto p = testing::random_mass_system(3, 12);
    const auto seg = simulate<double>(p, sample_initial_state(p, 12), StopCondition{100, std::nullopt});
    for (const auto& e : seg.events) {
      const double mb = p.masses[e.i], mc = p.masses[e.j];
      for (int c = 0; c < 2; ++c) {
        const double bp = e.post_velocities[e.i * 2 + c], cp = e.post_velocities[e.j * 2 + c];
        const double bm = e.pre_velocities[e.i * 2 + c], cm = e.pre_velocities[e.j * 2 + c];
        CHECK(std::abs(bp - cm - (mc / (mb + mc) * (bp - cp) + mb / (mb + mc) * (bm - cm))) <= 1e-12);
      }
    }
  }

  TEST_CASE("equal masses give arithmetic-mean weights") {
    CHECK(standard_mass_fraction(1.0, 1.0) == 0.5);
    CHECK(standard_mass_fraction(1.0, 3.0) == 0.75);
  }

  TEST_CASE("advance system") {
    const auto p = testing::random_mass_system(4, 3);
    const auto seg = simulate<double>(p, sample_initial_state(p, 3), StopCondition{30, std::nullopt});
    const auto sys = advance_system(seg);
    const auto b = neutral_direct(seg);
    CHECK(sys.dim_neutral == b.dim);
    CHECK(sys.dim_neutral == 2 * sys.p_sigma + sys.dim_alpha);
    CHECK(sys.equations == 30 + sys.p_sigma - 4);
    CHECK(advance_residual(sys, b) <= 1e-10);
  }

  TEST_CASE("disconnected collision graph is not sufficient") {
    // ball 3 never meets the others when it rests far away and they move in a line
    const auto p = system(3, {1, 1, 1}, 0.1, 1.0);
    PhaseState s(3, 2);
    s.positions = {0.1, 0.1, 0.5, 0.1, 0.3, 0.6};
    s.velocities = {0.5, 0, -0.5, 0, 0, 0};
    const auto seg = simulate<double>(p, s, StopCondition{6, std::nullopt});
    REQUIRE(summarize(scheme_of(seg)).p_sigma == 2);
    const auto a = analyze_segment(seg);
    CHECK_FALSE(a.sufficient);
    CHECK(a.dim_direct == 2 * 2 + a.dim_alpha);
  }

  TEST_CASE("tree collision graph with cancelling runs") {
    for (int n : {3, 4, 5}) {
      const auto seg = cancelling_tree_segment(n, 2, 3, 2, 11);
      const auto a = analyze_segment(seg);
      CHECK(a.dim_alpha == n - 1);
      CHECK(a.dim_direct == 2 + n - 1);
      CHECK(a.dim_cpf == a.dim_direct);
      CHECK_FALSE(a.sufficient);
    }
  }

  TEST_CASE("massless balls on a path") {
    const auto seg = massless_path_segment(4, 2, 3, 11);
    const auto a = analyze_segment(seg);
    CHECK_FALSE(a.sufficient);
    CHECK(a.dim_direct >= 2 + 2);
    CHECK(a.dim_cpf == a.dim_direct);
  }

  TEST_CASE("disagreement carries a rank_tol sweep") {
    const auto p = testing::random_mass_system(3, 5);
    const auto seg = testing::accurate_segment(p, 5, 5);
    CHECK(analyze_segment(seg, {}, JacobianMode::Extended).diagnostic.empty());
    JacobianOptions blunt;
    blunt.rank_tol = 0.9;  // discards real constraints in the oracle only
    const auto a = analyze_segment(seg, {}, JacobianMode::Extended, blunt);
    CHECK_FALSE(a.methods_agree);
    CHECK(a.diagnostic.find("1e-08:") != std::string::npos);
  }

  TEST_CASE("numerical rank") {
    Eigen::MatrixXd m(3, 3);
    m << 1, 0, 0, 0, 1e-3, 0, 0, 0, 1e-12;
    CHECK(numerical_rank(m, 1e-8) == 2);
    CHECK(numerical_rank(m, 1e-2) == 1);
    CHECK(numerical_rank(Eigen::MatrixXd::Zero(2, 2), 1e-8) == 0);
  }
}
