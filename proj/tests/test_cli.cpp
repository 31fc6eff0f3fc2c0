#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hardball/experiments.hpp"
#include "hardball/lyapunov.hpp"
#include "hardball/selftest.hpp"
#include "support.hpp"

using namespace hardball;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("hardball_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(HARDBALL_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kTwoBalls =
    "n_balls = 2\n"
    "dim = 2\n"
    "torus_side = 1\n"
    "radius = 0.15\n"
    "masses = 1, 1\n";

void mirrored_sign_law(PhaseState& s, const SystemParams& p, int i, int j, const Lattice& a) {
  const auto before = s.velocities;
  collide_in_place(s, p, i, j, a);
  // reflection with the wrong sign: the velocity change is applied backwards
  for (std::size_t k = 0; k < s.velocities.size(); ++k) s.velocities[k] = 2 * before[k] - s.velocities[k];
}

double heavy_fraction(double m_b, double m_c) { return m_b / (m_b + m_c); }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("config parsing") {
    const auto c = config_from_text(std::string(kTwoBalls) +
                                    "seed = 7   # comment\n\nexperiment = lyapunov\ntotal_time = 100\njacobian = deep\n");
    CHECK(c.params.n_balls == 2);
    CHECK(c.params.masses == std::vector<double>{1, 1});
    CHECK(c.seed == 7);
    CHECK(c.experiment == Experiment::Lyapunov);
    CHECK(c.total_time == 100.0);
    CHECK(c.jacobian == JacobianMode::Deep);
    CHECK_NOTHROW(validate_config(c));
    CHECK(config_from_text(render_config(c)).seed == 7);
    CHECK(render_config(config_from_text(render_config(c))) == render_config(c));

    auto code = [](const std::string& text) {
      try {
        validate_config(config_from_text(text));
      } catch (const Error& e) {
        return exit_code(e.code());
      }
      return 0;
    };
    CHECK(code("n_balls = 2\nn_balls = 3\n") == 2);
    CHECK(code("colour = blue\n") == 2);
    CHECK(code("n_balls = two\n") == 2);
    CHECK(code("just words\n") == 2);
    CHECK(code(std::string(kTwoBalls) + "segment_length = 0\n") == 2);
    CHECK(code("n_balls = 2\ndim = 2\nradius = 0.3\nmasses = 1, 1\n") == 2);
    CHECK(code("n_balls = 3\nmasses = 1, 1\n") == 2);
    CHECK(code(std::string(kTwoBalls)) == 0);

    const auto r = config_from_text("n_balls = 3\nmasses = random\nmass_min = 0.5\nmass_max = 2\n");
    CHECK(r.random_masses);
    const auto p1 = params_for_seed(r, 1), p2 = params_for_seed(r, 2);
    CHECK(p1.masses.size() == 3);
    CHECK(p1.masses != p2.masses);
    for (double m : p1.masses) CHECK((m >= 0.5 && m <= 2.0));
  }

  TEST_CASE("event records round-trip") {
    const auto p = testing::random_mass_system(3, 4);
    const auto seg = simulate<double>(p, sample_initial_state(p, 4), StopCondition{50, std::nullopt});
    std::stringstream ss;
    write_events(ss, seg);
    const auto back = read_events(ss, 3, 2);
    REQUIRE(back.size() == seg.size());
    for (std::size_t k = 0; k < back.size(); ++k) {
      CHECK(back[k].time == seg.events[k].time);
      CHECK(back[k].i == seg.events[k].i);
      CHECK(back[k].adjustment == seg.events[k].adjustment);
      CHECK(back[k].post_velocities == seg.events[k].post_velocities);
      CHECK(back[k].impact_normal == seg.events[k].impact_normal);
    }
    std::stringstream bad("{\"k\":1}\n");
    CHECK_THROWS_AS(read_events(bad, 3, 2), Error);
    CHECK(std::stod(format_real(0.1)) == 0.1);
    CHECK(std::stod(format_real(1.0 / 3.0)) == 1.0 / 3.0);
  }

  TEST_CASE("spectrum table round-trip") {
    Spectrum s;
    s.n_balls = 2;
    s.dim = 2;
    s.frame_size = 2;
    s.exponents = {1.0 / 3.0, -0.25};
    s.convergence = {1e-3, 2e-3};
    std::stringstream ss;
    write_spectrum(ss, s, {{"verdict", "unavailable"}});
    const auto t = read_spectrum(ss);
    CHECK(t.lambda == s.exponents);
    CHECK(t.convergence == s.convergence);
    CHECK(t.metadata.at("verdict") == "unavailable");
    CHECK(t.metadata.at("schema") == kSpectrumSchema);
    std::stringstream empty;
    CHECK_THROWS_AS(read_spectrum(empty), Error);
  }

  TEST_CASE("simulate command") {
    const auto dir = scratch("simulate");
    auto c = config_from_text(std::string(kTwoBalls) + "n_collisions = 1\nseed = 5\n");
    c.out_dir = dir.string();
    std::ostringstream log;
    const auto out = cmd_simulate(c, log);
    CHECK(out.exit_code == 0);
    CHECK(out.summary["event_count"] == 1);
    const auto first = slurp(dir / "summary.json");
    cmd_simulate(c, log);
    CHECK(slurp(dir / "summary.json") == first);
    std::ifstream ev(dir / "events.jsonl");
    CHECK(read_events(ev, 2, 2).size() == 1);

    c.n_collisions.reset();
    CHECK_THROWS_AS(cmd_simulate(c, log), Error);
  }

  TEST_CASE("survey and richness commands") {
    const auto dir = scratch("survey");
    auto c = config_from_text(
        "n_balls = 3\nmasses = random\nradius = 0.1\nsegment_length = 15\nensemble_size = 8\nmin_richness = 2\n");
    c.out_dir = dir.string();
    std::ostringstream log;
    const auto s = cmd_sufficiency(c, log);
    CHECK(s.exit_code == 0);
    CHECK(s.summary["aggregate"]["seeds"] == 8);
    std::ifstream in(dir / "survey.tsv");
    const auto table = read_table(in);
    CHECK(table.rows.size() == 8);
    CHECK(table.metadata.at("schema") == kSurveySchema);

    const auto r = cmd_richness(c, log);
    CHECK(r.exit_code == 0);
    CHECK(r.summary["property_a_violations"] == 0);
  }

  TEST_CASE("survey records disconnected segments as not sufficient") {
    auto c = config_from_text("n_balls = 4\nmasses = 1, 1, 1, 1\nradius = 0.05\nsegment_length = 1\n");
    const auto row = survey_member(c, 1);
    REQUIRE(row.analysis);
    CHECK(row.analysis->scheme.p_sigma == 3);
    CHECK_FALSE(row.analysis->sufficient);
  }

  TEST_CASE("lyapunov command") {
    const auto dir = scratch("lyapunov");
    auto c = config_from_text(std::string(kTwoBalls) + "total_time = 300\nseed = 2\n");
    c.out_dir = dir.string();
    std::ostringstream log;
    const auto out = cmd_lyapunov(c, log);
    CHECK(out.summary["exponents"].size() == 8);
    std::ifstream in(dir / "spectrum.tsv");
    const auto t = read_spectrum(in);
    CHECK(t.lambda.size() == 8);
    CHECK(t.metadata.count("verdict") == 1);
    CHECK(t.metadata.count("tol_zero") == 1);
  }

  TEST_CASE("parallel ensemble equals the serial reference") {
    auto c = config_from_text("n_balls = 3\nmasses = random\nsegment_length = 20\nensemble_size = 12\n");
    const auto seeds = ensemble_seeds(c);
    auto member = [&](std::uint64_t s) { return survey_member(c, s); };
    const auto serial = ensemble_serial(seeds, member);
    const auto parallel = ensemble_parallel(seeds, member, 4);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t k = 0; k < serial.size(); ++k) {
      CHECK(serial[k].seed == parallel[k].seed);
      CHECK(serial[k].masses == parallel[k].masses);
      REQUIRE(serial[k].analysis.has_value() == parallel[k].analysis.has_value());
      if (serial[k].analysis) {
        CHECK(serial[k].analysis->dim_direct == parallel[k].analysis->dim_direct);
        CHECK(serial[k].analysis->cpf_residual == parallel[k].analysis->cpf_residual);
      }
    }
    auto throwing = [](std::uint64_t s) -> int {
      if (s % 3 == 0) throw Error(ErrorCode::SingularSegment, "member " + std::to_string(s));
      return static_cast<int>(s);
    };
    try {
      ensemble_parallel(seeds, throwing, 4);
      FAIL("exception swallowed");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("member 3") != std::string::npos);
    }
  }

  TEST_CASE("parallel Jacobian probes equal the serial ones") {
    const auto p = testing::random_mass_system(3, 2);
    const auto seg = testing::accurate_segment(p, 2, 12);
    JacobianOptions serial, parallel;
    serial.parallel = false;
    parallel.parallel = true;
    const auto a = neutral_jacobian<Extended>(seg, serial);
    const auto b = neutral_jacobian<Extended>(seg, parallel);
    CHECK(a.dim == b.dim);
    CHECK(a.singular_values == b.singular_values);
  }

  TEST_CASE("self-test suites and their mutation checks") {
    for (const auto& s : run_selftests()) {
      CAPTURE(s.detail);
      CHECK_MESSAGE(s.passed, s.name);
    }
    CHECK_FALSE(conservation_suite(mirrored_sign_law).passed);
    CHECK_FALSE(cpf_suite(heavy_fraction).passed);
  }

  TEST_CASE("exit codes of the executable") {
    const auto dir = scratch("exit");
    std::ofstream(dir / "bad.cfg") << "n_balls = 2\nradius = 0.3\nmasses = 1, 1\n";
    std::ofstream(dir / "typo.cfg") << "n_ball = 2\n";
    std::ofstream(dir / "ok.cfg") << kTwoBalls << "n_collisions = 10\n";
    const std::string out = " --out " + (dir / "o").string();
    CHECK(run_cli("simulate --config " + (dir / "bad.cfg").string() + out) == 2);
    CHECK(run_cli("simulate --config " + (dir / "typo.cfg").string() + out) == 2);
    CHECK(run_cli("simulate --config " + (dir / "missing.cfg").string() + out) == 2);
    CHECK(run_cli("teleport --config " + (dir / "ok.cfg").string() + out) == 2);
    CHECK(run_cli("simulate --config " + (dir / "ok.cfg").string() + " --jobs 0" + out) == 2);
    CHECK(run_cli("simulate --config " + (dir / "ok.cfg").string() + out) == 0);
    CHECK(run_cli("simulate --config " + (dir / "ok.cfg").string() + " --radius 0.3" + out) == 2);
    CHECK(run_cli("simulate --config " + (dir / "ok.cfg").string() + " --seed 9 --n_collisions 3" + out) == 0);
    CHECK(slurp(dir / "o" / "summary.json").find("\"event_count\": 3") != std::string::npos);
  }
}
