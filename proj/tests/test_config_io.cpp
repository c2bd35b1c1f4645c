#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "nldiff/config.hpp"
#include "nldiff/errors.hpp"
#include "nldiff/io.hpp"

using namespace nldiff;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("empty config text yields the default catalog entry") {
  const auto rc = parse_config_text("");
  CHECK(rc.domain_kind == "interval");
  CHECK(rc.modes_per_axis == std::vector<int>{16});
  CHECK(rc.eps0 == 0.5);
  CHECK(rc.diff_m == 0.3);
  CHECK(rc.kappa == 0.85);
  CHECK(rc.xi == 0.1);
}

TEST_CASE("full config round trip") {
  const std::string text = R"(# sample
model.domain.kind = interval
model.domain.extents = 3.141592653589793
model.modes_per_axis = 12
model.epsilon.kind = constant   # pins the norm weight
model.epsilon.eps0 = 0.25
model.diffusion.kind = constant
model.diffusion.a0 = 1.0
model.nonlinearity.kind = zero
model.forcing.kind = none
model.xi = 0
numerics.scheme = imex_theta
numerics.theta = 0.5
numerics.dt = 0.002
numerics.seed = 7
experiment.window = -5, 5
experiment.tau_schedule = 1, 2, 3
init.kind = mode
init.mode = 2
init.amp = 1.5
output.dir = somewhere
)";
  const auto rc = parse_config_text(text);
  CHECK(rc.modes_per_axis == std::vector<int>{12});
  CHECK(rc.epsilon_kind == "constant");
  CHECK(rc.eps0 == 0.25);
  CHECK(rc.nonlin_kind == "zero");
  CHECK(rc.scheme == "imex_theta");
  CHECK(rc.theta == 0.5);
  CHECK(rc.seed == 7);
  CHECK(rc.window.lo == -5.0);
  CHECK(rc.window.hi == 5.0);
  CHECK(rc.tau_schedule == std::vector<double>{1.0, 2.0, 3.0});
  CHECK(rc.init_kind == "mode");
  CHECK(rc.out_dir == "somewhere");

  const auto model = build_model(rc);
  CHECK(model.spectrum->mode_count() == 12);
  CHECK(model.nonlinearity.kind == Nonlinearity::Kind::zero);
  const auto u0 = build_initial(rc, model.spectrum);
  CHECK(u0.coeffs[1] == 1.5);
  CHECK(std::holds_alternative<ImexTheta>(build_scheme(rc)));
}

TEST_CASE("parse errors carry line and column") {
  try {
    parse_config_text("model.xi = 0.1\nmodel.bogus = 3\n");
    FAIL("expected parse error");
  } catch (const ConfigParseError& e) {
    CHECK(e.line == 2);
    CHECK(e.column == 1);
  }
  try {
    parse_config_text("model.xi = oops\n");
    FAIL("expected parse error");
  } catch (const ConfigParseError& e) {
    CHECK(e.line == 1);
    CHECK(e.column == 12);
  }
  CHECK_THROWS_AS(parse_config_text("just words\n"), ConfigParseError);
  CHECK_THROWS_AS(parse_config_text("model.xi =\n"), ConfigParseError);
  CHECK_THROWS_AS(parse_config_file("/nonexistent/path.cfg"), ConfigParseError);
}

TEST_CASE("catalog construction rejects bad selections") {
  RunConfig rc;
  rc.kernel_mode = 99;
  CHECK_THROWS_AS(build_model(rc), std::invalid_argument);
  rc = RunConfig{};
  rc.diffusion_kind = "cubic";
  CHECK_THROWS_AS(build_model(rc), std::invalid_argument);
  rc = RunConfig{};
  rc.diff_m = -1.0;
  CHECK_THROWS_AS(build_model(rc), std::invalid_argument);
  rc = RunConfig{};
  rc.init_kind = "wavelet";
  const auto model = build_model(rc);
  CHECK_THROWS_AS(build_initial(rc, model.spectrum), std::invalid_argument);
}

TEST_CASE("trajectory CSV carries the pinned header and CRLF rows") {
  RunConfig rc;
  rc.modes_per_axis = {3};
  rc.nonlin_kind = "zero";
  rc.forcing_kind = "none";
  rc.xi = 0.0;
  const auto model = build_model(rc);
  SpectralField u0(model.spectrum);
  u0.coeffs[0] = 1.0;
  const auto traj = integrate(model, 0.0, 0.1, u0, 0.05, Rk4{});

  const auto path = temp_path("nldiff_traj_test.csv");
  write_trajectory_csv(path, traj, {"config_hash=deadbeef"});
  const auto text = slurp(path);
  CHECK(text.find("# config_hash=deadbeef\r\n") == 0);
  CHECK(text.find("t,coeff_1,coeff_2,coeff_3,l2_sq,grad_sq,ht_sq\r\n") != std::string::npos);

  write_trajectory_csv(path + ".again", traj, {"config_hash=deadbeef"});
  CHECK(slurp(path + ".again") == text);
  std::remove(path.c_str());
  std::remove((path + ".again").c_str());
}

TEST_CASE("binary snapshot round trip is exact") {
  RunConfig rc;
  rc.modes_per_axis = {4};
  const auto model = build_model(rc);
  SpectralField u0(model.spectrum);
  u0.coeffs[0] = 0.3;
  u0.coeffs[3] = -1.7;
  const auto traj = integrate(model, 0.0, 0.2, u0, 0.05, Rk4{});

  const auto path = temp_path("nldiff_snapshot_test.bin");
  write_snapshot(path, traj);
  const auto back = read_snapshot(path, model.spectrum);
  REQUIRE(back.states.size() == traj.states.size());
  for (std::size_t i = 0; i < back.states.size(); ++i) {
    CHECK(back.states[i].t == traj.states[i].t);
    CHECK(back.states[i].u.coeffs == traj.states[i].u.coeffs);
  }
  // The magic string guards against foreign files.
  {
    std::ofstream bad(path, std::ios::binary);
    bad << "NOTMINE1 older";
  }
  CHECK_THROWS(read_snapshot(path, model.spectrum));
  std::remove(path.c_str());
}

TEST_CASE("snapshot mode count must match the spectrum") {
  RunConfig rc;
  rc.modes_per_axis = {4};
  const auto model = build_model(rc);
  const auto traj = integrate(model, 0.0, 0.1, zero_field(model.spectrum), 0.05, Rk4{});
  const auto path = temp_path("nldiff_snapshot_mismatch.bin");
  write_snapshot(path, traj);
  const auto other = build_spectrum(Domain::interval(M_PI), {5});
  CHECK_THROWS_AS(read_snapshot(path, other), std::invalid_argument);
  std::remove(path.c_str());
}

TEST_CASE("digest primitives") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") != fnv1a64("b"));
  CHECK(hex64(0xcbf29ce484222325ull) == "cbf29ce484222325");
  CHECK(CsvWriter::format(0.5) == "0.5");
  CHECK(CsvWriter::format(1.0 / 3.0) == CsvWriter::format(1.0 / 3.0));
}
