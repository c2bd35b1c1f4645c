#include <cmath>

#include "doctest.h"
#include "nldiff/config.hpp"
#include "nldiff/errors.hpp"
#include "nldiff/integrator.hpp"

using namespace nldiff;

namespace {

// a == 1, f == 0, xi == 0, eps == eps0: every mode decays like
// exp(-lambda t / (1 + eps0 lambda)).
ModelConfig linear_model(int modes, double eps0 = 0.5) {
  RunConfig rc;
  rc.modes_per_axis = {modes};
  rc.epsilon_kind = "constant";
  rc.eps0 = eps0;
  rc.diffusion_kind = "constant";
  rc.diff_a0 = 1.0;
  rc.nonlin_kind = "zero";
  rc.forcing_kind = "none";
  rc.xi = 0.0;
  return build_model(rc);
}

ModelConfig default_model(int modes = 16) {
  RunConfig rc;
  rc.modes_per_axis = {modes};
  return build_model(rc);
}

SpectralField exact_linear(const ModelConfig& model, const SpectralField& u0, double t) {
  SpectralField out = u0;
  const double eps0 = model.epsilon.eps0;
  for (int i = 0; i < out.size(); ++i) {
    const double lam = model.spectrum->eigenvalue(i);
    out.coeffs[size_t(i)] *= std::exp(-lam * t / (1.0 + eps0 * lam));
  }
  return out;
}

SpectralField ones(const SpectrumPtr& spec, double amp = 1.0) {
  SpectralField u(spec);
  for (auto& c : u.coeffs) c = amp;
  return u;
}

}  // namespace

TEST_CASE("rhs vanishes at the origin when f(0) = 0 and xi = 0") {
  auto model = default_model(8);
  model.forcing.xi = 0.0;
  const auto du = galerkin_rhs(model, 0.3, zero_field(model.spectrum));
  for (double c : du.coeffs) CHECK(c == 0.0);
}

TEST_CASE("rhs collapses to the linear modal formula") {
  const auto model = linear_model(8);
  auto u = ones(model.spectrum, 0.7);
  const auto du = galerkin_rhs(model, 1.0, u);
  for (int i = 0; i < u.size(); ++i) {
    const double lam = model.spectrum->eigenvalue(i);
    CHECK(du.coeffs[size_t(i)] ==
          doctest::Approx(-lam * 0.7 / (1.0 + 0.5 * lam)).epsilon(1e-14));
  }
}

TEST_CASE("cubic projection of a single mode matches the sine-cube expansion") {
  // u = c phi_1 on (0,pi): the cube expands as
  //   u^3 = c^3 (3/(2pi)) phi_1 - c^3 (1/(2pi)) phi_3,
  // so with f(s) = -s^3 the reaction projections are -3c^3/(2pi) and c^3/(2pi).
  RunConfig rc;
  rc.modes_per_axis = {8};
  rc.epsilon_kind = "constant";
  rc.eps0 = 0.5;
  rc.diffusion_kind = "constant";
  rc.diff_a0 = 1.0;
  rc.nonlin_kind = "cubic";
  rc.kappa = 0.0;
  rc.forcing_kind = "none";
  rc.xi = 0.0;
  const auto model = build_model(rc);

  const double c = 0.8;
  SpectralField u(model.spectrum);
  u.coeffs[0] = c;
  const auto du = galerkin_rhs(model, 0.0, u);

  const double f1 = -3.0 * c * c * c / (2.0 * M_PI);
  const double f3 = c * c * c / (2.0 * M_PI);
  const double lam1 = 1.0, lam3 = 9.0;
  CHECK(du.coeffs[0] == doctest::Approx((f1 - lam1 * c) / (1.0 + 0.5 * lam1)).epsilon(1e-12));
  CHECK(du.coeffs[2] == doctest::Approx(f3 / (1.0 + 0.5 * lam3)).epsilon(1e-12));
  CHECK(std::abs(du.coeffs[1]) < 1e-14);
}

TEST_CASE("one rk4 step carries a fifth-order local error on the linear case") {
  const auto model = linear_model(6);
  const auto u0 = ones(model.spectrum);
  auto local_error = [&](double dt) {
    const auto stepped = step(Rk4{}, model, {0.0, u0}, dt);
    const auto exact = exact_linear(model, u0, dt);
    double err = 0.0;
    for (int i = 0; i < u0.size(); ++i)
      err = std::max(err, std::abs(stepped.u.coeffs[size_t(i)] - exact.coeffs[size_t(i)]));
    return err;
  };
  const double e1 = local_error(0.2);
  const double e2 = local_error(0.1);
  CHECK(e1 / e2 > 24.0);  // fifth-order: factor 32 under halving
  CHECK(e1 / e2 < 40.0);
}

TEST_CASE("backward Euler variant is unconditionally contractive on the linear case") {
  const auto model = linear_model(6);
  const auto u0 = ones(model.spectrum);
  for (double dt : {0.01, 0.1, 0.5, 0.9}) {
    const auto next = step(ImexTheta{1.0, 1.0}, model, {0.0, u0}, dt);
    for (int i = 0; i < u0.size(); ++i) {
      const double lam = model.spectrum->eigenvalue(i);
      const double expected = 1.0 / (1.0 + dt * lam / (1.0 + 0.5 * lam));
      CHECK(next.u.coeffs[size_t(i)] == doctest::Approx(expected).epsilon(1e-13));
      CHECK(std::abs(next.u.coeffs[size_t(i)]) <= 1.0);
    }
  }
}

TEST_CASE("scheme argument validation") {
  const auto model = linear_model(4);
  const auto u0 = ones(model.spectrum);
  CHECK_THROWS_AS(step(ImexTheta{1.5, 1.0}, model, {0.0, u0}, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(step(ImexTheta{0.5, 1.0}, model, {0.0, u0}, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(step(Rk4{}, model, {0.0, u0}, -0.1), std::invalid_argument);
}

TEST_CASE("rk4 global error drops by about sixteen under dt halving") {
  const auto model = default_model(12);
  RunConfig rc;
  rc.init_kind = "lowpass";
  rc.init_amp = 2.0;
  const auto u0 = build_initial(rc, model.spectrum);
  const auto reference = reference_solve(model, 0.0, 0.5, u0, 1e-11);

  auto global_error = [&](double dt) {
    const auto traj = integrate(model, 0.0, 0.5, u0, dt, Rk4{});
    double err = 0.0;
    for (int i = 0; i < u0.size(); ++i)
      err = std::max(err, std::abs(traj.back().u.coeffs[size_t(i)] -
                                   reference.back().u.coeffs[size_t(i)]));
    return err;
  };
  const double ratio = global_error(0.05) / global_error(0.025);
  CHECK(ratio > 11.3);  // 2^3.5
  CHECK(ratio < 22.6);  // 2^4.5
}

TEST_CASE("linearly implicit trajectories track the explicit ones") {
  const auto model = default_model(10);
  RunConfig rc;
  rc.init_kind = "lowpass";
  rc.init_amp = 1.0;
  const auto u0 = build_initial(rc, model.spectrum);
  const auto ex = integrate(model, 0.0, 1.0, u0, 1e-3, Rk4{});
  const auto im = integrate(model, 0.0, 1.0, u0, 1e-3, ImexTheta{0.5, 1.0});
  double diff = 0.0;
  for (int i = 0; i < u0.size(); ++i)
    diff = std::max(diff, std::abs(ex.back().u.coeffs[size_t(i)] - im.back().u.coeffs[size_t(i)]));
  CHECK(diff < 1e-4);  // first-order coefficient freezing at dt = 1e-3
  CHECK(im.scheme_id.substr(0, 10) == "imex_theta");
}

TEST_CASE("integrate trivia: degenerate interval and process composition") {
  const auto model = default_model(8);
  const auto u0 = ones(model.spectrum, 0.2);

  const auto single = integrate(model, 2.0, 2.0, u0, 1e-2, Rk4{});
  REQUIRE(single.states.size() == 1);
  CHECK(single.back().u.coeffs == u0.coeffs);

  // Splitting at a step boundary reproduces the one-shot run.
  const auto full = integrate(model, 0.0, 1.0, u0, 0.01, Rk4{});
  const auto first = integrate(model, 0.0, 0.5, u0, 0.01, Rk4{});
  const auto second = integrate(model, 0.5, 1.0, first.back().u, 0.01, Rk4{});
  double diff = 0.0;
  for (int i = 0; i < u0.size(); ++i)
    diff = std::max(diff, std::abs(full.back().u.coeffs[size_t(i)] -
                                   second.back().u.coeffs[size_t(i)]));
  CHECK(diff <= 1e-10);
}

TEST_CASE("linear case at production resolution matches the exact flow") {
  const auto model = linear_model(16);
  const auto u0 = ones(model.spectrum);
  const auto traj = integrate(model, 0.0, 1.0, u0, 1e-3, Rk4{});
  const auto exact = exact_linear(model, u0, 1.0);
  double err = 0.0;
  for (int i = 0; i < u0.size(); ++i)
    err = std::max(err, std::abs(traj.back().u.coeffs[size_t(i)] - exact.coeffs[size_t(i)]));
  CHECK(err <= 1e-8);
}

TEST_CASE("energy residual is identically zero at an equilibrium") {
  auto model = default_model(6);
  model.forcing.xi = 0.0;
  const auto traj = integrate(model, 0.0, 1.0, zero_field(model.spectrum), 1e-2, Rk4{});
  CHECK(energy_residual(traj, 0.0, 1.0) == 0.0);
  CHECK_THROWS_AS(energy_residual(traj, 0.0, 0.0051), std::invalid_argument);
}

TEST_CASE("unforced energy is non-increasing and dissipation dominates the gradient") {
  auto model = default_model(10);
  model.nonlinearity.kind = Nonlinearity::Kind::zero;
  model.forcing.kind = Forcing::Kind::none;
  model.forcing.xi = 0.0;
  RunConfig rc;
  rc.init_kind = "lowpass";
  rc.init_amp = 2.0;
  const auto u0 = build_initial(rc, model.spectrum);
  const auto traj = integrate(model, 0.0, 2.0, u0, 1e-3, Rk4{});
  const double m = model.diffusion.m();
  for (std::size_t i = 0; i < traj.ledger.size(); ++i) {
    if (i > 0) CHECK(traj.energy_at(int(i)) <= traj.energy_at(int(i - 1)) + 1e-13);
    CHECK(traj.ledger[i].dissipation + 1e-12 >= 2.0 * m * traj.ledger[i].grad_sq);
  }
}

TEST_CASE("energy residual shrinks by at least four under dt halving") {
  const auto model = default_model(12);
  RunConfig rc;
  rc.init_kind = "lowpass";
  rc.init_amp = 2.0;
  const auto u0 = build_initial(rc, model.spectrum);
  auto residual = [&](double dt) {
    const auto traj = integrate(model, 0.0, 0.5, u0, dt, Rk4{});
    return std::abs(energy_residual(traj, 0.0, 0.5));
  };
  const double coarse = residual(4e-4);
  const double fine = residual(2e-4);
  INFO("coarse=", coarse, " fine=", fine);
  CHECK(coarse >= 4.0 * fine);
}

TEST_CASE("reference solver accuracy contracts") {
  const auto linear = linear_model(8);
  const auto u0 = ones(linear.spectrum);

  SUBCASE("against the exact exponential") {
    for (double tol : {1e-8, 1e-10}) {
      const auto traj = reference_solve(linear, 0.0, 1.0, u0, tol);
      const auto exact = exact_linear(linear, u0, 1.0);
      double err = 0.0;
      for (int i = 0; i < u0.size(); ++i)
        err = std::max(err, std::abs(traj.back().u.coeffs[size_t(i)] - exact.coeffs[size_t(i)]));
      CHECK(err <= 10.0 * tol);
    }
  }
  SUBCASE("against the fixed-step integrator on the default model") {
    const auto model = default_model(8);
    RunConfig rc;
    rc.init_kind = "lowpass";
    const auto v0 = build_initial(rc, model.spectrum);
    const auto ref = reference_solve(model, 0.0, 1.0, v0, 1e-10);
    const auto fixed = integrate(model, 0.0, 1.0, v0, 1e-4, Rk4{});
    double err = 0.0;
    for (int i = 0; i < v0.size(); ++i)
      err = std::max(err, std::abs(ref.back().u.coeffs[size_t(i)] -
                                   fixed.back().u.coeffs[size_t(i)]));
    CHECK(err <= 1e-6);
  }
  SUBCASE("self-difference contracts under tolerance tightening") {
    const auto model = default_model(8);
    RunConfig rc;
    rc.init_kind = "lowpass";
    const auto v0 = build_initial(rc, model.spectrum);
    auto end_state = [&](double tol) { return reference_solve(model, 0.0, 1.0, v0, tol); };
    const auto a = end_state(1e-8);
    const auto b = end_state(1e-9);
    const auto c = end_state(1e-10);
    auto diff = [&](const Trajectory& x, const Trajectory& y) {
      double d = 0.0;
      for (int i = 0; i < v0.size(); ++i)
        d = std::max(d, std::abs(x.back().u.coeffs[size_t(i)] - y.back().u.coeffs[size_t(i)]));
      return d;
    };
    CHECK(diff(a, b) >= 5.0 * diff(b, c));
  }
  SUBCASE("tolerance domain") {
    CHECK_THROWS_AS(reference_solve(linear, 0.0, 1.0, u0, 1e-5), std::invalid_argument);
  }
}

TEST_CASE("blow-up is reported with the offending mode") {
  const auto model = default_model(4);
  SpectralField u(model.spectrum);
  u.coeffs[2] = 2e12;
  try {
    integrate(model, 0.0, 1.0, u, 1e-3, Rk4{});
    FAIL("expected blow-up");
  } catch (const BlowUpError& e) {
    CHECK(e.mode_index == 2);
  }
}

TEST_CASE("continuous dependence exponent is finite over a direction ensemble") {
  const auto model = default_model(8);
  RunConfig rc;
  rc.init_kind = "lowpass";
  const auto u0 = build_initial(rc, model.spectrum);
  const auto fit = fit_continuous_dependence(model, 0.0, 1.0, u0, 1e-3, 16, 1e-2, Rk4{}, 99);
  CHECK(fit.per_direction.size() == 16);
  CHECK(std::isfinite(fit.fitted_C));
}

TEST_CASE("doubling the truncation leaves a smooth trajectory unchanged") {
  RunConfig rc16;
  rc16.modes_per_axis = {16};
  rc16.init_kind = "exp";
  rc16.init_amp = 1.0;
  rc16.init_rate = 1.5;
  RunConfig rc32 = rc16;
  rc32.modes_per_axis = {32};

  const auto m16 = build_model(rc16);
  const auto m32 = build_model(rc32);
  const auto t16 = integrate(m16, 0.0, 1.0, build_initial(rc16, m16.spectrum), 1e-3, Rk4{});
  const auto t32 = integrate(m32, 0.0, 1.0, build_initial(rc32, m32.spectrum), 1e-3, Rk4{});

  double worst = 0.0;
  for (std::size_t s = 0; s < t16.states.size(); ++s) {
    const double eps = m16.epsilon.value(t16.states[s].t);
    double acc = 0.0;
    for (int i = 0; i < m32.spectrum->mode_count(); ++i) {
      const double small = i < 16 ? t16.states[s].u.coeffs[size_t(i)] : 0.0;
      const double d = small - t32.states[s].u.coeffs[size_t(i)];
      acc += (1.0 + eps * m32.spectrum->eigenvalue(i)) * d * d;
    }
    worst = std::max(worst, std::sqrt(acc));
  }
  CHECK(worst <= 1e-8);
}
