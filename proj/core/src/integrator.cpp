#include "nldiff/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "nldiff/errors.hpp"

namespace nldiff {

namespace {

struct KahanSum {
  double sum = 0.0;
  double c = 0.0;
  void add(double v) {
    const double y = v - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
};

double splitmix64(unsigned long long& state) {
  state += 0x9E3779B97F4A7C15ull;
  unsigned long long z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  z = z ^ (z >> 31);
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

}  // namespace

int Trajectory::index_at_time(double t) const {
  for (std::size_t i = 0; i < states.size(); ++i)
    if (std::abs(states[i].t - t) <= 1e-9 * (1.0 + std::abs(t))) return static_cast<int>(i);
  throw std::invalid_argument("time " + std::to_string(t) + " is not a trajectory time");
}

std::string scheme_id(const Scheme& s) {
  if (std::holds_alternative<Rk4>(s)) return "rk4";
  return "imex_theta(" + std::to_string(std::get<ImexTheta>(s).theta) + ")";
}

GalerkinSystem::GalerkinSystem(const ModelConfig& config)
    : config_(&config), n_(config.spectrum->mode_count()) {
  grid_vals_.resize(static_cast<std::size_t>(config.spectrum->node_count()));
  f_proj_.resize(static_cast<std::size_t>(n_));
}

void GalerkinSystem::check_finite(double t, std::span<const double> coeffs) const {
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (!std::isfinite(coeffs[i]) || std::abs(coeffs[i]) > kBlowUpThreshold)
      throw BlowUpError(t, static_cast<int>(i), coeffs[i]);
  }
}

void GalerkinSystem::reaction(std::span<const double> coeffs, std::span<double> f_out,
                              double* a_value) {
  const auto& spec = *config_->spectrum;
  const std::size_t nq = grid_vals_.size();
  const auto& nl = config_->nonlinearity;

  if (nl.kind == Nonlinearity::Kind::zero) {
    std::fill(f_out.begin(), f_out.end(), 0.0);
  } else {
    std::fill(grid_vals_.begin(), grid_vals_.end(), 0.0);
    for (int i = 0; i < n_; ++i) {
      const double c = coeffs[static_cast<std::size_t>(i)];
      if (c == 0.0) continue;
      const double* row = spec.basis_row(i).data();
      for (std::size_t q = 0; q < nq; ++q) grid_vals_[q] += c * row[q];
    }
    const auto w = spec.quadrature_weights();
    for (std::size_t q = 0; q < nq; ++q) grid_vals_[q] = w[q] * nl.f(grid_vals_[q]);
    for (int i = 0; i < n_; ++i) {
      const double* row = spec.basis_row(i).data();
      double acc = 0.0;
      for (std::size_t q = 0; q < nq; ++q) acc += row[q] * grid_vals_[q];
      f_out[static_cast<std::size_t>(i)] = acc;
    }
  }
  if (a_value) {
    double l = 0.0;
    for (int i = 0; i < n_; ++i)
      l += config_->kernel.g_field.coeffs[static_cast<std::size_t>(i)] * coeffs[static_cast<std::size_t>(i)];
    *a_value = config_->diffusion.value(l);
  }
}

void GalerkinSystem::rhs(double t, std::span<const double> coeffs, std::span<double> out) {
  check_finite(t, coeffs);
  double a_val = 0.0;
  reaction(coeffs, f_proj_, &a_val);
  config_->forcing.add_coeffs(t, config_->forcing.xi, f_proj_);
  const double eps = config_->epsilon.value(t);
  const auto& spec = *config_->spectrum;
  for (int i = 0; i < n_; ++i) {
    const double lam = spec.eigenvalue(i);
    out[static_cast<std::size_t>(i)] =
        (f_proj_[static_cast<std::size_t>(i)] - a_val * lam * coeffs[static_cast<std::size_t>(i)]) /
        (1.0 + eps * lam);
  }
  for (std::size_t i = 0; i < out.size(); ++i)
    if (!std::isfinite(out[i])) throw BlowUpError(t, static_cast<int>(i), out[i]);
}

LedgerRow GalerkinSystem::ledger_row(double t, std::span<const double> coeffs) {
  const auto& spec = *config_->spectrum;
  LedgerRow row;
  row.t = t;
  double grad = 0.0, l2 = 0.0;
  for (int i = 0; i < n_; ++i) {
    const double c = coeffs[static_cast<std::size_t>(i)];
    l2 += c * c;
    grad += spec.eigenvalue(i) * c * c;
  }
  row.l2_sq = l2;
  row.grad_sq = grad;
  const double eps = config_->epsilon.value(t);
  const double deps = config_->epsilon.derivative(t);
  row.eps_grad_sq = eps * grad;

  double a_val = 0.0;
  reaction(coeffs, f_proj_, &a_val);
  row.dissipation = (2.0 * a_val - deps) * grad;
  double wf = 0.0;
  for (int i = 0; i < n_; ++i)
    wf += f_proj_[static_cast<std::size_t>(i)] * coeffs[static_cast<std::size_t>(i)];
  row.work_f = wf;

  h_scratch_.assign(static_cast<std::size_t>(n_), 0.0);
  config_->forcing.add_coeffs(t, config_->forcing.xi, h_scratch_);
  double wh = 0.0;
  for (int i = 0; i < n_; ++i)
    wh += h_scratch_[static_cast<std::size_t>(i)] * coeffs[static_cast<std::size_t>(i)];
  row.work_h = wh;
  return row;
}

SpectralField galerkin_rhs(const ModelConfig& config, double t, const SpectralField& u) {
  GalerkinSystem sys(config);
  SpectralField out(config.spectrum);
  sys.rhs(t, u.coeffs, out.coeffs);
  return out;
}

namespace {

void step_rk4(GalerkinSystem& sys, double t, std::vector<double>& y, double dt,
              std::vector<std::vector<double>>& k, std::vector<double>& tmp) {
  const std::size_t n = y.size();
  sys.rhs(t, y, k[0]);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k[0][i];
  sys.rhs(t + 0.5 * dt, tmp, k[1]);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k[1][i];
  sys.rhs(t + 0.5 * dt, tmp, k[2]);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + dt * k[2][i];
  sys.rhs(t + dt, tmp, k[3]);
  for (std::size_t i = 0; i < n; ++i)
    y[i] += dt / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
}

// Linearly implicit theta step: the stiff part a(l(u)) lambda_k u_k is treated
// implicitly with a frozen at the step start, which keeps the solve diagonal.
void step_imex(GalerkinSystem& sys, const ImexTheta& sch, double t, std::vector<double>& y,
               double dt, std::vector<double>& expl) {
  const auto& config = sys.config();
  const auto& spec = *config.spectrum;
  sys.check_finite(t, y);
  double a_val = 0.0;
  sys.reaction(y, expl, &a_val);
  config.forcing.add_coeffs(t, config.forcing.xi, expl);
  const double eps = config.epsilon.value(t + sch.theta * dt);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double lam = spec.eigenvalue(static_cast<int>(i));
    const double mass = 1.0 + eps * lam;
    const double rate = a_val * lam;
    y[i] = (mass * y[i] + dt * (expl[i] - (1.0 - sch.theta) * rate * y[i])) /
           (mass + dt * sch.theta * rate);
    if (!std::isfinite(y[i])) throw BlowUpError(t + dt, static_cast<int>(i), y[i]);
  }
}

void validate_scheme(const Scheme& scheme, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (const auto* im = std::get_if<ImexTheta>(&scheme)) {
    if (im->theta < 0.0 || im->theta > 1.0)
      throw std::invalid_argument("imex theta must lie in [0, 1]");
    if (dt > im->dt_cap) throw std::invalid_argument("imex dt exceeds the configured cap");
  }
}

}  // namespace

GalerkinState step(const Scheme& scheme, const ModelConfig& config, const GalerkinState& state,
                   double dt) {
  validate_scheme(scheme, dt);
  GalerkinSystem sys(config);
  std::vector<double> y = state.u.coeffs;
  if (std::holds_alternative<Rk4>(scheme)) {
    std::vector<std::vector<double>> k(4, std::vector<double>(y.size()));
    std::vector<double> tmp(y.size());
    step_rk4(sys, state.t, y, dt, k, tmp);
  } else {
    std::vector<double> expl(y.size());
    step_imex(sys, std::get<ImexTheta>(scheme), state.t, y, dt, expl);
  }
  return {state.t + dt, SpectralField(config.spectrum, std::move(y))};
}

Trajectory integrate(const ModelConfig& config, double t_from, double t_to,
                     const SpectralField& u0, double dt, const Scheme& scheme) {
  if (t_from > t_to) throw std::invalid_argument("integrate: t_from must not exceed t_to");
  if (u0.spectrum != config.spectrum)
    throw std::invalid_argument("integrate: initial datum on a different spectrum");
  validate_scheme(scheme, dt);

  GalerkinSystem sys(config);
  Trajectory traj;
  traj.scheme_id = scheme_id(scheme);
  traj.dt = dt;

  std::vector<double> y = u0.coeffs;
  double t = t_from;
  traj.states.push_back({t, u0});
  traj.ledger.push_back(sys.ledger_row(t, y));
  if (t_from == t_to) return traj;

  const bool rk = std::holds_alternative<Rk4>(scheme);
  std::vector<std::vector<double>> k;
  std::vector<double> tmp, expl;
  if (rk) {
    k.assign(4, std::vector<double>(y.size()));
    tmp.resize(y.size());
  } else {
    expl.resize(y.size());
  }

  const double span = t_to - t_from;
  const long long steps = std::max<long long>(1, static_cast<long long>(std::ceil(span / dt - 1e-9)));
  for (long long i = 0; i < steps; ++i) {
    double target = t_from + static_cast<double>(i + 1) * dt;
    if (i == steps - 1 || target > t_to) target = t_to;
    const double h = target - t;
    if (rk) {
      step_rk4(sys, t, y, h, k, tmp);
    } else {
      step_imex(sys, std::get<ImexTheta>(scheme), t, y, h, expl);
    }
    t = target;
    traj.states.push_back({t, SpectralField(config.spectrum, y)});
    traj.ledger.push_back(sys.ledger_row(t, y));
  }
  return traj;
}

namespace {

// Composite Simpson over ledger rows [i0..i1] of a row member, falling back to
// the trapezoid rule for a trailing non-uniform or odd remainder.
double integrate_rows(const std::vector<LedgerRow>& rows, int i0, int i1,
                      double LedgerRow::* member) {
  if (i1 <= i0) return 0.0;
  const double h = rows[static_cast<std::size_t>(i0) + 1].t - rows[static_cast<std::size_t>(i0)].t;
  int uniform_end = i0;
  for (int i = i0; i < i1; ++i) {
    const double hi = rows[static_cast<std::size_t>(i) + 1].t - rows[static_cast<std::size_t>(i)].t;
    if (std::abs(hi - h) > 1e-9 * std::max(1.0, std::abs(h))) break;
    uniform_end = i + 1;
  }
  int simpson_end = uniform_end;
  if ((simpson_end - i0) % 2 == 1) --simpson_end;

  KahanSum acc;
  for (int i = i0; i + 2 <= simpson_end; i += 2) {
    acc.add(h / 3.0 *
            (rows[static_cast<std::size_t>(i)].*member +
             4.0 * rows[static_cast<std::size_t>(i) + 1].*member +
             rows[static_cast<std::size_t>(i) + 2].*member));
  }
  for (int i = simpson_end; i < i1; ++i) {
    const double hi = rows[static_cast<std::size_t>(i) + 1].t - rows[static_cast<std::size_t>(i)].t;
    acc.add(0.5 * hi *
            (rows[static_cast<std::size_t>(i)].*member + rows[static_cast<std::size_t>(i) + 1].*member));
  }
  return acc.sum;
}

}  // namespace

double energy_residual(const Trajectory& traj, double s, double t) {
  const int is = traj.index_at_time(s);
  const int it = traj.index_at_time(t);
  if (is > it) throw std::invalid_argument("energy_residual: s must not exceed t");
  const double lhs = traj.energy_at(it) + integrate_rows(traj.ledger, is, it, &LedgerRow::dissipation);
  const double rhs = traj.energy_at(is) + 2.0 * integrate_rows(traj.ledger, is, it, &LedgerRow::work_f) +
                     2.0 * integrate_rows(traj.ledger, is, it, &LedgerRow::work_h);
  return lhs - rhs;
}

Trajectory reference_solve(const ModelConfig& config, double t_from, double t_to,
                           const SpectralField& u0, double tol) {
  if (!(tol >= 1e-13 && tol <= 1e-6))
    throw std::invalid_argument("reference_solve: tol must lie in [1e-13, 1e-6]");
  if (t_from > t_to) throw std::invalid_argument("reference_solve: t_from must not exceed t_to");

  // Dormand-Prince 5(4) tableau.
  static constexpr double a21 = 1.0 / 5.0;
  static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
  static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
  static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                          a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
  static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                          a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
  static constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                          b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
  static constexpr double e1 = 35.0 / 384.0 - 5179.0 / 57600.0, e3 = 500.0 / 1113.0 - 7571.0 / 16695.0,
                          e4 = 125.0 / 192.0 - 393.0 / 640.0,
                          e5 = -2187.0 / 6784.0 + 92097.0 / 339200.0, e6 = 11.0 / 84.0 - 187.0 / 2100.0,
                          e7 = -1.0 / 40.0;

  GalerkinSystem sys(config);
  const std::size_t n = u0.coeffs.size();
  Trajectory traj;
  traj.scheme_id = "dopri5(tol=" + std::to_string(tol) + ")";
  traj.dt = 0.0;

  std::vector<double> y = u0.coeffs;
  double t = t_from;
  traj.states.push_back({t, u0});
  traj.ledger.push_back(sys.ledger_row(t, y));
  if (t_from == t_to) return traj;

  std::vector<std::vector<double>> k(7, std::vector<double>(n));
  std::vector<double> tmp(n), ynew(n);
  const double span = t_to - t_from;
  double dt = std::clamp(span / 100.0, 1e-6, 0.1);
  const double dt_min = 1e-12 * std::max(1.0, span);
  bool have_k1 = false;

  while (t < t_to - 1e-14 * std::max(1.0, std::abs(t_to))) {
    dt = std::min(dt, t_to - t);
    if (dt < dt_min) throw StiffnessError(t);
    if (!have_k1) sys.rhs(t, y, k[0]);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + dt * a21 * k[0][i];
    sys.rhs(t + dt / 5.0, tmp, k[1]);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + dt * (a31 * k[0][i] + a32 * k[1][i]);
    sys.rhs(t + 3.0 * dt / 10.0, tmp, k[2]);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = y[i] + dt * (a41 * k[0][i] + a42 * k[1][i] + a43 * k[2][i]);
    sys.rhs(t + 4.0 * dt / 5.0, tmp, k[3]);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = y[i] + dt * (a51 * k[0][i] + a52 * k[1][i] + a53 * k[2][i] + a54 * k[3][i]);
    sys.rhs(t + 8.0 * dt / 9.0, tmp, k[4]);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = y[i] + dt * (a61 * k[0][i] + a62 * k[1][i] + a63 * k[2][i] + a64 * k[3][i] +
                            a65 * k[4][i]);
    sys.rhs(t + dt, tmp, k[5]);
    for (std::size_t i = 0; i < n; ++i)
      ynew[i] = y[i] + dt * (b1 * k[0][i] + b3 * k[2][i] + b4 * k[3][i] + b5 * k[4][i] + b6 * k[5][i]);
    sys.rhs(t + dt, ynew, k[6]);

    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = dt * (e1 * k[0][i] + e3 * k[2][i] + e4 * k[3][i] + e5 * k[4][i] +
                             e6 * k[5][i] + e7 * k[6][i]);
      err = std::max(err, std::abs(e));
    }
    double ymax = 0.0;
    for (std::size_t i = 0; i < n; ++i) ymax = std::max(ymax, std::abs(y[i]));
    const double target = std::max(tol * dt, 1e-16 * (1.0 + ymax));

    if (err <= target) {
      t += dt;
      y = ynew;
      k[0] = k[6];  // first-same-as-last
      have_k1 = true;
      traj.states.push_back({t, SpectralField(config.spectrum, y)});
      traj.ledger.push_back(sys.ledger_row(t, y));
    } else {
      have_k1 = false;
    }
    const double factor = err > 0.0 ? 0.9 * std::pow(target / err, 0.2) : 5.0;
    dt *= std::clamp(factor, 0.2, 5.0);
  }
  return traj;
}

DependenceFit fit_continuous_dependence(const ModelConfig& config, double tau, double t,
                                        const SpectralField& u0, double delta, int directions,
                                        double dt, const Scheme& scheme, unsigned long long seed) {
  if (!(t > tau)) throw std::invalid_argument("fit_continuous_dependence: need t > tau");
  const Trajectory base = integrate(config, tau, t, u0, dt, scheme);
  const double eps_tau = config.epsilon.value(tau);
  const double eps_t = config.epsilon.value(t);

  DependenceFit fit;
  for (int d = 0; d < directions; ++d) {
    unsigned long long s = seed + 0x100000001b3ull * static_cast<unsigned long long>(d + 1);
    SpectralField du(config.spectrum);
    for (auto& c : du.coeffs) c = 2.0 * splitmix64(s) - 1.0;
    const double norm = std::sqrt(ht_norm_sq(du, eps_tau));
    for (auto& c : du.coeffs) c *= delta / norm;

    SpectralField pu = u0;
    add_scaled(pu, 1.0, du);
    const Trajectory run = integrate(config, tau, t, pu, dt, scheme);
    const double gap_sq = ht_dist_sq(run.back().u, base.back().u, eps_t);
    const double initial_sq = ht_norm_sq(du, eps_tau);
    const double c = std::log(gap_sq / initial_sq) / (t - tau);
    fit.per_direction.push_back(c);
    fit.fitted_C = std::max(fit.fitted_C, c);
  }
  return fit;
}

}  // namespace nldiff
