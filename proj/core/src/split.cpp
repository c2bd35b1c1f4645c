#include "nldiff/split.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nldiff/errors.hpp"

namespace nldiff {

namespace {

// Stage derivatives of the coupled |u|v|G| system. Both companion systems are
// driven by a(l(u)) of the full solution, so their sum reproduces u exactly.
class SplitSystem {
public:
  explicit SplitSystem(const ModelConfig& config)
      : config_(&config), n_(config.spectrum->mode_count()) {
    grid_.resize(static_cast<std::size_t>(config.spectrum->node_count()));
    fu_.resize(static_cast<std::size_t>(n_));
    f0v_.resize(static_cast<std::size_t>(n_));
    h_.resize(static_cast<std::size_t>(n_));
  }

  int n() const { return n_; }

  void check(double t, std::span<const double> y) const {
    static const char* names[3] = {"u", "v", "g"};
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (!std::isfinite(y[i]) || std::abs(y[i]) > kBlowUpThreshold)
        throw BlowUpError(t, static_cast<int>(i % static_cast<std::size_t>(n_)), y[i],
                          names[i / static_cast<std::size_t>(n_)]);
    }
  }

  // y = [u, v, g] of length 3n; out likewise.
  void rhs(double t, std::span<const double> y, std::span<double> out) {
    check(t, y);
    const std::size_t n = static_cast<std::size_t>(n_);
    const auto u = y.subspan(0, n);
    const auto v = y.subspan(n, n);
    const auto g = y.subspan(2 * n, n);

    double a_val = 0.0;
    project(u, /*use_f0=*/false, fu_, &a_val);
    project(v, /*use_f0=*/true, f0v_, nullptr);
    std::fill(h_.begin(), h_.end(), 0.0);
    config_->forcing.add_coeffs(t, config_->forcing.xi, h_);

    const double eps = config_->epsilon.value(t);
    const auto& spec = *config_->spectrum;
    for (std::size_t i = 0; i < n; ++i) {
      const double lam = spec.eigenvalue(static_cast<int>(i));
      const double mass = 1.0 + eps * lam;
      out[i] = (fu_[i] + h_[i] - a_val * lam * u[i]) / mass;
      out[n + i] = (f0v_[i] - a_val * lam * v[i]) / mass;
      out[2 * n + i] = (fu_[i] - f0v_[i] + h_[i] - a_val * lam * g[i]) / mass;
    }
  }

  // Frozen-coefficient linearly implicit step on all three blocks.
  void imex_step(const ImexTheta& sch, double t, double dt, std::vector<double>& y) {
    check(t, y);
    const std::size_t n = static_cast<std::size_t>(n_);
    const std::span<const double> yv(y);
    double a_val = 0.0;
    project(yv.subspan(0, n), false, fu_, &a_val);
    project(yv.subspan(n, n), true, f0v_, nullptr);
    std::fill(h_.begin(), h_.end(), 0.0);
    config_->forcing.add_coeffs(t, config_->forcing.xi, h_);

    const double eps = config_->epsilon.value(t + sch.theta * dt);
    const auto& spec = *config_->spectrum;
    for (std::size_t i = 0; i < n; ++i) {
      const double lam = spec.eigenvalue(static_cast<int>(i));
      const double mass = 1.0 + eps * lam;
      const double rate = a_val * lam;
      const double denom = mass + dt * sch.theta * rate;
      const double keep = mass - dt * (1.0 - sch.theta) * rate;
      y[i] = (keep * y[i] + dt * (fu_[i] + h_[i])) / denom;
      y[n + i] = (keep * y[n + i] + dt * f0v_[i]) / denom;
      y[2 * n + i] = (keep * y[2 * n + i] + dt * (fu_[i] - f0v_[i] + h_[i])) / denom;
    }
    check(t + dt, y);
  }

private:
  void project(std::span<const double> coeffs, bool use_f0, std::vector<double>& out,
               double* a_value) {
    const auto& spec = *config_->spectrum;
    const auto& nl = config_->nonlinearity;
    const std::size_t nq = grid_.size();
    if (nl.kind == Nonlinearity::Kind::zero) {
      std::fill(out.begin(), out.end(), 0.0);
    } else {
      std::fill(grid_.begin(), grid_.end(), 0.0);
      for (int i = 0; i < n_; ++i) {
        const double c = coeffs[static_cast<std::size_t>(i)];
        if (c == 0.0) continue;
        const double* row = spec.basis_row(i).data();
        for (std::size_t q = 0; q < nq; ++q) grid_[q] += c * row[q];
      }
      const auto w = spec.quadrature_weights();
      if (use_f0) {
        for (std::size_t q = 0; q < nq; ++q) grid_[q] = w[q] * nl.f0(grid_[q]);
      } else {
        for (std::size_t q = 0; q < nq; ++q) grid_[q] = w[q] * nl.f(grid_[q]);
      }
      for (int i = 0; i < n_; ++i) {
        const double* row = spec.basis_row(i).data();
        double acc = 0.0;
        for (std::size_t q = 0; q < nq; ++q) acc += row[q] * grid_[q];
        out[static_cast<std::size_t>(i)] = acc;
      }
    }
    if (a_value) {
      double l = 0.0;
      for (int i = 0; i < n_; ++i)
        l += config_->kernel.g_field.coeffs[static_cast<std::size_t>(i)] *
             coeffs[static_cast<std::size_t>(i)];
      *a_value = config_->diffusion.value(l);
    }
  }

  const ModelConfig* config_;
  int n_;
  std::vector<double> grid_;
  std::vector<double> fu_;
  std::vector<double> f0v_;
  std::vector<double> h_;
};

}  // namespace

SplitTrajectory integrate_split(const ModelConfig& config, double t, double tau,
                                const SpectralField& u0, double dt, const Scheme& scheme,
                                double alpha) {
  if (tau < 0.0) throw std::invalid_argument("integrate_split: tau must be nonnegative");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("integrate_split: alpha must lie in (0, 1)");
  if (u0.spectrum != config.spectrum)
    throw std::invalid_argument("integrate_split: initial datum on a different spectrum");

  SplitSystem sys(config);
  GalerkinSystem ledger_sys(config);
  const std::size_t n = static_cast<std::size_t>(sys.n());
  const double t_from = t - tau;

  std::vector<double> y(3 * n, 0.0);
  std::copy(u0.coeffs.begin(), u0.coeffs.end(), y.begin());
  std::copy(u0.coeffs.begin(), u0.coeffs.end(), y.begin() + static_cast<std::ptrdiff_t>(n));

  SplitTrajectory split;
  split.alpha = alpha;
  split.base.scheme_id = scheme_id(scheme);
  split.base.dt = dt;

  auto record = [&](double time) {
    std::vector<double> uc(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n));
    split.base.states.push_back({time, SpectralField(config.spectrum, uc)});
    split.base.ledger.push_back(ledger_sys.ledger_row(time, uc));
    split.v_states.emplace_back(config.spectrum,
                                std::vector<double>(y.begin() + static_cast<std::ptrdiff_t>(n),
                                                    y.begin() + static_cast<std::ptrdiff_t>(2 * n)));
    split.g_states.emplace_back(config.spectrum,
                                std::vector<double>(y.begin() + static_cast<std::ptrdiff_t>(2 * n),
                                                    y.end()));
  };

  double time = t_from;
  record(time);
  if (tau == 0.0) return split;

  const bool rk = std::holds_alternative<Rk4>(scheme);
  std::vector<std::vector<double>> k(4, std::vector<double>(3 * n));
  std::vector<double> tmp(3 * n);
  const long long steps = std::max<long long>(1, static_cast<long long>(std::ceil(tau / dt - 1e-9)));
  for (long long i = 0; i < steps; ++i) {
    double target = t_from + static_cast<double>(i + 1) * dt;
    if (i == steps - 1 || target > t) target = t;
    const double h = target - time;
    if (rk) {
      sys.rhs(time, y, k[0]);
      for (std::size_t j = 0; j < y.size(); ++j) tmp[j] = y[j] + 0.5 * h * k[0][j];
      sys.rhs(time + 0.5 * h, tmp, k[1]);
      for (std::size_t j = 0; j < y.size(); ++j) tmp[j] = y[j] + 0.5 * h * k[1][j];
      sys.rhs(time + 0.5 * h, tmp, k[2]);
      for (std::size_t j = 0; j < y.size(); ++j) tmp[j] = y[j] + h * k[2][j];
      sys.rhs(time + h, tmp, k[3]);
      for (std::size_t j = 0; j < y.size(); ++j)
        y[j] += h / 6.0 * (k[0][j] + 2.0 * k[1][j] + 2.0 * k[2][j] + k[3][j]);
    } else {
      sys.imex_step(std::get<ImexTheta>(scheme), time, h, y);
    }
    time = target;
    record(time);
  }
  return split;
}

double split_additivity_defect(const SplitTrajectory& split, const EpsilonSchedule& eps) {
  double worst = 0.0;
  for (std::size_t i = 0; i < split.base.states.size(); ++i) {
    const double t = split.base.states[i].t;
    SpectralField sum = split.v_states[i];
    add_scaled(sum, 1.0, split.g_states[i]);
    worst = std::max(worst, std::sqrt(ht_dist_sq(split.base.states[i].u, sum, eps.value(t))));
  }
  return worst;
}

VDecayReport check_v_decay(const SplitTrajectory& split, const ConstantsCertificate& cert,
                           const EpsilonSchedule& eps, double rho_at_start, double tolerance) {
  VDecayReport rep;
  rep.sigma = cert.sigma;
  const double t0 = split.t_start();
  const double t1 = split.t_end();
  const double start_sq = ht_norm_sq(split.base.front().u, eps.value(t0));
  rep.applicable = start_sq <= rho_at_start + tolerance;
  rep.lhs = ht_norm_sq(split.v_states.back(), eps.value(t1));
  rep.rhs = (1.0 + 2.0 * cert.lambda1) * std::exp(-cert.sigma * split.tau()) * rho_at_start;
  rep.margin = rep.rhs - rep.lhs;
  rep.pass = rep.applicable && rep.lhs <= rep.rhs + tolerance;

  // Least-squares exponential rate of the squared norm over the run.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < split.v_states.size(); ++i) {
    const double t = split.base.states[i].t;
    const double vsq = ht_norm_sq(split.v_states[i], eps.value(t));
    if (vsq <= 1e-290) continue;
    const double ly = std::log(vsq);
    sx += t;
    sy += ly;
    sxx += t * t;
    sxy += t * ly;
    ++count;
  }
  if (count >= 2) {
    const double denom = count * sxx - sx * sx;
    if (denom > 0.0) rep.fitted_rate = -(count * sxy - sx * sy) / denom;
  }
  return rep;
}

GRegularityReport check_g_regularity(const std::vector<SplitTrajectory>& splits,
                                     const ConstantsCertificate& cert, const ModelConfig& config,
                                     double entry_tau) {
  if (splits.size() < 3)
    throw std::invalid_argument("check_g_regularity: need at least 3 tau values");

  GRegularityReport rep;
  double t_eval = splits.front().t_end();
  for (const auto& split : splits) {
    const double t = split.t_end();
    t_eval = t;  // shared evaluation time by construction
    const double eps_t = config.epsilon.value(t);
    const auto& g = split.g_states.back();
    const auto& spec = *g.spectrum;
    double value = 0.0;
    for (int i = 0; i < g.size(); ++i) {
      const double lam = spec.eigenvalue(i);
      const double c = g.coeffs[static_cast<std::size_t>(i)];
      value += (std::pow(lam, split.alpha) + eps_t * std::pow(lam, 1.0 + split.alpha)) * c * c;
    }
    rep.entries.push_back({split.tau(), value});
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& e : rep.entries) {
    if (e.tau < entry_tau) continue;
    lo = std::min(lo, e.value);
    hi = std::max(hi, e.value);
  }
  if (!std::isfinite(lo)) {  // filter removed everything; use the whole set
    for (const auto& e : rep.entries) {
      lo = std::min(lo, e.value);
      hi = std::max(hi, e.value);
    }
  }
  rep.ratio = lo > 0.0 ? hi / lo : (hi > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
  rep.pass = rep.ratio <= 2.0;
  const double rho = absorbing_radius(cert, config.forcing, t_eval);
  rep.fitted_C = hi / std::pow(rho, 2.0 * cert.p + 2.0);
  return rep;
}

PerturbationReport perturbation_gap(const ModelConfig& config, double t0, double tau,
                                    const SpectralField& u0, const std::vector<double>& xi_list,
                                    double dt, const Scheme& scheme) {
  if (xi_list.empty()) throw std::invalid_argument("perturbation_gap: empty xi list");
  for (std::size_t i = 1; i < xi_list.size(); ++i)
    if (!(xi_list[i] < xi_list[i - 1]))
      throw std::invalid_argument("perturbation_gap: xi list must be strictly decreasing");

  ModelConfig base = config;
  base.forcing.xi = 0.0;
  const Trajectory unperturbed = integrate(base, t0 - tau, t0, u0, dt, scheme);
  const double eps_t = config.epsilon.value(t0);

  PerturbationReport rep;
  rep.xi_list = xi_list;
  for (double xi : xi_list) {
    ModelConfig pert = config;
    pert.forcing.xi = xi;
    const Trajectory run = integrate(pert, t0 - tau, t0, u0, dt, scheme);
    rep.gaps.push_back(std::sqrt(ht_dist_sq(run.back().u, unperturbed.back().u, eps_t)));
  }

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < xi_list.size(); ++i) {
    if (!(xi_list[i] > 0.0) || !(rep.gaps[i] > 0.0)) continue;
    const double lx = std::log(xi_list[i]);
    const double ly = std::log(rep.gaps[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++count;
  }
  if (count >= 2) {
    const double denom = count * sxx - sx * sx;
    if (denom > 0.0) {
      rep.slope = (count * sxy - sx * sy) / denom;
      rep.slope_valid = true;
    }
  }
  return rep;
}

SemicontinuityReport semicontinuity_experiment(const ModelConfig& config,
                                               const ConstantsCertificate& cert, double t,
                                               const std::vector<double>& xi_list,
                                               const std::vector<double>& tau_schedule,
                                               const std::vector<SpectralField>& ensemble,
                                               double dt, const Scheme& scheme, double sample_tol,
                                               double final_tol, int threads) {
  if (xi_list.empty()) throw std::invalid_argument("semicontinuity_experiment: empty xi list");
  for (std::size_t i = 1; i < xi_list.size(); ++i)
    if (!(xi_list[i] < xi_list[i - 1]))
      throw std::invalid_argument("semicontinuity_experiment: xi list must be strictly decreasing");

  ModelConfig limit = config;
  limit.forcing.xi = 0.0;
  const AttractorResult limit_cloud =
      sample_attractor(limit, cert, t, tau_schedule, ensemble, dt, scheme, sample_tol, threads);

  SemicontinuityReport rep;
  rep.note =
      "limit attractor approximated by the unperturbed pullback cloud; the unperturbed system "
      "stays non-autonomous through the time-dependent regularization";

  const double eps_t = config.epsilon.value(t);
  for (int i = 0; i < limit_cloud.cloud.size(); ++i)
    for (int j = i + 1; j < limit_cloud.cloud.size(); ++j)
      rep.a_cloud_diameter = std::max(
          rep.a_cloud_diameter,
          std::sqrt(ht_dist_sq(limit_cloud.cloud.points[static_cast<std::size_t>(i)],
                               limit_cloud.cloud.points[static_cast<std::size_t>(j)], eps_t)));

  for (double xi : xi_list) {
    ModelConfig pert = config;
    pert.forcing.xi = xi;
    const AttractorResult sampled =
        sample_attractor(pert, cert, t, tau_schedule, ensemble, dt, scheme, sample_tol, threads);
    SemicontinuityRow row;
    row.xi = xi;
    row.converged = sampled.converged && limit_cloud.converged;
    row.distance = hausdorff_semidistance(sampled.cloud, limit_cloud.cloud, config.epsilon).value;
    rep.rows.push_back(row);
  }
  rep.monotone = true;
  for (std::size_t i = 1; i < rep.rows.size(); ++i)
    if (rep.rows[i].distance > 1.05 * rep.rows[i - 1].distance) rep.monotone = false;
  rep.final_distance = rep.rows.back().distance;
  rep.final_ok = rep.final_distance <= final_tol;
  return rep;
}

}  // namespace nldiff
