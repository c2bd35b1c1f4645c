#include "nldiff/pullback.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nldiff/errors.hpp"
#include "nldiff/parallel.hpp"

namespace nldiff {

namespace {

double splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  z = z ^ (z >> 31);
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

// Box-Muller on the deterministic stream.
double gaussian(std::uint64_t& state) {
  const double u1 = std::max(splitmix64(state), 1e-300);
  const double u2 = splitmix64(state);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace

bool is_tempered(const FamilyGrowth& growth, double sigma) {
  if (!(sigma > 0.0)) return false;
  switch (growth.kind) {
    case FamilyGrowth::Kind::constant:
    case FamilyGrowth::Kind::polynomial:
      return true;  // subexponential backward growth always tempers
    case FamilyGrowth::Kind::exponential:
      return growth.rate < sigma;
  }
  return false;
}

std::vector<SpectralField> make_ensemble(const SpectrumPtr& spectrum, int count,
                                         std::uint64_t seed, const std::vector<double>& radii,
                                         double eps_at_start) {
  if (count < 1) throw std::invalid_argument("ensemble count must be positive");
  if (radii.empty()) throw std::invalid_argument("at least one radius required");
  const int low_modes = std::min(spectrum->mode_count(), 8);
  std::vector<SpectralField> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    std::uint64_t state = seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(i) + 1;
    SpectralField u(spectrum);
    for (int k = 0; k < low_modes; ++k)
      u.coeffs[static_cast<std::size_t>(k)] = gaussian(state) / ((k + 1.0) * (k + 1.0));
    const double r = radii[static_cast<std::size_t>(i) % radii.size()];
    const double norm = std::sqrt(ht_norm_sq(u, eps_at_start));
    if (norm > 0.0)
      for (auto& c : u.coeffs) c *= r / norm;
    out.push_back(std::move(u));
  }
  return out;
}

EvolveReport pullback_evolve(const ModelConfig& config, double t, double tau,
                             const std::vector<SpectralField>& initial_set, double dt,
                             const Scheme& scheme, int threads, std::uint64_t ensemble_id) {
  if (tau < 0.0) throw std::invalid_argument("pullback_evolve: tau must be nonnegative");
  for (const auto& u : initial_set)
    if (!u.finite()) throw InvalidState("pullback_evolve: non-finite initial datum");

  EvolveReport report;
  report.cloud.t = t;
  report.cloud.tau = tau;
  report.cloud.ensemble_id = ensemble_id;

  const std::size_t n = initial_set.size();
  std::vector<SpectralField> finals(n);
  std::vector<char> ok(n, 0);
  parallel_for(n, threads, [&](std::size_t i) {
    if (tau == 0.0) {
      finals[i] = initial_set[i];
      ok[i] = 1;
      return;
    }
    try {
      Trajectory traj = integrate(config, t - tau, t, initial_set[i], dt, scheme);
      finals[i] = traj.back().u;
      ok[i] = 1;
    } catch (const BlowUpError&) {
      ok[i] = 0;
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    if (ok[i]) {
      report.cloud.ids.push_back(static_cast<int>(i));
      report.cloud.points.push_back(std::move(finals[i]));
    } else {
      report.blown_up.push_back(static_cast<int>(i));
    }
  }
  return report;
}

SemidistanceReport hausdorff_semidistance(const PointCloud& source, const PointCloud& target,
                                          const EpsilonSchedule& eps) {
  if (source.empty() || target.empty())
    throw std::invalid_argument("hausdorff_semidistance: empty cloud");
  if (std::abs(source.t - target.t) > 1e-9 * (1.0 + std::abs(source.t)))
    throw std::invalid_argument("hausdorff_semidistance: clouds live at different times");
  for (const auto& p : target.points)
    if (p.spectrum != source.points.front().spectrum)
      throw std::invalid_argument("hausdorff_semidistance: clouds on different spectra");

  SemidistanceReport rep;
  rep.t = source.t;
  rep.eps_at_t = eps.value(source.t);
  double sup = -1.0;
  for (int i = 0; i < source.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int best_j = -1;
    for (int j = 0; j < target.size(); ++j) {
      const double d = ht_dist_sq(source.points[static_cast<std::size_t>(i)],
                                  target.points[static_cast<std::size_t>(j)], rep.eps_at_t);
      if (d < best) {
        best = d;
        best_j = j;
      }
    }
    if (best > sup) {
      sup = best;
      rep.source_index = i;
      rep.target_index = best_j;
    }
  }
  rep.value = std::sqrt(std::max(0.0, sup));
  return rep;
}

DecayCheck check_decay_bound(const Trajectory& traj, const ConstantsCertificate& cert,
                             const Forcing& forcing, const EpsilonSchedule& eps,
                             double tolerance) {
  DecayCheck out;
  const double t0 = traj.front().t;
  const double t1 = traj.back().t;
  const double tau = t1 - t0;
  out.lhs = ht_norm_sq(traj.back().u, eps.value(t1));
  const double start = ht_norm_sq(traj.front().u, eps.value(t0));
  const double hist = forcing.weighted_history_integral(cert.sigma, t1);
  out.rhs = std::exp(-cert.sigma * tau) * start + forcing.xi / cert.eta * hist +
            2.0 * cert.C1 / cert.sigma;
  out.margin = out.rhs - out.lhs;
  out.pass = out.lhs <= out.rhs + tolerance;
  return out;
}

AbsorptionReport check_absorption(const ModelConfig& config, const ConstantsCertificate& cert,
                                  double t, const std::vector<PointCloud>& family,
                                  double tolerance) {
  if (family.empty()) throw std::invalid_argument("check_absorption: empty family");
  for (std::size_t i = 1; i < family.size(); ++i)
    if (!(family[i].tau > family[i - 1].tau))
      throw std::invalid_argument("check_absorption: family must have increasing tau");

  AbsorptionReport report;
  report.rho = absorbing_radius(cert, config.forcing, t);
  const double eps_t = config.epsilon.value(t);
  for (const auto& cloud : family) {
    AbsorptionEntry e;
    e.tau = cloud.tau;
    for (const auto& p : cloud.points) e.max_ht_sq = std::max(e.max_ht_sq, ht_norm_sq(p, eps_t));
    e.inside = e.max_ht_sq <= report.rho + tolerance;
    report.entries.push_back(e);
  }
  for (const auto& e : report.entries) {
    if (!report.entered && e.inside) {
      report.entered = true;
      report.entry_tau = e.tau;
    } else if (report.entered && !e.inside) {
      report.excursion_after_entry = true;
    }
  }
  return report;
}

QLedger q_monitor(const Trajectory& traj, const ConstantsCertificate& cert, const Forcing& forcing) {
  const double t = traj.back().t;
  const double window_start = t - 2.0;
  if (traj.front().t > window_start + 1e-9)
    throw std::invalid_argument("q_monitor: trajectory does not cover [t-2, t]");

  QLedger ledger;
  const double load = 2.0 * forcing.xi * forcing.xi / (cert.m * cert.lambda1);
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const double s = traj.states[i].t;
    if (s < window_start - 1e-9) continue;
    const double energy = traj.ledger[i].l2_sq + traj.ledger[i].eps_grad_sq;
    const double q = energy - 2.0 * cert.C0 * s - load * forcing.sq_norm_integral(window_start, s);
    ledger.times.push_back(s);
    ledger.values.push_back(q);
  }
  ledger.max_uphill = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < ledger.values.size(); ++i)
    ledger.max_uphill = std::max(ledger.max_uphill, ledger.values[i + 1] - ledger.values[i]);
  if (ledger.values.size() < 2) ledger.max_uphill = 0.0;
  return ledger;
}

AttractorResult sample_attractor(const ModelConfig& config, const ConstantsCertificate& cert,
                                 double t, const std::vector<double>& tau_schedule,
                                 const std::vector<SpectralField>& ensemble, double dt,
                                 const Scheme& scheme, double tol, int threads,
                                 std::uint64_t ensemble_id) {
  if (tau_schedule.size() < 3)
    throw std::invalid_argument("sample_attractor: tau schedule needs at least 3 entries");
  for (std::size_t i = 1; i < tau_schedule.size(); ++i)
    if (!(tau_schedule[i] > tau_schedule[i - 1]))
      throw std::invalid_argument("sample_attractor: tau schedule must be strictly increasing");
  if (ensemble.empty()) throw std::invalid_argument("sample_attractor: empty ensemble");

  AttractorResult result;
  std::vector<PointCloud> clouds;
  for (double tau : tau_schedule) {
    EvolveReport rep = pullback_evolve(config, t, tau, ensemble, dt, scheme, threads, ensemble_id);
    if (rep.cloud.empty())
      throw std::invalid_argument("sample_attractor: all ensemble members blew up");
    clouds.push_back(std::move(rep.cloud));
  }
  for (std::size_t i = 0; i + 1 < clouds.size(); ++i) {
    const auto rep = hausdorff_semidistance(clouds[i], clouds[i + 1], config.epsilon);
    result.trace.emplace_back(tau_schedule[i + 1], rep.value);
  }
  result.converged = !result.trace.empty() && result.trace.back().second <= tol;
  result.cloud = std::move(clouds.back());

  result.rho = absorbing_radius(cert, config.forcing, t);
  const double eps_t = config.epsilon.value(t);
  for (const auto& p : result.cloud.points)
    result.max_ht_sq = std::max(result.max_ht_sq, ht_norm_sq(p, eps_t));
  result.containment_ok = result.max_ht_sq <= result.rho + 1e-9;
  return result;
}

}  // namespace nldiff
