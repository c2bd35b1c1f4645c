#include "nldiff/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nldiff/errors.hpp"

namespace nldiff {

namespace {

double logistic(double t) {  // 1/(1+e^t), overflow-safe
  if (t >= 0.0) {
    const double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

// Golden-section refinement of a smooth 1-D maximum bracketed by [a, b].
template <typename Fn>
double refine_max(Fn&& fn, double a, double b) {
  constexpr double inv_phi = 0.61803398874989484820;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = fn(x1), f2 = fn(x2);
  for (int it = 0; it < 200 && (b - a) > 1e-14 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = fn(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = fn(x1);
    }
  }
  return std::max(f1, f2);
}

// Grid maximum followed by local refinement around the best grid point.
template <typename Fn>
double scan_max(Fn&& fn, Interval range, int resolution) {
  if (resolution < 3) resolution = 3;
  const double h = range.width() / (resolution - 1);
  double best = -std::numeric_limits<double>::infinity();
  int best_i = 0;
  for (int i = 0; i < resolution; ++i) {
    const double s = range.lo + i * h;
    const double v = fn(s);
    if (v > best) {
      best = v;
      best_i = i;
    }
  }
  const double lo = range.lo + std::max(0, best_i - 1) * h;
  const double hi = range.lo + std::min(resolution - 1, best_i + 1) * h;
  const double refined = refine_max(fn, lo, hi);
  return std::max(best, refined);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// EpsilonSchedule

double EpsilonSchedule::value(double t) const {
  switch (kind) {
    case Kind::logistic: return eps0 * logistic(t);
    case Kind::exponential: return eps0 * std::exp(-beta * t);
    case Kind::constant: return eps0;
    case Kind::quadratic: return 1.0 + t * t;
  }
  return eps0;
}

double EpsilonSchedule::derivative(double t) const {
  switch (kind) {
    case Kind::logistic: return -eps0 * logistic(t) * logistic(-t);
    case Kind::exponential: return -beta * eps0 * std::exp(-beta * t);
    case Kind::constant: return 0.0;
    case Kind::quadratic: return 2.0 * t;
  }
  return 0.0;
}

double EpsilonSchedule::sup_bound(double t0, double t1) const {
  switch (kind) {
    case Kind::logistic: return eps0 * 1.25;  // |eps| <= eps0, |eps'| <= eps0/4
    case Kind::exponential: return eps0 * std::exp(-beta * t0) * (1.0 + beta);
    case Kind::constant: return eps0;
    case Kind::quadratic: {
      const double v0 = value(t0) + std::abs(derivative(t0));
      const double v1 = value(t1) + std::abs(derivative(t1));
      return std::max(v0, v1);
    }
  }
  return eps0;
}

double EpsilonSchedule::decay_ratio_inf(double t0, double t1) const {
  switch (kind) {
    case Kind::logistic: return logistic(-t0);  // -eps'/eps = 1/(1+e^{-t}), increasing
    case Kind::exponential: return beta;
    case Kind::constant: return 0.0;
    case Kind::quadratic: {
      double best = std::numeric_limits<double>::infinity();
      for (double t : {t0, t1, -1.0, 1.0}) {
        if (t < t0 || t > t1) continue;
        best = std::min(best, -derivative(t) / value(t));
      }
      return best;
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// DiffusionLaw

double DiffusionLaw::value(double s) const {
  switch (kind) {
    case Kind::constant: return a0;
    case Kind::rational: return lower + (upper - lower) / (1.0 + s * s);
    case Kind::identity: return s;
  }
  return a0;
}

double DiffusionLaw::m() const {
  switch (kind) {
    case Kind::constant: return a0;
    case Kind::rational: return lower;
    case Kind::identity: return 0.0;  // no positive lower bound exists
  }
  return a0;
}

double DiffusionLaw::M() const {
  switch (kind) {
    case Kind::constant: return a0;
    case Kind::rational: return upper;
    case Kind::identity: return std::numeric_limits<double>::infinity();
  }
  return a0;
}

double DiffusionLaw::lipschitz(double R) const {
  switch (kind) {
    case Kind::constant: return 0.0;
    case Kind::rational: {
      const double s = std::min(R, 1.0 / std::sqrt(3.0));  // argmax of 2|s|/(1+s^2)^2
      const double d = 1.0 + s * s;
      return (upper - lower) * 2.0 * s / (d * d);
    }
    case Kind::identity: return 1.0;
  }
  return 0.0;
}

double nonlocal_value(const SpectralField& u, const WeightKernel& kernel) {
  if (u.spectrum != kernel.g_field.spectrum)
    throw std::invalid_argument("nonlocal_value: kernel and field on different spectra");
  double acc = 0.0;
  for (std::size_t i = 0; i < u.coeffs.size(); ++i) acc += kernel.g_field.coeffs[i] * u.coeffs[i];
  return acc;
}

// ---------------------------------------------------------------------------
// Nonlinearity

double Nonlinearity::f(double s) const {
  switch (kind) {
    case Kind::zero: return 0.0;
    case Kind::cubic: return kappa * s - s * s * s;
  }
  return 0.0;
}

double Nonlinearity::f0(double s) const {
  switch (kind) {
    case Kind::zero: return 0.0;
    case Kind::cubic: return -s * s * s - s;
  }
  return 0.0;
}

double Nonlinearity::f1(double s) const {
  switch (kind) {
    case Kind::zero: return 0.0;
    case Kind::cubic: return (kappa + 1.0) * s;
  }
  return 0.0;
}

double Nonlinearity::p() const { return kind == Kind::zero ? 0.0 : 2.0; }

double Nonlinearity::growth_constant() const {
  if (kind == Kind::zero) return 1.0;
  // Covers the Lipschitz bound (max(kappa, 3/2)) and both split growth bounds.
  return std::max({1.5, kappa, 0.5297 * (kappa + 1.0)});
}

// ---------------------------------------------------------------------------
// Forcing

double Forcing::b(double t) const {
  if (kind == Kind::none) return 0.0;
  return b_kind == Modulation::constant ? b0 : std::cos(omega * t);
}

double Forcing::sq_norm(double t) const {
  if (kind == Kind::none) return 0.0;
  const double v = scale * b(t);
  return v * v;
}

double Forcing::weighted_history_integral(double sigma, double t) const {
  if (kind == Kind::none) return 0.0;
  if (!(sigma > 0.0)) return std::numeric_limits<double>::infinity();
  if (b_kind == Modulation::constant || omega == 0.0) {
    const double amp = b_kind == Modulation::constant ? b0 : 1.0;
    return scale * scale * amp * amp / sigma;
  }
  const double mean = 1.0 / (2.0 * sigma);
  const double osc = (sigma * std::cos(2.0 * omega * t) + 2.0 * omega * std::sin(2.0 * omega * t)) /
                     (2.0 * (sigma * sigma + 4.0 * omega * omega));
  return scale * scale * (mean + osc);
}

double Forcing::sq_norm_integral(double r0, double r1) const {
  if (kind == Kind::none) return 0.0;
  if (b_kind == Modulation::constant || omega == 0.0) {
    const double amp = b_kind == Modulation::constant ? b0 : 1.0;
    return scale * scale * amp * amp * (r1 - r0);
  }
  return scale * scale *
         (0.5 * (r1 - r0) + (std::sin(2.0 * omega * r1) - std::sin(2.0 * omega * r0)) / (4.0 * omega));
}

double Forcing::max_unit_window_integral(double t) const {
  if (kind == Kind::none) return 0.0;
  double best = 0.0;
  constexpr int n = 2001;
  for (int i = 0; i < n; ++i) {
    const double r = t - 1.0 + i / static_cast<double>(n - 1);
    best = std::max(best, sq_norm_integral(r - 1.0, r));
  }
  return best;
}

void Forcing::add_coeffs(double t, double factor, std::vector<double>& out) const {
  if (kind == Kind::none || factor == 0.0) return;
  out[static_cast<std::size_t>(mode - 1)] += factor * scale * b(t);
}

// ---------------------------------------------------------------------------
// Validation

bool ValidationReport::all_passed() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

const AssumptionCheck* ValidationReport::find(const std::string& id) const {
  for (const auto& c : checks)
    if (c.id == id) return &c;
  return nullptr;
}

std::string ValidationReport::to_text() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    os << (c.pass ? "PASS" : "FAIL") << "  " << c.id << "  margin=" << fmt(c.margin);
    if (!c.witness.empty()) os << "  witness=" << c.witness;
    os << "  (" << c.description << ")\n";
  }
  return os.str();
}

ValidationReport validate_assumptions(const ModelConfig& config, Interval window,
                                      Interval state_range, int scan_resolution,
                                      const ValidationOptions& opts) {
  if (!(window.width() > 0.0) || !(state_range.width() > 0.0))
    throw std::invalid_argument("validate_assumptions: empty window or state range");
  if (scan_resolution < 3) throw std::invalid_argument("scan_resolution too small");

  ValidationReport report;
  const auto& eps = config.epsilon;
  const auto& law = config.diffusion;
  const auto& nl = config.nonlinearity;
  const double lambda1 = config.spectrum->lambda1();
  const int dim = config.spectrum->domain().dimension();
  const double th = window.width() / (scan_resolution - 1);
  const double sh = state_range.width() / (scan_resolution - 1);

  {  // eps decreasing on the window
    double worst = -std::numeric_limits<double>::infinity();
    double at = window.lo;
    for (int i = 0; i < scan_resolution; ++i) {
      const double t = window.lo + i * th;
      const double d = eps.derivative(t);
      if (d > worst) {
        worst = d;
        at = t;
      }
    }
    AssumptionCheck c{"eps_monotone", "eps'(t) <= 0 on the window", worst <= 0.0, -worst, ""};
    if (!c.pass) c.witness = "t=" + fmt(at) + ", eps'=" + fmt(worst);
    report.checks.push_back(c);
  }
  {  // eps vanishes forward in time
    const double tail = eps.value(opts.t_far);
    AssumptionCheck c{"eps_vanishes", "eps(t) -> 0 as t -> +inf", tail < opts.eps_limit_tol,
                      opts.eps_limit_tol - tail, ""};
    if (!c.pass) c.witness = "eps(" + fmt(opts.t_far) + ")=" + fmt(tail);
    report.checks.push_back(c);
  }
  {  // |eps| + |eps'| bounded by the declared constant
    const double L = eps.sup_bound(window.lo, window.hi);
    double sup = 0.0;
    for (int i = 0; i < scan_resolution; ++i) {
      const double t = window.lo + i * th;
      sup = std::max(sup, std::abs(eps.value(t)) + std::abs(eps.derivative(t)));
    }
    const bool ok = std::isfinite(L) && sup <= L * (1.0 + 1e-12);
    report.checks.push_back({"eps_bounded", "sup(|eps|+|eps'|) <= L", ok, L - sup,
                             ok ? "" : "sup=" + fmt(sup) + " > L=" + fmt(L)});
  }
  {  // diffusion bounds 0 < m <= a <= M
    const double m = law.m(), M = law.M();
    double amin = std::numeric_limits<double>::infinity();
    double amax = -amin;
    double bad_at = 0.0;
    double bad_abs = std::numeric_limits<double>::infinity();
    for (int i = 0; i < scan_resolution; ++i) {
      const double s = state_range.lo + i * sh;
      const double a = law.value(s);
      amin = std::min(amin, a);
      amax = std::max(amax, a);
      if (a <= 0.0 && std::abs(s) < bad_abs) {
        bad_abs = std::abs(s);
        bad_at = s;
      }
    }
    const bool ok = m > 0.0 && amin >= m - 1e-12 && amax <= M * (1.0 + 1e-12);
    AssumptionCheck c{"diffusion_bounds", "0 < m <= a(s) <= M on the range", ok,
                      ok ? std::min(amin - m, (std::isfinite(M) ? M - amax : 1.0)) : std::min(m, amin),
                      ""};
    if (!ok) {
      c.witness = std::isfinite(bad_abs) ? "s=" + fmt(bad_at) + ", a=" + fmt(law.value(bad_at))
                                         : "min a=" + fmt(amin) + ", max a=" + fmt(amax);
    }
    report.checks.push_back(c);
  }
  {  // local Lipschitz bound for a(.)
    const double R = std::max(std::abs(state_range.lo), std::abs(state_range.hi));
    const double La = law.lipschitz(R);
    const int k = std::min(scan_resolution, 129);
    const double kh = state_range.width() / (k - 1);
    double slack = std::numeric_limits<double>::infinity();
    bool ok = true;
    std::string witness;
    for (int i = 0; i < k && ok; ++i) {
      for (int j = i + 1; j < k; ++j) {
        const double s1 = state_range.lo + i * kh;
        const double s2 = state_range.lo + j * kh;
        const double lhs = std::abs(law.value(s1) - law.value(s2));
        const double rhs = La * std::abs(s1 - s2);
        slack = std::min(slack, rhs - lhs + opts.pair_tolerance);
        if (lhs > rhs + opts.pair_tolerance) {
          ok = false;
          witness = "s1=" + fmt(s1) + ", s2=" + fmt(s2);
          break;
        }
      }
    }
    report.checks.push_back({"diffusion_lipschitz", "|a(s1)-a(s2)| <= L_a(R)|s1-s2|", ok, slack, witness});
  }
  {  // kernel lives in L2 on the shared spectrum
    const bool ok = config.kernel.g_field.spectrum == config.spectrum && config.kernel.g_field.finite();
    report.checks.push_back({"kernel_l2", "kernel has finite L2 norm on the shared spectrum", ok,
                             0.0, ok ? "" : "kernel invalid"});
  }
  {  // f = f0 + f1, up to rounding in the largest sampled values
    double worst = 0.0;
    for (int i = 0; i < scan_resolution; ++i) {
      const double s = state_range.lo + i * sh;
      const double scale = 1.0 + std::abs(nl.f0(s)) + std::abs(nl.f1(s));
      worst = std::max(worst, std::abs(nl.f(s) - nl.f0(s) - nl.f1(s)) / scale);
    }
    report.checks.push_back({"nonlin_split", "f(s) = f0(s) + f1(s) pointwise", worst <= 1e-12,
                             1e-12 - worst, ""});
  }
  {  // Lipschitz growth of f
    const double C = nl.growth_constant();
    const double pexp = nl.p();
    const int k = std::min(scan_resolution, 129);
    const double kh = state_range.width() / (k - 1);
    double slack = std::numeric_limits<double>::infinity();
    bool ok = true;
    std::string witness;
    for (int i = 0; i < k && ok; ++i) {
      for (int j = i + 1; j < k; ++j) {
        const double u = state_range.lo + i * kh;
        const double v = state_range.lo + j * kh;
        const double lhs = std::abs(nl.f(u) - nl.f(v));
        const double rhs =
            C * (std::pow(std::abs(u), pexp) + std::pow(std::abs(v), pexp) + 1.0) * std::abs(u - v);
        slack = std::min(slack, rhs - lhs + opts.pair_tolerance);
        if (lhs > rhs * (1.0 + 1e-9) + opts.pair_tolerance) {
          ok = false;
          witness = "u=" + fmt(u) + ", v=" + fmt(v);
        }
      }
    }
    report.checks.push_back({"nonlin_lipschitz", "|f(u)-f(v)| <= C(|u|^p+|v|^p+1)|u-v|", ok, slack, witness});
  }
  {  // sector condition: f(s)/s stays below lambda1 at large |s|
    double tail = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < scan_resolution; ++i) {
      const double s = state_range.lo + i * sh;
      if (std::abs(s) < 0.5 * std::max(std::abs(state_range.lo), std::abs(state_range.hi))) continue;
      if (s == 0.0) continue;
      tail = std::max(tail, nl.f(s) / s);
    }
    // Polynomial tail sign: the cubic law has negative leading coefficient.
    const bool tail_ok = nl.kind == Nonlinearity::Kind::zero || nl.kind == Nonlinearity::Kind::cubic;
    const bool ok = tail_ok && tail < lambda1;
    report.checks.push_back({"nonlin_sector", "limsup f(s)/s < lambda1", ok, lambda1 - tail, ""});
  }
  {  // split dissipativity, reduced to a scalar scan plus a window condition
    const double c = lambda1 / (1.0 + lambda1);
    double c0 = 0.0;  // smallest c0 with 2 f0(s) s <= (c0 - c) s^2 on the scan
    for (int i = 0; i < scan_resolution; ++i) {
      const double s = state_range.lo + i * sh;
      if (s == 0.0) continue;
      c0 = std::max(c0, (2.0 * nl.f0(s) * s + c * s * s) / (s * s));
    }
    double margin = std::numeric_limits<double>::infinity();
    double at = window.lo;
    for (int i = 0; i < scan_resolution; ++i) {
      const double t = window.lo + i * th;
      const double v = 2.0 * law.m() + std::abs(std::min(0.0, eps.derivative(t))) -
                       c * eps.value(t) - c0 / lambda1;
      if (v < margin) {
        margin = v;
        at = t;
      }
    }
    const bool ok = margin >= 0.0;
    report.checks.push_back({"f0_dissipation",
                             "split part is gradient-dominated: lambda1/(1+lambda1)*eps(t) + c0/lambda1 <= 2m + |eps'(t)|",
                             ok, margin, ok ? "" : "t=" + fmt(at)});
  }
  {  // growth of f0
    const double C = nl.growth_constant();
    const double pexp = nl.p();
    double slack = std::numeric_limits<double>::infinity();
    for (int i = 0; i < scan_resolution; ++i) {
      const double s = state_range.lo + i * sh;
      const double rhs = C * (std::pow(std::abs(s), pexp + 1.0) + std::abs(s));
      slack = std::min(slack, rhs - std::abs(nl.f0(s)) + opts.pair_tolerance);
    }
    report.checks.push_back({"f0_growth", "|f0(s)| <= C(|s|^{p+1}+|s|)", slack >= 0.0, slack, ""});
  }
  {  // growth of f1
    const double C = nl.growth_constant();
    const double pexp = nl.p();
    double slack = std::numeric_limits<double>::infinity();
    for (int i = 0; i < scan_resolution; ++i) {
      const double s = state_range.lo + i * sh;
      const double rhs = C * (std::pow(std::abs(s), pexp + 1.0) + 1.0);
      slack = std::min(slack, rhs - std::abs(nl.f1(s)) + opts.pair_tolerance);
    }
    report.checks.push_back({"f1_growth", "|f1(s)| <= C(|s|^{p+1}+1)", slack >= 0.0, slack, ""});
  }
  {  // forcing history integral converges
    const double probe = config.forcing.sigma_integrability_witness(1e-6);
    const bool ok = std::isfinite(probe);
    report.checks.push_back({"forcing_integrable",
                             "exponentially weighted forcing history is finite (witness at sigma=1e-6: " +
                                 fmt(probe) + ")",
                             ok, 0.0, ""});
  }
  {  // growth exponent against the dimension
    const double pexp = nl.p();
    if (dim >= 3) {
      const double cap = 4.0 / (dim - 2);
      report.checks.push_back({"growth_exponent", "p <= 4/(N-2)", pexp <= cap, cap - pexp, ""});
    } else {
      report.checks.push_back({"growth_exponent", "p unconstrained below three dimensions", true,
                               std::numeric_limits<double>::infinity(), ""});
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Constants

ConstantsCertificate estimate_constants(const ModelConfig& config, Interval window,
                                        Interval state_range, int scan_resolution) {
  ConstantsCertificate cert;
  const auto& nl = config.nonlinearity;
  cert.lambda1 = config.spectrum->lambda1();
  cert.m = config.diffusion.m();
  cert.volume = config.spectrum->volume();
  cert.p = nl.p();
  cert.xi = config.forcing.xi;
  cert.window = window;
  const double ml = cert.m * cert.lambda1;
  if (!(ml > 0.0)) throw CertificateError("m*lambda1 must be positive (eta range empty)");

  cert.eta = 0.5 * ml;
  cert.eta_tilde = 0.5 * 0.75 * ml;
  cert.provenance["eta"] = "midpoint of (0, m*lambda1), m*lambda1=" + fmt(ml);
  cert.provenance["eta_tilde"] = "midpoint of (0, 3/4 m*lambda1)";

  const double sup1 = scan_max(
      [&](double s) { return nl.f(s) * s - (ml - cert.eta) * s * s; }, state_range, scan_resolution);
  // Tiny headroom keeps finer re-scans from landing above a positive supremum;
  // a nonpositive supremum stays an exact zero.
  cert.C1 = sup1 > 0.0 ? cert.volume * sup1 * (1.0 + 1e-13) : 0.0;
  cert.provenance["C1"] = "volume * sup_s [f(s)s - (m*lambda1 - eta) s^2] = " + fmt(cert.C1);

  const double sup0 = scan_max(
      [&](double s) { return 2.0 * nl.f(s) * s - (1.5 * ml - 2.0 * cert.eta_tilde) * s * s; },
      state_range, scan_resolution);
  cert.C0 = sup0 > 0.0 ? 0.5 * cert.volume * sup0 * (1.0 + 1e-13) : 0.0;
  cert.provenance["C0"] = "volume/2 * sup_s [2 f(s)s - (3/2 m*lambda1 - 2 eta~) s^2] = " + fmt(cert.C0);

  const double r_inf = config.epsilon.decay_ratio_inf(window.lo, window.hi);
  if (!(r_inf > 0.0))
    throw CertificateError("sigma range empty: inf over the window of -eps'(t)/eps(t) is " + fmt(r_inf));
  cert.delta1 = 0.95 * std::min(cert.eta, r_inf);
  cert.provenance["delta1"] = "0.95 * min{eta, inf_window(-eps'/eps)=" + fmt(r_inf) + "}";

  const double numer = 16.0 * cert.m - 2.0 - cert.xi;
  if (!(numer > 0.0))
    throw CertificateError("delta range empty: 16m - 2 - xi = " + fmt(numer) + " <= 0");
  const double eps_sup = config.epsilon.value(window.lo);  // decreasing schedule
  const double delta_cap = numer / (8.0 * (1.0 / cert.lambda1 + eps_sup));

  cert.sigma = 0.9 * std::min({cert.delta1, ml, cert.lambda1 / (1.0 + cert.lambda1),
                               delta_cap / (cert.p + 1.0)});
  if (!(cert.sigma > 0.0)) throw CertificateError("sigma range empty");
  cert.provenance["sigma"] =
      "0.9 * min{delta1, m*lambda1, lambda1/(1+lambda1), delta_cap/(p+1)=" + fmt(delta_cap / (cert.p + 1.0)) + "}";

  cert.delta = 0.95 * std::min((cert.p + 1.0) * cert.sigma, delta_cap);
  cert.provenance["delta"] = "0.95 * min{(p+1)sigma, delta_cap=" + fmt(delta_cap) + "}";

  const int dim = config.spectrum->domain().dimension();
  double alpha_cap = 1.0;
  if (dim >= 3) {
    alpha_cap = std::min(1.0, (4.0 - (dim - 2) * cert.p) / 2.0);
    if (!(alpha_cap > 0.0))
      throw CertificateError("alpha range empty: (4 - (N-2)p)/2 = " + fmt(alpha_cap) + " <= 0");
  }
  cert.alpha = 0.5 * alpha_cap;
  cert.provenance["alpha"] = "midpoint of (0, " + fmt(alpha_cap) + ")";

  cert.C2 = std::max(2.0 / cert.eta, 4.0 * cert.C1 / cert.sigma);
  cert.provenance["C2"] = "max{2/eta, 4 C1/sigma}";

  const double margin = verify_certificate(config, cert, state_range, 2 * scan_resolution);
  if (margin < -1e-10)
    throw CertificateError("certificate failed re-verification, margin " + fmt(margin));
  return cert;
}

double verify_certificate(const ModelConfig& config, const ConstantsCertificate& cert,
                          Interval state_range, int scan_resolution) {
  const auto& nl = config.nonlinearity;
  const double ml = cert.m * cert.lambda1;
  double margin = std::numeric_limits<double>::infinity();
  auto upd = [&margin](double v) { margin = std::min(margin, v); };

  upd(cert.eta);
  upd(ml - cert.eta);
  upd(cert.eta_tilde);
  upd(0.75 * ml - cert.eta_tilde);
  const double r_inf = config.epsilon.decay_ratio_inf(cert.window.lo, cert.window.hi);
  upd(cert.sigma);
  upd(cert.delta1 - cert.sigma);
  upd(std::min(cert.eta, r_inf) - cert.delta1);
  const double numer = 16.0 * cert.m - 2.0 - cert.xi;
  const double delta_cap = numer / (8.0 * (1.0 / cert.lambda1 + config.epsilon.value(cert.window.lo)));
  upd(std::min({ml, r_inf, cert.lambda1 / (1.0 + cert.lambda1), delta_cap / (cert.p + 1.0)}) - cert.sigma);
  upd(cert.delta);
  upd(std::min((cert.p + 1.0) * cert.sigma, delta_cap) - cert.delta);
  upd(cert.alpha);
  const int dim = config.spectrum->domain().dimension();
  const double alpha_cap = dim >= 3 ? std::min(1.0, (4.0 - (dim - 2) * cert.p) / 2.0) : 1.0;
  upd(alpha_cap - cert.alpha);
  upd(cert.C2 - 2.0 / cert.eta);
  upd(cert.C2 - 4.0 * cert.C1 / cert.sigma);

  // Pointwise certificates on the finer grid.
  const double sup1 = scan_max(
      [&](double s) { return nl.f(s) * s - (ml - cert.eta) * s * s; }, state_range, scan_resolution);
  upd(cert.C1 / cert.volume - sup1);
  const double sup0 = scan_max(
      [&](double s) { return 2.0 * nl.f(s) * s - (1.5 * ml - 2.0 * cert.eta_tilde) * s * s; },
      state_range, scan_resolution);
  upd(2.0 * cert.C0 / cert.volume - sup0);
  return margin;
}

double absorbing_radius(const ConstantsCertificate& cert, const Forcing& forcing, double t) {
  const double hist = forcing.weighted_history_integral(cert.sigma, t);
  if (!std::isfinite(hist)) throw CertificateError("divergent forcing history integral");
  return cert.C2 * (forcing.xi * hist + 1.0);
}

double window_bound_rho1(const ConstantsCertificate& cert, const Forcing& forcing, double t) {
  // Discounting at t-2 dominates the radius at every time in [t-2, t].
  const double hist = forcing.weighted_history_integral(cert.sigma, t);
  if (!std::isfinite(hist)) throw CertificateError("divergent forcing history integral");
  return cert.C2 * (1.0 + forcing.xi * std::exp(2.0 * cert.sigma) * hist);
}

double window_bound_rho2(const ConstantsCertificate& cert, const Forcing& forcing, double t,
                         double L_bound) {
  const double rho1 = window_bound_rho1(cert, forcing, t);
  const double load = 2.0 * forcing.xi * forcing.xi / (cert.m * cert.lambda1) *
                      forcing.max_unit_window_integral(t);
  return (rho1 + load + 2.0 * cert.C0) / (2.0 * cert.eta_tilde + L_bound);
}

}  // namespace nldiff
