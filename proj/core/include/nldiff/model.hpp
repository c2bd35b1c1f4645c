#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nldiff/spectral.hpp"

namespace nldiff {

/// Time-dependent coefficient of the regularizing term. The admissible laws
/// are decreasing, bounded, and vanish at +infinity; the growing variants
/// exist only to exercise the validator's failure paths.
struct EpsilonSchedule {
  enum class Kind { logistic, exponential, constant, quadratic };

  Kind kind = Kind::logistic;
  double eps0 = 0.5;
  double beta = 1.0;  // exponential rate

  double value(double t) const;
  double derivative(double t) const;
  /// sup over [t0, t1] of |eps| + |eps'|.
  double sup_bound(double t0, double t1) const;
  /// inf over [t0, t1] of -eps'(t)/eps(t).
  double decay_ratio_inf(double t0, double t1) const;
};

/// Diffusion coefficient a(.) acting on the nonlocal functional value.
struct DiffusionLaw {
  enum class Kind { constant, rational, identity };

  Kind kind = Kind::rational;
  double a0 = 1.0;     // constant law
  double lower = 0.5;  // m
  double upper = 1.0;  // M

  double value(double s) const;
  double m() const;
  double M() const;
  /// Lipschitz constant on [-R, R].
  double lipschitz(double R) const;
};

/// Kernel of the nonlocal functional l(u) = integral of g*u.
struct WeightKernel {
  SpectralField g_field;
};

/// Coefficient inner product realizing l(u) through orthonormality.
double nonlocal_value(const SpectralField& u, const WeightKernel& kernel);

/// Reaction term f = f0 + f1 with polynomial growth exponent p.
struct Nonlinearity {
  enum class Kind { zero, cubic };

  Kind kind = Kind::cubic;
  double kappa = 0.85;  // cubic law: f(s) = kappa*s - s^3

  double f(double s) const;
  double f0(double s) const;
  double f1(double s) const;
  double p() const;
  double growth_constant() const;  // C in the growth and Lipschitz bounds
};

/// External force h(x,t) = scale * b(t) * phi_mode(x), plus the perturbation
/// size xi. Weighted history integrals use closed forms so that arbitrarily
/// small exponents remain cheap and exact.
struct Forcing {
  enum class Kind { none, modulated };
  enum class Modulation { constant, cosine };

  Kind kind = Kind::none;
  int mode = 1;        // 1-based index into the sorted spectrum
  double scale = 0.0;  // spatial amplitude
  Modulation b_kind = Modulation::cosine;
  double b0 = 1.0;     // constant modulation level
  double omega = 1.0;  // cosine frequency
  double xi = 0.0;

  double b(double t) const;
  /// ||h(t)||^2 (the spatial profile is a unit-norm eigenfunction times scale).
  double sq_norm(double t) const;
  /// Discounted history e^{-sigma t} * integral over (-infty, t] of
  /// e^{sigma s} ||h(s)||^2 ds, evaluated in closed form so no exponential
  /// of sigma*t is ever materialized.
  double weighted_history_integral(double sigma, double t) const;
  /// integral over [r0, r1] of ||h(s)||^2 ds.
  double sq_norm_integral(double r0, double r1) const;
  /// max over r in [t-1, t] of the unit-window integral of ||h||^2.
  double max_unit_window_integral(double t) const;
  /// Finiteness witness for the weighted history at the given exponent.
  double sigma_integrability_witness(double sigma) const {
    return weighted_history_integral(sigma, 0.0);
  }
  /// Adds xi * h(t) coefficients into `out` (length = mode count).
  void add_coeffs(double t, double factor, std::vector<double>& out) const;
};

/// Full problem instance on a shared spectrum.
struct ModelConfig {
  SpectrumPtr spectrum;
  EpsilonSchedule epsilon;
  DiffusionLaw diffusion;
  WeightKernel kernel;
  Nonlinearity nonlinearity;
  Forcing forcing;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
};

struct AssumptionCheck {
  std::string id;
  std::string description;
  bool pass = false;
  double margin = 0.0;    // how far inside the admissible region
  std::string witness;    // counterexample point when failing
};

struct ValidationReport {
  std::vector<AssumptionCheck> checks;
  bool all_passed() const;
  const AssumptionCheck* find(const std::string& id) const;
  std::string to_text() const;
};

struct ValidationOptions {
  double t_far = 60.0;       // where eps(t) -> 0 is probed
  double eps_limit_tol = 1e-4;
  double pair_tolerance = 1e-9;
};

/// Scans every structural assumption on the given window and state range.
/// Failures are report entries, never exceptions.
ValidationReport validate_assumptions(const ModelConfig& config, Interval window,
                                      Interval state_range, int scan_resolution,
                                      const ValidationOptions& opts = {});

/// Numerically derived admissible constants with provenance. All window
/// dependent quantities take the infimum over `window`.
struct ConstantsCertificate {
  double eta = 0.0;        // in (0, m*lambda1)
  double eta_tilde = 0.0;  // in (0, 3/4 m*lambda1)
  double C0 = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;         // max{2/eta, 4 C1 / sigma}
  double sigma = 0.0;
  double delta1 = 0.0;
  double delta = 0.0;
  double alpha = 0.0;      // regularity gain exponent
  Interval window;

  // Context the downstream checks need.
  double m = 0.0;
  double lambda1 = 0.0;
  double volume = 0.0;
  double p = 0.0;
  double xi = 0.0;

  std::map<std::string, std::string> provenance;
};

/// Derives a certificate. Throws CertificateError naming the violated bound
/// when some admissible range is empty.
ConstantsCertificate estimate_constants(const ModelConfig& config, Interval window,
                                        Interval state_range, int scan_resolution);

/// Re-checks every certificate inequality on a finer grid; returns the
/// smallest margin (nonnegative iff the certificate verifies).
double verify_certificate(const ModelConfig& config, const ConstantsCertificate& cert,
                          Interval state_range, int scan_resolution);

/// Radius (in the squared energy norm) of the pullback absorbing ball at time t.
double absorbing_radius(const ConstantsCertificate& cert, const Forcing& forcing, double t);

/// Uniform bound on the squared energy norm over [t-2, t] along absorbed runs.
double window_bound_rho1(const ConstantsCertificate& cert, const Forcing& forcing, double t);

/// Companion bound on unit-window integrals of the squared gradient norm.
double window_bound_rho2(const ConstantsCertificate& cert, const Forcing& forcing, double t,
                         double L_bound);

}  // namespace nldiff
