#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "nldiff/model.hpp"
#include "nldiff/spectral.hpp"

namespace nldiff {

struct GalerkinState {
  double t = 0.0;
  SpectralField u;
};

/// One audit row per accepted state: the pieces of the energy balance
///   d/dt(||u||^2 + eps||grad u||^2) + (2a(l(u)) - eps')||grad u||^2
///     = 2(f(u),u) + 2 xi (h,u).
struct LedgerRow {
  double t = 0.0;
  double l2_sq = 0.0;        // ||u||^2
  double grad_sq = 0.0;      // ||grad u||^2
  double eps_grad_sq = 0.0;  // eps(t) ||grad u||^2
  double dissipation = 0.0;  // (2 a(l(u)) - eps'(t)) ||grad u||^2
  double work_f = 0.0;       // (f(u), u)
  double work_h = 0.0;       // xi (h(t), u)
};

struct Trajectory {
  std::string scheme_id;
  double dt = 0.0;
  std::vector<GalerkinState> states;
  std::vector<LedgerRow> ledger;

  const GalerkinState& front() const { return states.front(); }
  const GalerkinState& back() const { return states.back(); }
  /// Index of the stored state at time t (within 1e-9); throws if absent.
  int index_at_time(double t) const;
  double energy_at(int i) const {
    return ledger[static_cast<std::size_t>(i)].l2_sq + ledger[static_cast<std::size_t>(i)].eps_grad_sq;
  }
};

struct Rk4 {};
struct ImexTheta {
  double theta = 1.0;
  double dt_cap = 1.0;
};
using Scheme = std::variant<Rk4, ImexTheta>;

std::string scheme_id(const Scheme& s);

/// Modal right-hand side and energy bookkeeping for one problem instance.
/// Holds scratch buffers; make one per thread.
class GalerkinSystem {
public:
  explicit GalerkinSystem(const ModelConfig& config);

  int dim() const { return n_; }
  const ModelConfig& config() const { return *config_; }

  /// Solved-for derivative: out_k = (f_k(u) + xi h_k(t) - a(l(u)) lambda_k u_k) / (1 + eps(t) lambda_k).
  void rhs(double t, std::span<const double> coeffs, std::span<double> out);

  /// Projection of f(u(.)) onto the basis (quadrature), plus the value a(l(u)).
  void reaction(std::span<const double> coeffs, std::span<double> f_out, double* a_value);

  LedgerRow ledger_row(double t, std::span<const double> coeffs);

  void check_finite(double t, std::span<const double> coeffs) const;

private:
  const ModelConfig* config_;
  int n_ = 0;
  std::vector<double> grid_vals_;
  std::vector<double> f_proj_;
  std::vector<double> h_scratch_;
};

constexpr double kBlowUpThreshold = 1e12;

/// du/dt at (t, u). Pure convenience wrapper over GalerkinSystem.
SpectralField galerkin_rhs(const ModelConfig& config, double t, const SpectralField& u);

/// Advances one step of the chosen scheme.
GalerkinState step(const Scheme& scheme, const ModelConfig& config, const GalerkinState& state,
                   double dt);

/// Fixed-step integration from t_from to t_to inclusive; the last step is
/// clipped to land exactly on t_to. The ledger gets one row per state.
Trajectory integrate(const ModelConfig& config, double t_from, double t_to,
                     const SpectralField& u0, double dt, const Scheme& scheme);

/// LHS - RHS of the integral energy balance between trajectory times s <= t,
/// with time integrals by composite Simpson over the ledger rows.
double energy_residual(const Trajectory& traj, double s, double t);

/// Adaptive embedded Dormand-Prince integration with per-step error control
/// err <= tol * dt; the independent accuracy oracle of this project.
Trajectory reference_solve(const ModelConfig& config, double t_from, double t_to,
                           const SpectralField& u0, double tol);

struct DependenceFit {
  double fitted_C = 0.0;            // max growth exponent over the direction ensemble
  std::vector<double> per_direction;
};

/// Empirical continuous-dependence constant: paired runs from u0 and u0 + du
/// over [tau, t], exponent of the squared energy-norm gap growth.
DependenceFit fit_continuous_dependence(const ModelConfig& config, double tau, double t,
                                        const SpectralField& u0, double delta, int directions,
                                        double dt, const Scheme& scheme, unsigned long long seed);

}  // namespace nldiff
