#pragma once

#include <string>
#include <vector>

#include "nldiff/integrator.hpp"
#include "nldiff/model.hpp"
#include "nldiff/pullback.hpp"

namespace nldiff {

/// Co-evolved decomposition u = v + G: v solves the homogeneous companion
/// system driven by f0 with the full solution's diffusion coefficient and
/// starts from the initial datum; G absorbs the remaining reaction and the
/// forcing and starts from zero.
struct SplitTrajectory {
  Trajectory base;                       // u with its energy ledger
  std::vector<SpectralField> v_states;   // aligned with base.states
  std::vector<SpectralField> g_states;
  double alpha = 0.0;

  double t_start() const { return base.front().t; }
  double t_end() const { return base.back().t; }
  double tau() const { return t_end() - t_start(); }
};

SplitTrajectory integrate_split(const ModelConfig& config, double t, double tau,
                                const SpectralField& u0, double dt, const Scheme& scheme,
                                double alpha);

/// sup over stored times of the energy-norm defect || u - (v+G) ||.
double split_additivity_defect(const SplitTrajectory& split, const EpsilonSchedule& eps);

struct VDecayReport {
  bool applicable = true;  // start point inside the absorbing ball
  bool pass = false;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  double fitted_rate = 0.0;  // empirical exponential rate of the squared norm
  double sigma = 0.0;
};

VDecayReport check_v_decay(const SplitTrajectory& split, const ConstantsCertificate& cert,
                           const EpsilonSchedule& eps, double rho_at_start,
                           double tolerance = 1e-9);

struct GRegularityEntry {
  double tau = 0.0;
  double value = 0.0;  // squared higher-order energy norm of G at the end time
};

struct GRegularityReport {
  std::vector<GRegularityEntry> entries;
  double ratio = 0.0;     // max/min over the tau set past the entry time
  double fitted_C = 0.0;  // sup(value) / rho^{2p+2}
  bool pass = false;      // ratio <= 2
};

/// Uniform boundedness of the regular part across runs of different depth.
/// Throws std::invalid_argument with fewer than 3 runs.
GRegularityReport check_g_regularity(const std::vector<SplitTrajectory>& splits,
                                     const ConstantsCertificate& cert, const ModelConfig& config,
                                     double entry_tau = 0.0);

struct PerturbationReport {
  std::vector<double> xi_list;
  std::vector<double> gaps;  // energy-norm gap at the evaluation time per xi
  double slope = 0.0;        // fitted log-log slope over the positive entries
  bool slope_valid = false;
};

/// Gap between the perturbed and unperturbed runs from identical data, with
/// the scaling exponent in the perturbation size.
PerturbationReport perturbation_gap(const ModelConfig& config, double t0, double tau,
                                    const SpectralField& u0, const std::vector<double>& xi_list,
                                    double dt, const Scheme& scheme);

struct SemicontinuityRow {
  double xi = 0.0;
  double distance = 0.0;
  bool converged = false;
};

struct SemicontinuityReport {
  std::vector<SemicontinuityRow> rows;
  double a_cloud_diameter = 0.0;
  double final_distance = 0.0;
  bool monotone = false;  // each value <= 1.05x its predecessor
  bool final_ok = false;  // final distance within the requested tolerance
  std::string note;
};

/// Directed distance from each perturbed attractor cloud to the unperturbed
/// one, as the perturbation size decreases. The unperturbed cloud plays the
/// role of the limit attractor; the report records that interpretation.
SemicontinuityReport semicontinuity_experiment(const ModelConfig& config,
                                               const ConstantsCertificate& cert, double t,
                                               const std::vector<double>& xi_list,
                                               const std::vector<double>& tau_schedule,
                                               const std::vector<SpectralField>& ensemble,
                                               double dt, const Scheme& scheme, double sample_tol,
                                               double final_tol, int threads = 1);

}  // namespace nldiff
