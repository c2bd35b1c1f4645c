#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "nldiff/integrator.hpp"
#include "nldiff/model.hpp"

namespace nldiff {

/// Finite sample of a time slice of the dynamics: states reached at time t by
/// an ensemble pulled back to start at t - tau.
struct PointCloud {
  double t = 0.0;
  double tau = 0.0;
  std::uint64_t ensemble_id = 0;
  std::vector<int> ids;  // originating member indices, order preserved
  std::vector<SpectralField> points;

  bool empty() const { return points.empty(); }
  int size() const { return static_cast<int>(points.size()); }
};

struct SemidistanceReport {
  double value = 0.0;
  int source_index = -1;  // argmax over the source cloud
  int target_index = -1;  // its nearest target point
  double t = 0.0;
  double eps_at_t = 0.0;
};

struct EvolveReport {
  PointCloud cloud;
  std::vector<int> blown_up;  // member indices that failed
  bool complete() const { return blown_up.empty(); }
};

struct DecayCheck {
  bool applicable = true;
  bool pass = false;
  double lhs = 0.0;    // squared energy norm at the end time
  double rhs = 0.0;    // certified bound
  double margin = 0.0; // rhs - lhs
};

struct AbsorptionEntry {
  double tau = 0.0;
  double max_ht_sq = 0.0;
  bool inside = false;
};

struct AbsorptionReport {
  double rho = 0.0;
  bool entered = false;
  double entry_tau = 0.0;
  bool excursion_after_entry = false;
  std::vector<AbsorptionEntry> entries;
  bool pass() const { return entered && !excursion_after_entry; }
};

struct QLedger {
  std::vector<double> times;   // s in [t-2, t]
  std::vector<double> values;  // energy minus accumulated sources
  double max_uphill = 0.0;     // largest increase between consecutive rows
};

struct AttractorResult {
  PointCloud cloud;                               // at the largest tau
  std::vector<std::pair<double, double>> trace;   // (tau_{i+1}, semidistance to previous cloud)
  bool converged = false;
  double rho = 0.0;
  double max_ht_sq = 0.0;
  bool containment_ok = false;
};

/// Growth class of a parameterized family of sets, used to certify membership
/// in the tempered universe without sampling.
struct FamilyGrowth {
  enum class Kind { constant, polynomial, exponential };
  Kind kind = Kind::constant;
  double rate = 0.0;  // polynomial degree or exponential rate of the squared radius
};

/// True iff e^{sigma tau} sup_{D(tau)} |.|^2 -> 0 as tau -> -infinity.
bool is_tempered(const FamilyGrowth& growth, double sigma);

/// Deterministic low-mode random starts scaled to the given energy radii
/// (cycled). Member i depends only on (seed, i), so ensembles are
/// prefix-stable under growth.
std::vector<SpectralField> make_ensemble(const SpectrumPtr& spectrum, int count,
                                         std::uint64_t seed, const std::vector<double>& radii,
                                         double eps_at_start);

/// Evolves each member from t - tau to t. Blown-up members are dropped into
/// the failure list; survivors keep their original order and ids.
EvolveReport pullback_evolve(const ModelConfig& config, double t, double tau,
                             const std::vector<SpectralField>& initial_set, double dt,
                             const Scheme& scheme, int threads = 1,
                             std::uint64_t ensemble_id = 0);

/// Directed sup-inf distance between clouds sharing a time, in the energy norm
/// frozen at that time.
SemidistanceReport hausdorff_semidistance(const PointCloud& source, const PointCloud& target,
                                          const EpsilonSchedule& eps);

/// Verifies the certified pullback decay bound along one trajectory.
DecayCheck check_decay_bound(const Trajectory& traj, const ConstantsCertificate& cert,
                             const Forcing& forcing, const EpsilonSchedule& eps,
                             double tolerance = 1e-9);

/// Entry time of a pullback family into the absorbing ball at time t, plus an
/// excursion check at every later tau of the schedule.
AbsorptionReport check_absorption(const ModelConfig& config, const ConstantsCertificate& cert,
                                  double t, const std::vector<PointCloud>& family,
                                  double tolerance = 1e-9);

/// Monitor of the energy-minus-sources functional on [t-2, t]; nonpositive
/// uphill movement witnesses the compactness mechanism numerically.
QLedger q_monitor(const Trajectory& traj, const ConstantsCertificate& cert, const Forcing& forcing);

/// Cauchy-style attractor sampling over an increasing tau schedule.
AttractorResult sample_attractor(const ModelConfig& config, const ConstantsCertificate& cert,
                                 double t, const std::vector<double>& tau_schedule,
                                 const std::vector<SpectralField>& ensemble, double dt,
                                 const Scheme& scheme, double tol, int threads = 1,
                                 std::uint64_t ensemble_id = 0);

}  // namespace nldiff
