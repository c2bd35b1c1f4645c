#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "nldiff/integrator.hpp"
#include "nldiff/model.hpp"

namespace nldiff {

/// One experiment description: model catalog selections plus numerics,
/// experiment and output settings. Parsed from nested key-value text
/// (dotted keys, one `key = value` per line, '#' comments). Every physical
/// function is selected from the named catalog; no user code is evaluated.
struct RunConfig {
  // model
  std::string domain_kind = "interval";
  std::vector<double> extents = {M_PI};
  std::vector<int> modes_per_axis = {16};
  std::string epsilon_kind = "logistic";
  double eps0 = 0.5;
  double eps_beta = 1.0;
  std::string diffusion_kind = "rational";
  double diff_a0 = 1.0;
  double diff_m = 0.3;
  double diff_M = 0.6;
  int kernel_mode = 1;
  double kernel_scale = 1.0;
  std::string nonlin_kind = "cubic";
  double kappa = 0.85;
  std::string forcing_kind = "modulated";
  int forcing_mode = 1;
  double forcing_scale = 0.02;
  std::string forcing_b = "cosine";
  double forcing_b0 = 1.0;
  double forcing_omega = 1.0;
  double xi = 0.1;

  // numerics
  std::string scheme = "rk4";
  double theta = 1.0;
  double dt = 1e-3;
  double reference_tol = 1e-10;
  unsigned long long seed = 42;
  int threads = 1;

  // experiment
  double t = 0.0;
  double tau = 20.0;
  std::vector<double> tau_schedule = {8.0, 16.0, 24.0, 32.0};
  std::vector<double> xi_list = {0.5, 0.25, 0.125, 0.0625};
  int ensemble = 64;
  std::vector<double> radii = {0.1, 1.0, 10.0};
  Interval window{-20.0, 20.0};
  Interval state_range{-50.0, 50.0};
  int scan_resolution = 20001;
  double tol = 1e-3;
  double alpha = -1.0;  // negative: take the certificate value

  // initial datum
  std::string init_kind = "lowpass";
  double init_amp = 1.0;
  int init_mode = 1;
  double init_rate = 1.5;
  int init_cutoff = 6;

  // output
  std::string out_dir = "out";

  std::string raw;   // original file text, hashed into outputs
  std::string path;  // source path when loaded from disk
};

/// Parses the config text; throws ConfigParseError with line/column on the
/// first offending token.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

/// Instantiates the catalog entries. Throws std::invalid_argument on unknown
/// catalog ids or inconsistent selections.
ModelConfig build_model(const RunConfig& rc);

SpectralField build_initial(const RunConfig& rc, const SpectrumPtr& spectrum);

Scheme build_scheme(const RunConfig& rc);

}  // namespace nldiff
