// Command-line driver: binds config files to the library experiments and
// emits machine-readable CSV/JSON results.
//
// Exit codes: 0 ok, 1 property failure, 2 config error, 3 blow-up.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "nldiff/config.hpp"
#include "nldiff/errors.hpp"
#include "nldiff/io.hpp"
#include "nldiff/pullback.hpp"
#include "nldiff/split.hpp"

using nlohmann::ordered_json;
using namespace nldiff;

namespace {

struct RunContext {
  RunConfig rc;
  ModelConfig model;
  Scheme scheme{Rk4{}};
  bool reference_scheme = false;  // numerics.scheme = reference
  std::string out_dir;
  std::string config_hash;
  ordered_json summary;

  std::string out_path(const std::string& name) const { return out_dir + "/" + name; }
  std::vector<std::string> metadata() const {
    return {"config_hash=" + config_hash, "seed=" + std::to_string(rc.seed)};
  }
  void write_summary() const {
    std::ofstream out(out_path("summary.json"), std::ios::binary);
    out << summary.dump(2) << "\n";
  }
};

ordered_json certificate_json(const ConstantsCertificate& cert) {
  ordered_json j;
  j["eta"] = cert.eta;
  j["eta_tilde"] = cert.eta_tilde;
  j["C0"] = cert.C0;
  j["C1"] = cert.C1;
  j["C2"] = cert.C2;
  j["sigma"] = cert.sigma;
  j["delta1"] = cert.delta1;
  j["delta"] = cert.delta;
  j["alpha"] = cert.alpha;
  j["window"] = {cert.window.lo, cert.window.hi};
  j["m"] = cert.m;
  j["lambda1"] = cert.lambda1;
  j["volume"] = cert.volume;
  j["p"] = cert.p;
  j["xi"] = cert.xi;
  ordered_json prov;
  for (const auto& [k, v] : cert.provenance) prov[k] = v;
  j["provenance"] = prov;
  return j;
}

std::string cert_comment(const ConstantsCertificate& cert) {
  return "certificate eta=" + CsvWriter::format(cert.eta) +
         " eta_tilde=" + CsvWriter::format(cert.eta_tilde) + " C0=" + CsvWriter::format(cert.C0) +
         " C1=" + CsvWriter::format(cert.C1) + " C2=" + CsvWriter::format(cert.C2) +
         " sigma=" + CsvWriter::format(cert.sigma) + " alpha=" + CsvWriter::format(cert.alpha);
}

ValidationReport run_validation(const RunContext& ctx) {
  return validate_assumptions(ctx.model, ctx.rc.window, ctx.rc.state_range, ctx.rc.scan_resolution);
}

int cmd_validate(RunContext& ctx) {
  const auto report = run_validation(ctx);
  std::ofstream out(ctx.out_path("validation_report.txt"), std::ios::binary);
  out << "# config_hash=" << ctx.config_hash << "\n" << report.to_text();
  ctx.summary["checks"] = ordered_json::array();
  for (const auto& c : report.checks)
    ctx.summary["checks"].push_back({{"id", c.id}, {"pass", c.pass}, {"margin", c.margin},
                                     {"witness", c.witness}});
  ctx.summary["all_passed"] = report.all_passed();
  ctx.write_summary();
  std::cout << (report.all_passed() ? "all assumptions hold\n" : "assumption failures, see report\n");
  return report.all_passed() ? 0 : 1;
}

// Experiments that consume certified constants refuse to run on a model that
// fails validation; purely trajectory-level commands only warn.
bool require_valid(RunContext& ctx, bool hard, ValidationReport* out_report = nullptr) {
  const auto report = run_validation(ctx);
  if (out_report) *out_report = report;
  ctx.summary["assumptions_ok"] = report.all_passed();
  if (!report.all_passed()) {
    ordered_json failed = ordered_json::array();
    for (const auto& c : report.checks)
      if (!c.pass) failed.push_back(c.id);
    ctx.summary["failed_assumptions"] = failed;
    if (hard) {
      std::cerr << "model fails validation; refusing to derive constants\n" << report.to_text();
      return false;
    }
    std::cerr << "warning: model fails validation; continuing\n";
  }
  return true;
}

ConstantsCertificate make_certificate(RunContext& ctx) {
  auto cert = estimate_constants(ctx.model, ctx.rc.window, ctx.rc.state_range, ctx.rc.scan_resolution);
  ctx.summary["certificate"] = certificate_json(cert);
  return cert;
}

int cmd_constants(RunContext& ctx) {
  if (!require_valid(ctx, true)) {
    ctx.write_summary();
    return 2;
  }
  const auto cert = make_certificate(ctx);
  std::ofstream out(ctx.out_path("certificate.json"), std::ios::binary);
  ordered_json j = certificate_json(cert);
  j["config_hash"] = ctx.config_hash;
  out << j.dump(2) << "\n";
  ctx.summary["rho_xi_at_t"] = absorbing_radius(cert, ctx.model.forcing, ctx.rc.t);
  ctx.write_summary();
  std::cout << "certificate written; sigma=" << cert.sigma << "\n";
  return 0;
}

Trajectory forward_run(const RunContext& ctx, const SpectralField& u0) {
  if (ctx.reference_scheme)
    return reference_solve(ctx.model, ctx.rc.t, ctx.rc.t + ctx.rc.tau, u0, ctx.rc.reference_tol);
  return integrate(ctx.model, ctx.rc.t, ctx.rc.t + ctx.rc.tau, u0, ctx.rc.dt, ctx.scheme);
}

int cmd_simulate(RunContext& ctx) {
  require_valid(ctx, false);
  const auto u0 = build_initial(ctx.rc, ctx.model.spectrum);
  const auto traj = forward_run(ctx, u0);
  auto meta = ctx.metadata();
  meta.push_back("quantity: trajectory coefficients and energy norms");
  write_trajectory_csv(ctx.out_path("trajectory.csv"), traj, meta);
  write_snapshot(ctx.out_path("trajectory.bin"), traj);
  ctx.summary["states"] = traj.states.size();
  ctx.summary["final_ht_sq"] =
      ht_norm_sq(traj.back().u, ctx.model.epsilon.value(traj.back().t));
  ctx.write_summary();
  std::cout << "trajectory with " << traj.states.size() << " states written\n";
  return 0;
}

int cmd_energy_audit(RunContext& ctx) {
  require_valid(ctx, false);
  const auto u0 = build_initial(ctx.rc, ctx.model.spectrum);
  const auto traj = forward_run(ctx, u0);

  CsvWriter csv(ctx.out_path("energy_audit.csv"));
  for (const auto& m : ctx.metadata()) csv.comment(m);
  csv.comment("quantity: energy balance pieces and cumulative residual");
  csv.row({"t", "l2_sq", "eps_grad_sq", "ht_sq", "dissipation", "work_f", "work_h", "residual"});
  // Cumulative trapezoid residual against the first row.
  double i_diss = 0.0, i_f = 0.0, i_h = 0.0;
  const double e0 = traj.energy_at(0);
  for (std::size_t i = 0; i < traj.ledger.size(); ++i) {
    const auto& row = traj.ledger[i];
    if (i > 0) {
      const auto& prev = traj.ledger[i - 1];
      const double h = row.t - prev.t;
      i_diss += 0.5 * h * (row.dissipation + prev.dissipation);
      i_f += 0.5 * h * (row.work_f + prev.work_f);
      i_h += 0.5 * h * (row.work_h + prev.work_h);
    }
    const double residual = (row.l2_sq + row.eps_grad_sq + i_diss) - (e0 + 2.0 * i_f + 2.0 * i_h);
    csv.numeric_row({row.t, row.l2_sq, row.eps_grad_sq, row.l2_sq + row.eps_grad_sq,
                     row.dissipation, row.work_f, row.work_h, residual});
  }
  const double final_residual = energy_residual(traj, traj.front().t, traj.back().t);
  ctx.summary["final_residual_simpson"] = final_residual;
  ctx.summary["initial_energy"] = e0;
  ctx.write_summary();
  std::cout << "energy audit written; final residual " << final_residual << "\n";
  return 0;
}

int cmd_absorb(RunContext& ctx) {
  if (!require_valid(ctx, true)) {
    ctx.write_summary();
    return 2;
  }
  const auto cert = make_certificate(ctx);
  const double t = ctx.rc.t;
  const double eps_start = ctx.model.epsilon.value(t - ctx.rc.tau_schedule.back());
  const auto ensemble =
      make_ensemble(ctx.model.spectrum, ctx.rc.ensemble, ctx.rc.seed, ctx.rc.radii, eps_start);

  std::vector<PointCloud> family;
  for (double tau : ctx.rc.tau_schedule) {
    auto rep = pullback_evolve(ctx.model, t, tau, ensemble, ctx.rc.dt, ctx.scheme, ctx.rc.threads,
                               ctx.rc.seed);
    if (!rep.complete()) {
      ctx.summary["blown_up_members"] = rep.blown_up.size();
      ctx.write_summary();
      return 3;
    }
    family.push_back(std::move(rep.cloud));
  }
  const auto report = check_absorption(ctx.model, cert, t, family);

  CsvWriter csv(ctx.out_path("absorption.csv"));
  for (const auto& m : ctx.metadata()) csv.comment(m);
  csv.comment(cert_comment(cert));
  csv.comment("quantity: pullback absorbing radius rho_xi and family entry");
  csv.row({"tau", "max_ht_sq", "rho_xi", "inside"});
  for (const auto& e : report.entries)
    csv.row({CsvWriter::format(e.tau), CsvWriter::format(e.max_ht_sq),
             CsvWriter::format(report.rho), e.inside ? "1" : "0"});

  // Certified decay bound for every member at the deepest pullback.
  CsvWriter decay_csv(ctx.out_path("decay_bound.csv"));
  for (const auto& m : ctx.metadata()) decay_csv.comment(m);
  decay_csv.comment("quantity: certified decay bound lhs/rhs per member at the largest tau");
  decay_csv.row({"member", "lhs_ht_sq", "rhs_bound", "pass"});
  int violations = 0;
  const double deepest = ctx.rc.tau_schedule.back();
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    const auto traj = integrate(ctx.model, t - deepest, t, ensemble[i], ctx.rc.dt, ctx.scheme);
    const auto check = check_decay_bound(traj, cert, ctx.model.forcing, ctx.model.epsilon);
    if (!check.pass) ++violations;
    decay_csv.row({std::to_string(i), CsvWriter::format(check.lhs), CsvWriter::format(check.rhs),
                   check.pass ? "1" : "0"});
  }

  ctx.summary["rho_xi"] = report.rho;
  ctx.summary["entered"] = report.entered;
  ctx.summary["entry_tau"] = report.entry_tau;
  ctx.summary["excursion_after_entry"] = report.excursion_after_entry;
  ctx.summary["decay_violations"] = violations;
  ctx.write_summary();
  std::cout << "absorption entry at tau=" << report.entry_tau << ", decay violations " << violations
            << "\n";
  return (report.pass() && violations == 0) ? 0 : 1;
}

int cmd_attractor(RunContext& ctx) {
  if (!require_valid(ctx, true)) {
    ctx.write_summary();
    return 2;
  }
  const auto cert = make_certificate(ctx);
  const double t = ctx.rc.t;
  const double eps_start = ctx.model.epsilon.value(t - ctx.rc.tau_schedule.back());
  const auto ensemble =
      make_ensemble(ctx.model.spectrum, ctx.rc.ensemble, ctx.rc.seed, ctx.rc.radii, eps_start);
  const auto result = sample_attractor(ctx.model, cert, t, ctx.rc.tau_schedule, ensemble,
                                       ctx.rc.dt, ctx.scheme, ctx.rc.tol, ctx.rc.threads,
                                       ctx.rc.seed);

  CsvWriter cloud_csv(ctx.out_path("attractor_cloud.csv"));
  for (const auto& m : ctx.metadata()) cloud_csv.comment(m);
  cloud_csv.comment(cert_comment(cert));
  cloud_csv.comment("quantity: finite sample of the pullback attractor at time t");
  std::vector<std::string> header{"point_id"};
  for (int i = 1; i <= ctx.model.spectrum->mode_count(); ++i)
    header.push_back("coeff_" + std::to_string(i));
  cloud_csv.row(header);
  for (int i = 0; i < result.cloud.size(); ++i) {
    std::vector<std::string> cells{std::to_string(result.cloud.ids[static_cast<std::size_t>(i)])};
    for (double c : result.cloud.points[static_cast<std::size_t>(i)].coeffs)
      cells.push_back(CsvWriter::format(c));
    cloud_csv.row(cells);
  }

  CsvWriter trace_csv(ctx.out_path("convergence_trace.csv"));
  for (const auto& m : ctx.metadata()) trace_csv.comment(m);
  trace_csv.comment("quantity: semidistance between successive pullback depths");
  trace_csv.row({"tau", "semidistance"});
  for (const auto& [tau, dist] : result.trace)
    trace_csv.numeric_row({tau, dist});

  ctx.summary["converged"] = result.converged;
  ctx.summary["rho_xi"] = result.rho;
  ctx.summary["max_ht_sq"] = result.max_ht_sq;
  ctx.summary["containment_ok"] = result.containment_ok;
  ctx.write_summary();
  std::cout << "attractor sample " << (result.converged ? "converged" : "UNCONVERGED")
            << ", containment " << (result.containment_ok ? "ok" : "violated") << "\n";
  return (result.converged && result.containment_ok) ? 0 : 1;
}

int cmd_split(RunContext& ctx) {
  if (!require_valid(ctx, true)) {
    ctx.write_summary();
    return 2;
  }
  const auto cert = make_certificate(ctx);
  const double alpha = ctx.rc.alpha > 0.0 ? ctx.rc.alpha : cert.alpha;
  const auto u0 = build_initial(ctx.rc, ctx.model.spectrum);
  const double t = ctx.rc.t;

  CsvWriter csv(ctx.out_path("split_decay.csv"));
  for (const auto& m : ctx.metadata()) csv.comment(m);
  csv.comment(cert_comment(cert));
  csv.comment("quantity: decaying-part bound and regular-part regularity norm per tau");
  csv.row({"tau", "v_bound_lhs", "v_bound_rhs", "v_pass", "fitted_rate", "additivity_defect",
           "g_reg_value"});

  std::vector<SplitTrajectory> splits;
  bool all_pass = true;
  double worst_defect = 0.0;
  for (double tau : ctx.rc.tau_schedule) {
    auto split = integrate_split(ctx.model, t, tau, u0, ctx.rc.dt, ctx.scheme, alpha);
    const double rho_start = absorbing_radius(cert, ctx.model.forcing, t - tau);
    const auto vrep = check_v_decay(split, cert, ctx.model.epsilon, rho_start);
    const double defect = split_additivity_defect(split, ctx.model.epsilon);
    worst_defect = std::max(worst_defect, defect);
    const double eps_t = ctx.model.epsilon.value(t);
    const auto& g = split.g_states.back();
    double reg = 0.0;
    for (int i = 0; i < g.size(); ++i) {
      const double lam = g.spectrum->eigenvalue(i);
      reg += (std::pow(lam, alpha) + eps_t * std::pow(lam, 1.0 + alpha)) *
             g.coeffs[static_cast<std::size_t>(i)] * g.coeffs[static_cast<std::size_t>(i)];
    }
    csv.row({CsvWriter::format(tau), CsvWriter::format(vrep.lhs), CsvWriter::format(vrep.rhs),
             vrep.pass ? "1" : "0", CsvWriter::format(vrep.fitted_rate), CsvWriter::format(defect),
             CsvWriter::format(reg)});
    if (!vrep.pass) all_pass = false;
    splits.push_back(std::move(split));
  }
  const auto greg = check_g_regularity(splits, cert, ctx.model);
  ctx.summary["g_ratio"] = greg.ratio;
  ctx.summary["g_fitted_C"] = greg.fitted_C;
  ctx.summary["worst_additivity_defect"] = worst_defect;
  ctx.summary["v_all_pass"] = all_pass;
  ctx.write_summary();
  std::cout << "split experiment: v bounds " << (all_pass ? "hold" : "VIOLATED") << ", g ratio "
            << greg.ratio << "\n";
  return (all_pass && greg.pass && worst_defect <= 1e-7) ? 0 : 1;
}

int cmd_perturb(RunContext& ctx) {
  require_valid(ctx, false);
  const auto u0 = build_initial(ctx.rc, ctx.model.spectrum);
  const auto rep =
      perturbation_gap(ctx.model, ctx.rc.t, ctx.rc.tau, u0, ctx.rc.xi_list, ctx.rc.dt, ctx.scheme);

  CsvWriter csv(ctx.out_path("perturbation_gap.csv"));
  for (const auto& m : ctx.metadata()) csv.comment(m);
  csv.comment("quantity: energy-norm gap to the unperturbed run per perturbation size");
  csv.row({"xi", "gap", "fitted_slope"});
  for (std::size_t i = 0; i < rep.xi_list.size(); ++i)
    csv.numeric_row({rep.xi_list[i], rep.gaps[i], rep.slope});

  ctx.summary["slope"] = rep.slope;
  ctx.summary["slope_valid"] = rep.slope_valid;
  ctx.write_summary();
  std::cout << "perturbation slope " << rep.slope << "\n";
  bool gaps_all_zero = true;
  for (double g : rep.gaps)
    if (g != 0.0) gaps_all_zero = false;
  if (gaps_all_zero) return 0;
  return (rep.slope_valid && std::abs(rep.slope - 1.0) <= 0.1) ? 0 : 1;
}

int cmd_semicontinuity(RunContext& ctx) {
  if (!require_valid(ctx, true)) {
    ctx.write_summary();
    return 2;
  }
  const auto cert = make_certificate(ctx);
  const double t = ctx.rc.t;
  const double eps_start = ctx.model.epsilon.value(t - ctx.rc.tau_schedule.back());
  const auto ensemble =
      make_ensemble(ctx.model.spectrum, ctx.rc.ensemble, ctx.rc.seed, ctx.rc.radii, eps_start);
  const auto rep = semicontinuity_experiment(ctx.model, cert, t, ctx.rc.xi_list,
                                             ctx.rc.tau_schedule, ensemble, ctx.rc.dt, ctx.scheme,
                                             ctx.rc.tol, ctx.rc.tol, ctx.rc.threads);

  CsvWriter csv(ctx.out_path("semicontinuity.csv"));
  for (const auto& m : ctx.metadata()) csv.comment(m);
  csv.comment(cert_comment(cert));
  csv.comment("quantity: semidistance from the perturbed attractor cloud to the unperturbed one");
  csv.row({"xi", "distance", "converged"});
  for (const auto& row : rep.rows)
    csv.row({CsvWriter::format(row.xi), CsvWriter::format(row.distance),
             row.converged ? "1" : "0"});

  ctx.summary["a_cloud_diameter"] = rep.a_cloud_diameter;
  ctx.summary["monotone"] = rep.monotone;
  ctx.summary["final_distance"] = rep.final_distance;
  ctx.summary["note"] = rep.note;
  ctx.write_summary();
  std::cout << "semicontinuity: final distance " << rep.final_distance << " vs diameter "
            << rep.a_cloud_diameter << "\n";
  bool all_converged = true;
  for (const auto& row : rep.rows)
    if (!row.converged) all_converged = false;
  return (rep.monotone && all_converged) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectral simulator and property checker for a nonlocal diffusion model"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  unsigned long long seed_override = 0;
  bool seed_given = false;
  int threads_override = 0;

  app.add_option("--config", config_path, "run configuration file")->required();
  app.add_option("--out", out_dir, "output directory (default: from the config)");
  auto* seed_opt = app.add_option("--seed", seed_override, "seed override");
  app.add_option("--threads", threads_override, "worker thread override");

  const std::vector<std::pair<std::string, int (*)(RunContext&)>> commands = {
      {"validate", &cmd_validate},         {"constants", &cmd_constants},
      {"simulate", &cmd_simulate},         {"energy-audit", &cmd_energy_audit},
      {"absorb", &cmd_absorb},             {"attractor", &cmd_attractor},
      {"split", &cmd_split},               {"perturb", &cmd_perturb},
      {"semicontinuity", &cmd_semicontinuity},
  };
  for (const auto& [name, fn] : commands) app.add_subcommand(name)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? 2 : 0;
  }
  seed_given = seed_opt->count() > 0;

  RunContext ctx;
  try {
    ctx.rc = parse_config_file(config_path);
    if (seed_given) ctx.rc.seed = seed_override;
    if (threads_override > 0) ctx.rc.threads = threads_override;
    ctx.model = build_model(ctx.rc);
    if (ctx.rc.scheme == "reference") {
      ctx.reference_scheme = true;  // only the plain trajectory commands accept it
    } else {
      ctx.scheme = build_scheme(ctx.rc);
    }
  } catch (const ConfigParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  ctx.out_dir = out_dir.empty() ? ctx.rc.out_dir : out_dir;
  std::error_code ec;
  std::filesystem::create_directories(ctx.out_dir, ec);
  if (ec) {
    std::cerr << "cannot create output directory " << ctx.out_dir << "\n";
    return 2;
  }
  ctx.config_hash = hex64(fnv1a64(ctx.rc.raw + "|seed=" + std::to_string(ctx.rc.seed)));
  ctx.summary["config_hash"] = ctx.config_hash;
  ctx.summary["seed"] = ctx.rc.seed;

  try {
    for (const auto& [name, fn] : commands) {
      if (app.got_subcommand(name)) {
        if (ctx.reference_scheme && name != "simulate" && name != "energy-audit") {
          std::cerr << "config error: the reference scheme only drives simulate/energy-audit\n";
          return 2;
        }
        ctx.summary["subcommand"] = name;
        return fn(ctx);
      }
    }
  } catch (const BlowUpError& e) {
    std::cerr << "blow-up: " << e.what() << "\n";
    ctx.summary["blow_up"] = e.what();
    ctx.write_summary();
    return 3;
  } catch (const CertificateError& e) {
    std::cerr << e.what() << "\n";
    ctx.summary["certificate_error"] = e.what();
    ctx.write_summary();
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
