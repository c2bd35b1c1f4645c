#include "nldiff/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "nldiff/errors.hpp"

namespace nldiff {

namespace {

struct Cursor {
  int line = 0;
  int column = 0;
};

double parse_double(const std::string& tok, const Cursor& at) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigParseError(at.line, at.column, "expected a number, got '" + tok + "'");
  }
}

long long parse_int(const std::string& tok, const Cursor& at) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(tok, &used);
    if (used != tok.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigParseError(at.line, at.column, "expected an integer, got '" + tok + "'");
  }
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : value) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  for (auto& s : out) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& value, const Cursor& at) {
  std::vector<double> out;
  for (const auto& tok : split_list(value)) out.push_back(parse_double(tok, at));
  return out;
}

std::vector<int> parse_int_list(const std::string& value, const Cursor& at) {
  std::vector<int> out;
  for (const auto& tok : split_list(value))
    out.push_back(static_cast<int>(parse_int(tok, at)));
  return out;
}

Interval parse_interval(const std::string& value, const Cursor& at) {
  const auto v = parse_double_list(value, at);
  if (v.size() != 2) throw ConfigParseError(at.line, at.column, "expected 'lo,hi'");
  return {v[0], v[1]};
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  RunConfig rc;
  rc.raw = text;

  using Setter = std::function<void(RunConfig&, const std::string&, const Cursor&)>;
  static const std::map<std::string, Setter> table = {
      {"model.domain.kind", [](RunConfig& c, const std::string& v, const Cursor&) { c.domain_kind = v; }},
      {"model.domain.extents",
       [](RunConfig& c, const std::string& v, const Cursor& at) { c.extents = parse_double_list(v, at); }},
      {"model.modes_per_axis",
       [](RunConfig& c, const std::string& v, const Cursor& at) { c.modes_per_axis = parse_int_list(v, at); }},
      {"model.epsilon.kind", [](RunConfig& c, const std::string& v, const Cursor&) { c.epsilon_kind = v; }},
      {"model.epsilon.eps0",
       [](RunConfig& c, const std::string& v, const Cursor& at) { c.eps0 = parse_double(v, at); }},
      {"model.epsilon.beta",
       [](RunConfig& c, const std::string& v, const Cursor& at) { c.eps_beta = parse_double(v, at); }},
      {"model.diffusion.kind", [](RunConfig& c, const std::string& v, const Cursor&) { c.diffusion_kind = v; }},
      {"model.diffusion.a0",
       [](RunConfig& c, const std::string& v, const Cursor& at) { c.diff_a0 = parse_double(v, at); }},
      {"model.diffusion.m",
       [](RunConfig& c, const std::string& v, const Cursor& at) { c.diff_m = parse_double(v, at); }},
      {"model.diffusion.M",
       [](RunConfig& c, const std::string& v, const Cursor& at) { c.diff_M = parse_double(v, at); }},
      {"model.kernel.mode",
       [](RunConfig& c, const std::string& v, const Cursor& at) { c.kernel_mode = static_cast<int>(parse_int(v, at)); }},
      {"model.kernel.scale",
       [](RunConfig& c, const std::string& v, const Cursor& at) { c.kernel_scale = parse_double(v, at); }},
      {"model.nonlinearity.kind", [](RunConfig& c, const std::string& v, const Cursor&) { c.nonlin_kind = v; }},
      {"model.nonlinearity.kappa",
       [](RunConfig& c, const std::string& v, const Cursor& at) { c.kappa = parse_double(v, at); }},
      {"model.forcing.kind", [](RunConfig& c, const std::string& v, const Cursor&) { c.forcing_kind = v; }},
      {"model.forcing.mode",
       [](RunConfig& c, const std::string& v, const Cursor& at) { c.forcing_mode = static_cast<int>(parse_int(v, at)); }},
      {"model.forcing.scale",
       [](RunConfig& c, const std::string& v, const Cursor& at) { c.forcing_scale = parse_double(v, at); }},
      {"model.forcing.b_kind", [](RunConfig& c, const std::string& v, const Cursor&) { c.forcing_b = v; }},
      {"model.forcing.b0",
       [](RunConfig& c, const std::string& v, const Cursor& at) { c.forcing_b0 = parse_double(v, at); }},
      {"model.forcing.omega",
       [](RunConfig& c, const std::string& v, const Cursor& at) { c.forcing_omega = parse_double(v, at); }},
      {"model.xi", [](RunConfig& c, const std::string& v, const Cursor& at) { c.xi = parse_double(v, at); }},
      {"numerics.scheme", [](RunConfig& c, const std::string& v, const Cursor&) { c.scheme = v; }},
      {"numerics.theta",
       [](RunConfig& c, const std::string& v, const Cursor& at) { c.theta = parse_double(v, at); }},
      {"numerics.dt", [](RunConfig& c, const std::string& v, const Cursor& at) { c.dt = parse_double(v, at); }},
      {"numerics.reference_tol",
       [](RunConfig& c, const std::string& v, const Cursor& at) { c.reference_tol = parse_double(v, at); }},
      {"numerics.seed",
       [](RunConfig& c, const std::string& v, const Cursor& at) {
         c.seed = static_cast<unsigned long long>(parse_int(v, at));
       }},
      {"numerics.threads",
       [](RunConfig& c, const std::string& v, const Cursor& at) { c.threads = static_cast<int>(parse_int(v, at)); }},
      {"experiment.t", [](RunConfig& c, const std::string& v, const Cursor& at) { c.t = parse_double(v, at); }},
      {"experiment.tau", [](RunConfig& c, const std::string& v, const Cursor& at) { c.tau = parse_double(v, at); }},
      {"experiment.tau_schedule",
       [](RunConfig& c, const std::string& v, const Cursor& at) { c.tau_schedule = parse_double_list(v, at); }},
      {"experiment.xi_list",
       [](RunConfig& c, const std::string& v, const Cursor& at) { c.xi_list = parse_double_list(v, at); }},
      {"experiment.ensemble",
       [](RunConfig& c, const std::string& v, const Cursor& at) { c.ensemble = static_cast<int>(parse_int(v, at)); }},
      {"experiment.radii",
       [](RunConfig& c, const std::string& v, const Cursor& at) { c.radii = parse_double_list(v, at); }},
      {"experiment.window",
       [](RunConfig& c, const std::string& v, const Cursor& at) { c.window = parse_interval(v, at); }},
      {"experiment.state_range",
       [](RunConfig& c, const std::string& v, const Cursor& at) { c.state_range = parse_interval(v, at); }},
      {"experiment.scan_resolution",
       [](RunConfig& c, const std::string& v, const Cursor& at) {
         c.scan_resolution = static_cast<int>(parse_int(v, at));
       }},
      {"experiment.tol", [](RunConfig& c, const std::string& v, const Cursor& at) { c.tol = parse_double(v, at); }},
      {"experiment.alpha",
       [](RunConfig& c, const std::string& v, const Cursor& at) { c.alpha = parse_double(v, at); }},
      {"init.kind", [](RunConfig& c, const std::string& v, const Cursor&) { c.init_kind = v; }},
      {"init.amp", [](RunConfig& c, const std::string& v, const Cursor& at) { c.init_amp = parse_double(v, at); }},
      {"init.mode",
       [](RunConfig& c, const std::string& v, const Cursor& at) { c.init_mode = static_cast<int>(parse_int(v, at)); }},
      {"init.rate", [](RunConfig& c, const std::string& v, const Cursor& at) { c.init_rate = parse_double(v, at); }},
      {"init.cutoff",
       [](RunConfig& c, const std::string& v, const Cursor& at) { c.init_cutoff = static_cast<int>(parse_int(v, at)); }},
      {"output.dir", [](RunConfig& c, const std::string& v, const Cursor&) { c.out_dir = v; }},
  };

  std::istringstream stream(text);
  std::string line;
  int lineno = 0;
  while (std::getline(stream, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::size_t begin = 0;
    while (begin < line.size() && std::isspace(static_cast<unsigned char>(line[begin]))) ++begin;
    std::size_t end = line.size();
    while (end > begin && std::isspace(static_cast<unsigned char>(line[end - 1]))) --end;
    if (begin == end) continue;

    const auto eq = line.find('=', begin);
    if (eq == std::string::npos || eq >= end)
      throw ConfigParseError(lineno, static_cast<int>(end), "expected 'key = value'");

    std::size_t key_end = eq;
    while (key_end > begin && std::isspace(static_cast<unsigned char>(line[key_end - 1]))) --key_end;
    const std::string key = line.substr(begin, key_end - begin);
    std::size_t val_begin = eq + 1;
    while (val_begin < end && std::isspace(static_cast<unsigned char>(line[val_begin]))) ++val_begin;
    const std::string value = line.substr(val_begin, end - val_begin);

    const auto it = table.find(key);
    if (it == table.end())
      throw ConfigParseError(lineno, static_cast<int>(begin) + 1, "unknown key '" + key + "'");
    if (value.empty())
      throw ConfigParseError(lineno, static_cast<int>(val_begin) + 1, "missing value for '" + key + "'");
    it->second(rc, value, Cursor{lineno, static_cast<int>(val_begin) + 1});
  }
  return rc;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigParseError(0, 0, "cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  RunConfig rc = parse_config_text(buf.str());
  rc.path = path;
  return rc;
}

ModelConfig build_model(const RunConfig& rc) {
  Domain domain;
  if (rc.domain_kind == "interval") {
    if (rc.extents.size() != 1)
      throw std::invalid_argument("interval domain takes exactly one extent");
    domain = Domain::interval(rc.extents[0]);
  } else if (rc.domain_kind == "box") {
    domain = Domain::box(rc.extents);
  } else {
    throw std::invalid_argument("unknown domain kind '" + rc.domain_kind + "'");
  }

  ModelConfig mc;
  mc.spectrum = build_spectrum(domain, rc.modes_per_axis);

  if (rc.epsilon_kind == "logistic") mc.epsilon.kind = EpsilonSchedule::Kind::logistic;
  else if (rc.epsilon_kind == "exponential") mc.epsilon.kind = EpsilonSchedule::Kind::exponential;
  else if (rc.epsilon_kind == "constant") mc.epsilon.kind = EpsilonSchedule::Kind::constant;
  else if (rc.epsilon_kind == "quadratic") mc.epsilon.kind = EpsilonSchedule::Kind::quadratic;
  else throw std::invalid_argument("unknown epsilon kind '" + rc.epsilon_kind + "'");
  mc.epsilon.eps0 = rc.eps0;
  mc.epsilon.beta = rc.eps_beta;

  if (rc.diffusion_kind == "rational") {
    mc.diffusion.kind = DiffusionLaw::Kind::rational;
    mc.diffusion.lower = rc.diff_m;
    mc.diffusion.upper = rc.diff_M;
    if (!(rc.diff_m > 0.0) || !(rc.diff_M >= rc.diff_m))
      throw std::invalid_argument("rational diffusion needs 0 < m <= M");
  } else if (rc.diffusion_kind == "constant") {
    mc.diffusion.kind = DiffusionLaw::Kind::constant;
    mc.diffusion.a0 = rc.diff_a0;
  } else if (rc.diffusion_kind == "identity") {
    mc.diffusion.kind = DiffusionLaw::Kind::identity;
  } else {
    throw std::invalid_argument("unknown diffusion kind '" + rc.diffusion_kind + "'");
  }

  if (rc.kernel_mode < 1 || rc.kernel_mode > mc.spectrum->mode_count())
    throw std::invalid_argument("kernel mode out of range");
  mc.kernel.g_field = SpectralField(mc.spectrum);
  mc.kernel.g_field.coeffs[static_cast<std::size_t>(rc.kernel_mode - 1)] = rc.kernel_scale;

  if (rc.nonlin_kind == "cubic") {
    mc.nonlinearity.kind = Nonlinearity::Kind::cubic;
    mc.nonlinearity.kappa = rc.kappa;
  } else if (rc.nonlin_kind == "zero") {
    mc.nonlinearity.kind = Nonlinearity::Kind::zero;
  } else {
    throw std::invalid_argument("unknown nonlinearity kind '" + rc.nonlin_kind + "'");
  }

  if (rc.forcing_kind == "modulated") {
    mc.forcing.kind = Forcing::Kind::modulated;
    if (rc.forcing_mode < 1 || rc.forcing_mode > mc.spectrum->mode_count())
      throw std::invalid_argument("forcing mode out of range");
    mc.forcing.mode = rc.forcing_mode;
    mc.forcing.scale = rc.forcing_scale;
    if (rc.forcing_b == "cosine") mc.forcing.b_kind = Forcing::Modulation::cosine;
    else if (rc.forcing_b == "constant") mc.forcing.b_kind = Forcing::Modulation::constant;
    else throw std::invalid_argument("unknown modulation kind '" + rc.forcing_b + "'");
    mc.forcing.b0 = rc.forcing_b0;
    mc.forcing.omega = rc.forcing_omega;
  } else if (rc.forcing_kind == "none") {
    mc.forcing.kind = Forcing::Kind::none;
  } else {
    throw std::invalid_argument("unknown forcing kind '" + rc.forcing_kind + "'");
  }
  mc.forcing.xi = rc.xi;
  return mc;
}

SpectralField build_initial(const RunConfig& rc, const SpectrumPtr& spectrum) {
  SpectralField u(spectrum);
  if (rc.init_kind == "zero") return u;
  if (rc.init_kind == "mode") {
    if (rc.init_mode < 1 || rc.init_mode > spectrum->mode_count())
      throw std::invalid_argument("init mode out of range");
    u.coeffs[static_cast<std::size_t>(rc.init_mode - 1)] = rc.init_amp;
    return u;
  }
  if (rc.init_kind == "lowpass") {
    const int cutoff = std::min(rc.init_cutoff, spectrum->mode_count());
    for (int k = 1; k <= cutoff; ++k)
      u.coeffs[static_cast<std::size_t>(k - 1)] = rc.init_amp / (static_cast<double>(k) * k);
    return u;
  }
  if (rc.init_kind == "exp") {
    for (int k = 1; k <= spectrum->mode_count(); ++k)
      u.coeffs[static_cast<std::size_t>(k - 1)] = rc.init_amp * std::exp(-rc.init_rate * k);
    return u;
  }
  throw std::invalid_argument("unknown init kind '" + rc.init_kind + "'");
}

Scheme build_scheme(const RunConfig& rc) {
  if (rc.scheme == "rk4") return Rk4{};
  if (rc.scheme == "imex_theta") return ImexTheta{rc.theta, 1.0};
  throw std::invalid_argument("unknown scheme '" + rc.scheme + "'");
}

}  // namespace nldiff
