#include "nldiff/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "nldiff/errors.hpp"

namespace nldiff {

namespace {

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(static_cast<std::size_t>(n), 0.0);
  w.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[static_cast<std::size_t>(i)] = -z;
    x[static_cast<std::size_t>(n - 1 - i)] = z;
    w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[static_cast<std::size_t>(n - 1 - i)] = w[static_cast<std::size_t>(i)];
  }
}

// Composite rule on (0, length): one panel per resolved wavenumber. The node
// count per panel covers polynomial degree 4*kmax outright (2n-1 >= 4*kmax)
// and, with the panel width tied to the wavenumber, drives quartic products
// of basis functions below rounding as well.
void composite_rule(double length, int panels, int nodes_per_panel,
                    std::vector<double>& nodes, std::vector<double>& weights) {
  std::vector<double> gx, gw;
  gauss_legendre(nodes_per_panel, gx, gw);
  nodes.clear();
  weights.clear();
  const double h = length / panels;
  for (int p = 0; p < panels; ++p) {
    const double a = p * h;
    for (int i = 0; i < nodes_per_panel; ++i) {
      nodes.push_back(a + 0.5 * h * (gx[static_cast<std::size_t>(i)] + 1.0));
      weights.push_back(0.5 * h * gw[static_cast<std::size_t>(i)]);
    }
  }
}

}  // namespace

double Domain::volume() const {
  double v = 1.0;
  for (double e : extents) v *= e;
  return v;
}

Domain Domain::interval(double length) {
  Domain d;
  d.kind = Kind::interval;
  d.extents = {length};
  if (length <= 0.0) throw std::invalid_argument("domain extent must be positive");
  return d;
}

Domain Domain::box(std::vector<double> extents) {
  Domain d;
  d.kind = Kind::box;
  d.extents = std::move(extents);
  if (d.extents.size() < 2 || d.extents.size() > 3)
    throw std::invalid_argument("box domain requires 2 or 3 extents");
  for (double e : d.extents)
    if (e <= 0.0) throw std::invalid_argument("domain extent must be positive");
  return d;
}

SpectrumPtr build_spectrum(const Domain& domain, const std::vector<int>& modes_per_axis) {
  const int dim = domain.dimension();
  if (dim < 1 || dim > 3) throw std::invalid_argument("domain dimension must be 1, 2 or 3");
  if (domain.kind == Domain::Kind::interval && dim != 1)
    throw std::invalid_argument("interval domain must be one-dimensional");
  if (static_cast<int>(modes_per_axis.size()) != dim)
    throw std::invalid_argument("modes_per_axis size must match domain dimension");
  for (double e : domain.extents)
    if (!(e > 0.0)) throw std::invalid_argument("domain extent must be positive");
  for (int m : modes_per_axis)
    if (m < 1) throw std::invalid_argument("at least one mode per axis required");

  auto spec = std::make_shared<Spectrum>();
  spec->domain_ = domain;

  // Per-axis quadrature and per-axis sine tables.
  std::vector<std::vector<double>> ax_nodes(static_cast<std::size_t>(dim));
  std::vector<std::vector<double>> ax_weights(static_cast<std::size_t>(dim));
  // phi[a][k-1][q] = sqrt(2/l) sin(k pi x_q / l)
  std::vector<std::vector<std::vector<double>>> phi(static_cast<std::size_t>(dim));
  std::size_t total_nodes = 1;
  for (int a = 0; a < dim; ++a) {
    const double len = domain.extents[static_cast<std::size_t>(a)];
    const int kmax = modes_per_axis[static_cast<std::size_t>(a)];
    const int nodes_per_panel = std::max(20, 2 * kmax + 1);
    composite_rule(len, kmax, nodes_per_panel, ax_nodes[static_cast<std::size_t>(a)],
                   ax_weights[static_cast<std::size_t>(a)]);
    total_nodes *= ax_nodes[static_cast<std::size_t>(a)].size();
    auto& tab = phi[static_cast<std::size_t>(a)];
    tab.resize(static_cast<std::size_t>(kmax));
    const double scale = std::sqrt(2.0 / len);
    for (int k = 1; k <= kmax; ++k) {
      auto& row = tab[static_cast<std::size_t>(k - 1)];
      row.resize(ax_nodes[static_cast<std::size_t>(a)].size());
      for (std::size_t q = 0; q < row.size(); ++q)
        row[q] = scale * std::sin(k * M_PI * ax_nodes[static_cast<std::size_t>(a)][q] / len);
    }
  }

  std::size_t total_modes = 1;
  for (int m : modes_per_axis) total_modes *= static_cast<std::size_t>(m);
  if (total_nodes > 2'000'000 || total_modes * total_nodes > 60'000'000)
    throw std::invalid_argument("requested spectrum exceeds the supported resolution");

  // Enumerate mode tuples, then sort by eigenvalue.
  std::vector<std::pair<double, std::array<int, 3>>> modes;
  modes.reserve(total_modes);
  std::array<int, 3> k{1, 1, 1};
  for (std::size_t flat = 0; flat < total_modes; ++flat) {
    std::size_t rem = flat;
    for (int a = dim - 1; a >= 0; --a) {
      const int cnt = modes_per_axis[static_cast<std::size_t>(a)];
      k[static_cast<std::size_t>(a)] = static_cast<int>(rem % static_cast<std::size_t>(cnt)) + 1;
      rem /= static_cast<std::size_t>(cnt);
    }
    double lambda = 0.0;
    for (int a = 0; a < dim; ++a) {
      const double f = k[static_cast<std::size_t>(a)] * M_PI / domain.extents[static_cast<std::size_t>(a)];
      lambda += f * f;
    }
    std::array<int, 3> idx{0, 0, 0};
    for (int a = 0; a < dim; ++a) idx[static_cast<std::size_t>(a)] = k[static_cast<std::size_t>(a)];
    modes.emplace_back(lambda, idx);
  }
  std::sort(modes.begin(), modes.end(), [](const auto& lhs, const auto& rhs) {
    return std::tie(lhs.first, lhs.second) < std::tie(rhs.first, rhs.second);
  });

  spec->eigenvalues_.reserve(total_modes);
  spec->mode_indices_.reserve(total_modes);
  for (const auto& [lambda, idx] : modes) {
    spec->eigenvalues_.push_back(lambda);
    spec->mode_indices_.push_back(idx);
  }

  // Tensor weights and dense basis table, node index row-major over axes.
  spec->weights_.assign(total_nodes, 1.0);
  spec->node_coords_.assign(total_nodes, {0.0, 0.0, 0.0});
  std::vector<std::size_t> strides(static_cast<std::size_t>(dim), 1);
  for (int a = dim - 2; a >= 0; --a)
    strides[static_cast<std::size_t>(a)] =
        strides[static_cast<std::size_t>(a + 1)] * ax_nodes[static_cast<std::size_t>(a + 1)].size();
  for (std::size_t q = 0; q < total_nodes; ++q) {
    std::size_t rem = q;
    for (int a = 0; a < dim; ++a) {
      const std::size_t qa = rem / strides[static_cast<std::size_t>(a)];
      rem %= strides[static_cast<std::size_t>(a)];
      spec->weights_[q] *= ax_weights[static_cast<std::size_t>(a)][qa];
      spec->node_coords_[q][static_cast<std::size_t>(a)] = ax_nodes[static_cast<std::size_t>(a)][qa];
    }
  }
  spec->basis_.assign(total_modes * total_nodes, 1.0);
  for (std::size_t i = 0; i < total_modes; ++i) {
    const auto& idx = spec->mode_indices_[i];
    double* row = spec->basis_.data() + i * total_nodes;
    for (std::size_t q = 0; q < total_nodes; ++q) {
      std::size_t rem = q;
      double v = 1.0;
      for (int a = 0; a < dim; ++a) {
        const std::size_t qa = rem / strides[static_cast<std::size_t>(a)];
        rem %= strides[static_cast<std::size_t>(a)];
        v *= phi[static_cast<std::size_t>(a)][static_cast<std::size_t>(idx[static_cast<std::size_t>(a)] - 1)][qa];
      }
      row[q] = v;
    }
  }
  return spec;
}

SpectralField::SpectralField(SpectrumPtr s)
    : spectrum(std::move(s)), coeffs(spectrum ? static_cast<std::size_t>(spectrum->mode_count()) : 0, 0.0) {}

SpectralField::SpectralField(SpectrumPtr s, std::vector<double> c)
    : spectrum(std::move(s)), coeffs(std::move(c)) {
  if (!spectrum || static_cast<int>(coeffs.size()) != spectrum->mode_count())
    throw std::invalid_argument("coefficient count must match the spectrum");
}

bool SpectralField::finite() const {
  for (double c : coeffs)
    if (!std::isfinite(c)) return false;
  return true;
}

SpectralField zero_field(const SpectrumPtr& s) { return SpectralField(s); }

namespace {
void require_same_spectrum(const SpectralField& a, const SpectralField& b) {
  if (a.spectrum != b.spectrum)
    throw std::invalid_argument("fields live on different spectra");
}
}  // namespace

SpectralField operator+(const SpectralField& a, const SpectralField& b) {
  require_same_spectrum(a, b);
  SpectralField out = a;
  for (std::size_t i = 0; i < out.coeffs.size(); ++i) out.coeffs[i] += b.coeffs[i];
  return out;
}

SpectralField operator-(const SpectralField& a, const SpectralField& b) {
  require_same_spectrum(a, b);
  SpectralField out = a;
  for (std::size_t i = 0; i < out.coeffs.size(); ++i) out.coeffs[i] -= b.coeffs[i];
  return out;
}

SpectralField operator*(double c, const SpectralField& a) {
  SpectralField out = a;
  for (double& v : out.coeffs) v *= c;
  return out;
}

void add_scaled(SpectralField& a, double c, const SpectralField& b) {
  require_same_spectrum(a, b);
  for (std::size_t i = 0; i < a.coeffs.size(); ++i) a.coeffs[i] += c * b.coeffs[i];
}

double hs_norm(const SpectralField& u, double s) {
  if (!u.finite()) throw InvalidState("hs_norm: non-finite coefficients");
  double acc = 0.0;
  if (s == 0.0) {
    for (double c : u.coeffs) acc += c * c;
  } else {
    for (std::size_t i = 0; i < u.coeffs.size(); ++i) {
      const double c = u.coeffs[i];
      acc += std::pow(u.spectrum->eigenvalue(static_cast<int>(i)), s) * c * c;
    }
  }
  return std::sqrt(acc);
}

double ht_norm_sq(const SpectralField& u, double eps_value) {
  if (eps_value < 0.0) throw std::invalid_argument("ht_norm_sq: eps_value must be nonnegative");
  if (!u.finite()) throw InvalidState("ht_norm_sq: non-finite coefficients");
  double acc = 0.0;
  for (std::size_t i = 0; i < u.coeffs.size(); ++i) {
    const double c = u.coeffs[i];
    acc += (1.0 + eps_value * u.spectrum->eigenvalue(static_cast<int>(i))) * c * c;
  }
  return acc;
}

double ht_dist_sq(const SpectralField& a, const SpectralField& b, double eps_value) {
  require_same_spectrum(a, b);
  if (eps_value < 0.0) throw std::invalid_argument("ht_dist_sq: eps_value must be nonnegative");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.coeffs.size(); ++i) {
    const double d = a.coeffs[i] - b.coeffs[i];
    acc += (1.0 + eps_value * a.spectrum->eigenvalue(static_cast<int>(i))) * d * d;
  }
  return acc;
}

std::vector<double> evaluate_on_grid(const SpectralField& u) {
  const auto& spec = *u.spectrum;
  const std::size_t nq = static_cast<std::size_t>(spec.node_count());
  std::vector<double> vals(nq, 0.0);
  for (int i = 0; i < spec.mode_count(); ++i) {
    const double c = u.coeffs[static_cast<std::size_t>(i)];
    if (c == 0.0) continue;
    const auto row = spec.basis_row(i);
    for (std::size_t q = 0; q < nq; ++q) vals[q] += c * row[q];
  }
  return vals;
}

SpectralField project(std::span<const double> samples, const SpectrumPtr& spectrum) {
  if (static_cast<int>(samples.size()) != spectrum->node_count())
    throw std::invalid_argument("sample count does not match the quadrature grid");
  SpectralField out(spectrum);
  const auto w = spectrum->quadrature_weights();
  std::vector<double> weighted(samples.size());
  for (std::size_t q = 0; q < samples.size(); ++q) weighted[q] = w[q] * samples[q];
  for (int i = 0; i < spectrum->mode_count(); ++i) {
    const auto row = spectrum->basis_row(i);
    double acc = 0.0;
    for (std::size_t q = 0; q < weighted.size(); ++q) acc += row[q] * weighted[q];
    out.coeffs[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

}  // namespace nldiff
