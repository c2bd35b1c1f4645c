#pragma once

#include <array>
#include <memory>
#include <span>
#include <vector>

namespace nldiff {

/// Rectangular domain with homogeneous Dirichlet boundary.
struct Domain {
  enum class Kind { interval, box };

  Kind kind = Kind::interval;
  std::vector<double> extents;  // per-axis lengths, all > 0

  int dimension() const { return static_cast<int>(extents.size()); }
  double volume() const;

  static Domain interval(double length);
  static Domain box(std::vector<double> extents);
};

/// Truncated Dirichlet-Laplacian eigenbasis plus a quadrature rule sharp
/// enough to integrate products of four basis functions.
///
/// Eigenpairs on a box are tensor products of per-axis sine modes:
///   lambda = sum_a (k_a pi / l_a)^2,  phi_k(x) = prod_a sqrt(2/l_a) sin(k_a pi x_a / l_a).
/// Modes are stored sorted by eigenvalue (ties broken by index tuple), and the
/// basis is L2-orthonormal, so every norm in use is a diagonal coefficient sum.
class Spectrum {
public:
  const Domain& domain() const { return domain_; }
  int mode_count() const { return static_cast<int>(eigenvalues_.size()); }
  double eigenvalue(int i) const { return eigenvalues_[static_cast<std::size_t>(i)]; }
  std::span<const double> eigenvalues() const { return eigenvalues_; }
  double lambda1() const { return eigenvalues_.front(); }
  const std::vector<std::array<int, 3>>& mode_indices() const { return mode_indices_; }

  int node_count() const { return static_cast<int>(weights_.size()); }
  std::span<const double> quadrature_weights() const { return weights_; }
  /// Coordinates of quadrature node `node` (unused axes are zero).
  const std::array<double, 3>& node_coords(int node) const {
    return node_coords_[static_cast<std::size_t>(node)];
  }
  /// Value of basis function `mode` at quadrature node `node`.
  double basis_value(int mode, int node) const {
    return basis_[static_cast<std::size_t>(mode) * weights_.size() + static_cast<std::size_t>(node)];
  }
  std::span<const double> basis_row(int mode) const {
    return {basis_.data() + static_cast<std::size_t>(mode) * weights_.size(), weights_.size()};
  }

  double volume() const { return domain_.volume(); }

private:
  friend std::shared_ptr<const Spectrum> build_spectrum(const Domain&, const std::vector<int>&);

  Domain domain_;
  std::vector<double> eigenvalues_;
  std::vector<std::array<int, 3>> mode_indices_;
  std::vector<double> weights_;  // quadrature weights, flattened tensor grid
  std::vector<std::array<double, 3>> node_coords_;
  std::vector<double> basis_;    // mode-major [mode_count x node_count]
};

using SpectrumPtr = std::shared_ptr<const Spectrum>;

SpectrumPtr build_spectrum(const Domain& domain, const std::vector<int>& modes_per_axis);

/// A function represented by coefficients against the orthonormal eigenbasis.
struct SpectralField {
  SpectrumPtr spectrum;
  std::vector<double> coeffs;

  SpectralField() = default;
  explicit SpectralField(SpectrumPtr s);
  SpectralField(SpectrumPtr s, std::vector<double> c);

  int size() const { return static_cast<int>(coeffs.size()); }
  bool finite() const;
};

SpectralField zero_field(const SpectrumPtr& s);

// Linear field arithmetic (same spectrum required).
SpectralField operator+(const SpectralField& a, const SpectralField& b);
SpectralField operator-(const SpectralField& a, const SpectralField& b);
SpectralField operator*(double c, const SpectralField& a);
void add_scaled(SpectralField& a, double c, const SpectralField& b);  // a += c*b

/// sqrt(sum lambda_k^s coeffs_k^2); s = 0 gives the L2 norm, s = 1 the gradient norm.
double hs_norm(const SpectralField& u, double s);

/// sum (1 + eps * lambda_k) coeffs_k^2, the squared time-dependent energy norm.
double ht_norm_sq(const SpectralField& u, double eps_value);

/// Squared energy norm of the difference a - b without forming it.
double ht_dist_sq(const SpectralField& a, const SpectralField& b, double eps_value);

/// Point values of u on the quadrature grid.
std::vector<double> evaluate_on_grid(const SpectralField& u);

/// Quadrature projection of grid samples back onto the basis.
SpectralField project(std::span<const double> samples, const SpectrumPtr& spectrum);

}  // namespace nldiff
