#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>
#include <string>

#include <Eigen/Core>

#include "semiclassic/errors.hpp"

namespace semiclassic {

using Index = Eigen::Index;
using Complex = std::complex<double>;
using RealField = Eigen::ArrayXd;
using ComplexField = Eigen::ArrayXcd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr int kMaxDim = 6;
using MultiIndex = std::array<int, kMaxDim>;

// Cell-centred symmetric grid: x_i = -L + (i + 1/2) dx, dx = 2L/N. Flat
// indices are row-major with axis 0 slowest. The origin is never a node.
class SpaceGrid {
 public:
  SpaceGrid() = default;
  SpaceGrid(int dim, double halfwidth, int points);

  int dim() const noexcept { return dim_; }
  double halfwidth() const noexcept { return halfwidth_; }
  int points() const noexcept { return points_; }
  double spacing() const noexcept { return spacing_; }
  Index size() const noexcept { return size_; }
  double cell_volume() const noexcept { return std::pow(spacing_, dim_); }

  double coordinate(int i) const noexcept { return -halfwidth_ + (i + 0.5) * spacing_; }
  // FFT ordering: 0, 1, ..., N/2-1, -N/2, ..., -1 times pi/L
  double wavenumber(int i) const noexcept {
    return (i < points_ / 2 ? i : i - points_) * kPi / halfwidth_;
  }
  double wavenumber_spacing() const noexcept { return kPi / halfwidth_; }
  double max_wavenumber() const noexcept { return kPi / spacing_; }

  MultiIndex unravel(Index flat) const noexcept;
  Index ravel(const MultiIndex& idx) const noexcept;
  Eigen::VectorXd point(Index flat) const;

  bool operator==(const SpaceGrid& o) const noexcept {
    return dim_ == o.dim_ && points_ == o.points_ && halfwidth_ == o.halfwidth_;
  }

 private:
  int dim_ = 1;
  double halfwidth_ = 1.0;
  int points_ = 2;
  double spacing_ = 1.0;
  Index size_ = 2;
};

// One axis of a phase-space lattice, repeated for every dimension.
struct Axis {
  int count = 0;
  double origin = 0.0;
  double spacing = 1.0;
  double coordinate(int i) const noexcept { return origin + i * spacing; }
  double lower_edge() const noexcept { return origin - 0.5 * spacing; }
  double upper_edge() const noexcept { return origin + (count - 0.5) * spacing; }
};

// Values are stored x-major: flat = ix * p_size + ip, and ix, ip are
// row-major multi-indices over the n axes.
struct PhaseLattice {
  int dim = 1;
  Axis x;
  Axis p;

  Index x_size() const noexcept;
  Index p_size() const noexcept;
  Index size() const noexcept { return x_size() * p_size(); }
  double cell_volume() const noexcept { return std::pow(x.spacing * p.spacing, dim); }
  Eigen::VectorXd x_point(Index ix) const;
  Eigen::VectorXd p_point(Index ip) const;
  bool operator==(const PhaseLattice& o) const noexcept;
};

// x lattice = the space grid, p_j = eps*pi/L*(j - N/2): the lattice a
// discrete Wigner transform lands on.
PhaseLattice wigner_lattice(const SpaceGrid& grid, double epsilon);
// cell-centred lattice on [-xh, xh]^n x [-ph, ph]^n
PhaseLattice cell_lattice(int dim, double x_half, int x_count, double p_half, int p_count);

enum class FieldTag { wigner, husimi, classical, residual };
std::string to_string(FieldTag tag);
FieldTag field_tag_from_string(const std::string& name);

struct PhaseField {
  PhaseLattice lattice;
  RealField values;
  FieldTag tag = FieldTag::residual;
  double epsilon = 0.0;
  double mass = 0.0;  // normalisation recorded at construction

  double quadrature() const { return values.sum() * lattice.cell_volume(); }
  // throws ConsistencyError if quadrature drifted from the recorded mass
  void check_mass(double tol = 1e-10) const;
};

PhaseField make_phase_field(PhaseLattice lattice, RealField values, FieldTag tag, double epsilon);

struct GaussianKernel {
  double epsilon = 1.0;
  int dim = 1;
};

void validate(const GaussianKernel& kernel);

// e^{-|z|^2/eps} / (pi eps)^{m/2}
template <typename Derived>
double gaussian_eval(const GaussianKernel& kernel, const Eigen::MatrixBase<Derived>& z) {
  validate(kernel);
  if (z.size() != kernel.dim) throw ParameterError("gaussian_eval: point dimension mismatch");
  return std::exp(-z.squaredNorm() / kernel.epsilon) /
         std::pow(kPi * kernel.epsilon, 0.5 * kernel.dim);
}

double gaussian_eval(const GaussianKernel& kernel, double z);

template <typename Derived>
double quadrature(const Eigen::ArrayBase<Derived>& values, double cell_volume) {
  return values.sum() * cell_volume;
}

// Nodes and weights for \int e^{-u^2} f(u) du (Golub-Welsch).
struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};
QuadratureRule gauss_hermite_rule(int order);

// Unitary DFT pair on the grid (1/sqrt(N^n) both ways).
ComplexField forward_transform(const ComplexField& field, const SpaceGrid& grid);
ComplexField inverse_transform(const ComplexField& field, const SpaceGrid& grid);

// Samples of the continuous transform \int f(x) e^{-ik.x} dx at the FFT
// wavenumbers, with the cell-centre phase removed.
ComplexField physical_spectrum(const ComplexField& field, const SpaceGrid& grid);

RealField wavenumber_squared(const SpaceGrid& grid);
// k-component along one axis for every flat index
RealField wavenumber_component(const SpaceGrid& grid, int axis);

// Periodic convolution with G_eps^{(n)}, exact Gaussian multiplier e^{-eps|k|^2/4}.
RealField gaussian_smooth(const RealField& field, const SpaceGrid& grid, double epsilon);

// Mass within edge_fraction*2L of any face of the box.
double edge_mass(const RealField& density, const SpaceGrid& grid, double edge_fraction = 1.0 / 16);

// <stem>.json header + <stem>.bin row-major float64 values
void save_phase_field(const std::filesystem::path& stem, const PhaseField& field);
PhaseField load_phase_field(const std::filesystem::path& stem);

}  // namespace semiclassic
