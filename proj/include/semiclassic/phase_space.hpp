#pragma once

#include <functional>
#include <string>
#include <vector>

#include "semiclassic/gridcore.hpp"
#include "semiclassic/potentials.hpp"
#include "semiclassic/states.hpp"

namespace semiclassic {

struct WignerDiagnostics {
  double max_imaginary = 0.0;  // before the real part is taken
};

// sqrt(mu_j) phi_j trigonometrically interpolated onto the half-spaced
// lattice x_0 + m dx/2, m in [0, 2N)^n. Rows are modes, columns points, so
// rho(a, b) = col(b).dot(col(a)).
Eigen::MatrixXcd half_grid_modes(const MixedState& state);

// W(x,p) = (2 pi)^{-n} \int rho(x + eps y/2, x - eps y/2) e^{-i p.y} dy on
// wigner_lattice(grid, eps). Refuses when dx > resolution_factor sqrt(eps).
PhaseField wigner(const MixedState& state, WignerDiagnostics* diagnostics = nullptr,
                  double resolution_factor = 0.5);

// W * G_eps^{(2n)} by Fourier multiplication on the lattice of `w`
PhaseField husimi_via_convolution(const PhaseField& w);

// (2 pi eps)^{-n} sum_j mu_j |<phi_unit_{x,p}, phi_j>|^2 on the Wigner
// lattice, one shifted-Gaussian filter per momentum row.
PhaseField husimi_via_overlap(const MixedState& state);

// Husimi values at the points of an arbitrary lattice (n = 1), by direct
// coherent overlaps restricted to +-8 sqrt(eps) around each x.
PhaseField husimi_on_lattice(const MixedState& state, const PhaseLattice& lattice);

// max of coherent_matrix_element over a probe lattice around the state
double husimi_sup_sampled(const MixedState& state, int per_axis = 7, double span = 3.0);

enum class Marginal { position, momentum };
// integrate out the other variable
RealField marginal(const PhaseField& field, Marginal which);

// (2 pi eps)^{-n} sum mu_j |hat phi_j(p/eps)|^2 on the ascending Wigner p lattice
RealField momentum_density(const MixedState& state);
// Husimi marginals: rho(x,x) * G_eps and momentum_density * G_eps
RealField smoothed_position_density(const MixedState& state);
RealField smoothed_momentum_density(const MixedState& state);

struct WeylSymbol {
  PhaseLattice lattice;
  ComplexField values;
  std::string origin;
  double epsilon = 1.0;
};

WeylSymbol weyl_multiplication(const PhaseLattice& lattice, double epsilon,
                               const std::function<double(const Eigen::VectorXd&)>& v);
WeylSymbol weyl_negative_laplacian(const PhaseLattice& lattice, double epsilon);
WeylSymbol weyl_hamiltonian(const PhaseLattice& lattice, double epsilon, const PotentialSpec& potential);
// (2 pi eps)^n W rho
WeylSymbol weyl_finite_rank(const MixedState& state);
WeylSymbol weyl_identity(const PhaseLattice& lattice, double epsilon);

// f # g truncated at `order` <= 2, derivatives by 8th-order finite
// differences (exact for polynomials of degree <= 8)
WeylSymbol moyal_sharp(const WeylSymbol& f, const WeylSymbol& g, int order = 2);

// \int sigma W rho dx dp on the symbol's lattice (must be the Wigner lattice)
double trace_pairing(const WeylSymbol& symbol, const MixedState& state);

// Independent check of the Laplacian coefficient c in
//   sigma((-eps^2 Lap) o U) = |p|^2 U - i eps p.grad U + c eps^2 Lap U.
// Dense spectral matrices on a periodic grid, U = cos x, paired with
// coherent states whose Wigner functions are known in closed form.
struct CompositionOracle {
  double laplacian_coefficient = 0.0;
  double first_order_coefficient = 0.0;  // multiplies -i eps p.grad U; expected 1
  double worst_spread = 0.0;             // spread of the coefficient over probes
};
CompositionOracle composition_laplacian_coefficient(double epsilon, int points = 64);

struct CvReport {
  int order = 0;
  std::vector<std::pair<std::string, double>> derivative_sups;  // "dx^a dp^b" -> sup
  double max_sup = 0.0;
  double second_bullet_literal = 0.0;    // with -n eps^2 Lap U / 2
  double second_bullet_corrected = 0.0;  // with -eps^2 Lap U / 4
  bool second_bullet_computed = false;
};
CvReport cv_regularity_check(const PhaseField& wigner_field, const PotentialSpec* smooth_potential = nullptr);

}  // namespace semiclassic
