#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "semiclassic/gridcore.hpp"
#include "semiclassic/potentials.hpp"

namespace semiclassic {

// Spectral decomposition rho = sum_j mu_j |phi_j><phi_j| on a grid.
// modes() holds phi_j as columns, L2-normalised with quadrature weight dx^n.
class MixedState {
 public:
  MixedState() = default;
  MixedState(SpaceGrid grid, double epsilon, Eigen::VectorXd weights, Eigen::MatrixXcd modes,
             double truncated_weight = 0.0);

  const SpaceGrid& grid() const noexcept { return grid_; }
  double epsilon() const noexcept { return epsilon_; }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  const Eigen::MatrixXcd& modes() const noexcept { return modes_; }
  Index rank() const noexcept { return weights_.size(); }
  double truncated_weight() const noexcept { return truncated_weight_; }

  // same weights, evolved basis (the caller guarantees a unitary map)
  MixedState with_modes(Eigen::MatrixXcd modes) const;

  // max |<phi_i, phi_j> - delta_ij|
  double orthonormality_defect() const;

 private:
  struct Unchecked {};
  MixedState(Unchecked, SpaceGrid grid, double epsilon, Eigen::VectorXd weights, Eigen::MatrixXcd modes,
             double truncated_weight);

  SpaceGrid grid_;
  double epsilon_ = 1.0;
  Eigen::VectorXd weights_;
  Eigen::MatrixXcd modes_;
  double truncated_weight_ = 0.0;
};

// The minimal-uncertainty packet centred at (x, p). The phase is
// e^{+i p.y/eps} so that its Wigner and Husimi functions peak at (x, p).
struct CoherentState {
  Eigen::VectorXd x;
  Eigen::VectorXd p;
  double epsilon = 1.0;

  ComplexField sample(const SpaceGrid& grid) const;
};

MixedState pure_state(const SpaceGrid& grid, double epsilon, const ComplexField& psi);

// Diagonalise sum_c a_c |psi_c><psi_c| (psi_c columns, any normalisation).
// Eigenvalues are dropped smallest-first while their total stays below
// truncation_tol of the trace; the rest is renormalised to trace one.
struct ProjectorSum {
  MixedState state;
  double raw_trace = 0.0;  // sum of eigenvalues before renormalisation
  double top_eigenvalue = 0.0;
};
ProjectorSum diagonalize_projector_sum(const SpaceGrid& grid, double epsilon,
                                       const Eigen::VectorXd& coefficients,
                                       const Eigen::MatrixXcd& vectors, double truncation_tol = 1e-8);

// alpha rho_1 + (1 - alpha) rho_2, rediagonalised
MixedState mixture(const MixedState& a, const MixedState& b, double alpha);

struct TraceReport {
  double weight_sum = 0.0;
  double diagonal_quadrature = 0.0;
};
// throws ResolutionError if the two disagree by more than tol
TraceReport trace(const MixedState& state, double tol = 1e-8);

RealField kernel_diagonal(const MixedState& state);

// (2 pi eps)^{-n} sum_j mu_j |<phi_unit_{x,p}, phi_j>|^2, direct quadrature
double coherent_matrix_element(const MixedState& state, const Eigen::VectorXd& x, const Eigen::VectorXd& p);

// H = -eps^2/2 Laplacian + U with a spectral Laplacian
class Hamiltonian {
 public:
  Hamiltonian(const SpaceGrid& grid, double epsilon, const PotentialSpec& potential);

  const SpaceGrid& grid() const noexcept { return grid_; }
  const SampledPotential& potential() const noexcept { return sampled_; }
  ComplexField apply(const ComplexField& psi) const;
  ComplexField kinetic(const ComplexField& psi) const;
  // ||eps grad psi||^2
  double gradient_norm_squared(const ComplexField& psi) const;

 private:
  SpaceGrid grid_;
  double epsilon_;
  SampledPotential sampled_;
  RealField k2_;
};

enum class Observable { kinetic, potential, hamiltonian, hamiltonian_squared };

double observable_expectation(const MixedState& state, const Hamiltonian& h, Observable which);
double observable_expectation(const MixedState& state, const PotentialSpec& potential, Observable which);

struct OperatorBoundReport {
  double constant = 0.0;          // largest eigenvalue / eps^n, from the Gram matrix
  double max_sampled_ratio = 0.0;  // max <psi, rho psi> / eps^n over probes
  int random_probes = 0;
  int coherent_probes = 0;
  bool certified = false;  // no probe exceeded C eps^n + 1e-10
};

OperatorBoundReport certify_operator_bound(const MixedState& state, int random_probes = 100,
                                           int coherent_per_axis = 9, std::uint64_t seed = 12345);

// largest eigenvalue of the J x J Gram representation
double gram_top_eigenvalue(const MixedState& state);

void save_state(const std::filesystem::path& stem, const MixedState& state);
MixedState load_state(const std::filesystem::path& stem);

}  // namespace semiclassic
