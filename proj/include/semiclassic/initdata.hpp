#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "semiclassic/potentials.hpp"
#include "semiclassic/residuals_metrics.hpp"
#include "semiclassic/states.hpp"
#include "semiclassic/test_functions.hpp"

namespace semiclassic {

// ---- Hermite averages (n = 1) ----------------------------------------------

// Columns j = 0..j_max of the eps-scaled Hermite functions
//   psi_j(x) = (pi eps)^{-1/4} (2^j j!)^{-1/2} H_j(x/sqrt eps) e^{-x^2/(2 eps)}
// by the normalised three-term recurrence, with a per-point exponent so
// that far tails underflow gracefully instead of poisoning the recurrence.
Eigen::MatrixXd hermite_functions(const SpaceGrid& grid, double epsilon, int j_max);

struct HermiteSpec {
  enum class Rule { uniform_band, smoothed_band, single };
  double epsilon = 0.1;
  Rule rule = Rule::uniform_band;
  double center = 1.0;  // a: the band sits at eps (2j + 1) ~ a
  double width = 0.1;   // w
  int single_index = 0;
  double truncation = 1e-12;  // smoothed band: drop weights below this fraction of the max
};

struct HermiteBuild {
  MixedState state;
  std::vector<int> indices;      // j carrying the weights, same order as the modes
  double weight_constant = 0.0;  // max mu_j / eps
  double energy_moment = 0.0;    // eps^2 sum mu_j j^2
  double turning_point = 0.0;    // sqrt(eps (2 j_max + 1))
};

// rejects when the outermost turning point passes 0.8 L or the Gram
// defect of the sampled functions exceeds 1e-8
HermiteBuild build_hermite(const HermiteSpec& spec, const SpaceGrid& grid);

// Husimi mass of the mixture inside {|x^2 + p^2 - a| < half_width}, exact:
// the Husimi function of psi_j is a Poisson profile in r^2 / (2 eps).
double hermite_annulus_mass_exact(const HermiteBuild& build, double a, double half_width);

// ---- Toeplitz averages -----------------------------------------------------

enum class WindowProfile {
  gaussian,      // pi^{-1/4} e^{-u^2/2}
  raised_cosine  // sqrt(32/35) cos^4(pi u / 4) on |u| < 2
};

double window_value(WindowProfile w, double u);
// ||phi||_{H^2} by quadrature
double window_h2_norm(WindowProfile w);
std::string to_string(WindowProfile w);
WindowProfile window_from_string(const std::string& name);

// Unit-mass phase-space densities chi(q, w) used as Toeplitz symbols and
// as analytic targets.
struct SymbolSpec {
  enum class Kind {
    gaussian,    // N((q0, w0), s^2 I)
    cell,        // uniform on the cube of side `side` around (q0, w0)
    heavy_tail,  // ~ (1 + |z - z0|^2 / s^2)^{-(n + 3/2)}: finite mass, divergent fourth moment
    annulus      // n = 1: uniform on {|q^2 + w^2 - a| < side/2}, a = s
  };
  Kind kind = Kind::gaussian;
  int dim = 1;
  Eigen::VectorXd q0;  // empty: origin
  Eigen::VectorXd w0;
  double s = 0.5;
  double side = 0.5;

  double operator()(const Eigen::VectorXd& q, const Eigen::VectorXd& w) const;
  double sup() const;
  // cube [c - r, c + r]^{2n} outside which chi is below 1e-16 sup (heavy_tail: a cutoff)
  double support_radius() const;
  Eigen::VectorXd q_center() const;
  Eigen::VectorXd w_center() const;
};

std::string to_string(SymbolSpec::Kind k);
SymbolSpec::Kind symbol_kind_from_string(const std::string& name);

struct ToeplitzSpec {
  double epsilon = 0.25;
  WindowProfile window = WindowProfile::gaussian;
  double alpha = 0.5;            // sigma = eps^alpha
  SymbolSpec chi;
  double spacing_factor = 0.5;   // (w, q) lattice spacing = factor * sqrt(eps)
  double trace_tolerance = 1e-6;
  double truncation = 1e-10;     // spectral tail dropped after diagonalisation
};

// sigma^{-n/2} phi((x - q)/sigma) e^{i w.x / eps}, unit norm in L^2(R^n)
ComplexField toeplitz_packet(const SpaceGrid& grid, double epsilon, double alpha, WindowProfile window,
                             const Eigen::VectorXd& w, const Eigen::VectorXd& q);

struct ToeplitzBuild {
  MixedState state;
  Index lattice_points = 0;  // R
  double spacing = 0.0;
  double raw_trace = 0.0;
  double top_eigenvalue = 0.0;
  double eigenvalue_bound = 0.0;  // ||chi||_inf (2 pi eps)^n
};

// Throws ResolutionError when the discrete trace misses 1 by more than
// trace_tolerance (lattice too coarse or chi cut off by the box).
ToeplitzBuild build_toeplitz(const ToeplitzSpec& spec, const SpaceGrid& grid);

// (1/eps^n) sum_cells |psi_{w,q}><psi_{w,q}| v * cell volume, cells on the
// lattice of spacing h covering |q_a| <= q_half, |w_a| <= w_half.
ComplexField resolution_of_identity_apply(const SpaceGrid& grid, double epsilon, double alpha, WindowProfile window,
                                          const ComplexField& v, double spacing, double q_half, double w_half);

// chi sampled onto a lattice; the stored mass is the lattice quadrature
PhaseField sample_symbol(const SymbolSpec& chi, const PhaseLattice& lattice, double epsilon = 0.0);

// the fourth-moment-plus-inverse-square-distance integral of chi over
// growing cubes: bounded growth means a finite integral
struct SymbolMomentReport {
  std::vector<double> radii;
  std::vector<double> partial_moments;
  double moment = 0.0;          // value on the largest cube
  bool distance_term_used = false;
  bool finite = true;
  std::string note;
};
SymbolMomentReport symbol_moment_check(const SymbolSpec& chi, const PotentialSpec* potential = nullptr);

// ---- assumption validators --------------------------------------------------

struct AssumptionOptions {
  std::vector<double> radii{1.0, 2.0, 4.0, 6.0};
  double tightness_tail = 1e-3;  // Husimi mass outside the largest cube
  double disop_limit = 50.0;     // C admitted for the operator bound
  double h2_limit = 1e6;
  std::optional<SymbolSpec> target;  // analytic omega-bar for the d_P distance
  DictionaryOptions dictionary;
};

struct AssumptionReport {
  double h2sum = 0.0;
  double disop_constant = 0.0;
  double weight_constant = 0.0;  // max mu_j / eps^n
  std::vector<TightnessRow> tightness;
  double target_distance = std::numeric_limits<double>::quiet_NaN();
  double husimi_mass = 0.0;
  bool h2_pass = false;
  bool disop_pass = false;
  bool tightness_pass = false;
  bool target_pass = true;  // no target: vacuous
  bool pass = false;
  std::vector<std::string> notes;
};

AssumptionReport validate_assumptions(const MixedState& state, const PotentialSpec& potential,
                                      const AssumptionOptions& options = {});

}  // namespace semiclassic
