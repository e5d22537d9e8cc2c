#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "semiclassic/potentials.hpp"
#include "semiclassic/quantum_dynamics.hpp"
#include "semiclassic/states.hpp"
#include "semiclassic/test_functions.hpp"

namespace semiclassic {

// Pairings are evaluated in the off-diagonal representation
//   (2 pi)^{-n} \int\int w(x, y) rho(x + eps y/2, x - eps y/2) dx dy
// with x on the grid and eps y/2 on the half-spaced lattice. Terms whose
// endpoints leave the box are dropped (zero extension, no wrap-around).
struct PairingOptions {
  int stride = 0;              // 1: half-grid shifts, 2: whole-grid shifts, 0: 2 iff U_s present
  double tail = 1e-8;          // relative |F_p phi| level that sets the y cut-off
  double significance = 1e-20; // rho(a,a) below this fraction of its max is skipped
};

enum class ErrorVariant {
  full,      // E'_eps: plain difference quotient
  remainder  // E_eps: difference quotient minus grad U(x).y
};

Complex error_term_paired(const MixedState& state, const PotentialSpec& potential, const TestFunction& phi,
                          ErrorVariant variant, const PairingOptions& options = {});

// <W rho, phi> and <W rho, p.grad_x phi>
double wigner_pairing(const MixedState& state, const TestFunction& phi, const PairingOptions& options = {});
double wigner_transport_pairing(const MixedState& state, const TestFunction& phi,
                                const PairingOptions& options = {});
// <W~ rho, phi> = <W rho, phi * G_eps>
double husimi_pairing(const MixedState& state, const TestFunction& phi, const PairingOptions& options = {});
double husimi_transport_pairing(const MixedState& state, const TestFunction& phi,
                                const PairingOptions& options = {});
// pairing of the divergence correction of the Husimi equation with phi,
// i.e. -(eps/2) sum_a <W~ rho, d_{x_a} d_{p_a} phi>
double husimi_correction_pairing(const MixedState& state, const TestFunction& phi,
                                 const PairingOptions& options = {});

// smooth bump theta(t) supported on [t0, t1]
struct TimeWindow {
  double t0 = 0.0;
  double t1 = 0.0;  // t1 <= t0: use the ends of the series
  double value(double t) const;
  double derivative(double t) const;
};

struct ResidualReport {
  double residual = 0.0;        // |time + transport + error (+ correction)|
  double time_term = 0.0;       // \int theta' <W_t, phi> dt
  double transport_term = 0.0;  // \int theta <W_t, p.grad phi> dt
  double error_term = 0.0;      // \int theta <E', phi> dt (real part)
  double correction_term = 0.0; // Husimi only
  double scale = 0.0;           // max of the absolute terms, for relative reading
};

ResidualReport wigner_residual(const std::vector<TimedState>& series, const PotentialSpec& potential,
                               const TestFunction& phi, TimeWindow window = {},
                               const PairingOptions& options = {});
ResidualReport husimi_residual(const std::vector<TimedState>& series, const PotentialSpec& potential,
                               const TestFunction& phi, TimeWindow window = {},
                               const PairingOptions& options = {});
// worst case over the first `count` dictionary functions
ResidualReport wigner_residual(const std::vector<TimedState>& series, const PotentialSpec& potential,
                               const TestFunctionDictionary& dict, int count = 8);

// least-squares slope of log|v| against log eps
double fit_order(const std::vector<double>& eps, const std::vector<double>& values);

struct BoundEntry {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  std::vector<std::pair<std::string, double>> terms;
  bool pass = false;
};

struct BoundReport {
  std::vector<BoundEntry> entries;
  bool pass = true;
  void add(BoundEntry e) {
    pass = pass && e.pass;
    entries.push_back(std::move(e));
  }
};

// \int |y| sup_x |F_p phi|(x, y) dy, numerically on a y grid
double fourier_moment_c1(const TestFunction& phi);
// the transport constant of the weak Lipschitz estimate, at eps = 1
double fourier_moment_c2(const TestFunction& phi);

// sup_t |d/dt <W~_t, phi>| by centred differences against
//   ||grad U_b||/(2pi)^n C1phi + C_* C1 C1phi + C2phi/(2pi)^n.
// c1 is the a-priori bound on \int U_s^2 rho (ignored without U_s).
BoundEntry time_derivative_bound(const std::vector<TimedState>& series, const PotentialSpec& potential,
                                 const TestFunction& phi, double c1 = 0.0, const PairingOptions& options = {});

// The four-term a-priori estimate for E'(U_b) paired with phi1(x) phi2(p),
// n = 1. disop_constant is C with rho <= C eps^n. One entry per lambda,
// LHS taken as the max over the series.
BoundReport apriori_bound_check(const std::vector<TimedState>& series, const PotentialSpec& potential,
                                const Factor& phi1, const Factor& phi2, const std::vector<double>& lambdas,
                                double disop_constant, const PairingOptions& options = {});

// |<E'(U_s), phi_eps>| <= C_* (sum |y| sup|F_p phi_eps| dy) \int U_s^2 rho(x,x)
// for a single point charge; both sides on the whole-grid shift lattice.
BoundEntry coulomb_pairing_bound(const MixedState& state, const PotentialSpec& potential, const TestFunction& phi,
                                 const PairingOptions& options = {});

struct TightnessRow {
  double radius = 0.0;
  double x_tail = 0.0;  // x-marginal mass outside the cube of half-width R
  double p_tail = 0.0;
  double half_sum = 0.0;
  double p_bound = std::numeric_limits<double>::quiet_NaN();  // (C2 + n/2) / R^2
};

// Husimi marginals of the state; c2 enables the momentum tail bound
std::vector<TightnessRow> tightness_profile(const MixedState& state, const std::vector<double>& radii,
                                            double c2 = std::numeric_limits<double>::quiet_NaN());
std::vector<TightnessRow> tightness_profile(const PhaseField& field, const std::vector<double>& radii);

struct SingularDecay {
  double p4_moment = 0.0;
  double distance_moment = 0.0;  // \int dist(x,S)^{-2}; 0 when S is empty
  double total() const { return p4_moment + distance_moment; }
};
// against the Husimi measure, via its marginals (the integrand separates)
SingularDecay singular_decay_moment(const MixedState& state, const PotentialSpec& potential);
SingularDecay singular_decay_moment(const PhaseField& field, const PotentialSpec& potential);

}  // namespace semiclassic
