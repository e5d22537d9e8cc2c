#include <doctest.h>

#include "semiclassic/quantum_dynamics.hpp"
#include "semiclassic/residuals_metrics.hpp"

using namespace semiclassic;

namespace {
Eigen::VectorXd v1(double a) { return Eigen::VectorXd::Constant(1, a); }
}

TEST_CASE("free gaussian spreads as the closed form") {
  // |psi_t|^2 is gaussian with variance eps/2 (1 + t^2), centre x0 + p0 t
  const double eps = 0.25, t = 1.0;
  const SpaceGrid g(1, 12.0, 512);
  const MixedState s0 = pure_state(g, eps, CoherentState{v1(-1.0), v1(0.5), eps}.sample(g));
  PropagationPlan p;
  p.horizon = t;
  const auto series = propagate(s0, p);
  const RealField rho = kernel_diagonal(series.back().state);
  const double var = 0.5 * eps * (1 + t * t), mean = -1.0 + 0.5 * t;
  double worst = 0;
  for (Index i = 0; i < g.size(); ++i) {
    const double x = g.coordinate(int(i));
    worst = std::max(worst, std::abs(rho[i] - std::exp(-(x - mean) * (x - mean) / (2 * var)) / std::sqrt(2 * kPi * var)));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("harmonic coherent state follows the classical orbit") {
  const double eps = 0.1;
  const SpaceGrid g(1, 8.0, 512);
  PotentialSpec h;
  h.rough = Harmonic{1.0, Eigen::VectorXd::Zero(1)};
  const MixedState s0 = pure_state(g, eps, CoherentState{v1(1.0), v1(0.0), eps}.sample(g));
  PropagationPlan p;
  p.dt = 1e-3;
  p.horizon = kPi / 2;
  p.potential = h;
  const auto series = propagate(s0, p);
  // a quarter period later the packet sits at (0, -1)
  const double e = coherent_matrix_element(series.back().state, v1(0.0), v1(-1.0));
  CHECK(e * 2 * kPi * eps == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("harmonic energy drift is second order in dt") {
  const double eps = 0.25;
  const SpaceGrid g(1, 8.0, 512);
  PotentialSpec h;
  h.rough = Harmonic{1.0, Eigen::VectorXd::Zero(1)};
  const MixedState s0 = pure_state(g, eps, CoherentState{v1(0.5), v1(0.3), eps}.sample(g));
  std::vector<double> dts, drift;
  for (double dt : {1e-2, 5e-3, 2.5e-3}) {
    PropagationPlan p;
    p.dt = dt;
    p.horizon = 1.0;
    for (int k = 1; k <= 10; ++k) p.record_times.push_back(0.1 * k);
    p.potential = h;
    const ConservationAudit a = conservation_audit(propagate(s0, p), h);
    CHECK(a.trace_drift < 1e-10);
    dts.push_back(dt);
    drift.push_back(a.energy_drift);
  }
  CHECK(drift[0] / drift[1] == doctest::Approx(4.0).epsilon(0.2));
  CHECK(drift[1] / drift[2] == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("plan caps the step at eps/10") {
  const double eps = 0.05;
  const SpaceGrid g(1, 8.0, 512);
  const MixedState s0 = pure_state(g, eps, CoherentState{v1(0.0), v1(0.0), eps}.sample(g));
  PropagationPlan p;
  p.dt = 0.1;
  CHECK(resolve_plan(s0, p).effective_dt <= eps / 10 + 1e-15);
}

TEST_CASE("a state reaching the grid edge is refused") {
  const double eps = 0.25;
  const SpaceGrid g(1, 4.0, 128);
  const MixedState s0 = pure_state(g, eps, CoherentState{v1(1.0), v1(3.0), eps}.sample(g));
  PropagationPlan p;
  p.horizon = 2.0;
  CHECK_THROWS_AS(propagate(s0, p), BoundaryEscapeError);
}
