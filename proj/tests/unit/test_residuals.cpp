#include <doctest.h>

#include "semiclassic/quantum_dynamics.hpp"
#include "semiclassic/residuals_metrics.hpp"

using namespace semiclassic;

namespace {
Eigen::VectorXd v1(double a) { return Eigen::VectorXd::Constant(1, a); }
}

TEST_CASE("fit_order recovers a power law") {
  const std::vector<double> e{0.4, 0.2, 0.1, 0.05};
  std::vector<double> v;
  for (double x : e) v.push_back(3.0 * std::pow(x, 1.7));
  CHECK(fit_order(e, v) == doctest::Approx(1.7).epsilon(1e-12));
}

TEST_CASE("remainder error term vanishes for a quadratic potential") {
  const double eps = 0.2;
  const SpaceGrid g(1, 8.0, 256);
  const MixedState s = pure_state(g, eps, CoherentState{v1(0.5), v1(0.4), eps}.sample(g));
  PotentialSpec h;
  h.rough = Harmonic{1.0, Eigen::VectorXd::Zero(1)};
  Factor f;
  const TestFunction phi = make_test_function(1, {f, f});
  CHECK(std::abs(error_term_paired(s, h, phi, ErrorVariant::remainder)) < 1e-10);
  // the full variant is the force term <W, grad U . grad_p phi>, not zero
  CHECK(std::abs(error_term_paired(s, h, phi, ErrorVariant::full)) > 1e-3);
}

TEST_CASE("wigner pairing of a coherent state with a gaussian") {
  // <W, e^{-x^2/2} e^{-p^2/2}> = exp(-x0^2/(2 + eps) - p0^2/(2 + eps)) / (1 + eps/2)
  const double eps = 0.25, x0 = 0.6, p0 = -0.3;
  const SpaceGrid g(1, 8.0, 512);
  const MixedState s = pure_state(g, eps, CoherentState{v1(x0), v1(p0), eps}.sample(g));
  Factor f;
  const TestFunction phi = make_test_function(1, {f, f});
  const double exact = std::exp(-(x0 * x0 + p0 * p0) / (2 + eps)) / (1 + eps / 2);
  CHECK(wigner_pairing(s, phi) == doctest::Approx(exact).epsilon(1e-10));
  // the Husimi pairing smooths once more: eps -> 2 eps
  const double exact_h = std::exp(-(x0 * x0 + p0 * p0) / (2 + 2 * eps)) / (1 + eps);
  CHECK(husimi_pairing(s, phi) == doctest::Approx(exact_h).epsilon(1e-10));
}

TEST_CASE("harmonic wigner residual sits at the discretisation floor") {
  const double eps = 0.25;
  const SpaceGrid g(1, 8.0, 256);
  PotentialSpec h;
  h.rough = Harmonic{1.0, Eigen::VectorXd::Zero(1)};
  const MixedState s0 = pure_state(g, eps, CoherentState{v1(1.0), v1(0.0), eps}.sample(g));
  PropagationPlan p;
  p.dt = 1e-3;
  p.horizon = 1.0;
  for (int k = 1; k <= 100; ++k) p.record_times.push_back(0.01 * k);
  p.potential = h;
  Factor fx, fp;
  fp.kind = Factor::Kind::sin;
  fp.k = 1.0;
  const ResidualReport r = wigner_residual(propagate(s0, p), h, make_test_function(1, {fx, fp}));
  CHECK(r.residual < 1e-6);
  CHECK(r.scale > 1e-2);
}

TEST_CASE("fourier moment of a gaussian factor pair") {
  // \int |y| sqrt(2 pi) e^{-y^2/2} dy
  Factor f;
  const TestFunction phi = make_test_function(1, {f, f});
  CHECK(fourier_moment_c1(phi) == doctest::Approx(2 * std::sqrt(2 * kPi)).epsilon(1e-6));
}

TEST_CASE("singular decay moment of a far packet") {
  const double eps = 0.25;
  const SpaceGrid g(3, 5.0, 32);
  PotentialSpec u;
  u.dim = 3;
  u.points.push_back({1.0, Eigen::Vector3d::Zero()});
  const MixedState s =
      pure_state(g, eps, CoherentState{Eigen::Vector3d(2, 0, 0), Eigen::Vector3d::Zero(), eps}.sample(g));
  const SingularDecay d = singular_decay_moment(s, u);
  // Husimi momentum marginal is gaussian with variance eps per axis: E|p|^4 = 15 eps^2
  CHECK(d.p4_moment == doctest::Approx(15 * eps * eps).epsilon(1e-4));
  CHECK(d.distance_moment == doctest::Approx(0.25).epsilon(0.1));
}
