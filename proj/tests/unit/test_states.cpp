#include <doctest.h>

#include "semiclassic/states.hpp"

using namespace semiclassic;

namespace {
Eigen::VectorXd v1(double a) { return Eigen::VectorXd::Constant(1, a); }
}

TEST_CASE("coherent state is normalised and centred") {
  const double eps = 0.25;
  const SpaceGrid g(1, 8.0, 256);
  const MixedState s = pure_state(g, eps, CoherentState{v1(0.7), v1(-0.4), eps}.sample(g));
  const RealField rho = kernel_diagonal(s);
  double mass = 0, mean = 0, var = 0;
  for (Index i = 0; i < g.size(); ++i) {
    const double x = g.coordinate(int(i));
    mass += rho[i] * g.spacing();
    mean += x * rho[i] * g.spacing();
  }
  for (Index i = 0; i < g.size(); ++i) var += std::pow(g.coordinate(int(i)) - mean, 2) * rho[i] * g.spacing();
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mean == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(var == doctest::Approx(eps / 2).epsilon(1e-10));
}

TEST_CASE("harmonic energy of a coherent state") {
  // <H> = (p0^2 + x0^2)/2 + eps/2 for omega = 1
  const double eps = 0.1;
  const SpaceGrid g(1, 8.0, 512);
  const MixedState s = pure_state(g, eps, CoherentState{v1(1.0), v1(0.5), eps}.sample(g));
  PotentialSpec h;
  h.rough = Harmonic{1.0, Eigen::VectorXd::Zero(1)};
  CHECK(observable_expectation(s, h, Observable::hamiltonian) == doctest::Approx(0.625 + 0.05).epsilon(1e-10));
  CHECK(observable_expectation(s, h, Observable::kinetic) == doctest::Approx(0.125 + 0.025).epsilon(1e-10));
}

TEST_CASE("mixture weights and trace") {
  const double eps = 0.25;
  const SpaceGrid g(1, 8.0, 256);
  const MixedState a = pure_state(g, eps, CoherentState{v1(-1.5), v1(0), eps}.sample(g));
  const MixedState b = pure_state(g, eps, CoherentState{v1(1.5), v1(0), eps}.sample(g));
  const MixedState m = mixture(a, b, 0.3);
  CHECK(m.weights().sum() == doctest::Approx(1.0));
  CHECK(m.orthonormality_defect() < 1e-10);
  const TraceReport t = trace(m);
  CHECK(t.diagonal_quadrature == doctest::Approx(1.0).epsilon(1e-10));
  // nearly orthogonal packets: weights close to 0.3 and 0.7
  CHECK(m.weights().maxCoeff() == doctest::Approx(0.7).epsilon(1e-3));
}

TEST_CASE("husimi value of a coherent state") {
  // (2 pi eps)^{-1} exp(-(|dx|^2 + |dp|^2)/(2 eps))
  const double eps = 0.2;
  const SpaceGrid g(1, 8.0, 512);
  const MixedState s = pure_state(g, eps, CoherentState{v1(0.3), v1(0.1), eps}.sample(g));
  const double e = coherent_matrix_element(s, v1(0.5), v1(-0.1));
  CHECK(e == doctest::Approx(std::exp(-(0.04 + 0.04) / (2 * eps)) / (2 * kPi * eps)).epsilon(1e-10));
}

TEST_CASE("invalid weights are rejected") {
  const SpaceGrid g(1, 8.0, 64);
  Eigen::MatrixXcd modes = Eigen::MatrixXcd::Zero(g.size(), 1);
  modes(10, 0) = 1.0 / std::sqrt(g.spacing());
  CHECK_THROWS(MixedState(g, 0.1, Eigen::VectorXd::Constant(1, -1.0), modes));
}
