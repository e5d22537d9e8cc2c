#include <doctest.h>

#include <random>

#include "semiclassic/gridcore.hpp"

using namespace semiclassic;

TEST_CASE("gaussian transforms to the gaussian of reciprocal width") {
  const SpaceGrid g(1, 10.0, 256);
  ComplexField f(g.size());
  for (Index i = 0; i < g.size(); ++i) f[i] = std::exp(-0.5 * g.coordinate(int(i)) * g.coordinate(int(i)));
  const ComplexField s = physical_spectrum(f, g);
  double worst = 0;
  for (int i = 0; i < g.points(); ++i) {
    const double k = g.wavenumber(i);
    worst = std::max(worst, std::abs(s[i] - std::sqrt(2 * kPi) * std::exp(-0.5 * k * k)));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("forward then inverse is the identity") {
  const SpaceGrid g(2, 4.0, 32);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  ComplexField f(g.size());
  for (auto& v : f) v = Complex(nd(rng), nd(rng));
  const ComplexField back = inverse_transform(forward_transform(f, g), g);
  CHECK((back - f).abs().maxCoeff() < 1e-12);
}

TEST_CASE("cell-centred coordinates and wavenumber layout") {
  const SpaceGrid g(1, 8.0, 16);
  CHECK(g.spacing() == doctest::Approx(1.0));
  CHECK(g.coordinate(0) == doctest::Approx(-7.5));
  CHECK(g.coordinate(15) == doctest::Approx(7.5));
  CHECK(g.wavenumber(1) == doctest::Approx(kPi / 8));
  CHECK(g.wavenumber(15) == doctest::Approx(-kPi / 8));
  CHECK_THROWS_AS(SpaceGrid(1, 8.0, 12), ParameterError);
}

TEST_CASE("wigner lattice momentum spacing") {
  const SpaceGrid g(1, 8.0, 64);
  const PhaseLattice L = wigner_lattice(g, 0.5);
  CHECK(L.p_point(32)[0] == doctest::Approx(0.0));
  CHECK(L.p_point(33)[0] == doctest::Approx(0.5 * kPi / 8));
}

TEST_CASE("gaussian smoothing keeps mass and widens the variance by eps/2") {
  const SpaceGrid g(1, 10.0, 512);
  RealField f(g.size());
  const double v0 = 0.3;
  for (Index i = 0; i < g.size(); ++i) {
    const double x = g.coordinate(int(i));
    f[i] = std::exp(-x * x / (2 * v0)) / std::sqrt(2 * kPi * v0);
  }
  const double eps = 0.2;
  const RealField s = gaussian_smooth(f, g, eps);
  double mass = 0, var = 0;
  for (Index i = 0; i < g.size(); ++i) {
    mass += s[i] * g.spacing();
    var += s[i] * g.spacing() * std::pow(g.coordinate(int(i)), 2);
  }
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(var == doctest::Approx(v0 + eps / 2).epsilon(1e-10));
}

TEST_CASE("gauss-hermite rule integrates polynomials") {
  const QuadratureRule r = gauss_hermite_rule(10);
  double m0 = 0, m2 = 0, m4 = 0;
  for (Index i = 0; i < r.nodes.size(); ++i) {
    m0 += r.weights[i];
    m2 += r.weights[i] * std::pow(r.nodes[i], 2);
    m4 += r.weights[i] * std::pow(r.nodes[i], 4);
  }
  CHECK(m0 == doctest::Approx(std::sqrt(kPi)));
  CHECK(m2 == doctest::Approx(std::sqrt(kPi) / 2));
  CHECK(m4 == doctest::Approx(3 * std::sqrt(kPi) / 4));
}
