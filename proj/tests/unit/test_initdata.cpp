#include <doctest.h>

#include "semiclassic/initdata.hpp"
#include "semiclassic/phase_space.hpp"

using namespace semiclassic;

TEST_CASE("hermite functions are orthonormal up to high order") {
  const SpaceGrid g(1, 10.0, 8192);
  const Eigen::MatrixXd h = hermite_functions(g, 0.01, 2000);
  double worst = 0;
  for (int j : {0, 1, 500, 1000, 1500, 2000}) worst = std::max(worst, std::abs(h.col(j).squaredNorm() * g.spacing() - 1));
  CHECK(worst < 1e-10);
  CHECK(std::abs(h.col(3).dot(h.col(1000)) * g.spacing()) < 1e-10);
}

TEST_CASE("hermite h0 is the ground state gaussian") {
  const double eps = 0.2;
  const SpaceGrid g(1, 8.0, 256);
  const Eigen::MatrixXd h = hermite_functions(g, eps, 2);
  double worst = 0;
  for (int i = 0; i < g.points(); ++i) {
    const double x = g.coordinate(i);
    worst = std::max(worst, std::abs(h(i, 0) - std::pow(kPi * eps, -0.25) * std::exp(-x * x / (2 * eps))));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("band annulus mass against the closed form") {
  const SpaceGrid g(1, 4.0, 1024);
  HermiteSpec s;
  s.epsilon = 0.04;
  const HermiteBuild b = build_hermite(s, g);
  const PhaseField h = husimi_via_convolution(wigner(b.state));
  double m = 0;
  const PhaseLattice& L = h.lattice;
  for (Index ix = 0; ix < L.x_size(); ++ix)
    for (Index ip = 0; ip < L.p_size(); ++ip) {
      const double r2 = L.x_point(ix).squaredNorm() + L.p_point(ip).squaredNorm();
      if (std::abs(r2 - 1) < 0.2) m += h.values[ix * L.p_size() + ip];
    }
  CHECK(m * L.cell_volume() == doctest::Approx(hermite_annulus_mass_exact(b, 1.0, 0.2)).epsilon(1e-2));
}

TEST_CASE("hermite build refuses an under-resolved grid") {
  HermiteSpec s;
  s.epsilon = 0.01;
  CHECK_THROWS_AS(build_hermite(s, SpaceGrid(1, 4.0, 128)), ResolutionError);
}

TEST_CASE("window profiles have unit L2 norm") {
  for (WindowProfile w : {WindowProfile::gaussian, WindowProfile::raised_cosine}) {
    double s = 0;
    const int n = 200000;
    const double h = 20.0 / n;
    for (int i = 0; i < n; ++i) s += std::pow(window_value(w, -10 + (i + 0.5) * h), 2) * h;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(window_from_string(to_string(w)) == w);
  }
}

TEST_CASE("resolution of identity on a packet") {
  const double eps = 0.25;
  const SpaceGrid g(1, 8.0, 256);
  const ComplexField v = CoherentState{Eigen::VectorXd::Constant(1, 0.3), Eigen::VectorXd::Constant(1, -0.2), eps}.sample(g);
  const ComplexField out =
      resolution_of_identity_apply(g, eps, 0.5, WindowProfile::gaussian, v, 0.5 * std::sqrt(eps), 7.0, 7.0);
  CHECK((out - 2 * kPi * v).matrix().norm() / (2 * kPi * v.matrix().norm()) < 1e-4);
}

TEST_CASE("toeplitz state is a density operator near its symbol") {
  const double eps = 0.1;
  ToeplitzSpec t;
  t.epsilon = eps;
  t.chi.q0 = Eigen::VectorXd::Constant(1, 1.0);
  t.chi.w0 = Eigen::VectorXd::Zero(1);
  const ToeplitzBuild b = build_toeplitz(t, SpaceGrid(1, 8.0, 512));
  CHECK(b.state.weights().sum() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(b.state.weights().minCoeff() >= 0);
  CHECK(b.top_eigenvalue <= b.eigenvalue_bound);
  const PhaseField w = wigner(b.state);
  double mean = 0;
  for (Index ix = 0; ix < w.lattice.x_size(); ++ix)
    for (Index ip = 0; ip < w.lattice.p_size(); ++ip)
      mean += w.lattice.x_point(ix)[0] * w.values[ix * w.lattice.p_size() + ip];
  CHECK(mean * w.lattice.cell_volume() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("gaussian symbol has a finite kinetic moment") {
  SymbolSpec g;
  g.kind = SymbolSpec::Kind::gaussian;
  g.q0 = Eigen::VectorXd::Zero(1);
  g.w0 = Eigen::VectorXd::Zero(1);
  CHECK(symbol_moment_check(g).finite);
}
