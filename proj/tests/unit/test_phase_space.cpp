#include <doctest.h>

#include "semiclassic/phase_space.hpp"
#include "semiclassic/potentials.hpp"

using namespace semiclassic;

namespace {
Eigen::VectorXd v1(double a) { return Eigen::VectorXd::Constant(1, a); }

MixedState coherent(const SpaceGrid& g, double eps, double x0, double p0) {
  return pure_state(g, eps, CoherentState{v1(x0), v1(p0), eps}.sample(g));
}

double worst_against(const PhaseField& f, double x0, double p0, double width, double norm) {
  const PhaseLattice& L = f.lattice;
  double worst = 0;
  for (Index ix = 0; ix < L.x_size(); ++ix)
    for (Index ip = 0; ip < L.p_size(); ++ip) {
      const double dx = L.x_point(ix)[0] - x0, dp = L.p_point(ip)[0] - p0;
      const double exact = std::exp(-(dx * dx + dp * dp) / width) / norm;
      worst = std::max(worst, std::abs(f.values[ix * L.p_size() + ip] - exact));
    }
  return worst;
}
}  // namespace

TEST_CASE("wigner of a coherent state is the phase-space gaussian") {
  const double eps = 0.25;
  const SpaceGrid g(1, 8.0, 256);
  WignerDiagnostics d;
  const PhaseField w = wigner(coherent(g, eps, 0.5, -0.3), &d);
  CHECK(worst_against(w, 0.5, -0.3, eps, kPi * eps) < 1e-10);
  CHECK(d.max_imaginary < 1e-12);
}

TEST_CASE("husimi of a coherent state by both routes") {
  const double eps = 0.25;
  const SpaceGrid g(1, 8.0, 256);
  const MixedState s = coherent(g, eps, 0.5, -0.3);
  const PhaseField ho = husimi_via_overlap(s);
  const PhaseField hc = husimi_via_convolution(wigner(s));
  CHECK(worst_against(ho, 0.5, -0.3, 2 * eps, 2 * kPi * eps) < 1e-10);
  CHECK(worst_against(hc, 0.5, -0.3, 2 * eps, 2 * kPi * eps) < 1e-8);
}

TEST_CASE("husimi on a coarse lattice matches the overlap formula") {
  const double eps = 0.1;
  const SpaceGrid g(1, 8.0, 512);
  const PhaseField h = husimi_on_lattice(coherent(g, eps, 1.0, 0.5), cell_lattice(1, 3.0, 30, 3.0, 30));
  CHECK(worst_against(h, 1.0, 0.5, 2 * eps, 2 * kPi * eps) < 1e-10);
}

TEST_CASE("wigner marginals are the position and momentum densities") {
  const double eps = 0.2;
  const SpaceGrid g(1, 8.0, 256);
  const MixedState a = coherent(g, eps, -1.0, 0.5), b = coherent(g, eps, 1.0, -0.5);
  const MixedState m = mixture(a, b, 0.4);
  const PhaseField w = wigner(m);
  CHECK((marginal(w, Marginal::position) - kernel_diagonal(m)).abs().maxCoeff() < 1e-10);
  CHECK((marginal(w, Marginal::momentum) - momentum_density(m)).abs().maxCoeff() < 1e-10);
}

TEST_CASE("trace pairing with simple symbols") {
  const double eps = 0.1;
  const SpaceGrid g(1, 8.0, 256);
  const MixedState s = coherent(g, eps, 0.8, 0.6);
  const PhaseField w = wigner(s);
  CHECK(trace_pairing(weyl_identity(w.lattice, eps), s) == doctest::Approx(1.0).epsilon(1e-10));
  // tr(x rho) = x0
  const WeylSymbol x = weyl_multiplication(w.lattice, eps, [](const Eigen::VectorXd& q) { return q[0]; });
  CHECK(trace_pairing(x, s) == doctest::Approx(0.8).epsilon(1e-10));
  // tr(-eps^2 Lap rho) = p0^2 + eps/2
  CHECK(trace_pairing(weyl_negative_laplacian(w.lattice, eps), s) == doctest::Approx(0.36 + 0.05).epsilon(1e-8));
}

TEST_CASE("hilbert-schmidt pairing of two coherent states") {
  // tr(rho1 rho2) = exp(-(|dx|^2 + |dp|^2)/(2 eps))
  const double eps = 0.2;
  const SpaceGrid g(1, 8.0, 256);
  const MixedState a = coherent(g, eps, 0.2, 0.0), b = coherent(g, eps, 0.6, 0.2);
  const double exact = std::exp(-(0.16 + 0.04) / (2 * eps));
  CHECK(trace_pairing(weyl_finite_rank(a), b) == doctest::Approx(exact).epsilon(1e-8));
  CHECK(trace_pairing(weyl_finite_rank(b), a) == doctest::Approx(exact).epsilon(1e-8));
}

TEST_CASE("composition of -eps^2 Lap with cos x") {
  // symbol of the product: p^2 U - i eps p.grad U - eps^2 Lap U / 4
  const CompositionOracle o = composition_laplacian_coefficient(0.2);
  CHECK(o.laplacian_coefficient == doctest::Approx(-0.25).epsilon(1e-8));  // multiplies eps^2 Lap U
  CHECK(o.first_order_coefficient == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(o.worst_spread < 1e-8);
}
