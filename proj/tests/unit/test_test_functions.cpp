#include <doctest.h>

#include <set>

#include "semiclassic/test_functions.hpp"

using namespace semiclassic;

TEST_CASE("factor transform against the closed form") {
  // \int e^{-u^2/(2 s^2)} cos(k u) e^{-iuy} du = s sqrt(2 pi)/2 (e^{-s^2(y-k)^2/2} + e^{-s^2(y+k)^2/2})
  Factor f;
  f.sigma = 0.7;
  f.k = 1.3;
  for (double y : {-2.0, 0.0, 0.4, 3.0}) {
    const double s = f.sigma;
    const double exact = s * std::sqrt(2 * kPi) / 2 *
                         (std::exp(-s * s * (y - f.k) * (y - f.k) / 2) + std::exp(-s * s * (y + f.k) * (y + f.k) / 2));
    CHECK(f.fourier(y).real() == doctest::Approx(exact).epsilon(1e-12));
    CHECK(std::abs(f.fourier(y).imag()) < 1e-14);
  }
}

TEST_CASE("smoothed gaussian factor widens by eps/2") {
  Factor f;
  f.sigma = 1.0;
  const Factor s = f.smoothed(0.5);
  CHECK(s.sigma == doctest::Approx(std::sqrt(1.25)));
}

TEST_CASE("dP is a metric on lattice fields") {
  const PhaseLattice L = cell_lattice(1, 4.0, 40, 4.0, 40);
  auto bump = [&](double x0) {
    RealField v(L.size());
    for (Index ix = 0; ix < L.x_size(); ++ix)
      for (Index ip = 0; ip < L.p_size(); ++ip) {
        const double dx = L.x_point(ix)[0] - x0, dp = L.p_point(ip)[0];
        v[ix * L.p_size() + ip] = std::exp(-(dx * dx + dp * dp) / 0.5);
      }
    v /= v.sum() * L.cell_volume();
    return make_phase_field(L, v, FieldTag::classical, 0.0);
  };
  const TestFunctionDictionary dict = build_dictionary();
  const PhaseField a = bump(0.0), b = bump(0.3), c = bump(0.6);
  CHECK(dP(a, a, dict) == 0.0);
  CHECK(dP(a, b, dict) == doctest::Approx(dP(b, a, dict)));
  CHECK(dP(a, b, dict) > 0.0);
  CHECK(dP(a, c, dict) <= dP(a, b, dict) + dP(b, c, dict) + 1e-15);
  CHECK(dP(a, c, dict) > dP(a, b, dict));
}

TEST_CASE("dictionary size and label uniqueness") {
  const TestFunctionDictionary dict = build_dictionary();
  CHECK(dict.size() == 64);
  std::set<std::string> labels;
  for (const auto& f : dict.functions) labels.insert(f.label);
  CHECK(labels.size() == dict.size());
}
