#include <doctest.h>

#include "semiclassic/potentials.hpp"

using namespace semiclassic;

namespace {
PotentialSpec coulomb3() {
  PotentialSpec s;
  s.dim = 3;
  s.points.push_back({1.0, Eigen::Vector3d::Zero()});
  return s;
}
}  // namespace

TEST_CASE("reduced coulomb value and distance") {
  const PotentialSpec s = coulomb3();
  CHECK(eval_potential(s, Eigen::Vector3d(1, 0, 0)) == doctest::Approx(1.0));
  CHECK(eval_potential(s, Eigen::Vector3d(0, 2, 0)) == doctest::Approx(0.5));
  const SingularSet set(s);
  CHECK(set.distance(Eigen::Vector3d(0, 3, 4)) == doctest::Approx(5.0));
  const Eigen::VectorXd g = eval_singular_gradient(s, Eigen::Vector3d(2, 0, 0));
  CHECK(g[0] == doctest::Approx(-0.25));
}

TEST_CASE("pair distance is |x_i - x_j| / sqrt 2") {
  PotentialSpec s;
  s.dim = 6;
  s.pairs.push_back({1.0, 0, 1});
  const SingularSet set(s);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(6);
  x[0] = 2.0;
  CHECK(set.distance(x) == doctest::Approx(std::sqrt(2.0)));
  CHECK(eval_potential(s, x) == doctest::Approx(0.5));
}

TEST_CASE("mollified |x| gradient is erf(x/delta)") {
  PotentialSpec s;
  s.rough = AbsoluteValue{1.0, Eigen::VectorXd::Zero(1)};
  const double delta = 0.1;
  const MollifiedRough m(s, delta);
  for (double x : {-0.3, -0.05, 0.0, 0.02, 0.15, 1.0}) {
    const Eigen::VectorXd p = Eigen::VectorXd::Constant(1, x);
    CHECK(m.gradient(p)[0] == doctest::Approx(std::erf(x / delta)).epsilon(1e-10));
  }
}

TEST_CASE("harmonic value and gradient") {
  PotentialSpec s;
  s.rough = Harmonic{2.0, Eigen::VectorXd::Zero(1)};
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 0.5);
  CHECK(eval_potential(s, x) == doctest::Approx(0.5));
  CHECK(eval_gradient(s, x).value[0] == doctest::Approx(2.0));
}

TEST_CASE("validator accepts |x| and rejects a wrong centre dimension") {
  PotentialSpec s;
  s.rough = AbsoluteValue{1.0, Eigen::VectorXd::Zero(1)};
  const PotentialReport r = validate_potential(s, SpaceGrid(1, 8.0, 256));
  CHECK(r.pass);
  CHECK(r.lipschitz == doctest::Approx(1.0).epsilon(1e-6));
  PotentialSpec bad;
  bad.rough = AbsoluteValue{1.0, Eigen::VectorXd::Zero(2)};
  CHECK_THROWS(validate(bad));
}

TEST_CASE("grid points on the singular set are excluded") {
  const SampledPotential sp = sample_potential(coulomb3(), SpaceGrid(3, 4.0, 16));
  CHECK(sp.excluded_points == 0);  // cell centres avoid the origin
  CHECK(sp.total.maxCoeff() == doctest::Approx(1.0 / (0.25 * std::sqrt(3.0))));
}
