#include <doctest.h>

#include "semiclassic/classical_dynamics.hpp"

using namespace semiclassic;

namespace {
PotentialSpec harmonic() {
  PotentialSpec h;
  h.rough = Harmonic{1.0, Eigen::VectorXd::Zero(1)};
  return h;
}

PhaseField gaussian_density(double x0, double p0, double s) {
  const PhaseLattice L = cell_lattice(1, 4.0, 200, 4.0, 200);
  RealField v(L.size());
  for (Index ix = 0; ix < L.x_size(); ++ix)
    for (Index ip = 0; ip < L.p_size(); ++ip) {
      const double dx = L.x_point(ix)[0] - x0, dp = L.p_point(ip)[0] - p0;
      v[ix * L.p_size() + ip] = std::exp(-(dx * dx + dp * dp) / (2 * s * s)) / (2 * kPi * s * s);
    }
  return make_phase_field(L, v, FieldTag::classical, 0.0);
}
}  // namespace

TEST_CASE("leapfrog on the harmonic oscillator") {
  const FlowField f(harmonic(), 0.05);
  Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 1.0), p = Eigen::VectorXd::Zero(1);
  const double h = 1e-3;
  const int steps = static_cast<int>(std::lround(2 * kPi / h));
  for (int k = 0; k < steps; ++k) leapfrog_step(f, x, p, h);
  // one period back to the start, error O(h^2)
  CHECK(std::abs(x[0] - std::cos(steps * h)) < 1e-5);
  CHECK(std::abs(p[0] + std::sin(steps * h)) < 1e-5);
  // mollifying x^2/2 adds delta^2/4
  CHECK(f.energy(x, p) == doctest::Approx(0.5 + 0.05 * 0.05 / 4).epsilon(1e-6));
}

TEST_CASE("sampling is deterministic per seed and matches the moments") {
  const PhaseField d = gaussian_density(0.5, -0.2, 0.4);
  const ParticleEnsemble a = sample_initial(d, 20000, 7), b = sample_initial(d, 20000, 7);
  CHECK((a.x - b.x).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.x.mean() == doctest::Approx(0.5).epsilon(5e-3));
  CHECK(a.p.mean() == doctest::Approx(-0.2).epsilon(5e-3));
  CHECK(a.w.sum() == doctest::Approx(1.0));
  const ParticleEnsemble c = sample_initial(d, 20000, 8);
  CHECK((a.x - c.x).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("harmonic flow rotates the ensemble") {
  const PhaseField d = gaussian_density(1.0, 0.0, 0.2);
  const ParticleEnsemble e = sample_initial(d, 5000, 1);
  FlowPlan plan;
  plan.horizon = kPi / 2;
  plan.step = 1e-3;
  const FlowResult r = flow(e, plan, harmonic());
  const ParticleEnsemble& last = r.frames.back().ensemble;
  CHECK(last.x.mean() == doctest::Approx(0.0).epsilon(1e-2));
  CHECK(last.p.mean() == doctest::Approx(-1.0).epsilon(1e-2));
  CHECK(r.max_energy_drift < 1e-5);
}

TEST_CASE("push-forward reconstruction keeps unit mass") {
  const PhaseField d = gaussian_density(0.0, 0.0, 0.5);
  const ParticleEnsemble e = sample_initial(d, 20000, 3);
  const Reconstruction r = push_forward_density(e, cell_lattice(1, 4.0, 80, 4.0, 80), 0.2);
  CHECK(r.field.quadrature() + r.lost_mass == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(r.lost_mass < 1e-6);
}

TEST_CASE("leapfrog preserves volume for the mollified kink") {
  PotentialSpec u;
  u.rough = AbsoluteValue{1.0, Eigen::VectorXd::Zero(1)};
  FlowPlan plan;
  plan.delta = 0.05;
  const MeasureAudit a = measure_preservation_audit(u, plan, 2000, 5);
  CHECK(a.worst_jacobian_defect < 1e-10);
  CHECK(a.probes > 0);
}

TEST_CASE("a nearly frozen ensemble aborts the flow") {
  PotentialSpec u;
  u.dim = 3;
  u.points.push_back({1.0, Eigen::Vector3d::Zero()});
  ParticleEnsemble e;
  e.dim = 3;
  e.x = Eigen::MatrixXd::Zero(3, 10);
  e.p = Eigen::MatrixXd::Zero(3, 10);
  e.w = Eigen::VectorXd::Constant(10, 0.1);
  e.frozen.assign(10, 0);
  FlowPlan plan;
  plan.horizon = 0.1;
  CHECK_THROWS(flow(e, plan, u));
}
