#include "semiclassic/quantum_dynamics.hpp"

#include <algorithm>
#include <sstream>

#include "semiclassic/fft.hpp"
#include "semiclassic/phase_space.hpp"

namespace semiclassic {
namespace {

std::vector<int> extents_of(const SpaceGrid& g) { return std::vector<int>(g.dim(), g.points()); }

// Spectral mass of the state as a function of |k|, summed over modes.
RealField spectral_mass(const MixedState& state) {
  const SpaceGrid& g = state.grid();
  RealField mass = RealField::Zero(g.size());
  const auto ext = extents_of(g);
  for (Index j = 0; j < state.rank(); ++j) {
    ComplexField a = state.modes().col(j).array();
    fft::forward(a, ext);
    mass += state.weights()[j] * a.abs2();
  }
  return mass / mass.sum();
}

double significant_wavenumber(const MixedState& state) {
  const RealField mass = spectral_mass(state);
  const RealField k = wavenumber_squared(state.grid()).sqrt();
  std::vector<Index> order(mass.size());
  for (Index i = 0; i < mass.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return k[a] > k[b]; });
  double tail = 0.0;
  for (Index i : order) {
    tail += mass[i];
    if (tail >= 1e-10) return k[i];
  }
  return 0.0;
}

// edge mass of rho(x,x) and spectral mass above 7/8 of Nyquist
void check_boundary(const MixedState& state, double t, double tol) {
  const SpaceGrid& g = state.grid();
  const double edge = edge_mass(kernel_diagonal(state), g);
  if (edge > tol)
    throw BoundaryEscapeError("propagate: edge mass " + std::to_string(edge) + " at t = " + std::to_string(t),
                              edge);
  const RealField mass = spectral_mass(state);
  const RealField k2 = wavenumber_squared(g);
  const double kcut = 0.875 * g.max_wavenumber();
  const double high = (k2 > kcut * kcut).select(mass, 0.0).sum();
  if (high > tol)
    throw BoundaryEscapeError("propagate: spectral mass " + std::to_string(high) +
                                  " near the Nyquist wavenumber at t = " + std::to_string(t),
                              high);
}

}  // namespace

PropagationPlan resolve_plan(const MixedState& state, PropagationPlan plan) {
  const double eps = state.epsilon();
  if (!(plan.dt > 0) || !(plan.horizon >= 0)) throw ParameterError("resolve_plan: dt and T must be positive");
  validate(plan.potential);
  if (plan.potential.dim != state.grid().dim()) throw ParameterError("resolve_plan: potential dimension mismatch");

  const double ksig = significant_wavenumber(state);
  if (ksig > 0.75 * state.grid().max_wavenumber())
    throw ResolutionError("resolve_plan: spectrum reaches " + std::to_string(ksig) + ", grid Nyquist is " +
                          std::to_string(state.grid().max_wavenumber()));
  plan.significant_momentum = eps * ksig;
  plan.cfl_cap = ksig > 0 ? 0.25 * kPi * 2.0 / (eps * ksig * ksig) : plan.dt;
  double dt = std::min(plan.dt, plan.cfl_cap);
  if (plan.epsilon_scaling) dt = std::min(dt, eps / 10);
  plan.effective_dt = dt;

  std::vector<double> rec;
  for (double t : plan.record_times)
    if (t > 0 && t <= plan.horizon + 1e-12) rec.push_back(t);
  rec.push_back(plan.horizon);
  std::sort(rec.begin(), rec.end());
  rec.erase(std::unique(rec.begin(), rec.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
            rec.end());
  if (plan.horizon == 0) rec.clear();
  plan.record_times = rec;
  return plan;
}

void propagate(const MixedState& initial, const PropagationPlan& request, const PropagationObserver& observer) {
  const PropagationPlan plan = request.effective_dt > 0 ? request : resolve_plan(initial, request);
  const SpaceGrid& g = initial.grid();
  const double eps = initial.epsilon();
  const auto ext = extents_of(g);
  const SampledPotential u = sample_potential(plan.potential, g);
  const RealField k2 = wavenumber_squared(g);
  const double inv_size = 1.0 / static_cast<double>(g.size());

  if (plan.monitor_boundary) check_boundary(initial, 0.0, plan.boundary_tolerance);
  if (observer) observer(0.0, initial);

  Eigen::MatrixXcd modes = initial.modes();
  double t = 0.0;
  for (double target : plan.record_times) {
    const double span = target - t;
    const int steps = std::max(1, static_cast<int>(std::ceil(span / plan.effective_dt - 1e-9)));
    const double dt = span / steps;
    const ComplexField half = (Complex(0, -0.5 * dt / eps) * u.total.cast<Complex>()).exp();
    const ComplexField kin = (Complex(0, -0.5 * dt * eps) * k2.cast<Complex>()).exp() * inv_size;
#pragma omp parallel for schedule(dynamic)
    for (Index j = 0; j < modes.cols(); ++j) {
      ComplexField phi = modes.col(j).array();
      for (int s = 0; s < steps; ++s) {
        phi *= half;
        fft::forward(phi, ext);
        phi *= kin;
        fft::backward(phi, ext);
        phi *= half;
      }
      modes.col(j) = phi.matrix();
    }
    t = target;
    const MixedState now = initial.with_modes(modes);
    if (plan.monitor_boundary) check_boundary(now, t, plan.boundary_tolerance);
    if (observer) observer(t, now);
  }
}

std::vector<TimedState> propagate(const MixedState& initial, const PropagationPlan& plan) {
  std::vector<TimedState> out;
  propagate(initial, plan, [&](double t, const MixedState& s) { out.push_back({t, s}); });
  return out;
}

SingularMoment singular_moment(const MixedState& state, const PotentialSpec& potential) {
  const Hamiltonian h(state.grid(), state.epsilon(), potential);
  SingularMoment m;
  m.potential_moment = (h.potential().singular.square() * kernel_diagonal(state)).sum() * state.grid().cell_volume();
  for (Index j = 0; j < state.rank(); ++j)
    m.gradient_moment += state.weights()[j] * h.gradient_norm_squared(state.modes().col(j).array());
  return m;
}

AuditAccumulator::AuditAccumulator(const PotentialSpec& potential, AuditOptions options)
    : potential_(potential), options_(options) {}

void AuditAccumulator::add(double t, const MixedState& state) {
  const SpaceGrid& g = state.grid();
  const int n = g.dim();
  const double eps = state.epsilon();
  const Hamiltonian h(g, eps, potential_);
  AuditRow row;
  row.t = t;
  row.trace = kernel_diagonal(state).sum() * g.cell_volume();
  row.energy = observable_expectation(state, h, Observable::hamiltonian);
  row.h2sum = observable_expectation(state, h, Observable::hamiltonian_squared);
  const SingularMoment sm = singular_moment(state, potential_);
  row.c1 = sm.potential_moment;
  row.c2 = sm.gradient_moment;
  row.gram_top = gram_top_eigenvalue(state);
  if (options_.full_husimi && n == 1)
    row.husimi_sup = husimi_via_overlap(state).values.maxCoeff();
  else
    row.husimi_sup = husimi_sup_sampled(state);
  {
    const PhaseLattice lat = wigner_lattice(g, eps);
    const RealField sm_p = smoothed_momentum_density(state);
    double acc = 0.0;
    for (Index q = 0; q < lat.p_size(); ++q) acc += lat.p_point(q).squaredNorm() * sm_p[q];
    row.p2moment = acc * std::pow(lat.p.spacing, n);
  }

  if (audit_.rows.empty()) {
    rough_sup_ = h.potential().rough.abs().maxCoeff();
    audit_.disop_constant = options_.disop_constant >= 0 ? options_.disop_constant : row.gram_top / std::pow(eps, n);
    audit_.husimi_bound = audit_.disop_constant / std::pow(2 * kPi, n);
    audit_.c2_bound = 2 * (row.energy + rough_sup_);
    const double s = std::sqrt(row.h2sum) + rough_sup_;
    audit_.c1_bound = s * s;
    audit_.p2_bound = audit_.c2_bound + 0.5 * n;
  }
  audit_.rows.push_back(row);
}

ConservationAudit AuditAccumulator::finish() const {
  ConservationAudit a = audit_;
  if (a.rows.empty()) throw AuditError("conservation_audit: empty series");
  const AuditRow& r0 = a.rows.front();
  auto rel = [](double v, double v0) { return std::abs(v - v0) / std::max(std::abs(v0), 1e-300); };
  for (const AuditRow& r : a.rows) {
    a.trace_drift = std::max(a.trace_drift, std::abs(r.trace - r0.trace));
    a.energy_drift = std::max(a.energy_drift, rel(r.energy, r0.energy));
    a.h2_drift = std::max(a.h2_drift, rel(r.h2sum, r0.h2sum));
    a.gram_drift = std::max(a.gram_drift, rel(r.gram_top, r0.gram_top));
  }
  auto fail = [&](const std::string& what) {
    a.failures.push_back(what);
    a.pass = false;
  };
  if (a.trace_drift > options_.trace_tolerance) fail("trace drift " + std::to_string(a.trace_drift));
  if (a.energy_drift > options_.conservation_tolerance) fail("energy drift " + std::to_string(a.energy_drift));
  if (a.h2_drift > options_.conservation_tolerance) fail("H2sum drift " + std::to_string(a.h2_drift));
  if (a.gram_drift > 1e-10) fail("Gram spectrum drift " + std::to_string(a.gram_drift));
  for (const AuditRow& r : a.rows) {
    const std::string at = " at t = " + std::to_string(r.t);
    if (r.husimi_sup > a.husimi_bound + options_.husimi_slack) fail("Husimi sup" + at);
    if (r.p2moment > a.p2_bound + 1e-8) fail("p^2 moment" + at);
    if (r.c2 > a.c2_bound * (1 + 1e-8)) fail("kinetic bound C2" + at);
    if (r.c1 > a.c1_bound * (1 + 1e-8)) fail("singular bound C1" + at);
  }
  return a;
}

ConservationAudit conservation_audit(const std::vector<TimedState>& series, const PotentialSpec& potential,
                                     const AuditOptions& options) {
  AuditAccumulator acc(potential, options);
  for (const TimedState& s : series) acc.add(s.t, s.state);
  return acc.finish();
}

std::string audit_csv(const ConservationAudit& audit) {
  std::ostringstream os;
  os.precision(17);
  os << "t,trace,energy,H2sum,C1,C2,husimi_sup,p2moment\n";
  for (const AuditRow& r : audit.rows)
    os << r.t << ',' << r.trace << ',' << r.energy << ',' << r.h2sum << ',' << r.c1 << ',' << r.c2 << ','
       << r.husimi_sup << ',' << r.p2moment << '\n';
  return os.str();
}

}  // namespace semiclassic
