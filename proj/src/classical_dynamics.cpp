#include "semiclassic/classical_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <Eigen/LU>
#include <nlohmann/json.hpp>

namespace semiclassic {

void ParticleEnsemble::check() const {
  if (x.cols() != w.size() || p.cols() != w.size() || x.rows() != dim || p.rows() != dim)
    throw ConsistencyError("ParticleEnsemble: shape mismatch");
  if (std::abs(w.sum() - 1.0) > 1e-12) throw ConsistencyError("ParticleEnsemble: weights do not sum to one");
  if (!x.allFinite() || !p.allFinite()) throw ConsistencyError("ParticleEnsemble: non-finite coordinates");
}

ParticleEnsemble sample_initial(const PhaseField& density, Index count, std::uint64_t seed) {
  const PhaseLattice& lat = density.lattice;
  const int n = lat.dim;
  if (count < 1) throw ParameterError("sample_initial: need at least one particle");
  if (density.values.minCoeff() < -1e-12) throw ParameterError("sample_initial: density has negative values");
  const double mass = density.values.cwiseMax(0.0).sum() * lat.cell_volume();
  if (!(mass > 0)) throw ParameterError("sample_initial: zero density");
  if (density.values.maxCoeff() * lat.cell_volume() / mass > 0.25)
    throw ParameterError("sample_initial: density concentrated in a single cell; absolutely continuous data needed");

  std::vector<double> cdf(density.values.size());
  double run = 0.0;
  for (Index f = 0; f < density.values.size(); ++f) {
    run += std::max(density.values[f], 0.0);
    cdf[f] = run;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  ParticleEnsemble e;
  e.dim = n;
  e.x.resize(n, count);
  e.p.resize(n, count);
  e.w = Eigen::VectorXd::Constant(count, 1.0 / count);
  e.frozen.assign(count, 0);
  e.seed = seed;
  e.source = to_string(density.tag);
  const Index psize = lat.p_size();
  for (Index k = 0; k < count; ++k) {
    const double u = (k + uni(rng)) / count * run;
    const Index cell = std::min<Index>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin(), cdf.size() - 1);
    const Eigen::VectorXd xc = lat.x_point(cell / psize), pc = lat.p_point(cell % psize);
    for (int a = 0; a < n; ++a) {
      e.x(a, k) = xc[a] + (uni(rng) - 0.5) * lat.x.spacing;
      e.p(a, k) = pc[a] + (uni(rng) - 0.5) * lat.p.spacing;
    }
  }
  return e;
}

FlowPlan resolve_flow_plan(const PotentialSpec& potential, FlowPlan plan) {
  if (!(plan.step > 0) || !(plan.horizon > 0) || !(plan.delta > 0))
    throw ParameterError("FlowPlan: step, horizon and delta must be positive");
  const MollifiedRough m(potential, plan.delta);
  plan.lipschitz = potential.rough_is_zero() ? 0.0 : m.lipschitz_on_box(plan.box_halfwidth);
  plan.effective_step = plan.lipschitz > 0 ? std::min(plan.step, 0.1 / plan.lipschitz) : plan.step;
  if (plan.record_times.empty()) plan.record_times = {plan.horizon};
  std::sort(plan.record_times.begin(), plan.record_times.end());
  plan.record_times.erase(std::remove_if(plan.record_times.begin(), plan.record_times.end(),
                                         [&](double t) { return !(t > 0) || t > plan.horizon * (1 + 1e-12); }),
                          plan.record_times.end());
  if (plan.record_times.empty() || plan.record_times.back() < plan.horizon * (1 - 1e-12))
    plan.record_times.push_back(plan.horizon);
  return plan;
}

FlowField::FlowField(const PotentialSpec& potential, double delta)
    : potential_(potential), rough_(potential, delta), set_(potential) {}

Eigen::VectorXd FlowField::force(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(x.size());
  if (!potential_.rough_is_zero()) f -= rough_.gradient(x);
  if (potential_.has_singular_part()) f -= eval_singular_gradient(potential_, x);
  return f;
}

double FlowField::energy(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& p) const {
  double e = 0.5 * p.squaredNorm();
  if (!potential_.rough_is_zero()) e += rough_.value(x);
  if (potential_.has_singular_part()) e += eval_singular(potential_, x);
  return e;
}

double FlowField::singular_distance(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return set_.empty() ? std::numeric_limits<double>::infinity() : set_.distance(x);
}

void leapfrog_step(const FlowField& field, Eigen::Ref<Eigen::VectorXd> x, Eigen::Ref<Eigen::VectorXd> p, double h) {
  p += 0.5 * h * field.force(x);
  x += h * p;
  p += 0.5 * h * field.force(x);
}

namespace {

// Advance by h; near S, retry with 2^k substeps until the energy error is
// acceptable. Returns false when the halving floor is reached.
bool guarded_step(const FlowField& field, Eigen::VectorXd& x, Eigen::VectorXd& p, double h, double r_min,
                  int max_halvings, Index& guarded) {
  if (!field.potential().has_singular_part()) {
    leapfrog_step(field, x, p, h);
    return true;
  }
  const double e0 = field.energy(x, p);
  for (int k = 0; k <= max_halvings; ++k) {
    Eigen::VectorXd xt = x, pt = p;
    const long sub = 1L << k;
    bool near = false, bad = false;
    for (long s = 0; s < sub && !bad; ++s) {
      leapfrog_step(field, xt, pt, h / sub);
      const double d = field.singular_distance(xt);
      if (d < r_min) near = true;
      if (!(d > 0) || !xt.allFinite() || !pt.allFinite()) bad = true;
    }
    if (!bad && (!near || std::abs(field.energy(xt, pt) - e0) <= 1e-6 * std::max(1.0, std::abs(e0)))) {
      if (k > 0) ++guarded;
      x = xt;
      p = pt;
      return true;
    }
  }
  return false;
}

}  // namespace

FlowResult flow(const ParticleEnsemble& initial, const FlowPlan& requested, const PotentialSpec& potential) {
  initial.check();
  if (potential.dim != initial.dim) throw ParameterError("flow: dimension mismatch");
  FlowResult r;
  r.plan = resolve_flow_plan(potential, requested);
  const FlowPlan& plan = r.plan;
  const FlowField field(potential, plan.delta);
  const Index M = initial.size();
  if (potential.has_singular_part())
    for (Index i = 0; i < M; ++i)
      if (field.singular_distance(initial.x.col(i)) <= plan.r_min)
        throw ParameterError("flow: a particle starts inside the singular guard radius");

  ParticleEnsemble cur = initial;
  Eigen::VectorXd e0(M);
  for (Index i = 0; i < M; ++i) e0[i] = field.energy(cur.x.col(i), cur.p.col(i));
  r.frames.push_back({0.0, cur});
  double t = 0.0;
  for (double target : plan.record_times) {
    const long steps = std::max(1L, static_cast<long>(std::ceil((target - t) / plan.effective_step - 1e-9)));
    const double h = (target - t) / steps;
    Index guarded = 0;
#pragma omp parallel for reduction(+ : guarded) schedule(static)
    for (Index i = 0; i < M; ++i) {
      if (cur.frozen[i]) continue;
      Eigen::VectorXd x = cur.x.col(i), p = cur.p.col(i);
      for (long s = 0; s < steps; ++s) {
        if (!guarded_step(field, x, p, h, plan.r_min, plan.max_halvings, guarded)) {
          cur.frozen[i] = 1;
          break;
        }
      }
      cur.x.col(i) = x;
      cur.p.col(i) = p;
    }
    r.guarded_steps += guarded;
    t = target;
    cur.excluded_mass = 0.0;
    for (Index i = 0; i < M; ++i)
      if (cur.frozen[i]) cur.excluded_mass += cur.w[i];
    if (cur.excluded_mass >= 1e-4)
      throw AuditError("flow: frozen particle mass " + std::to_string(cur.excluded_mass) + " reached 1e-4");
    r.frames.push_back({t, cur});
  }
  for (Index i = 0; i < M; ++i) {
    if (cur.frozen[i]) {
      ++r.frozen_count;
      continue;
    }
    r.max_energy_drift = std::max(r.max_energy_drift, std::abs(field.energy(cur.x.col(i), cur.p.col(i)) - e0[i]));
  }
  return r;
}

Reconstruction push_forward_density(const ParticleEnsemble& e, const PhaseLattice& lat, double bandwidth) {
  const int n = lat.dim;
  if (e.dim != n) throw ParameterError("push_forward_density: dimension mismatch");
  if (!(bandwidth > 0)) throw ParameterError("push_forward_density: bandwidth must be positive");
  const int axes = 2 * n;
  std::vector<const Axis*> ax(axes);
  for (int a = 0; a < axes; ++a) ax[a] = a < n ? &lat.x : &lat.p;
  RealField v = RealField::Zero(lat.size());
  double lost = 0.0;
  std::vector<std::vector<double>> wts(axes);
  std::vector<int> first(axes);
  const double s2 = std::sqrt(2.0) * bandwidth;
  for (Index i = 0; i < e.size(); ++i) {
    if (e.frozen.size() && e.frozen[i]) continue;
    double inside = 1.0;
    for (int a = 0; a < axes; ++a) {
      const Axis& A = *ax[a];
      const double c = a < n ? e.x(a, i) : e.p(a - n, i);
      const int lo = static_cast<int>(std::floor((c - 6 * bandwidth - A.lower_edge()) / A.spacing));
      const int hi = static_cast<int>(std::floor((c + 6 * bandwidth - A.lower_edge()) / A.spacing));
      std::vector<double>& w = wts[a];
      w.assign(hi - lo + 1, 0.0);
      double total = 0.0;
      for (int k = lo; k <= hi; ++k) {
        const double left = A.lower_edge() + k * A.spacing;
        w[k - lo] = 0.5 * (std::erf((left + A.spacing - c) / s2) - std::erf((left - c) / s2));
        total += w[k - lo];
      }
      double kept = 0.0;
      for (int k = lo; k <= hi; ++k) {
        w[k - lo] /= total;
        if (k < 0 || k >= A.count) w[k - lo] = 0.0;
        kept += w[k - lo];
      }
      first[a] = lo;
      inside *= kept;
    }
    lost += e.w[i] * (1 - inside);
    if (inside == 0.0) continue;
    // scatter the tensor product
    std::vector<int> idx(axes, 0);
    while (true) {
      double val = e.w[i];
      Index fx = 0, fp = 0;
      bool skip = false;
      for (int a = 0; a < axes && !skip; ++a) {
        const double wa = wts[a][idx[a]];
        if (wa == 0.0) skip = true;
        val *= wa;
        const int k = first[a] + idx[a];
        if (a < n) fx = fx * lat.x.count + k;
        else fp = fp * lat.p.count + k;
      }
      if (!skip) v[fx * lat.p_size() + fp] += val;
      int a = axes - 1;
      while (a >= 0 && ++idx[a] == static_cast<int>(wts[a].size())) idx[a--] = 0;
      if (a < 0) break;
    }
  }
  v /= lat.cell_volume();
  Reconstruction r{make_phase_field(lat, std::move(v), FieldTag::classical, 0.0), lost};
  return r;
}

MeasureAudit measure_preservation_audit(const PotentialSpec& potential, const FlowPlan& requested, Index count,
                                        std::uint64_t seed, double box_half, int cells_per_axis) {
  const int n = potential.dim;
  const FlowPlan plan = resolve_flow_plan(potential, requested);
  const FlowField field(potential, plan.delta);
  MeasureAudit audit;
  const double h = plan.effective_step;

  // (a) kick, drift, kick as shears; force Jacobian by central differences
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-box_half, box_half);
  const int probes = 64;
  const double eta = 1e-6;
  auto force_jacobian = [&](const Eigen::VectorXd& x) {
    Eigen::MatrixXd J(n, n);
    for (int b = 0; b < n; ++b) {
      Eigen::VectorXd xp = x, xm = x;
      xp[b] += eta;
      xm[b] -= eta;
      J.col(b) = (field.force(xp) - field.force(xm)) / (2 * eta);
    }
    return J;
  };
  for (int k = 0; k < probes; ++k) {
    Eigen::VectorXd x(n), p(n);
    for (int a = 0; a < n; ++a) x[a] = uni(rng), p[a] = uni(rng);
    if (field.singular_distance(x) < plan.r_min) continue;
    Eigen::MatrixXd K1 = Eigen::MatrixXd::Identity(2 * n, 2 * n), D = K1, K2 = K1;
    K1.bottomLeftCorner(n, n) = 0.5 * h * force_jacobian(x);
    Eigen::VectorXd xs = x, ps = p + 0.5 * h * field.force(x);
    D.topRightCorner(n, n) = h * Eigen::MatrixXd::Identity(n, n);
    xs += h * ps;
    K2.bottomLeftCorner(n, n) = 0.5 * h * force_jacobian(xs);
    const double det = (K2 * D * K1).partialPivLu().determinant();
    audit.worst_jacobian_defect = std::max(audit.worst_jacobian_defect, std::abs(det - 1));
    ++audit.probes;
  }

  // (b) compression of a uniform ensemble
  const PhaseLattice lat = cell_lattice(n, box_half, cells_per_axis, box_half, cells_per_axis);
  PhaseField uniform = make_phase_field(lat, RealField::Constant(lat.size(), 1.0), FieldTag::classical, 0.0);
  const ParticleEnsemble start = sample_initial(uniform, count, seed);
  const FlowResult fr = flow(start, plan, potential);
  const ParticleEnsemble& end = fr.frames.back().ensemble;
  RealField mass = RealField::Zero(lat.size());
  auto bin = [&](double c, const Axis& A) {
    return static_cast<int>(std::floor((c - A.lower_edge()) / A.spacing));
  };
  for (Index i = 0; i < end.size(); ++i) {
    Index fx = 0, fp = 0;
    bool out = false;
    for (int a = 0; a < n; ++a) {
      const int kx = bin(end.x(a, i), lat.x), kp = bin(end.p(a, i), lat.p);
      if (kx < 0 || kx >= lat.x.count || kp < 0 || kp >= lat.p.count) out = true;
      fx = fx * lat.x.count + kx;
      fp = fp * lat.p.count + kp;
    }
    if (!out) mass[fx * lat.p_size() + fp] += end.w[i];
  }
  const double expected = 1.0 / lat.size();  // uniform initial cell mass
  audit.compression = mass.maxCoeff() / expected;
  audit.cells_used = static_cast<int>(lat.size());
  return audit;
}

StabilityReport rlf_stability(const ParticleEnsemble& initial, const PotentialSpec& potential,
                              const std::vector<double>& deltas, const FlowPlan& base, const PhaseLattice& lattice,
                              double bandwidth, const TestFunctionDictionary& dict) {
  auto push = [&](double delta) {
    FlowPlan p = base;
    p.delta = delta;
    p.record_times = {p.horizon};
    const FlowResult r = flow(initial, p, potential);
    Reconstruction rec = push_forward_density(r.frames.back().ensemble, lattice, bandwidth);
    rec.field.values /= rec.field.quadrature();
    rec.field.mass = 1.0;
    return rec.field;
  };
  StabilityReport rep;
  for (double d : deltas) {
    const PhaseField a = push(d), b = push(0.5 * d);
    rep.rows.push_back({d, dP(a, b, dict)});
  }
  rep.cauchy = rep.rows.size() >= 2;
  for (std::size_t k = 1; k < rep.rows.size(); ++k)
    if (!(rep.rows[k].distance_to_half < rep.rows[k - 1].distance_to_half)) rep.cauchy = false;
  return rep;
}

void save_ensemble(const std::filesystem::path& stem, const ParticleEnsemble& e, double t, double delta, double h) {
  nlohmann::json j{{"schema", 1}, {"dim", e.dim},    {"count", e.size()}, {"seed", e.seed},
                   {"t", t},      {"delta", delta},  {"h", h},            {"source", e.source},
                   {"layout", "per particle: x[0..n), p[0..n), w, float64"}};
  std::ofstream(stem.string() + ".json") << j.dump(2) << "\n";
  std::ofstream bin(stem.string() + ".bin", std::ios::binary);
  if (!bin) throw Error("save_ensemble: cannot write " + stem.string() + ".bin");
  for (Index i = 0; i < e.size(); ++i) {
    bin.write(reinterpret_cast<const char*>(e.x.col(i).data()), sizeof(double) * e.dim);
    bin.write(reinterpret_cast<const char*>(e.p.col(i).data()), sizeof(double) * e.dim);
    bin.write(reinterpret_cast<const char*>(&e.w[i]), sizeof(double));
  }
}

}  // namespace semiclassic
