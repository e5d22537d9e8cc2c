#include "semiclassic/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "semiclassic/phase_space.hpp"
#include "semiclassic/residuals_metrics.hpp"

namespace semiclassic {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

namespace {

using F = std::string (*)(double);
const F num = format_number;

PhaseLattice comparison_lattice(const ExperimentConfig& c) {
  const int count = static_cast<int>(std::lround(2 * c.lattice_half / c.lattice_spacing));
  return cell_lattice(c.dim, c.lattice_half, count, c.lattice_half, count);
}

PhaseField normalised(PhaseField f) {
  const double m = f.quadrature();
  if (!(m > 0)) throw ConsistencyError("normalised: field has no mass");
  f.values /= m;
  f.mass = 1.0;
  return f;
}

PropagationPlan make_plan(const ExperimentConfig& c, std::vector<double> record, double horizon) {
  PropagationPlan p;
  p.dt = c.dt;
  p.horizon = horizon;
  p.record_times = std::move(record);
  p.potential = c.potential;
  return p;
}

TestFunctionDictionary config_dictionary(const ExperimentConfig& c) {
  DictionaryOptions d = c.dictionary;
  d.dim = c.dim;
  return build_dictionary(d);
}

}  // namespace

// ---- convergence -------------------------------------------------------------------

ConvergenceReport run_convergence_sweep(const ExperimentConfig& c) {
  if (c.dim != 1) throw ConfigError("convergence_sweep: the full comparison runs at n = 1");
  const auto target = initial_target(c.initial);
  if (!target) throw ConfigError("convergence_sweep: the initial data names no analytic target");
  ConvergenceReport rep;
  const PhaseLattice lat = comparison_lattice(c);
  const TestFunctionDictionary dict = config_dictionary(c);

  // classical side, once
  const int fine = static_cast<int>(std::lround(2 * c.lattice_half / c.sample_spacing));
  const PhaseField source = sample_symbol(*target, cell_lattice(c.dim, c.lattice_half, fine, c.lattice_half, fine));
  const ParticleEnsemble start = sample_initial(source, c.particles, c.seed);
  FlowPlan fp;
  fp.delta = c.deltas.empty() ? 0.025 : *std::min_element(c.deltas.begin(), c.deltas.end());
  fp.step = c.flow_step;
  fp.horizon = c.horizon();
  fp.record_times = c.times;
  fp.box_halfwidth = c.halfwidth;
  const FlowResult fr = flow(start, fp, c.potential);
  rep.classical_energy_drift = fr.max_energy_drift;
  std::vector<PhaseField> classical;
  for (const TimedEnsemble& te : fr.frames)
    classical.push_back(normalised(push_forward_density(te.ensemble, lat, c.bandwidth).field));
  rep.floor = dP(classical.front(), normalised(sample_symbol(*target, lat)), dict);

  const SpaceGrid grid = config_grid(c);
  for (double eps : c.epsilons) {
    try {
      const MixedState s0 = build_initial(c.initial, grid, eps);
      AssumptionOptions ao;
      const AssumptionReport ar = validate_assumptions(s0, c.potential, ao);
      if (!ar.pass) {
        std::string why = "assumptions fail";
        for (const auto& n : ar.notes) why += "; " + n;
        throw AuditError(why);
      }
      double sup = 0.0;
      std::size_t frame = 1;
      propagate(s0, make_plan(c, c.times, c.horizon()), [&](double t, const MixedState& s) {
        if (t == 0.0) return;
        const PhaseField h = husimi_on_lattice(s, lat);
        std::string flags = "ok";
        if (h.quadrature() < 1 - 1e-3) flags = "husimi_mass_loss";
        const double d = dP(normalised(h), classical.at(frame), dict);
        ++frame;
        rep.rows.push_back({eps, t, d, flags});
        sup = std::max(sup, d);
      });
      rep.sup_by_epsilon.push_back({eps, sup});
    } catch (const Error& e) {
      rep.aborted.push_back("epsilon=" + format_number(eps) + ": " + e.what());
    }
  }
  rep.monotone = rep.aborted.empty() && rep.sup_by_epsilon.size() >= 2;
  for (std::size_t k = 1; k < rep.sup_by_epsilon.size(); ++k)
    if (!(rep.sup_by_epsilon[k].second < rep.sup_by_epsilon[k - 1].second)) rep.monotone = false;
  rep.within_floor = !rep.sup_by_epsilon.empty() && rep.sup_by_epsilon.back().second <= 3 * rep.floor;
  rep.verdict = rep.monotone && rep.within_floor;
  return rep;
}

// ---- identity suite ------------------------------------------------------------

IdentityReport run_identity_suite(const ExperimentConfig& c, bool corrupt) {
  if (c.dim != 1) throw ConfigError("identity_suite: runs at n = 1");
  IdentityReport rep;
  const SpaceGrid grid = config_grid(c);
  PotentialSpec harmonic;
  harmonic.dim = 1;
  harmonic.rough = Harmonic{1.0, Eigen::VectorXd::Zero(1)};
  auto v1 = [](double v) { return Eigen::VectorXd::Constant(1, v); };

  for (double eps : c.epsilons) {
    std::vector<std::pair<std::string, MixedState>> states;
    states.emplace_back("coherent", pure_state(grid, eps, CoherentState{v1(0.5), v1(-0.3), eps}.sample(grid)));
    {
      HermiteSpec h;
      h.epsilon = eps;
      h.rule = HermiteSpec::Rule::single;
      h.single_index = 1;
      states.emplace_back("hermite1", build_hermite(h, grid).state);
    }
    {
      ToeplitzSpec t;
      t.epsilon = eps;
      t.chi.q0 = v1(0.5);
      t.chi.w0 = v1(0.3);
      t.chi.s = 0.5;
      states.emplace_back("toeplitz", build_toeplitz(t, grid).state);
    }
    {
      const MixedState a = pure_state(grid, eps, CoherentState{v1(-1.0), v1(0.5), eps}.sample(grid));
      const MixedState b = pure_state(grid, eps, CoherentState{v1(1.0), v1(-0.5), eps}.sample(grid));
      states.emplace_back("mixture", mixture(a, b, 0.3));
    }
    const MixedState& probe = states.front().second;

    for (const auto& [name, s] : states) {
      auto check = [&](const std::string& what, double value, double tol, bool lower = false) {
        const bool ok = lower ? value >= -tol : std::abs(value) <= tol;
        rep.rows.push_back({eps, name, what, value, tol, ok});
      };
      WignerDiagnostics diag;
      const PhaseField w = wigner(s, &diag);
      PhaseField hc = husimi_via_convolution(w);
      PhaseField ho = husimi_via_overlap(s);
      if (corrupt) ho.values *= 1.001;
      check("wigner_imaginary", diag.max_imaginary, 1e-10);
      check("wigner_mass", w.quadrature() - 1, 1e-8);
      check("husimi_min", ho.values.minCoeff(), 1e-12, true);
      check("husimi_mass", ho.quadrature() - 1, 1e-8);
      check("husimi_dual_route", (hc.values - ho.values).abs().maxCoeff(), 1e-6);
      check("marginal_wigner_x", (marginal(w, Marginal::position) - kernel_diagonal(s)).abs().maxCoeff(), 1e-8);
      check("marginal_wigner_p", (marginal(w, Marginal::momentum) - momentum_density(s)).abs().maxCoeff(), 1e-8);
      check("marginal_husimi_x",
            (marginal(ho, Marginal::position) - smoothed_position_density(s)).abs().maxCoeff(), 1e-8);
      check("marginal_husimi_p",
            (marginal(ho, Marginal::momentum) - smoothed_momentum_density(s)).abs().maxCoeff(), 1e-8);
      check("trace_identity", trace_pairing(weyl_identity(w.lattice, eps), s) - 1, 1e-6);
      const double kin = observable_expectation(s, PotentialSpec{}, Observable::kinetic);
      check("trace_kinetic", 0.5 * trace_pairing(weyl_negative_laplacian(w.lattice, eps), s) - kin, 1e-6);
      const double hh = observable_expectation(s, harmonic, Observable::hamiltonian);
      check("trace_hamiltonian", trace_pairing(weyl_hamiltonian(w.lattice, eps, harmonic), s) - hh, 1e-6);
      // tr(rho1 rho2) both ways
      const double ab = trace_pairing(weyl_finite_rank(probe), s), ba = trace_pairing(weyl_finite_rank(s), probe);
      check("hilbert_schmidt_symmetry", ab - ba, 1e-8);
    }
  }
  rep.pass = std::all_of(rep.rows.begin(), rep.rows.end(), [](const IdentityRow& r) { return r.pass; });
  return rep;
}

// ---- conservation ------------------------------------------------------------------

ConservationReport run_conservation_audit(const ExperimentConfig& c) {
  ConservationReport rep;
  rep.epsilon = c.epsilons.front();
  const SpaceGrid grid = config_grid(c);
  const MixedState s0 = build_initial(c.initial, grid, rep.epsilon);
  std::vector<double> record;
  const double T = c.horizon();
  for (int k = 1; k <= 10; ++k) record.push_back(T * k / 10);
  std::vector<double> dts, ed, hd;
  for (double dt : c.dt_list) {
    PropagationPlan p = make_plan(c, record, T);
    p.dt = dt;
    const PropagationPlan resolved = resolve_plan(s0, p);
    AuditAccumulator acc(c.potential, AuditOptions{});
    propagate(s0, p, [&](double t, const MixedState& s) { acc.add(t, s); });
    ConservationRow row{dt, resolved.effective_dt, acc.finish()};
    for (const auto& f : row.audit.failures) rep.failures.push_back("dt=" + format_number(dt) + ": " + f);
    dts.push_back(resolved.effective_dt);
    ed.push_back(row.audit.energy_drift);
    hd.push_back(row.audit.h2_drift);
    rep.runs.push_back(std::move(row));
  }
  if (dts.size() >= 2) {
    rep.energy_order = fit_order(dts, ed);
    rep.h2_order = fit_order(dts, hd);
  }
  rep.pass = rep.failures.empty() && dts.size() >= 2 && std::abs(rep.energy_order - 2) <= 0.2 &&
             std::abs(rep.h2_order - 2) <= 0.2;
  if (dts.size() >= 2 && std::abs(rep.energy_order - 2) > 0.2)
    rep.failures.push_back("energy drift order " + format_number(rep.energy_order) + " outside 2 +- 0.2");
  if (dts.size() >= 2 && std::abs(rep.h2_order - 2) > 0.2)
    rep.failures.push_back("H2sum drift order " + format_number(rep.h2_order) + " outside 2 +- 0.2");
  return rep;
}

// ---- assumptions ---------------------------------------------------------------------

AssumptionSweep run_assumption_check(const ExperimentConfig& c) {
  AssumptionSweep rep;
  const SpaceGrid grid = config_grid(c);
  rep.potential = validate_potential(c.potential, grid);
  rep.pass = rep.potential.pass;
  AssumptionOptions o;
  o.target = c.dim == 1 ? initial_target(c.initial) : std::nullopt;
  o.dictionary = c.dictionary;
  for (double eps : c.epsilons) {
    AssumptionRow row;
    row.epsilon = eps;
    row.report = validate_assumptions(build_initial(c.initial, grid, eps), c.potential, o);
    if (c.initial.kind == InitialSpec::Kind::toeplitz) {
      row.symbol = symbol_moment_check(c.initial.toeplitz.chi, &c.potential);
      if (!row.symbol->finite) rep.pass = false;
    }
    rep.pass = rep.pass && row.report.pass;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

// ---- residual scan ---------------------------------------------------------------

ResidualScan run_residual_scan(const ExperimentConfig& c) {
  ResidualScan rep;
  const SpaceGrid grid = config_grid(c);
  const TestFunctionDictionary dict = config_dictionary(c);
  const double T = c.horizon();
  const int frames = std::max(3, c.residual_frames);
  std::vector<double> record;
  for (int k = 1; k < frames; ++k) record.push_back(T * k / (frames - 1));
  std::vector<double> es, cs;
  for (double eps : c.epsilons) {
    const MixedState s0 = build_initial(c.initial, grid, eps);
    const std::vector<TimedState> series = propagate(s0, make_plan(c, record, T));
    double corr = 0.0;
    for (int k = 0; k < std::min<int>(c.residual_functions, dict.size()); ++k) {
      ResidualRow row{eps, dict.functions[k].label, wigner_residual(series, c.potential, dict.functions[k]),
                      husimi_residual(series, c.potential, dict.functions[k])};
      rep.max_wigner_residual = std::max(rep.max_wigner_residual, row.wigner.residual);
      corr = std::max(corr, std::abs(row.husimi.correction_term));
      rep.rows.push_back(std::move(row));
    }
    rep.correction_by_epsilon.push_back({eps, corr});
    es.push_back(eps);
    cs.push_back(corr);
  }
  if (es.size() >= 2 && std::all_of(cs.begin(), cs.end(), [](double v) { return v > 0; }))
    rep.correction_order = fit_order(es, cs);
  rep.pass = rep.max_wigner_residual <= c.residual_tolerance;
  return rep;
}

// ---- RLF stability ----------------------------------------------------------------

RlfReport run_rlf_stability(const ExperimentConfig& c) {
  const auto target = initial_target(c.initial);
  if (!target) throw ConfigError("rlf_stability: the initial data names no analytic density");
  RlfReport rep;
  const int fine = static_cast<int>(std::lround(2 * c.lattice_half / c.sample_spacing));
  const PhaseField source = sample_symbol(*target, cell_lattice(c.dim, c.lattice_half, fine, c.lattice_half, fine));
  const ParticleEnsemble start = sample_initial(source, c.particles, c.seed);
  FlowPlan fp;
  fp.step = c.flow_step;
  fp.horizon = c.horizon();
  fp.box_halfwidth = c.halfwidth;
  rep.stability =
      rlf_stability(start, c.potential, c.deltas, fp, comparison_lattice(c), c.bandwidth, config_dictionary(c));
  fp.delta = c.deltas.empty() ? 0.05 : c.deltas.front();
  rep.measure = measure_preservation_audit(c.potential, fp, std::max<Index>(c.particles / 2, 1000), c.seed + 1);
  rep.pass = rep.stability.cauchy && rep.measure.worst_jacobian_defect <= 1e-10;
  return rep;
}

// ---- results -----------------------------------------------------------------------

ExperimentResult to_result(const ExperimentConfig& c, const ConvergenceReport& r) {
  ExperimentResult out{ExperimentKind::convergence_sweep, c.id, r.verdict, {}, {}, {}, r.aborted};
  Table t{"convergence", {"epsilon", "t", "d_P", "flags"}, {}};
  for (const auto& row : r.rows) t.add({num(row.epsilon), num(row.t), num(row.distance), row.flags});
  out.tables.push_back(std::move(t));
  // one series per record time, eps descending
  for (double time : c.times) {
    PlotSeries s{"dP_vs_epsilon_t" + format_number(time), "epsilon", "d_P", {}};
    for (const auto& row : r.rows)
      if (row.t == time) s.points.push_back({row.epsilon, row.distance});
    std::sort(s.points.begin(), s.points.end(), [](auto& a, auto& b) { return a.first > b.first; });
    out.plots.push_back(std::move(s));
  }
  PlotSeries sup{"sup_dP_vs_epsilon", "epsilon", "sup_t d_P", r.sup_by_epsilon};
  out.plots.push_back(std::move(sup));
  nlohmann::json sups = nlohmann::json::array();
  for (auto [e, v] : r.sup_by_epsilon) sups.push_back({{"epsilon", e}, {"sup_dP", v}});
  out.summary = {{"floor", r.floor},
                 {"sup_by_epsilon", sups},
                 {"monotone", r.monotone},
                 {"within_floor", r.within_floor},
                 {"classical_energy_drift", r.classical_energy_drift},
                 {"metric", "d_P(K_total=" + std::to_string(c.dictionary.total) + ")"}};
  return out;
}

ExperimentResult to_result(const ExperimentConfig& c, const IdentityReport& r) {
  ExperimentResult out{ExperimentKind::identity_suite, c.id, r.pass, {}, {}, {}, {}};
  Table t{"identities", {"epsilon", "state", "check", "value", "tolerance", "pass"}, {}};
  int failed = 0;
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& row : r.rows) {
    t.add({num(row.epsilon), row.state, row.check, num(row.value), num(row.tolerance), row.pass ? "1" : "0"});
    if (!row.pass) {
      ++failed;
      failures.push_back(row.state + "/" + row.check + " at eps=" + format_number(row.epsilon));
    }
  }
  out.tables.push_back(std::move(t));
  out.summary = {{"checks", r.rows.size()}, {"failed", failed}, {"failures", failures}};
  return out;
}

ExperimentResult to_result(const ExperimentConfig& c, const ConservationReport& r) {
  ExperimentResult out{ExperimentKind::conservation_audit, c.id, r.pass, {}, {}, {}, {}};
  Table drift{"conservation_drifts",
              {"dt", "effective_dt", "trace_drift", "energy_drift", "H2sum_drift", "gram_drift", "husimi_bound",
               "p2_bound"},
              {}};
  for (const auto& run : r.runs) {
    const auto& a = run.audit;
    drift.add({num(run.requested_dt), num(run.effective_dt), num(a.trace_drift), num(a.energy_drift),
               num(a.h2_drift), num(a.gram_drift), num(a.husimi_bound), num(a.p2_bound)});
    Table series{"audit_dt" + format_number(run.requested_dt),
                 {"t", "trace", "energy", "H2sum", "C1", "C2", "husimi_sup", "p2moment"},
                 {}};
    for (const auto& row : a.rows)
      series.add({num(row.t), num(row.trace), num(row.energy), num(row.h2sum), num(row.c1), num(row.c2),
                  num(row.husimi_sup), num(row.p2moment)});
    out.tables.push_back(std::move(series));
  }
  out.tables.insert(out.tables.begin(), std::move(drift));
  if (!r.runs.empty()) {
    PlotSeries e{"energy_vs_t", "t", "energy", {}};
    for (const auto& row : r.runs.back().audit.rows) e.points.push_back({row.t, row.energy});
    out.plots.push_back(std::move(e));
  }
  out.summary = {{"epsilon", r.epsilon},
                 {"energy_order", r.energy_order},
                 {"h2_order", r.h2_order},
                 {"failures", r.failures}};
  return out;
}

ExperimentResult to_result(const ExperimentConfig& c, const AssumptionSweep& r) {
  ExperimentResult out{ExperimentKind::assumption_check, c.id, r.pass, {}, {}, {}, {}};
  Table t{"assumptions",
          {"epsilon", "h2sum", "disop_constant", "weight_constant", "tightness_tail", "target_dP", "symbol_moment",
           "pass"},
          {}};
  for (const auto& row : r.rows) {
    const auto& a = row.report;
    t.add({num(row.epsilon), num(a.h2sum), num(a.disop_constant), num(a.weight_constant),
           num(a.tightness.empty() ? NAN : a.tightness.back().half_sum), num(a.target_distance),
           num(row.symbol ? row.symbol->moment : NAN), a.pass ? "1" : "0"});
    PlotSeries tp{"tightness_eps" + format_number(row.epsilon), "R", "half_sum", {}};
    for (const auto& tr : a.tightness) tp.points.push_back({tr.radius, tr.half_sum});
    out.plots.push_back(std::move(tp));
  }
  out.tables.push_back(std::move(t));
  out.summary = {{"potential_pass", r.potential.pass},
                 {"rough_sup", r.potential.rough_sup},
                 {"lipschitz", r.potential.lipschitz},
                 {"notes", r.potential.notes}};
  return out;
}

ExperimentResult to_result(const ExperimentConfig& c, const ResidualScan& r) {
  ExperimentResult out{ExperimentKind::residual_scan, c.id, r.pass, {}, {}, {}, {}};
  Table t{"residuals",
          {"epsilon", "function", "wigner_residual", "wigner_scale", "husimi_residual", "husimi_correction"},
          {}};
  for (const auto& row : r.rows)
    t.add({num(row.epsilon), row.function, num(row.wigner.residual), num(row.wigner.scale),
           num(row.husimi.residual), num(row.husimi.correction_term)});
  out.tables.push_back(std::move(t));
  out.plots.push_back({"correction_vs_epsilon", "epsilon", "max |correction|", r.correction_by_epsilon});
  out.summary = {{"max_wigner_residual", r.max_wigner_residual}, {"correction_order", r.correction_order}};
  return out;
}

ExperimentResult to_result(const ExperimentConfig& c, const RlfReport& r) {
  ExperimentResult out{ExperimentKind::rlf_stability, c.id, r.pass, {}, {}, {}, {}};
  Table t{"rlf_stability", {"delta", "dP_delta_half"}, {}};
  for (const auto& row : r.stability.rows) t.add({num(row.delta), num(row.distance_to_half)});
  out.tables.push_back(std::move(t));
  out.summary = {{"cauchy", r.stability.cauchy},
                 {"jacobian_defect", r.measure.worst_jacobian_defect},
                 {"compression", r.measure.compression},
                 {"probes", r.measure.probes}};
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& c) {
  switch (c.kind) {
    case ExperimentKind::convergence_sweep: return to_result(c, run_convergence_sweep(c));
    case ExperimentKind::conservation_audit: return to_result(c, run_conservation_audit(c));
    case ExperimentKind::assumption_check: return to_result(c, run_assumption_check(c));
    case ExperimentKind::residual_scan: return to_result(c, run_residual_scan(c));
    case ExperimentKind::rlf_stability: return to_result(c, run_rlf_stability(c));
    case ExperimentKind::identity_suite: return to_result(c, run_identity_suite(c));
  }
  throw ConfigError("run_experiment: unknown kind");
}

ExperimentResult validate_experiment(const ExperimentConfig& c) {
  ExperimentResult r = to_result(c, run_assumption_check(c));
  r.kind = c.kind;
  return r;
}

}  // namespace semiclassic
