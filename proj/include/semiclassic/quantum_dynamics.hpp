#pragma once

#include <functional>
#include <string>
#include <vector>

#include "semiclassic/potentials.hpp"
#include "semiclassic/states.hpp"

namespace semiclassic {

struct PropagationPlan {
  double dt = 1e-2;      // requested step
  double horizon = 1.0;  // T
  std::vector<double> record_times;  // empty: only t = 0 and T
  PotentialSpec potential;
  bool epsilon_scaling = true;       // dt <= eps/10
  bool monitor_boundary = true;
  double boundary_tolerance = 1e-6;

  // filled by resolve_plan
  double effective_dt = 0.0;
  double cfl_cap = 0.0;
  double significant_momentum = 0.0;
};

// Applies the eps/10 and kinetic-phase caps (dt * eps |k_sig|^2 / 2 <= pi/4,
// k_sig the wavenumber holding all but 1e-10 of the spectral mass) and
// normalises the record list. Throws ResolutionError when the state's
// spectrum already reaches 3/4 of the grid's Nyquist wavenumber.
PropagationPlan resolve_plan(const MixedState& state, PropagationPlan plan);

struct TimedState {
  double t = 0.0;
  MixedState state;
};

using PropagationObserver = std::function<void(double t, const MixedState& state)>;

// Strang splitting e^{-i dt U/2eps} e^{-i dt eps|k|^2/2} e^{-i dt U/2eps}
// per mode. The observer sees t = 0 and every record time.
void propagate(const MixedState& initial, const PropagationPlan& plan, const PropagationObserver& observer);
std::vector<TimedState> propagate(const MixedState& initial, const PropagationPlan& plan);

// (\int U_s^2 rho(x,x) dx, sum mu_j ||eps grad phi_j||^2)
struct SingularMoment {
  double potential_moment = 0.0;
  double gradient_moment = 0.0;
};
SingularMoment singular_moment(const MixedState& state, const PotentialSpec& potential);

struct AuditRow {
  double t = 0.0;
  double trace = 0.0;
  double energy = 0.0;
  double h2sum = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double husimi_sup = 0.0;
  double p2moment = 0.0;
  double gram_top = 0.0;
};

struct AuditOptions {
  double conservation_tolerance = 1e-6;  // relative, for energy and H2sum
  double trace_tolerance = 1e-10;
  double husimi_slack = 1e-8;
  double disop_constant = -1.0;  // C; negative: take the Gram constant at t = 0
  bool full_husimi = true;       // full lattice at n = 1, probes otherwise
};

struct ConservationAudit {
  std::vector<AuditRow> rows;
  double trace_drift = 0.0;
  double energy_drift = 0.0;
  double h2_drift = 0.0;
  double gram_drift = 0.0;
  double disop_constant = 0.0;
  double husimi_bound = 0.0;  // C / (2 pi)^n
  double c1_bound = 0.0;
  double c2_bound = 0.0;
  double p2_bound = 0.0;  // C2 bound + n/2
  std::vector<std::string> failures;
  bool pass = true;
};

ConservationAudit conservation_audit(const std::vector<TimedState>& series, const PotentialSpec& potential,
                                     const AuditOptions& options = {});

// Incremental form for long runs: feed states as they are produced.
class AuditAccumulator {
 public:
  AuditAccumulator(const PotentialSpec& potential, AuditOptions options);
  void add(double t, const MixedState& state);
  ConservationAudit finish() const;

 private:
  PotentialSpec potential_;
  AuditOptions options_;
  ConservationAudit audit_;
  double rough_sup_ = 0.0;
};

std::string audit_csv(const ConservationAudit& audit);

}  // namespace semiclassic
