#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "semiclassic/potentials.hpp"
#include "semiclassic/test_functions.hpp"

namespace semiclassic {

// Particles are columns: x.col(i), p.col(i).
struct ParticleEnsemble {
  int dim = 1;
  Eigen::MatrixXd x;
  Eigen::MatrixXd p;
  Eigen::VectorXd w;
  std::vector<char> frozen;
  double excluded_mass = 0.0;  // weight of frozen particles
  std::uint64_t seed = 0;
  std::string source;

  Index size() const noexcept { return w.size(); }
  void check() const;  // weights sum to one, coordinates finite
};

// Stratified inverse-CDF draw over the lattice cells (one uniform per
// stratum), uniform inside the chosen cell. Equal weights 1/M.
ParticleEnsemble sample_initial(const PhaseField& density, Index count, std::uint64_t seed);

struct FlowPlan {
  double delta = 0.05;  // mollification of grad U_b
  double step = 1e-2;   // requested h; capped so h Lip <= 0.1
  double horizon = 1.0;
  std::vector<double> record_times;  // empty: 0 and T
  double r_min = 0.05;              // singular guard radius
  int max_halvings = 20;
  double box_halfwidth = 8.0;       // for the Lipschitz estimate

  double effective_step = 0.0;  // filled by resolve_flow_plan
  double lipschitz = 0.0;
};

FlowPlan resolve_flow_plan(const PotentialSpec& potential, FlowPlan plan);

// b_delta = (p, -grad U_b * G_{delta^2} - grad U_s)
class FlowField {
 public:
  FlowField(const PotentialSpec& potential, double delta);
  Eigen::VectorXd force(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  double energy(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& p) const;
  double singular_distance(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  const PotentialSpec& potential() const noexcept { return potential_; }

 private:
  PotentialSpec potential_;
  MollifiedRough rough_;
  SingularSet set_;
};

// one kick-drift-kick step in place
void leapfrog_step(const FlowField& field, Eigen::Ref<Eigen::VectorXd> x, Eigen::Ref<Eigen::VectorXd> p, double h);

struct TimedEnsemble {
  double t = 0.0;
  ParticleEnsemble ensemble;
};

struct FlowResult {
  std::vector<TimedEnsemble> frames;
  FlowPlan plan;
  double max_energy_drift = 0.0;  // over non-frozen particles
  Index frozen_count = 0;
  Index guarded_steps = 0;        // steps that needed halving
};

// Throws AuditError when the frozen mass reaches 1e-4.
FlowResult flow(const ParticleEnsemble& initial, const FlowPlan& plan, const PotentialSpec& potential);

// Gaussian KDE of standard deviation `bandwidth`, cell-integrated (erf)
// weights so each particle deposits exactly its weight on the lattice.
struct Reconstruction {
  PhaseField field;
  double lost_mass = 0.0;  // deposited outside the lattice
};
Reconstruction push_forward_density(const ParticleEnsemble& ensemble, const PhaseLattice& lattice, double bandwidth);

struct MeasureAudit {
  double worst_jacobian_defect = 0.0;  // max |det J - 1| over probes
  int probes = 0;
  double compression = 0.0;  // C_T
  int cells_used = 0;
};

// (a) Jacobian determinant of one composite step at probe points, as
// the product of the three sub-map Jacobians (each by central differences);
// (b) C_T from a uniform ensemble on [-a, a]^{2n}, binned into interior cells.
MeasureAudit measure_preservation_audit(const PotentialSpec& potential, const FlowPlan& plan, Index count,
                                        std::uint64_t seed, double box_half = 1.0, int cells_per_axis = 8);

struct StabilityRow {
  double delta = 0.0;
  double distance_to_half = 0.0;  // d_P(push(delta), push(delta/2)) at T
};
struct StabilityReport {
  std::vector<StabilityRow> rows;
  bool cauchy = false;  // distances decrease along the sweep
};

// The sweep runs delta_k and delta_k/2 for each listed delta on the same
// initial ensemble.
StabilityReport rlf_stability(const ParticleEnsemble& initial, const PotentialSpec& potential,
                              const std::vector<double>& deltas, const FlowPlan& base, const PhaseLattice& lattice,
                              double bandwidth, const TestFunctionDictionary& dict);

void save_ensemble(const std::filesystem::path& stem, const ParticleEnsemble& e, double t, double delta, double h);

}  // namespace semiclassic
