#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "semiclassic/gridcore.hpp"

namespace semiclassic {

// ---- rough part catalog -------------------------------------------------

struct ZeroPotential {};

// a |x - c| (Euclidean norm)
struct AbsoluteValue {
  double slope = 1.0;
  Eigen::VectorXd center;  // empty means origin
};

// -depth * exp(-|x - c|^2 / width^2)
struct SmoothedWell {
  double depth = 1.0;
  double width = 1.0;
  Eigen::VectorXd center;
};

// Sum over axes of a triangle wave of slope +-slope. Kinks sit at odd
// multiples of period/2, so consecutive kinks are `period` apart.
struct Sawtooth {
  double slope = 1.0;
  double period = 2.0;
};

// omega^2 |x - c|^2 / 2. Only locally bounded.
struct Harmonic {
  double omega = 1.0;
  Eigen::VectorXd center;
};

// coefficient * sum_i x_i^4. Only locally bounded.
struct Quartic {
  double coefficient = 1.0;
};

// Sum over axes of a piecewise-linear interpolant of (nodes, values),
// constant outside the node range.
struct UserTable {
  std::vector<double> nodes;
  std::vector<double> values;
};

using RoughPart = std::variant<ZeroPotential, AbsoluteValue, SmoothedWell, Sawtooth, Harmonic,
                               Quartic, UserTable>;

// ---- singular part ------------------------------------------------------

// Z / |x - c|, the one-pair relative coordinate form (n = 3)
struct PointCharge {
  double charge_product = 1.0;
  Eigen::VectorXd center;
};

// Z / |x_i - x_j| with x = (x_1, ..., x_M) in (R^3)^M
struct PairCharge {
  double charge_product = 1.0;
  int first = 0;
  int second = 1;
};

struct PotentialSpec {
  int dim = 1;
  RoughPart rough = ZeroPotential{};
  std::vector<PointCharge> points;
  std::vector<PairCharge> pairs;

  bool has_singular_part() const noexcept { return !points.empty() || !pairs.empty(); }
  bool rough_is_zero() const noexcept { return std::holds_alternative<ZeroPotential>(rough); }
  // false for the catalog entries that are only locally bounded
  bool rough_globally_bounded() const noexcept;
  std::string rough_name() const;
};

void validate(const PotentialSpec& spec);

class SingularSet {
 public:
  explicit SingularSet(const PotentialSpec& spec);
  bool empty() const noexcept { return points_.empty() && pairs_.empty(); }
  double distance(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  // the constant c in U_s >= c / dist(., S)
  double lower_bound_constant() const noexcept { return c_; }

 private:
  std::vector<Eigen::VectorXd> points_;
  std::vector<std::pair<int, int>> pairs_;
  double c_ = 0.0;
};

double dist_to_singular(const SingularSet& set, const Eigen::Ref<const Eigen::VectorXd>& x);

struct GradientSample {
  Eigen::VectorXd value;
  bool on_kink = false;  // midpoint subgradient returned
};

double eval_rough(const PotentialSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x);
double eval_singular(const PotentialSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x);
// throws SingularityError on S
double eval_potential(const PotentialSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x);
GradientSample eval_gradient(const PotentialSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x);
GradientSample eval_rough_gradient(const PotentialSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x);
Eigen::VectorXd eval_singular_gradient(const PotentialSpec& spec,
                                       const Eigen::Ref<const Eigen::VectorXd>& x);

struct SampledPotential {
  RealField rough;
  RealField singular;
  RealField total;
  Index excluded_points = 0;  // grid points on S, set to zero
};

SampledPotential sample_potential(const PotentialSpec& spec, const SpaceGrid& grid);

// Gradient of U_b * G_{delta^2}: closed forms for the catalog, tensor
// Gauss-Hermite quadrature for the radial kink when n > 1.
class MollifiedRough {
 public:
  MollifiedRough(const PotentialSpec& spec, double delta);

  double delta() const noexcept { return delta_; }
  double value(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::VectorXd gradient(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::MatrixXd hessian(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  // sup of the Hessian norm over the box [-L, L]^n, sampled
  double lipschitz_on_box(double halfwidth) const;

 private:
  PotentialSpec spec_;
  double delta_;
};

struct MollifiedGradientField {
  std::vector<RealField> components;
  double lipschitz = 0.0;
  bool resolution_warning = false;  // delta below grid spacing
};

MollifiedGradientField mollified_gradient(const PotentialSpec& spec, double delta,
                                          const SpaceGrid& grid);

struct PotentialReport {
  bool has_rough = false;
  double rough_sup = 0.0;
  double lipschitz = 0.0;
  std::vector<double> gradient_total_variation;  // per axis, max over grid lines
  double growth_ratio = 0.0;                     // sup |grad U_b| / (1 + |x|)
  bool globally_bounded = true;
  bool has_singular = false;
  double min_singular_distance = 0.0;
  double singular_constant = 0.0;
  bool repulsive = true;
  bool pass = true;
  std::vector<std::string> notes;
};

// box is the quantum grid; the rough part is additionally scanned along
// every axis line at 8x the grid resolution.
PotentialReport validate_potential(const PotentialSpec& spec, const SpaceGrid& box);

}  // namespace semiclassic
