#include "semiclassic/potentials.hpp"

#include <algorithm>
#include <limits>

#include <Eigen/Eigenvalues>

namespace semiclassic {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Eigen::VectorXd center_or_origin(const Eigen::VectorXd& c, int dim) {
  return c.size() == 0 ? Eigen::VectorXd::Zero(dim) : c;
}

// A 1-D piecewise-linear function through its kinks. Mollification of
// each kink by G_{delta^2} (variance delta^2/2) is closed form.
struct Kink {
  double at;
  double jump;  // slope right minus slope left
};

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2 * kPi); }

// (ramp * G)(x) - ramp(x) for a unit-jump kink, and its two derivatives
struct KinkCorrection {
  double value, slope, curvature;
};

KinkCorrection kink_correction(double m, double delta) {
  if (delta <= 0.0) return {0.0, 0.0, 0.0};
  const double sigma = delta / std::sqrt(2.0);
  const double z = m / sigma;
  const double smooth_value = m * normal_cdf(z) + sigma * normal_pdf(z);
  const double smooth_slope = normal_cdf(z);
  const double ramp_slope = m > 0 ? 1.0 : (m < 0 ? 0.0 : 0.5);
  return {smooth_value - std::max(m, 0.0), smooth_slope - ramp_slope, normal_pdf(z) / sigma};
}

// sawtooth profile: slope +s on segments with even index
int sawtooth_segment(double x, double period) { return static_cast<int>(std::floor((x + 0.5 * period) / period)); }

double sawtooth_value(const Sawtooth& s, double x) {
  const double P = s.period;
  const double a = std::fmod(x + 0.5 * P, 2 * P);
  const double arg = a < 0 ? a + 2 * P : a;
  return s.slope * (0.5 * P - std::abs(arg - P));
}

double sawtooth_slope(const Sawtooth& s, double x, bool& on_kink) {
  const double u = (x + 0.5 * s.period) / s.period;
  on_kink = std::abs(u - std::round(u)) < 1e-14;
  if (on_kink) return 0.0;
  return (sawtooth_segment(x, s.period) % 2 == 0) ? s.slope : -s.slope;
}

std::vector<Kink> sawtooth_kinks_near(const Sawtooth& s, double x, double reach) {
  std::vector<Kink> out;
  const int lo = static_cast<int>(std::floor((x - reach) / s.period - 0.5)) - 1;
  const int hi = static_cast<int>(std::ceil((x + reach) / s.period - 0.5)) + 1;
  for (int m = lo; m <= hi; ++m) {
    const double k = (m + 0.5) * s.period;
    // at (2j+1)P/2 with m even the profile peaks
    out.push_back({k, (m % 2 == 0) ? -2 * s.slope : 2 * s.slope});
  }
  return out;
}

struct TableView {
  const UserTable& t;

  double value(double x) const {
    const auto& n = t.nodes;
    if (x <= n.front()) return t.values.front();
    if (x >= n.back()) return t.values.back();
    const auto it = std::upper_bound(n.begin(), n.end(), x);
    const std::size_t k = static_cast<std::size_t>(it - n.begin()) - 1;
    const double w = (x - n[k]) / (n[k + 1] - n[k]);
    return (1 - w) * t.values[k] + w * t.values[k + 1];
  }
  double segment_slope(std::size_t k) const {
    return (t.values[k + 1] - t.values[k]) / (t.nodes[k + 1] - t.nodes[k]);
  }
  double slope(double x, bool& on_kink) const {
    const auto& n = t.nodes;
    on_kink = false;
    for (std::size_t k = 0; k < n.size(); ++k)
      if (x == n[k]) {
        on_kink = true;
        const double left = k == 0 ? 0.0 : segment_slope(k - 1);
        const double right = k + 1 == n.size() ? 0.0 : segment_slope(k);
        return 0.5 * (left + right);
      }
    if (x < n.front() || x > n.back()) return 0.0;
    const auto it = std::upper_bound(n.begin(), n.end(), x);
    return segment_slope(static_cast<std::size_t>(it - n.begin()) - 1);
  }
  std::vector<Kink> kinks() const {
    std::vector<Kink> out;
    const auto& n = t.nodes;
    for (std::size_t k = 0; k < n.size(); ++k) {
      const double left = k == 0 ? 0.0 : segment_slope(k - 1);
      const double right = k + 1 == n.size() ? 0.0 : segment_slope(k);
      out.push_back({n[k], right - left});
    }
    return out;
  }
};

// smooth-or-kinked 1-D profile applied per axis, mollified
struct AxisProfile {
  double value, slope, curvature;
};

AxisProfile mollified_axis(const RoughPart& rough, double x, double delta) {
  return std::visit(
      overloaded{
          [&](const Sawtooth& s) {
            bool kink = false;
            AxisProfile r{sawtooth_value(s, x), sawtooth_slope(s, x, kink), 0.0};
            if (delta > 0)
              for (const Kink& k : sawtooth_kinks_near(s, x, 12 * delta)) {
                const auto c = kink_correction(x - k.at, delta);
                r.value += k.jump * c.value;
                r.slope += k.jump * c.slope;
                r.curvature += k.jump * c.curvature;
              }
            return r;
          },
          [&](const UserTable& t) {
            TableView v{t};
            bool kink = false;
            AxisProfile r{v.value(x), v.slope(x, kink), 0.0};
            if (delta > 0)
              for (const Kink& k : v.kinks()) {
                const auto c = kink_correction(x - k.at, delta);
                r.value += k.jump * c.value;
                r.slope += k.jump * c.slope;
                r.curvature += k.jump * c.curvature;
              }
            return r;
          },
          [&](const Quartic& q) {
            const double s2 = 0.5 * delta * delta;
            return AxisProfile{q.coefficient * (x * x * x * x + 6 * x * x * s2 + 3 * s2 * s2),
                               4 * q.coefficient * (x * x * x + 3 * x * s2),
                               12 * q.coefficient * (x * x + s2)};
          },
          [&](const auto&) { return AxisProfile{0.0, 0.0, 0.0}; },
      },
      rough);
}

bool is_per_axis(const RoughPart& r) {
  return std::holds_alternative<Sawtooth>(r) || std::holds_alternative<UserTable>(r) ||
         std::holds_alternative<Quartic>(r);
}

}  // namespace

bool PotentialSpec::rough_globally_bounded() const noexcept {
  return !std::holds_alternative<Harmonic>(rough) && !std::holds_alternative<Quartic>(rough) &&
         !std::holds_alternative<AbsoluteValue>(rough);
}

std::string PotentialSpec::rough_name() const {
  return std::visit(overloaded{[](const ZeroPotential&) { return std::string("zero"); },
                               [](const AbsoluteValue&) { return std::string("absolute_value"); },
                               [](const SmoothedWell&) { return std::string("smoothed_well"); },
                               [](const Sawtooth&) { return std::string("sawtooth"); },
                               [](const Harmonic&) { return std::string("harmonic"); },
                               [](const Quartic&) { return std::string("quartic"); },
                               [](const UserTable&) { return std::string("user_table"); }},
                    rough);
}

void validate(const PotentialSpec& spec) {
  if (spec.dim < 1 || spec.dim > kMaxDim) throw ParameterError("PotentialSpec: bad dimension");
  for (const auto& p : spec.points) {
    if (!(p.charge_product > 0)) throw ParameterError("PotentialSpec: charge products must be positive");
    if (p.center.size() != 0 && p.center.size() != spec.dim)
      throw ParameterError("PotentialSpec: point charge centre has wrong dimension");
  }
  for (const auto& p : spec.pairs) {
    if (!(p.charge_product > 0)) throw ParameterError("PotentialSpec: charge products must be positive");
    if (spec.dim % 3 != 0 || p.first == p.second || p.first < 0 || p.second < 0 ||
        3 * std::max(p.first, p.second) + 3 > spec.dim)
      throw ParameterError("PotentialSpec: pair indices do not fit (R^3)^M");
  }
  auto centre = [&](const Eigen::VectorXd& c, const char* what) {
    if (c.size() != 0 && c.size() != spec.dim) throw ParameterError(std::string(what) + ": centre has wrong dimension");
  };
  std::visit(overloaded{[&](const AbsoluteValue& a) { centre(a.center, "absolute_value"); },
                        [&](const Harmonic& h) { centre(h.center, "harmonic"); },
                        [&](const SmoothedWell& w) {
                          centre(w.center, "smoothed_well");
                          if (!(w.width > 0)) throw ParameterError("smoothed_well: width must be positive");
                        },
                        [](const Sawtooth& s) {
                          if (!(s.period > 0)) throw ParameterError("sawtooth: period must be positive");
                        },
                        [](const UserTable& t) {
                          if (t.nodes.size() < 2 || t.nodes.size() != t.values.size() ||
                              !std::is_sorted(t.nodes.begin(), t.nodes.end()))
                            throw ParameterError("user_table: need >= 2 sorted nodes with values");
                        },
                        [](const auto&) {}},
             spec.rough);
}

SingularSet::SingularSet(const PotentialSpec& spec) {
  c_ = std::numeric_limits<double>::infinity();
  for (const auto& p : spec.points) {
    points_.push_back(center_or_origin(p.center, spec.dim));
    c_ = std::min(c_, p.charge_product);
  }
  for (const auto& p : spec.pairs) {
    pairs_.emplace_back(p.first, p.second);
    // Z/|x_i - x_j| = Z / (sqrt 2 dist)
    c_ = std::min(c_, p.charge_product / std::sqrt(2.0));
  }
  if (empty()) c_ = 0.0;
}

double SingularSet::distance(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& c : points_) d = std::min(d, (x - c).norm());
  for (const auto& [i, j] : pairs_)
    d = std::min(d, (x.segment<3>(3 * i) - x.segment<3>(3 * j)).norm() / std::sqrt(2.0));
  return d;
}

double dist_to_singular(const SingularSet& set, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return set.distance(x);
}

double eval_rough(const PotentialSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (is_per_axis(spec.rough)) {
    double u = 0.0;
    for (int a = 0; a < x.size(); ++a) u += mollified_axis(spec.rough, x[a], 0.0).value;
    return u;
  }
  return std::visit(overloaded{[&](const AbsoluteValue& v) {
                                 return v.slope * (x - center_or_origin(v.center, spec.dim)).norm();
                               },
                               [&](const SmoothedWell& w) {
                                 const double r2 =
                                     (x - center_or_origin(w.center, spec.dim)).squaredNorm();
                                 return -w.depth * std::exp(-r2 / (w.width * w.width));
                               },
                               [&](const Harmonic& h) {
                                 return 0.5 * h.omega * h.omega *
                                        (x - center_or_origin(h.center, spec.dim)).squaredNorm();
                               },
                               [](const auto&) { return 0.0; }},
                    spec.rough);
}

double eval_singular(const PotentialSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x) {
  double u = 0.0;
  for (const auto& p : spec.points) u += p.charge_product / (x - center_or_origin(p.center, spec.dim)).norm();
  for (const auto& p : spec.pairs)
    u += p.charge_product / (x.segment<3>(3 * p.first) - x.segment<3>(3 * p.second)).norm();
  return u;
}

double eval_potential(const PotentialSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != spec.dim) throw ParameterError("eval_potential: dimension mismatch");
  if (spec.has_singular_part()) {
    const double d = SingularSet(spec).distance(x);
    if (d == 0.0) throw SingularityError("eval_potential: point lies on the singular set", d);
  }
  return eval_rough(spec, x) + eval_singular(spec, x);
}

GradientSample eval_rough_gradient(const PotentialSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x) {
  GradientSample g{Eigen::VectorXd::Zero(spec.dim), false};
  if (is_per_axis(spec.rough)) {
    for (int a = 0; a < x.size(); ++a) {
      bool kink = false;
      if (const auto* s = std::get_if<Sawtooth>(&spec.rough)) {
        g.value[a] = sawtooth_slope(*s, x[a], kink);
      } else if (const auto* t = std::get_if<UserTable>(&spec.rough)) {
        g.value[a] = TableView{*t}.slope(x[a], kink);
      } else {
        g.value[a] = mollified_axis(spec.rough, x[a], 0.0).slope;
      }
      g.on_kink = g.on_kink || kink;
    }
    return g;
  }
  std::visit(overloaded{[&](const AbsoluteValue& v) {
                          const Eigen::VectorXd d = x - center_or_origin(v.center, spec.dim);
                          const double r = d.norm();
                          if (r == 0.0) {
                            g.on_kink = true;  // zero is the midpoint subgradient
                          } else {
                            g.value = v.slope * d / r;
                          }
                        },
                        [&](const SmoothedWell& w) {
                          const Eigen::VectorXd d = x - center_or_origin(w.center, spec.dim);
                          const double w2 = w.width * w.width;
                          g.value = 2 * w.depth / w2 * std::exp(-d.squaredNorm() / w2) * d;
                        },
                        [&](const Harmonic& h) {
                          g.value = h.omega * h.omega * (x - center_or_origin(h.center, spec.dim));
                        },
                        [](const auto&) {}},
             spec.rough);
  return g;
}

Eigen::VectorXd eval_singular_gradient(const PotentialSpec& spec,
                                       const Eigen::Ref<const Eigen::VectorXd>& x) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(spec.dim);
  for (const auto& p : spec.points) {
    const Eigen::VectorXd d = x - center_or_origin(p.center, spec.dim);
    const double r = d.norm();
    g -= p.charge_product / (r * r * r) * d;
  }
  for (const auto& p : spec.pairs) {
    const Eigen::Vector3d d = x.segment<3>(3 * p.first) - x.segment<3>(3 * p.second);
    const double r = d.norm();
    const Eigen::Vector3d f = -p.charge_product / (r * r * r) * d;
    g.segment<3>(3 * p.first) += f;
    g.segment<3>(3 * p.second) -= f;
  }
  return g;
}

GradientSample eval_gradient(const PotentialSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != spec.dim) throw ParameterError("eval_gradient: dimension mismatch");
  GradientSample g = eval_rough_gradient(spec, x);
  if (spec.has_singular_part()) {
    const double d = SingularSet(spec).distance(x);
    if (d == 0.0) throw SingularityError("eval_gradient: point lies on the singular set", d);
    g.value += eval_singular_gradient(spec, x);
  }
  return g;
}

SampledPotential sample_potential(const PotentialSpec& spec, const SpaceGrid& grid) {
  if (spec.dim != grid.dim()) throw ParameterError("sample_potential: dimension mismatch");
  SampledPotential s{RealField(grid.size()), RealField::Zero(grid.size()), RealField(grid.size()), 0};
  const SingularSet set(spec);
  for (Index f = 0; f < grid.size(); ++f) {
    const Eigen::VectorXd x = grid.point(f);
    s.rough[f] = eval_rough(spec, x);
    if (!set.empty()) {
      if (set.distance(x) == 0.0) {
        ++s.excluded_points;
      } else {
        s.singular[f] = eval_singular(spec, x);
      }
    }
  }
  s.total = s.rough + s.singular;
  return s;
}

// ---- mollification -------------------------------------------------------

MollifiedRough::MollifiedRough(const PotentialSpec& spec, double delta) : spec_(spec), delta_(delta) {
  if (!(delta > 0.0)) throw ParameterError("mollified_gradient: delta must be positive");
  validate(spec);
}

namespace {

// radial kink |x - c| in n > 1 dimensions by tensor Gauss-Hermite
struct RadialQuadrature {
  Eigen::MatrixXd nodes;  // dim x count
  Eigen::VectorXd weights;
};

const RadialQuadrature& radial_rule(int dim) {
  static thread_local std::vector<RadialQuadrature> cache(kMaxDim + 1);
  auto& r = cache[dim];
  if (r.weights.size() == 0) {
    const int order = dim == 2 ? 48 : 20;
    const auto gh = gauss_hermite_rule(order);
    Index count = 1;
    for (int a = 0; a < dim; ++a) count *= order;
    r.nodes.resize(dim, count);
    r.weights.resize(count);
    for (Index k = 0; k < count; ++k) {
      Index rest = k;
      double w = 1.0;
      for (int a = dim - 1; a >= 0; --a) {
        const int i = static_cast<int>(rest % order);
        rest /= order;
        r.nodes(a, k) = gh.nodes[i];
        w *= gh.weights[i];
      }
      r.weights[k] = w / std::pow(kPi, 0.5 * dim);
    }
  }
  return r;
}

}  // namespace

double MollifiedRough::value(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const int n = spec_.dim;
  const double s2 = 0.5 * delta_ * delta_;
  if (is_per_axis(spec_.rough)) {
    double u = 0.0;
    for (int a = 0; a < n; ++a) u += mollified_axis(spec_.rough, x[a], delta_).value;
    return u;
  }
  return std::visit(
      overloaded{[&](const AbsoluteValue& v) {
                   const Eigen::VectorXd d = x - center_or_origin(v.center, n);
                   if (n == 1) {
                     const double m = d[0];
                     return v.slope * (std::abs(m) + 2 * kink_correction(m, delta_).value);
                   }
                   const auto& rule = radial_rule(n);
                   double u = 0.0;
                   for (Index k = 0; k < rule.weights.size(); ++k)
                     u += rule.weights[k] * (d - delta_ * rule.nodes.col(k)).norm();
                   return v.slope * u;
                 },
                 [&](const SmoothedWell& w) {
                   const double W2 = w.width * w.width + delta_ * delta_;
                   const double amp = w.depth * std::pow(w.width * w.width / W2, 0.5 * n);
                   return -amp * std::exp(-(x - center_or_origin(w.center, n)).squaredNorm() / W2);
                 },
                 [&](const Harmonic& h) {
                   return 0.5 * h.omega * h.omega *
                          ((x - center_or_origin(h.center, n)).squaredNorm() + n * s2);
                 },
                 [](const auto&) { return 0.0; }},
      spec_.rough);
}

Eigen::VectorXd MollifiedRough::gradient(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const int n = spec_.dim;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
  if (is_per_axis(spec_.rough)) {
    for (int a = 0; a < n; ++a) g[a] = mollified_axis(spec_.rough, x[a], delta_).slope;
    return g;
  }
  std::visit(overloaded{[&](const AbsoluteValue& v) {
                          const Eigen::VectorXd d = x - center_or_origin(v.center, n);
                          if (n == 1) {
                            // sign * G = erf(x / delta)
                            g[0] = v.slope * std::erf(d[0] / delta_);
                            return;
                          }
                          const auto& rule = radial_rule(n);
                          for (Index k = 0; k < rule.weights.size(); ++k) {
                            const Eigen::VectorXd y = d - delta_ * rule.nodes.col(k);
                            const double r = y.norm();
                            if (r > 0) g += rule.weights[k] / r * y;
                          }
                          g *= v.slope;
                        },
                        [&](const SmoothedWell& w) {
                          const double W2 = w.width * w.width + delta_ * delta_;
                          const double amp = w.depth * std::pow(w.width * w.width / W2, 0.5 * n);
                          const Eigen::VectorXd d = x - center_or_origin(w.center, n);
                          g = 2 * amp / W2 * std::exp(-d.squaredNorm() / W2) * d;
                        },
                        [&](const Harmonic& h) { g = h.omega * h.omega * (x - center_or_origin(h.center, n)); },
                        [](const auto&) {}},
             spec_.rough);
  return g;
}

Eigen::MatrixXd MollifiedRough::hessian(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const int n = spec_.dim;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  if (is_per_axis(spec_.rough)) {
    for (int a = 0; a < n; ++a) h(a, a) = mollified_axis(spec_.rough, x[a], delta_).curvature;
    return h;
  }
  std::visit(overloaded{[&](const AbsoluteValue& v) {
                          const Eigen::VectorXd d = x - center_or_origin(v.center, n);
                          if (n == 1) {
                            h(0, 0) = v.slope * 2 / (delta_ * std::sqrt(kPi)) *
                                      std::exp(-d[0] * d[0] / (delta_ * delta_));
                            return;
                          }
                          const double step = 1e-5 * delta_;
                          for (int a = 0; a < n; ++a) {
                            Eigen::VectorXd xp = x, xm = x;
                            xp[a] += step;
                            xm[a] -= step;
                            h.col(a) = (gradient(xp) - gradient(xm)) / (2 * step);
                          }
                          h = 0.5 * (h + h.transpose()).eval();
                        },
                        [&](const SmoothedWell& w) {
                          const double W2 = w.width * w.width + delta_ * delta_;
                          const double amp = w.depth * std::pow(w.width * w.width / W2, 0.5 * n);
                          const Eigen::VectorXd d = x - center_or_origin(w.center, n);
                          const double e = std::exp(-d.squaredNorm() / W2);
                          h = 2 * amp / W2 * e *
                              (Eigen::MatrixXd::Identity(n, n) - 2.0 / W2 * d * d.transpose());
                        },
                        [&](const Harmonic& hm) { h = hm.omega * hm.omega * Eigen::MatrixXd::Identity(n, n); },
                        [](const auto&) {}},
             spec_.rough);
  return h;
}

double MollifiedRough::lipschitz_on_box(double halfwidth) const {
  const int n = spec_.dim;
  double lip = 0.0;
  if (n == 1) {
    const int samples = std::max(4000, static_cast<int>(40 * halfwidth / delta_));
    Eigen::VectorXd x(1);
    for (int i = 0; i <= samples; ++i) {
      x[0] = -halfwidth + 2 * halfwidth * i / samples;
      lip = std::max(lip, std::abs(hessian(x)(0, 0)));
    }
    return lip;
  }
  // axis-aligned sweeps through the origin and the box corners' diagonal
  const int samples = std::max(400, static_cast<int>(8 * halfwidth / delta_));
  for (int a = 0; a < n; ++a)
    for (int i = 0; i <= samples; ++i) {
      Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 0.5 * delta_);
      x[a] = -halfwidth + 2 * halfwidth * i / samples;
      lip = std::max(lip, hessian(x).operatorNorm());
    }
  return lip;
}

MollifiedGradientField mollified_gradient(const PotentialSpec& spec, double delta, const SpaceGrid& grid) {
  MollifiedRough m(spec, delta);
  MollifiedGradientField out;
  out.components.assign(spec.dim, RealField(grid.size()));
  for (Index f = 0; f < grid.size(); ++f) {
    const Eigen::VectorXd g = m.gradient(grid.point(f));
    for (int a = 0; a < spec.dim; ++a) out.components[a][f] = g[a];
  }
  out.lipschitz = m.lipschitz_on_box(grid.halfwidth());
  out.resolution_warning = delta < grid.spacing();
  return out;
}

PotentialReport validate_potential(const PotentialSpec& spec, const SpaceGrid& box) {
  validate(spec);
  PotentialReport r;
  r.has_rough = !spec.rough_is_zero();
  r.globally_bounded = spec.rough_globally_bounded();
  const int n = spec.dim;
  const int fine = 8 * box.points();
  const double L = box.halfwidth();
  const double h = 2 * L / fine;

  if (r.has_rough) {
    r.gradient_total_variation.assign(n, 0.0);
    // every axis line through the grid nodes of the other coordinates
    Index lines = 1;
    for (int a = 1; a < n; ++a) lines *= box.points();
    for (int axis = 0; axis < n; ++axis) {
      for (Index line = 0; line < lines; ++line) {
        Eigen::VectorXd x(n);
        Index rest = line;
        for (int a = n - 1; a >= 0; --a) {
          if (a == axis) continue;
          x[a] = box.coordinate(static_cast<int>(rest % box.points()));
          rest /= box.points();
        }
        double tv = 0.0, prev = 0.0;
        for (int i = 0; i < fine; ++i) {
          x[axis] = -L + (i + 0.5) * h;
          const double u = eval_rough(spec, x);
          const auto g = eval_rough_gradient(spec, x);
          r.rough_sup = std::max(r.rough_sup, std::abs(u));
          r.lipschitz = std::max(r.lipschitz, g.value.norm());
          r.growth_ratio = std::max(r.growth_ratio, g.value.norm() / (1 + x.norm()));
          if (i > 0) tv += std::abs(g.value[axis] - prev);
          prev = g.value[axis];
        }
        r.gradient_total_variation[axis] = std::max(r.gradient_total_variation[axis], tv);
      }
    }
    if (!r.globally_bounded) r.notes.push_back("rough part bounded on the box only (unbounded globally)");
    if (!std::isfinite(r.rough_sup) || !std::isfinite(r.lipschitz)) {
      r.pass = false;
      r.notes.push_back("rough part not finite on the box");
    }
  }

  r.has_singular = spec.has_singular_part();
  if (r.has_singular) {
    const SingularSet set(spec);
    r.singular_constant = set.lower_bound_constant();
    r.min_singular_distance = std::numeric_limits<double>::infinity();
    for (Index f = 0; f < box.size(); ++f) {
      const Eigen::VectorXd x = box.point(f);
      const double d = set.distance(x);
      r.min_singular_distance = std::min(r.min_singular_distance, d);
      if (d == 0.0) continue;
      const double us = eval_singular(spec, x);
      if (us < 0) r.repulsive = false;
      if (us * d < r.singular_constant - 1e-12) {
        r.pass = false;
        r.notes.push_back("U_s dist(x,S) dropped below the recorded constant");
        break;
      }
    }
    if (!r.repulsive) r.pass = false;
  }
  return r;
}

}  // namespace semiclassic
