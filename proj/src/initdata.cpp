#include "semiclassic/initdata.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include "semiclassic/phase_space.hpp"

namespace semiclassic {

// ---- Hermite ------------------------------------------------------------------

Eigen::MatrixXd hermite_functions(const SpaceGrid& grid, double epsilon, int j_max) {
  if (grid.dim() != 1) throw ParameterError("hermite_functions: one-dimensional grids only");
  if (!(epsilon > 0) || j_max < 0) throw ParameterError("hermite_functions: bad epsilon or order");
  constexpr double big = 1e100;
  const double log_big = std::log(big);
  Eigen::MatrixXd out(grid.points(), j_max + 1);
  for (int i = 0; i < grid.points(); ++i) {
    const double t = grid.coordinate(i) / std::sqrt(epsilon);
    double lg = -0.5 * t * t - 0.25 * std::log(kPi * epsilon);
    double prev = 0.0, cur = 1.0;
    for (int j = 0; j <= j_max; ++j) {
      out(i, j) = cur == 0.0 ? 0.0 : std::copysign(std::exp(lg + std::log(std::abs(cur))), cur);
      const double next = std::sqrt(2.0 / (j + 1)) * t * cur - std::sqrt(static_cast<double>(j) / (j + 1)) * prev;
      prev = cur;
      cur = next;
      if (std::abs(cur) > big) {
        cur /= big;
        prev /= big;
        lg += log_big;
      }
    }
  }
  return out;
}

HermiteBuild build_hermite(const HermiteSpec& spec, const SpaceGrid& grid) {
  if (grid.dim() != 1) throw ParameterError("build_hermite: the Hermite family is one-dimensional");
  const double eps = spec.epsilon;
  if (!(eps > 0)) throw ParameterError("build_hermite: epsilon must be positive");
  std::vector<int> idx;
  std::vector<double> mu;
  switch (spec.rule) {
    case HermiteSpec::Rule::single:
      if (spec.single_index < 0) throw ParameterError("build_hermite: negative index");
      idx.push_back(spec.single_index);
      mu.push_back(1.0);
      break;
    case HermiteSpec::Rule::uniform_band: {
      if (!(spec.width > 0)) throw ParameterError("build_hermite: band width must be positive");
      for (int j = 0; eps * (2 * j + 1) < spec.center + spec.width; ++j)
        if (std::abs(eps * (2 * j + 1) - spec.center) < spec.width) idx.push_back(j);
      mu.assign(idx.size(), 1.0);
      break;
    }
    case HermiteSpec::Rule::smoothed_band: {
      if (!(spec.width > 0)) throw ParameterError("build_hermite: band width must be positive");
      for (int j = 0;; ++j) {
        const double d = (eps * (2 * j + 1) - spec.center) / spec.width;
        const double v = std::exp(-0.5 * d * d);
        if (v >= spec.truncation) {
          idx.push_back(j);
          mu.push_back(v);
        } else if (d > 0) {
          break;
        }
      }
      break;
    }
  }
  if (idx.empty()) throw ParameterError("build_hermite: the band contains no Hermite level");
  const int jmax = idx.back();
  const double turning = std::sqrt(eps * (2 * jmax + 1));
  if (turning > 0.8 * grid.halfwidth())
    throw ResolutionError("build_hermite: turning point " + std::to_string(turning) +
                          " of the top level exceeds 0.8 L; enlarge the box");
  if (std::sqrt(eps * (2 * jmax + 1)) / eps > 0.75 * grid.max_wavenumber())
    throw ResolutionError("build_hermite: top level oscillates faster than the grid resolves; raise N");

  const Eigen::MatrixXd all = hermite_functions(grid, eps, jmax);
  Eigen::VectorXd w(idx.size());
  Eigen::MatrixXcd modes(grid.size(), idx.size());
  double total = 0.0;
  for (double m : mu) total += m;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    w[k] = mu[k] / total;
    modes.col(k) = all.col(idx[k]).cast<Complex>();
  }
  HermiteBuild b{MixedState(grid, eps, w, std::move(modes)), idx, w.maxCoeff() / eps, 0.0, turning};
  for (std::size_t k = 0; k < idx.size(); ++k) b.energy_moment += eps * eps * w[k] * idx[k] * double(idx[k]);
  return b;
}

double hermite_annulus_mass_exact(const HermiteBuild& build, double a, double half_width) {
  const double eps = build.state.epsilon();
  const double lo = std::max(0.0, a - half_width) / (2 * eps);
  const double hi = std::max(0.0, a + half_width) / (2 * eps);
  double m = 0.0;
  for (std::size_t k = 0; k < build.indices.size(); ++k) {
    const double shape = build.indices[k] + 1.0;
    const double p_hi = boost::math::gamma_p(shape, hi);
    const double p_lo = lo > 0 ? boost::math::gamma_p(shape, lo) : 0.0;
    m += build.state.weights()[k] * (p_hi - p_lo);
  }
  return m;
}

// ---- windows and symbols -------------------------------------------------------

double window_value(WindowProfile w, double u) {
  if (w == WindowProfile::gaussian) return std::pow(kPi, -0.25) * std::exp(-0.5 * u * u);
  if (std::abs(u) >= 2) return 0.0;
  return std::sqrt(32.0 / 35.0) * std::pow(std::cos(0.25 * kPi * u), 4);
}

double window_h2_norm(WindowProfile w) {
  const int count = 40001;
  const double half = w == WindowProfile::gaussian ? 12.0 : 2.0, h = 2 * half / (count - 1);
  auto f = [&](double u) { return window_value(w, u); };
  double s = 0.0;
  const double d = 1e-3;
  for (int i = 0; i < count; ++i) {
    const double u = -half + i * h;
    const double v = f(u);
    const double d1 = (f(u + d) - f(u - d)) / (2 * d);
    const double d2 = (f(u + d) - 2 * v + f(u - d)) / (d * d);
    s += (v * v + d1 * d1 + d2 * d2) * h;
  }
  return std::sqrt(s);
}

std::string to_string(WindowProfile w) { return w == WindowProfile::gaussian ? "gaussian" : "raised_cosine"; }

WindowProfile window_from_string(const std::string& name) {
  if (name == "gaussian") return WindowProfile::gaussian;
  if (name == "raised_cosine") return WindowProfile::raised_cosine;
  throw ConfigError("unknown window profile '" + name + "'");
}

Eigen::VectorXd SymbolSpec::q_center() const { return q0.size() ? q0 : Eigen::VectorXd::Zero(dim); }
Eigen::VectorXd SymbolSpec::w_center() const { return w0.size() ? w0 : Eigen::VectorXd::Zero(dim); }

double SymbolSpec::operator()(const Eigen::VectorXd& q, const Eigen::VectorXd& w) const {
  const Eigen::VectorXd dq = q - q_center(), dw = w - w_center();
  switch (kind) {
    case Kind::gaussian:
      return std::exp(-(dq.squaredNorm() + dw.squaredNorm()) / (2 * s * s)) / std::pow(2 * kPi * s * s, dim);
    case Kind::cell: {
      const double h = 0.5 * side;
      if (dq.lpNorm<Eigen::Infinity>() > h || dw.lpNorm<Eigen::Infinity>() > h) return 0.0;
      return std::pow(side, -2 * dim);
    }
    case Kind::heavy_tail: {
      // normalising constant of (1 + r^2/s^2)^{-beta} in m = 2n dims:
      // s^m pi^{m/2} Gamma(beta - m/2) / Gamma(beta)
      const int m = 2 * dim;
      const double beta = dim + 1.5;
      const double z = std::pow(s, m) * std::pow(kPi, 0.5 * m) * std::tgamma(beta - 0.5 * m) / std::tgamma(beta);
      return std::pow(1 + (dq.squaredNorm() + dw.squaredNorm()) / (s * s), -beta) / z;
    }
    case Kind::annulus: {
      if (dim != 1) throw ParameterError("annulus symbol: one-dimensional only");
      const double r2 = q.squaredNorm() + w.squaredNorm();
      return std::abs(r2 - s) < 0.5 * side ? 1.0 / (kPi * side) : 0.0;
    }
  }
  return 0.0;
}

double SymbolSpec::sup() const {
  switch (kind) {
    case Kind::gaussian: return std::pow(2 * kPi * s * s, -dim);
    case Kind::cell: return std::pow(side, -2 * dim);
    case Kind::heavy_tail: return (*this)(q_center(), w_center());
    case Kind::annulus: return 1.0 / (kPi * side);
  }
  return 0.0;
}

double SymbolSpec::support_radius() const {
  switch (kind) {
    case Kind::gaussian: return s * std::sqrt(2 * std::log(1e16));
    case Kind::cell: return 0.5 * side;
    case Kind::heavy_tail: return 20 * s;
    case Kind::annulus: return std::sqrt(s + 0.5 * side);
  }
  return 0.0;
}

std::string to_string(SymbolSpec::Kind k) {
  switch (k) {
    case SymbolSpec::Kind::gaussian: return "gaussian";
    case SymbolSpec::Kind::cell: return "cell";
    case SymbolSpec::Kind::heavy_tail: return "heavy_tail";
    case SymbolSpec::Kind::annulus: return "annulus";
  }
  return "?";
}

SymbolSpec::Kind symbol_kind_from_string(const std::string& name) {
  if (name == "gaussian") return SymbolSpec::Kind::gaussian;
  if (name == "cell") return SymbolSpec::Kind::cell;
  if (name == "heavy_tail") return SymbolSpec::Kind::heavy_tail;
  if (name == "annulus") return SymbolSpec::Kind::annulus;
  throw ConfigError("unknown symbol '" + name + "'");
}

// ---- Toeplitz ------------------------------------------------------------------------

ComplexField toeplitz_packet(const SpaceGrid& grid, double epsilon, double alpha, WindowProfile window,
                             const Eigen::VectorXd& w, const Eigen::VectorXd& q) {
  const int n = grid.dim();
  if (w.size() != n || q.size() != n) throw ParameterError("toeplitz_packet: centre dimension mismatch");
  if (!(alpha > 0 && alpha < 1)) throw ParameterError("toeplitz_packet: alpha must lie in (0, 1)");
  const double sig = std::pow(epsilon, alpha);
  const double norm = std::pow(sig, -0.5 * n);
  // separable: per-axis tables
  std::vector<Eigen::VectorXcd> axis(n);
  for (int a = 0; a < n; ++a) {
    axis[a].resize(grid.points());
    for (int i = 0; i < grid.points(); ++i) {
      const double x = grid.coordinate(i);
      axis[a][i] = window_value(window, (x - q[a]) / sig) * std::polar(1.0, w[a] * x / epsilon);
    }
  }
  ComplexField out(grid.size());
  for (Index f = 0; f < grid.size(); ++f) {
    const MultiIndex idx = grid.unravel(f);
    Complex v = norm;
    for (int a = 0; a < n; ++a) v *= axis[a][idx[a]];
    out[f] = v;
  }
  return out;
}

namespace {

// nodes of a 2n-dim tensor lattice; calls f(q, w, weight) for each node
template <typename F>
void for_each_node(const SymbolSpec& chi, double h_nominal, F f, double* spacing_out) {
  const int n = chi.dim;
  std::vector<Eigen::VectorXd> axes(2 * n);
  double weight_const = -1.0;
  double h = h_nominal;
  if (chi.kind == SymbolSpec::Kind::cell) {
    const int count = std::max(1, static_cast<int>(std::lround(chi.side / h_nominal)));
    h = chi.side / count;
    const Eigen::VectorXd c0 = chi.q_center(), c1 = chi.w_center();
    for (int a = 0; a < 2 * n; ++a) {
      const double c = a < n ? c1[a] : c0[a - n];  // w axes first, then q
      axes[a].resize(count);
      for (int k = 0; k < count; ++k) axes[a][k] = c - 0.5 * chi.side + (k + 0.5) * h;
    }
    weight_const = std::pow(static_cast<double>(count), -2 * n);
  } else {
    const double r = chi.support_radius();
    const int half = static_cast<int>(std::ceil(r / h));
    const Eigen::VectorXd c0 = chi.kind == SymbolSpec::Kind::annulus ? Eigen::VectorXd::Zero(n) : chi.q_center();
    const Eigen::VectorXd c1 = chi.kind == SymbolSpec::Kind::annulus ? Eigen::VectorXd::Zero(n) : chi.w_center();
    for (int a = 0; a < 2 * n; ++a) {
      const double c = a < n ? c1[a] : c0[a - n];
      axes[a].resize(2 * half + 1);
      for (int k = -half; k <= half; ++k) axes[a][k + half] = c + k * h;
    }
  }
  if (spacing_out) *spacing_out = h;
  const double cell = std::pow(h, 2 * n);
  std::vector<int> idx(2 * n, 0);
  Eigen::VectorXd q(n), w(n);
  while (true) {
    for (int a = 0; a < n; ++a) {
      w[a] = axes[a][idx[a]];
      q[a] = axes[n + a][idx[n + a]];
    }
    const double weight = weight_const > 0 ? weight_const : chi(q, w) * cell;
    f(q, w, weight);
    int a = 2 * n - 1;
    while (a >= 0 && ++idx[a] == axes[a].size()) idx[a--] = 0;
    if (a < 0) break;
  }
}

}  // namespace

ToeplitzBuild build_toeplitz(const ToeplitzSpec& spec, const SpaceGrid& grid) {
  const int n = grid.dim();
  if (spec.chi.dim != n) throw ParameterError("build_toeplitz: symbol and grid dimensions differ");
  if (!(spec.epsilon > 0)) throw ParameterError("build_toeplitz: epsilon must be positive");
  const double h = spec.spacing_factor * std::sqrt(spec.epsilon);
  const double floor = 1e-14 * spec.chi.sup() * std::pow(h, 2 * n);
  std::vector<Eigen::VectorXd> qs, ws;
  std::vector<double> coef;
  double spacing = h;
  for_each_node(
      spec.chi, h,
      [&](const Eigen::VectorXd& q, const Eigen::VectorXd& w, double weight) {
        if (weight > floor) {
          qs.push_back(q);
          ws.push_back(w);
          coef.push_back(weight);
        }
      },
      &spacing);
  if (coef.empty()) throw ParameterError("build_toeplitz: the symbol vanishes on the lattice");
  if (coef.size() > 40000) throw ParameterError("build_toeplitz: (w, q) lattice too large; raise epsilon");

  Eigen::VectorXd a(coef.size());
  Eigen::MatrixXcd vecs(grid.size(), coef.size());
  for (std::size_t c = 0; c < coef.size(); ++c) {
    a[c] = coef[c];
    vecs.col(c) = toeplitz_packet(grid, spec.epsilon, spec.alpha, spec.window, ws[c], qs[c]).matrix();
  }
  // raw trace check before the state constructor renormalises
  double raw = 0.0;
  for (Index c = 0; c < a.size(); ++c) raw += a[c] * vecs.col(c).squaredNorm() * grid.cell_volume();
  if (std::abs(raw - 1.0) > spec.trace_tolerance)
    throw ResolutionError("build_toeplitz: discrete trace " + std::to_string(raw) +
                          " misses 1; refine the (w, q) lattice (spacing_factor below " +
                          std::to_string(spec.spacing_factor) + ") or enlarge the box");
  ProjectorSum ps = diagonalize_projector_sum(grid, spec.epsilon, a, vecs, spec.truncation);
  ToeplitzBuild b{std::move(ps.state), static_cast<Index>(coef.size()), spacing, ps.raw_trace, ps.top_eigenvalue,
                  spec.chi.sup() * std::pow(2 * kPi * spec.epsilon, n)};
  return b;
}

ComplexField resolution_of_identity_apply(const SpaceGrid& grid, double epsilon, double alpha, WindowProfile window,
                                          const ComplexField& v, double spacing, double q_half, double w_half) {
  const int n = grid.dim();
  if (v.size() != grid.size()) throw ParameterError("resolution_of_identity_apply: vector size mismatch");
  const int kq = static_cast<int>(std::floor(q_half / spacing)), kw = static_cast<int>(std::floor(w_half / spacing));
  ComplexField acc = ComplexField::Zero(grid.size());
  std::vector<int> idx(2 * n);
  for (int a = 0; a < n; ++a) idx[a] = -kw, idx[n + a] = -kq;
  Eigen::VectorXd q(n), w(n);
  while (true) {
    for (int a = 0; a < n; ++a) {
      w[a] = idx[a] * spacing;
      q[a] = idx[n + a] * spacing;
    }
    const ComplexField psi = toeplitz_packet(grid, epsilon, alpha, window, w, q);
    const Complex ip = (psi.conjugate() * v).sum() * grid.cell_volume();
    acc += ip * psi;
    int a = 2 * n - 1;
    while (a >= 0 && ++idx[a] > (a < n ? kw : kq)) idx[a] = a < n ? -kw : -kq, --a;
    if (a < 0) break;
  }
  return acc * (std::pow(spacing, 2 * n) / std::pow(epsilon, n));
}

PhaseField sample_symbol(const SymbolSpec& chi, const PhaseLattice& lattice, double epsilon) {
  if (chi.dim != lattice.dim) throw ParameterError("sample_symbol: dimension mismatch");
  RealField v(lattice.size());
  for (Index ix = 0; ix < lattice.x_size(); ++ix) {
    const Eigen::VectorXd q = lattice.x_point(ix);
    for (Index ip = 0; ip < lattice.p_size(); ++ip) v[ix * lattice.p_size() + ip] = chi(q, lattice.p_point(ip));
  }
  return make_phase_field(lattice, std::move(v), FieldTag::classical, epsilon);
}

SymbolMomentReport symbol_moment_check(const SymbolSpec& chi, const PotentialSpec* potential) {
  const int n = chi.dim;
  SymbolMomentReport r;
  std::optional<SingularSet> set;
  if (potential && potential->has_singular_part()) {
    set.emplace(*potential);
    r.distance_term_used = true;
  } else {
    r.note = "no singular set: the inverse-square distance term is vacuous and skipped";
  }
  const int per_axis = n == 1 ? 400 : n == 2 ? 40 : 14;
  const double base = chi.kind == SymbolSpec::Kind::cell ? chi.side : 4 * chi.s;
  const Eigen::VectorXd zq = chi.q_center(), zw = chi.w_center();
  for (double factor : {2.0, 4.0, 8.0, 16.0}) {
    const double R = factor * base;
    const double h = 2 * R / per_axis;
    std::vector<int> idx(2 * n, 0);
    Eigen::VectorXd q(n), w(n);
    double m = 0.0;
    while (true) {
      for (int a = 0; a < n; ++a) {
        w[a] = zw[a] - R + (idx[a] + 0.5) * h;
        q[a] = zq[a] - R + (idx[n + a] + 0.5) * h;
      }
      const double c = chi(q, w);
      if (c > 0) {
        double g = std::pow(w.squaredNorm(), 2);
        if (set) {
          const double d = set->distance(q);
          if (d > 0) g += 1 / (d * d);
        }
        m += g * c;
      }
      int a = 2 * n - 1;
      while (a >= 0 && ++idx[a] == per_axis) idx[a--] = 0;
      if (a < 0) break;
    }
    r.radii.push_back(R);
    r.partial_moments.push_back(m * std::pow(h, 2 * n));
  }
  r.moment = r.partial_moments.back();
  const double last = r.partial_moments.back(), before = r.partial_moments[r.partial_moments.size() - 2];
  // a convergent integral has stopped growing once the cube holds the bulk
  r.finite = std::isfinite(last) && last - before <= 0.05 * std::max(last, 1e-300);
  if (!r.finite) r.note += (r.note.empty() ? "" : "; ") + std::string("moment keeps growing with the cube");
  return r;
}

// ---- validators ------------------------------------------------------------------------

AssumptionReport validate_assumptions(const MixedState& state, const PotentialSpec& potential,
                                      const AssumptionOptions& options) {
  AssumptionReport r;
  const int n = state.grid().dim();
  const double epsn = std::pow(state.epsilon(), n);
  r.h2sum = observable_expectation(state, potential, Observable::hamiltonian_squared);
  r.h2_pass = std::isfinite(r.h2sum) && r.h2sum <= options.h2_limit;
  r.disop_constant = gram_top_eigenvalue(state) / epsn;
  r.weight_constant = state.weights().maxCoeff() / epsn;
  r.disop_pass = r.disop_constant <= options.disop_limit;
  if (!r.disop_pass)
    r.notes.push_back("operator bound constant " + std::to_string(r.disop_constant) + " exceeds the admitted " +
                      std::to_string(options.disop_limit));

  std::vector<double> radii;
  for (double R : options.radii)
    if (R < state.grid().halfwidth()) radii.push_back(R);
  r.tightness = tightness_profile(state, radii);
  r.tightness_pass = !r.tightness.empty();
  for (std::size_t k = 1; k < r.tightness.size(); ++k)
    if (r.tightness[k].half_sum > r.tightness[k - 1].half_sum + 1e-14) r.tightness_pass = false;
  if (!r.tightness.empty() && r.tightness.back().half_sum > options.tightness_tail) {
    r.tightness_pass = false;
    r.notes.push_back("Husimi tail outside R=" + std::to_string(r.tightness.back().radius) + " is " +
                      std::to_string(r.tightness.back().half_sum));
  }

  if (options.target) {
    if (n != 1) {
      r.notes.push_back("target distance needs the full Husimi lattice, computed at n = 1 only");
    } else {
      PhaseField hus = husimi_via_convolution(wigner(state));
      r.husimi_mass = hus.quadrature();
      PhaseField target = sample_symbol(*options.target, hus.lattice, state.epsilon());
      hus.values /= hus.quadrature();
      target.values /= target.quadrature();
      hus.mass = target.mass = 1.0;
      DictionaryOptions d = options.dictionary;
      d.dim = n;
      r.target_distance = dP(hus, target, build_dictionary(d));
      r.target_pass = std::isfinite(r.target_distance);
    }
  }
  r.pass = r.h2_pass && r.disop_pass && r.tightness_pass && r.target_pass;
  return r;
}

}  // namespace semiclassic
