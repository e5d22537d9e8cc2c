#include "semiclassic/residuals_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "semiclassic/phase_space.hpp"

namespace semiclassic {
namespace {

// One separable summand of a pairing weight: coef * prod_a x_tab[a][i_a] * prod_a y_tab[a][m_a + mmax]
struct WeightTerm {
  Complex coef = 1.0;
  std::vector<Eigen::VectorXd> x_tab;
  std::vector<Eigen::VectorXcd> y_tab;
};

enum class Slot { value, derivative };
enum class YSlot { fourier, times_u, derivative };

// rho(x + s, x - s) for x on the grid, s on the half-spaced lattice
class OffDiagonal {
 public:
  OffDiagonal(const MixedState& state, int stride, double significance)
      : state_(state), grid_(state.grid()), stride_(stride), up_(half_grid_modes(state)) {
    const int n = grid_.dim();
    M_ = 2 * grid_.points();
    diag_ = up_.colwise().squaredNorm().transpose();
    const double cut = significance * diag_.maxCoeff();
    significant_.assign(diag_.size(), 0);
    lo_.assign(n, M_);
    hi_.assign(n, -1);
    std::vector<int> d(n);
    for (Index f = 0; f < diag_.size(); ++f) {
      if (!(diag_[f] > cut)) continue;
      significant_[f] = 1;
      Index rest = f;
      for (int a = n - 1; a >= 0; --a) {
        d[a] = static_cast<int>(rest % M_);
        rest /= M_;
      }
      for (int a = 0; a < n; ++a) {
        lo_[a] = std::min(lo_[a], d[a]);
        hi_[a] = std::max(hi_[a], d[a]);
      }
    }
  }

  int stride() const { return stride_; }
  double dx() const { return grid_.spacing(); }
  double dy() const { return stride_ * grid_.spacing() / state_.epsilon(); }
  double y_of(int m) const { return m * grid_.spacing() / state_.epsilon(); }
  double half_coordinate(int idx) const { return grid_.coordinate(0) + 0.5 * idx * grid_.spacing(); }
  int half_extent() const { return M_; }

  int mmax_for(double y_max) const {
    int m = static_cast<int>(std::ceil(y_max * state_.epsilon() / grid_.spacing()));
    m = (m + stride_ - 1) / stride_ * stride_;
    if (0.5 * m * grid_.spacing() > 2 * grid_.halfwidth())
      throw ResolutionError("pairing: the y cut-off " + std::to_string(y_max) +
                            " needs shifts beyond the box; enlarge L or raise epsilon");
    return m;
  }

  // f(x_index multi, m multi, a_flat, b_flat, rho)
  template <typename F>
  void for_each(int mmax, F&& f) const {
    const int n = grid_.dim();
    if (hi_[0] < 0) return;
    std::vector<int> ilo(n), ihi(n);
    for (int a = 0; a < n; ++a) {
      ilo[a] = (lo_[a] + 1) / 2;
      ihi[a] = std::min(grid_.points() - 1, hi_[a] / 2);
    }
    const int mcount = 2 * (mmax / stride_) + 1;
    std::vector<int> i(n), m(n), mi(n, 0);
    for (int a = 0; a < n; ++a) i[a] = ilo[a];
    while (true) {
      std::fill(mi.begin(), mi.end(), 0);
      while (true) {
        bool ok = true;
        Index fa = 0, fb = 0;
        for (int a = 0; a < n && ok; ++a) {
          m[a] = -mmax + stride_ * mi[a];
          const int ia = 2 * i[a] + m[a], ib = 2 * i[a] - m[a];
          if (ia < 0 || ib < 0 || ia > M_ - 2 || ib > M_ - 2) ok = false;
          fa = fa * M_ + ia;
          fb = fb * M_ + ib;
        }
        if (ok && significant_[fa] && significant_[fb]) f(i, m, fa, fb, Complex(up_.col(fb).dot(up_.col(fa))));
        int a = n - 1;
        while (a >= 0 && ++mi[a] == mcount) mi[a--] = 0;
        if (a < 0) break;
      }
      int a = n - 1;
      while (a >= 0 && ++i[a] > ihi[a]) i[a] = ilo[a], --a;
      if (a < 0) break;
    }
  }

 private:
  const MixedState& state_;
  const SpaceGrid& grid_;
  int stride_;
  int M_ = 0;
  Eigen::MatrixXcd up_;
  Eigen::VectorXd diag_;
  std::vector<char> significant_;
  std::vector<int> lo_, hi_;
};

int resolve_stride(const PairingOptions& o, const PotentialSpec* potential) {
  if (o.stride == 1 || o.stride == 2) return o.stride;
  if (o.stride != 0) throw ParameterError("pairing: stride must be 0, 1 or 2");
  return potential && potential->has_singular_part() ? 2 : 1;
}

double y_extent(const TestFunction& phi, double tail) {
  double y = 0.0;
  for (int a = 0; a < phi.dim; ++a) y = std::max(y, phi.factors[phi.dim + a].fourier_extent(tail));
  return y;
}

Eigen::VectorXd x_table(const Factor& f, const SpaceGrid& g, Slot slot) {
  Eigen::VectorXd t(g.points());
  for (int i = 0; i < g.points(); ++i)
    t[i] = slot == Slot::value ? f.value(g.coordinate(i)) : f.derivative(g.coordinate(i));
  return t;
}

Eigen::VectorXcd y_table(const Factor& f, const OffDiagonal& od, int mmax, YSlot slot) {
  Eigen::VectorXcd t(2 * mmax + 1);
  for (int m = -mmax; m <= mmax; ++m) {
    const double y = od.y_of(m);
    switch (slot) {
      case YSlot::fourier: t[m + mmax] = f.fourier(y); break;
      case YSlot::times_u: t[m + mmax] = f.fourier_times_u(y); break;
      case YSlot::derivative: t[m + mmax] = f.fourier_derivative(y); break;
    }
  }
  return t;
}

WeightTerm plain_term(const TestFunction& phi, const SpaceGrid& g, const OffDiagonal& od, int mmax) {
  WeightTerm w;
  for (int a = 0; a < phi.dim; ++a) {
    w.x_tab.push_back(x_table(phi.factors[a], g, Slot::value));
    w.y_tab.push_back(y_table(phi.factors[phi.dim + a], od, mmax, YSlot::fourier));
  }
  return w;
}

// sum_a with axis a replaced: x slot -> derivative, y slot -> `ys`
std::vector<WeightTerm> axis_terms(const TestFunction& phi, const SpaceGrid& g, const OffDiagonal& od, int mmax,
                                   YSlot ys, Complex coef) {
  const WeightTerm base = plain_term(phi, g, od, mmax);
  std::vector<WeightTerm> out;
  for (int a = 0; a < phi.dim; ++a) {
    WeightTerm w = base;
    w.coef = coef;
    w.x_tab[a] = x_table(phi.factors[a], g, Slot::derivative);
    w.y_tab[a] = y_table(phi.factors[phi.dim + a], od, mmax, ys);
    out.push_back(std::move(w));
  }
  return out;
}

inline Complex eval_terms(const std::vector<WeightTerm>& terms, const std::vector<int>& i, const std::vector<int>& m,
                          int mmax) {
  Complex s = 0.0;
  for (const WeightTerm& w : terms) {
    Complex v = w.coef;
    for (std::size_t a = 0; a < i.size(); ++a) v *= w.x_tab[a][i[a]] * w.y_tab[a][m[a] + mmax];
    s += v;
  }
  return s;
}

double measure(const OffDiagonal& od, int n) {
  return std::pow(od.dx() * od.dy() / (2 * kPi), n);
}

// (2 pi)^{-n} sum w(x,y) rho, for weights without a potential factor
Complex pair_terms(const MixedState& state, const TestFunction& phi, const PairingOptions& options,
                   const std::function<std::vector<WeightTerm>(const OffDiagonal&, int)>& make) {
  const OffDiagonal od(state, resolve_stride(options, nullptr), options.significance);
  const int mmax = od.mmax_for(y_extent(phi, options.tail * 1e-2));
  const std::vector<WeightTerm> terms = make(od, mmax);
  Complex acc = 0.0;
  od.for_each(mmax, [&](const std::vector<int>& i, const std::vector<int>& m, Index, Index, Complex rho) {
    acc += eval_terms(terms, i, m, mmax) * rho;
  });
  return acc * measure(od, state.grid().dim());
}

}  // namespace

Complex error_term_paired(const MixedState& state, const PotentialSpec& potential, const TestFunction& phi,
                          ErrorVariant variant, const PairingOptions& options) {
  const SpaceGrid& g = state.grid();
  const int n = g.dim();
  const double eps = state.epsilon();
  if (potential.dim != n || phi.dim != n) throw ParameterError("error_term_paired: dimension mismatch");
  const OffDiagonal od(state, resolve_stride(options, &potential), options.significance);
  const int mmax = od.mmax_for(y_extent(phi, options.tail));
  const std::vector<WeightTerm> terms{plain_term(phi, g, od, mmax)};

  // potential on the visited half-grid points, computed on demand
  const int M = od.half_extent();
  std::vector<double> u_half(static_cast<std::size_t>(std::pow(M, n)), std::numeric_limits<double>::quiet_NaN());
  Eigen::VectorXd pos(n);
  auto u_at = [&](Index flat) {
    double& u = u_half[flat];
    if (std::isnan(u)) {
      Index rest = flat;
      for (int a = n - 1; a >= 0; --a) {
        pos[a] = od.half_coordinate(static_cast<int>(rest % M));
        rest /= M;
      }
      u = eval_potential(potential, pos);
    }
    return u;
  };
  std::vector<Eigen::VectorXd> grad;
  if (variant == ErrorVariant::remainder) {
    grad.resize(g.size());
    for (Index f = 0; f < g.size(); ++f) grad[f] = eval_gradient(potential, g.point(f)).value;
  }

  Complex acc = 0.0;
  od.for_each(mmax, [&](const std::vector<int>& i, const std::vector<int>& m, Index fa, Index fb, Complex rho) {
    double d = (u_at(fa) - u_at(fb)) / eps;
    if (variant == ErrorVariant::remainder) {
      Index fx = 0;
      for (int a = 0; a < n; ++a) fx = fx * g.points() + i[a];
      for (int a = 0; a < n; ++a) d -= grad[fx][a] * od.y_of(m[a]);
    }
    acc += d * eval_terms(terms, i, m, mmax) * rho;
  });
  return Complex(0, -1) * acc * measure(od, n);
}

double wigner_pairing(const MixedState& state, const TestFunction& phi, const PairingOptions& options) {
  return pair_terms(state, phi, options, [&](const OffDiagonal& od, int mmax) {
           return std::vector<WeightTerm>{plain_term(phi, state.grid(), od, mmax)};
         }).real();
}

double wigner_transport_pairing(const MixedState& state, const TestFunction& phi, const PairingOptions& options) {
  return pair_terms(state, phi, options, [&](const OffDiagonal& od, int mmax) {
           return axis_terms(phi, state.grid(), od, mmax, YSlot::times_u, 1.0);
         }).real();
}

double husimi_pairing(const MixedState& state, const TestFunction& phi, const PairingOptions& options) {
  return wigner_pairing(state, phi.smoothed(state.epsilon()), options);
}

double husimi_transport_pairing(const MixedState& state, const TestFunction& phi, const PairingOptions& options) {
  // G * (p g) = p (G * g) + (eps/2) (G * g)'
  const TestFunction s = phi.smoothed(state.epsilon());
  return pair_terms(state, s, options, [&](const OffDiagonal& od, int mmax) {
           auto t = axis_terms(s, state.grid(), od, mmax, YSlot::times_u, 1.0);
           auto c = axis_terms(s, state.grid(), od, mmax, YSlot::derivative, 0.5 * state.epsilon());
           t.insert(t.end(), c.begin(), c.end());
           return t;
         }).real();
}

double husimi_correction_pairing(const MixedState& state, const TestFunction& phi, const PairingOptions& options) {
  const TestFunction s = phi.smoothed(state.epsilon());
  return pair_terms(state, s, options, [&](const OffDiagonal& od, int mmax) {
           return axis_terms(s, state.grid(), od, mmax, YSlot::derivative, -0.5 * state.epsilon());
         }).real();
}

double TimeWindow::value(double t) const {
  if (t1 <= t0) return 0.0;
  const double s = (2 * t - t0 - t1) / (t1 - t0);
  if (std::abs(s) >= 1) return 0.0;
  return std::exp(1 - 1 / (1 - s * s));
}

double TimeWindow::derivative(double t) const {
  if (t1 <= t0) return 0.0;
  const double s = (2 * t - t0 - t1) / (t1 - t0);
  if (std::abs(s) >= 1) return 0.0;
  const double q = 1 - s * s;
  return value(t) * (-2 * s / (q * q)) * (2 / (t1 - t0));
}

namespace {

template <typename Frame>
ResidualReport integrate_residual(const std::vector<TimedState>& series, TimeWindow w, Frame frame) {
  if (series.size() < 3) throw ParameterError("residual: need at least three frames");
  if (w.t1 <= w.t0) {
    w.t0 = series.front().t;
    w.t1 = series.back().t;
  }
  ResidualReport r;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double t = series[k].t;
    const double left = k > 0 ? t - series[k - 1].t : 0.0;
    const double right = k + 1 < series.size() ? series[k + 1].t - t : 0.0;
    const double weight = 0.5 * (left + right);
    const double th = w.value(t), dth = w.derivative(t);
    if (th == 0.0 && dth == 0.0) continue;
    const auto [value, transport, error, correction] = frame(series[k].state);
    r.time_term += weight * dth * value;
    r.transport_term += weight * th * transport;
    r.error_term += weight * th * error;
    r.correction_term += weight * th * correction;
  }
  r.residual = std::abs(r.time_term + r.transport_term + r.error_term + r.correction_term);
  r.scale = std::max({std::abs(r.time_term), std::abs(r.transport_term), std::abs(r.error_term),
                      std::abs(r.correction_term)});
  return r;
}

}  // namespace

ResidualReport wigner_residual(const std::vector<TimedState>& series, const PotentialSpec& potential,
                               const TestFunction& phi, TimeWindow window, const PairingOptions& options) {
  return integrate_residual(series, window, [&](const MixedState& s) {
    return std::array<double, 4>{wigner_pairing(s, phi, options), wigner_transport_pairing(s, phi, options),
                                 error_term_paired(s, potential, phi, ErrorVariant::full, options).real(), 0.0};
  });
}

ResidualReport husimi_residual(const std::vector<TimedState>& series, const PotentialSpec& potential,
                               const TestFunction& phi, TimeWindow window, const PairingOptions& options) {
  return integrate_residual(series, window, [&](const MixedState& s) {
    const TestFunction smooth = phi.smoothed(s.epsilon());
    return std::array<double, 4>{
        husimi_pairing(s, phi, options), husimi_transport_pairing(s, phi, options),
        error_term_paired(s, potential, smooth, ErrorVariant::full, options).real(),
        husimi_correction_pairing(s, phi, options)};
  });
}

ResidualReport wigner_residual(const std::vector<TimedState>& series, const PotentialSpec& potential,
                               const TestFunctionDictionary& dict, int count) {
  ResidualReport worst;
  for (int k = 0; k < std::min<int>(count, dict.size()); ++k) {
    const ResidualReport r = wigner_residual(series, potential, dict.functions[k]);
    if (r.residual >= worst.residual) worst = r;
  }
  return worst;
}

double fit_order(const std::vector<double>& eps, const std::vector<double>& values) {
  if (eps.size() != values.size() || eps.size() < 2) throw ParameterError("fit_order: need matching series");
  const std::size_t n = eps.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(eps[i]), y = std::log(std::abs(values[i]));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ---- Fourier moments of test functions -------------------------------------

namespace {

// integrate f(y) over the cube [-Y, Y]^n on `per_axis` points
template <typename F>
double cube_integral(int n, double Y, int per_axis, F f) {
  const double h = 2 * Y / (per_axis - 1);
  std::vector<int> idx(n, 0);
  Eigen::VectorXd y(n);
  double s = 0.0;
  while (true) {
    for (int a = 0; a < n; ++a) y[a] = -Y + h * idx[a];
    s += f(y);
    int a = n - 1;
    while (a >= 0 && ++idx[a] == per_axis) idx[a--] = 0;
    if (a < 0) break;
  }
  return s * std::pow(h, n);
}

int points_per_axis(int n) { return n == 1 ? 4001 : n == 2 ? 601 : 121; }

double x_sup_product(const TestFunction& phi) {
  double s = 1.0;
  for (int a = 0; a < phi.dim; ++a) s *= phi.factors[a].sup_abs();
  return s;
}

}  // namespace

double fourier_moment_c1(const TestFunction& phi) {
  const int n = phi.dim;
  const double sup = x_sup_product(phi);
  const double Y = y_extent(phi, 1e-12);
  return cube_integral(n, Y, points_per_axis(n), [&](const Eigen::VectorXd& y) {
    Complex g = 1.0;
    for (int a = 0; a < n; ++a) g *= phi.factors[n + a].fourier(y[a]);
    return y.norm() * sup * std::abs(g);
  });
}

double fourier_moment_c2(const TestFunction& phi) {
  const int n = phi.dim;
  std::vector<double> sup(n), dsup(n);
  for (int a = 0; a < n; ++a) {
    sup[a] = phi.factors[a].sup_abs();
    dsup[a] = phi.factors[a].sup_abs_derivative();
  }
  std::vector<double> lead(n);
  double lx2 = 0.0;
  for (int a = 0; a < n; ++a) {
    lead[a] = dsup[a];
    for (int b = 0; b < n; ++b)
      if (b != a) lead[a] *= sup[b];
    lx2 += lead[a] * lead[a];
  }
  const double Y = y_extent(phi, 1e-12) + 2.0 / phi.factors[n].sigma;
  return cube_integral(n, Y, points_per_axis(n), [&](const Eigen::VectorXd& y) {
    double div = 0.0;
    Complex g = 1.0;
    for (int a = 0; a < n; ++a) g *= phi.factors[n + a].fourier(y[a]);
    for (int a = 0; a < n; ++a) {
      Complex t = phi.factors[n + a].fourier_times_u(y[a]);
      for (int b = 0; b < n; ++b)
        if (b != a) t *= phi.factors[n + b].fourier(y[b]);
      div += lead[a] * std::abs(t);
    }
    return div + 0.5 * y.norm() * std::sqrt(lx2) * std::abs(g);
  });
}

// ---- bound checks ------------------------------------------------------------

namespace {

PotentialSpec rough_only(const PotentialSpec& p) {
  PotentialSpec r = p;
  r.points.clear();
  r.pairs.clear();
  return r;
}

PotentialSpec singular_only(const PotentialSpec& p) {
  PotentialSpec r = p;
  r.rough = ZeroPotential{};
  return r;
}

}  // namespace

BoundEntry time_derivative_bound(const std::vector<TimedState>& series, const PotentialSpec& potential,
                                 const TestFunction& phi, double c1, const PairingOptions& options) {
  if (series.size() < 3) throw ParameterError("time_derivative_bound: need at least three frames");
  const int n = phi.dim;
  std::vector<double> f;
  for (const TimedState& s : series) f.push_back(husimi_pairing(s.state, phi, options));
  double lhs = 0.0;
  for (std::size_t k = 1; k + 1 < series.size(); ++k)
    lhs = std::max(lhs, std::abs(f[k + 1] - f[k - 1]) / (series[k + 1].t - series[k - 1].t));

  const PotentialReport pr = validate_potential(potential, series.front().state.grid());
  const double c1phi = fourier_moment_c1(phi), c2phi = fourier_moment_c2(phi);
  const double tau = std::pow(2 * kPi, -n);
  double cstar = 0.0;
  if (potential.has_singular_part()) {
    double zmin = std::numeric_limits<double>::infinity();
    for (const auto& q : potential.points) zmin = std::min(zmin, q.charge_product);
    for (const auto& q : potential.pairs) zmin = std::min(zmin, q.charge_product / std::sqrt(2.0));
    cstar = tau / zmin;
  }
  BoundEntry e;
  e.name = "time_derivative";
  e.lhs = lhs;
  e.terms = {{"grad_Ub_sup", pr.lipschitz}, {"C1phi", c1phi}, {"C2phi", c2phi}, {"C_star", cstar}, {"C1", c1}};
  e.rhs = pr.lipschitz * tau * c1phi + cstar * c1 * c1phi + tau * c2phi;
  e.pass = e.lhs <= e.rhs;
  return e;
}

BoundReport apriori_bound_check(const std::vector<TimedState>& series, const PotentialSpec& potential,
                                const Factor& phi1, const Factor& phi2, const std::vector<double>& lambdas,
                                double disop_constant, const PairingOptions& options) {
  if (potential.dim != 1) throw ParameterError("apriori_bound_check: the reference check is one-dimensional");
  if (series.empty()) throw ParameterError("apriori_bound_check: empty series");
  const PotentialSpec ub = rough_only(potential);
  const TestFunction phi = make_test_function(1, {phi1, phi2}, "phi1 x phi2");
  double lhs = 0.0;
  for (const TimedState& s : series)
    lhs = std::max(lhs, std::abs(error_term_paired(s.state, ub, phi, ErrorVariant::full, options)));

  const SpaceGrid& g = series.front().state.grid();
  const PotentialReport pr = validate_potential(ub, g);
  // A = U_b phi1 on a fine line around the support of phi1
  const int nx = 20001;
  const double xh = std::min(10 * phi1.sigma, g.halfwidth()), hx = 2 * xh / (nx - 1);
  double grad_a_sup = 0.0, grad_a_l2 = 0.0, dphi1_sup = 0.0;
  Eigen::VectorXd x(1);
  for (int i = 0; i < nx; ++i) {
    x[0] = -xh + i * hx;
    const double u = eval_rough(ub, x);
    const double du = eval_rough_gradient(ub, x).value[0];
    const double ga = du * phi1.value(x[0]) + u * phi1.derivative(x[0]);
    grad_a_sup = std::max(grad_a_sup, std::abs(ga));
    grad_a_l2 += ga * ga * hx;
    dphi1_sup = std::max(dphi1_sup, std::abs(phi1.derivative(x[0])));
  }
  grad_a_l2 = std::sqrt(grad_a_l2);
  const double phi1_l1 = phi1.l1_norm();

  BoundReport report;
  for (double lambda : lambdas) {
    // phi2 hat and its G_lambda smoothing on a y grid
    const double Y = phi2.fourier_extent(1e-14) + 8 * std::sqrt(lambda);
    const int ny = 4001;
    const double hy = 2 * Y / (ny - 1);
    Eigen::VectorXcd f(ny), fs = Eigen::VectorXcd::Zero(ny);
    for (int i = 0; i < ny; ++i) f[i] = phi2.fourier(-Y + i * hy);
    const GaussianKernel gk{lambda, 1};
    const int reach = static_cast<int>(std::ceil(8 * std::sqrt(lambda) / hy));
    for (int i = 0; i < ny; ++i)
      for (int j = std::max(0, i - reach); j <= std::min(ny - 1, i + reach); ++j)
        fs[i] += f[j] * gaussian_eval(gk, (i - j) * hy) * hy;
    double t1 = 0.0, f_l1 = 0.0, z_moment = 0.0, ys_moment = 0.0;
    for (int i = 0; i < ny; ++i) {
      const double y = -Y + i * hy;
      t1 = std::max(t1, std::abs(y) * std::abs(f[i] - fs[i]));
      f_l1 += std::abs(f[i]) * hy;
      z_moment += std::abs(y) * std::abs(f[i]) * hy;
      ys_moment += std::abs(y) * std::abs(fs[i]) * hy;
    }
    BoundEntry e;
    e.name = "apriori lambda=" + std::to_string(lambda);
    e.lhs = lhs;
    const double term1 = phi1_l1 * pr.lipschitz * t1;
    const double term2 = std::sqrt(lambda) * grad_a_sup * f_l1 / std::sqrt(kPi);
    const double term3 = std::sqrt(disop_constant) * grad_a_l2 / std::pow(2 * kPi * lambda, 0.25) * z_moment;
    const double term4 = pr.rough_sup * dphi1_sup * ys_moment;
    e.terms = {{"fourier_gap", term1}, {"sqrt_lambda", term2}, {"disop", term3}, {"commutator", term4}};
    e.rhs = term1 + term2 + term3 + term4;
    e.pass = e.lhs <= e.rhs;
    report.add(std::move(e));
  }
  return report;
}

BoundEntry coulomb_pairing_bound(const MixedState& state, const PotentialSpec& potential, const TestFunction& phi,
                                 const PairingOptions& options) {
  if (potential.points.size() != 1 || !potential.pairs.empty())
    throw ParameterError("coulomb_pairing_bound: expects a single point charge");
  const int n = state.grid().dim();
  const double eps = state.epsilon();
  const PotentialSpec us = singular_only(potential);
  const TestFunction smooth = phi.smoothed(eps);
  PairingOptions o = options;
  o.stride = 2;
  const double lhs = std::abs(error_term_paired(state, us, smooth, ErrorVariant::full, o));

  // the same y lattice as the pairing
  const OffDiagonal od(state, 2, o.significance);
  const int mmax = od.mmax_for(y_extent(smooth, o.tail));
  const double sup = x_sup_product(smooth);
  const int count = 2 * (mmax / 2) + 1;
  std::vector<int> mi(n, 0);
  double ymoment = 0.0;
  while (true) {
    double y2 = 0.0;
    Complex g = 1.0;
    for (int a = 0; a < n; ++a) {
      const double y = od.y_of(-mmax + 2 * mi[a]);
      y2 += y * y;
      g *= smooth.factors[n + a].fourier(y);
    }
    ymoment += std::sqrt(y2) * sup * std::abs(g);
    int a = n - 1;
    while (a >= 0 && ++mi[a] == count) mi[a--] = 0;
    if (a < 0) break;
  }
  ymoment *= std::pow(od.dy(), n);
  const double moment = singular_moment(state, potential).potential_moment;
  const double cstar = std::pow(2 * kPi, -n) / potential.points.front().charge_product;

  BoundEntry e;
  e.name = "coulomb_pairing";
  e.lhs = lhs;
  e.rhs = cstar * ymoment * moment;
  e.terms = {{"C_star", cstar},
             {"y_moment_lattice", ymoment},
             {"y_moment_continuum", fourier_moment_c1(smooth)},
             {"Us2_moment", moment}};
  e.pass = e.lhs <= e.rhs;
  return e;
}

// ---- tightness and singular decay -------------------------------------------

namespace {

std::vector<TightnessRow> tails(const RealField& xm, const std::function<double(Index)>& xinf, double xcell,
                                const RealField& pm, const std::function<double(Index)>& pinf, double pcell,
                                const std::vector<double>& radii) {
  std::vector<TightnessRow> rows;
  for (double R : radii) {
    TightnessRow r;
    r.radius = R;
    for (Index i = 0; i < xm.size(); ++i)
      if (xinf(i) > R) r.x_tail += xm[i] * xcell;
    for (Index i = 0; i < pm.size(); ++i)
      if (pinf(i) > R) r.p_tail += pm[i] * pcell;
    r.half_sum = 0.5 * (r.x_tail + r.p_tail);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

std::vector<TightnessRow> tightness_profile(const MixedState& state, const std::vector<double>& radii, double c2) {
  const SpaceGrid& g = state.grid();
  const PhaseLattice lat = wigner_lattice(g, state.epsilon());
  auto rows = tails(
      smoothed_position_density(state), [&](Index i) { return g.point(i).lpNorm<Eigen::Infinity>(); },
      g.cell_volume(), smoothed_momentum_density(state),
      [&](Index i) { return lat.p_point(i).lpNorm<Eigen::Infinity>(); }, std::pow(lat.p.spacing, g.dim()), radii);
  if (!std::isnan(c2))
    for (auto& r : rows) r.p_bound = (c2 + 0.5 * g.dim()) / (r.radius * r.radius);
  return rows;
}

std::vector<TightnessRow> tightness_profile(const PhaseField& field, const std::vector<double>& radii) {
  const PhaseLattice& lat = field.lattice;
  return tails(
      marginal(field, Marginal::position), [&](Index i) { return lat.x_point(i).lpNorm<Eigen::Infinity>(); },
      std::pow(lat.x.spacing, lat.dim), marginal(field, Marginal::momentum),
      [&](Index i) { return lat.p_point(i).lpNorm<Eigen::Infinity>(); }, std::pow(lat.p.spacing, lat.dim), radii);
}

SingularDecay singular_decay_moment(const MixedState& state, const PotentialSpec& potential) {
  const SpaceGrid& g = state.grid();
  const PhaseLattice lat = wigner_lattice(g, state.epsilon());
  SingularDecay d;
  const RealField pm = smoothed_momentum_density(state);
  for (Index q = 0; q < pm.size(); ++q) d.p4_moment += std::pow(lat.p_point(q).squaredNorm(), 2) * pm[q];
  d.p4_moment *= std::pow(lat.p.spacing, g.dim());
  const SingularSet set(potential);
  if (!set.empty()) {
    const RealField xm = smoothed_position_density(state);
    for (Index i = 0; i < xm.size(); ++i) {
      const double r = set.distance(g.point(i));
      if (r > 0) d.distance_moment += xm[i] / (r * r);
    }
    d.distance_moment *= g.cell_volume();
  }
  return d;
}

SingularDecay singular_decay_moment(const PhaseField& field, const PotentialSpec& potential) {
  const PhaseLattice& lat = field.lattice;
  SingularDecay d;
  const RealField pm = marginal(field, Marginal::momentum);
  for (Index q = 0; q < pm.size(); ++q) d.p4_moment += std::pow(lat.p_point(q).squaredNorm(), 2) * pm[q];
  d.p4_moment *= std::pow(lat.p.spacing, lat.dim);
  const SingularSet set(potential);
  if (!set.empty()) {
    const RealField xm = marginal(field, Marginal::position);
    for (Index i = 0; i < xm.size(); ++i) {
      const double r = set.distance(lat.x_point(i));
      if (r > 0) d.distance_moment += xm[i] / (r * r);
    }
    d.distance_moment *= std::pow(lat.x.spacing, lat.dim);
  }
  return d;
}

}  // namespace semiclassic
