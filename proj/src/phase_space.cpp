#include "semiclassic/phase_space.hpp"

#include <algorithm>

#include "semiclassic/fft.hpp"

namespace semiclassic {
namespace {

Index ipow(Index b, int e) {
  Index r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

// row-major digits of `flat` in base `extent`, n digits
inline void digits(Index flat, int extent, int n, int* out) {
  for (int a = n - 1; a >= 0; --a) {
    out[a] = static_cast<int>(flat % extent);
    flat /= extent;
  }
}

inline Index undigits(const int* d, int extent, int n) {
  Index f = 0;
  for (int a = 0; a < n; ++a) f = f * extent + d[a];
  return f;
}

RealField axis_wavenumbers(int count, double spacing);
void apply_gaussian_multiplier(ComplexField& a, const std::vector<int>& extents,
                               const std::vector<RealField>& factors);

}  // namespace

// The Nyquist coefficient is split evenly between +N/2 and -N/2.
Eigen::MatrixXcd half_grid_modes(const MixedState& state) {
  const SpaceGrid& g = state.grid();
  const int n = g.dim(), N = g.points(), M = 2 * N;
  const std::vector<int> ext(n, N), ext2(n, M);
  const Index up_size = ipow(M, n);
  Eigen::MatrixXcd up(state.rank(), up_size);
  int src[kMaxDim], dst[kMaxDim];
  for (Index j = 0; j < state.rank(); ++j) {
    ComplexField a = state.modes().col(j).array();
    fft::forward(a, ext);
    ComplexField pad = ComplexField::Zero(up_size);
    for (Index q = 0; q < g.size(); ++q) {
      digits(q, N, n, src);
      int nyq_mask = 0;
      for (int ax = 0; ax < n; ++ax)
        if (src[ax] == N / 2) nyq_mask |= 1 << ax;
      // enumerate the 2^k placements of the Nyquist components
      for (int sub = nyq_mask;; sub = (sub - 1) & nyq_mask) {
        double w = 1.0;
        for (int ax = 0; ax < n; ++ax) {
          if (src[ax] < N / 2) {
            dst[ax] = src[ax];
          } else if (src[ax] > N / 2) {
            dst[ax] = src[ax] + N;
          } else {
            dst[ax] = (sub >> ax) & 1 ? N / 2 : 3 * N / 2;
            w *= 0.5;
          }
        }
        pad[undigits(dst, M, n)] += w * a[q];
        if (sub == 0) break;
      }
    }
    fft::backward(pad, ext2);
    up.row(j) = (std::sqrt(state.weights()[j]) / static_cast<double>(g.size())) * pad.matrix().transpose();
  }
  return up;
}

namespace {

// per-axis FFT wavenumbers of a lattice axis with `count` points and `spacing`
RealField axis_wavenumbers(int count, double spacing) {
  RealField k(count);
  for (int i = 0; i < count; ++i) k[i] = 2 * kPi * (i < count / 2 ? i : i - count) / (count * spacing);
  return k;
}

// multiply a 2n-dim array by prod_axes exp(-eps k_a^2 / 4)
void apply_gaussian_multiplier(ComplexField& a, const std::vector<int>& extents,
                               const std::vector<RealField>& factors) {
  const int d = static_cast<int>(extents.size());
  int idx[2 * kMaxDim];
  for (Index f = 0; f < a.size(); ++f) {
    Index rest = f;
    for (int ax = d - 1; ax >= 0; --ax) {
      idx[ax] = static_cast<int>(rest % extents[ax]);
      rest /= extents[ax];
    }
    double m = 1.0;
    for (int ax = 0; ax < d; ++ax) m *= factors[ax][idx[ax]];
    a[f] *= m;
  }
}

}  // namespace

PhaseField wigner(const MixedState& state, WignerDiagnostics* diagnostics, double resolution_factor) {
  const SpaceGrid& g = state.grid();
  const double eps = state.epsilon();
  const int n = g.dim(), N = g.points(), M = 2 * N;
  if (g.spacing() > resolution_factor * std::sqrt(eps))
    throw ResolutionError("wigner: dx = " + std::to_string(g.spacing()) + " exceeds " +
                          std::to_string(resolution_factor) + " sqrt(eps) = " +
                          std::to_string(resolution_factor * std::sqrt(eps)));
  const PhaseLattice lat = wigner_lattice(g, eps);
  if (lat.size() > (Index{1} << 27)) throw ResolutionError("wigner: phase lattice too large for a full field");

  const Eigen::MatrixXcd up = half_grid_modes(state);
  const std::vector<int> ext(n, N);
  const double h = 0.5 * g.spacing();
  const double scale = std::pow(h / (kPi * eps), n);
  RealField values(lat.size());
  double max_imag = 0.0;

  int xi[kMaxDim], t[kMaxDim], base_a[kMaxDim], base_b[kMaxDim], q[kMaxDim];
  ComplexField fm(g.size());
  for (Index ix = 0; ix < g.size(); ++ix) {
    digits(ix, N, n, xi);
    for (Index tm = 0; tm < g.size(); ++tm) {
      digits(tm, N, n, t);
      int mask = 0;
      for (int ax = 0; ax < n; ++ax) {
        const int m = t[ax] < N / 2 ? t[ax] : t[ax] - N;
        if (t[ax] == N / 2) mask |= 1 << ax;
        base_a[ax] = ((2 * xi[ax] + m) % M + M) % M;
        base_b[ax] = ((2 * xi[ax] - m) % M + M) % M;
      }
      if (mask == 0) {
        fm[tm] = up.col(undigits(base_b, M, n)).dot(up.col(undigits(base_a, M, n)));
        continue;
      }
      // the -N/2 shift and its +N/2 mirror share the boundary of the y range
      Complex acc = 0.0;
      int count = 0;
      int a_idx[kMaxDim], b_idx[kMaxDim];
      for (int sub = mask;; sub = (sub - 1) & mask) {
        for (int ax = 0; ax < n; ++ax) {
          if ((sub >> ax) & 1) {
            a_idx[ax] = ((2 * xi[ax] + N / 2) % M + M) % M;
            b_idx[ax] = ((2 * xi[ax] - N / 2) % M + M) % M;
          } else {
            a_idx[ax] = base_a[ax];
            b_idx[ax] = base_b[ax];
          }
        }
        acc += up.col(undigits(b_idx, M, n)).dot(up.col(undigits(a_idx, M, n)));
        ++count;
        if (sub == 0) break;
      }
      fm[tm] = acc / static_cast<double>(count);
    }
    fft::forward(fm, ext);
    for (Index j = 0; j < g.size(); ++j) {
      digits(j, N, n, t);
      for (int ax = 0; ax < n; ++ax) q[ax] = (t[ax] + N / 2) % N;
      const Complex v = scale * fm[j];
      values[ix * g.size() + undigits(q, N, n)] = v.real();
      max_imag = std::max(max_imag, std::abs(v.imag()));
    }
  }
  if (diagnostics) diagnostics->max_imaginary = max_imag;
  return make_phase_field(lat, std::move(values), FieldTag::wigner, eps);
}

PhaseField husimi_via_convolution(const PhaseField& w) {
  const int n = w.lattice.dim;
  std::vector<int> ext;
  std::vector<RealField> factors;
  for (int a = 0; a < n; ++a) {
    ext.push_back(w.lattice.x.count);
    factors.push_back((-0.25 * w.epsilon * axis_wavenumbers(w.lattice.x.count, w.lattice.x.spacing).square()).exp());
  }
  for (int a = 0; a < n; ++a) {
    ext.push_back(w.lattice.p.count);
    factors.push_back((-0.25 * w.epsilon * axis_wavenumbers(w.lattice.p.count, w.lattice.p.spacing).square()).exp());
  }
  ComplexField work = w.values.cast<Complex>();
  fft::forward(work, ext);
  apply_gaussian_multiplier(work, ext, factors);
  fft::backward(work, ext);
  RealField values = work.real() / static_cast<double>(w.values.size());
  return make_phase_field(w.lattice, std::move(values), FieldTag::husimi, w.epsilon);
}

PhaseField husimi_via_overlap(const MixedState& state) {
  const SpaceGrid& g = state.grid();
  const double eps = state.epsilon();
  const int n = g.dim(), N = g.points();
  const PhaseLattice lat = wigner_lattice(g, eps);
  if (lat.size() > (Index{1} << 26)) throw ResolutionError("husimi_via_overlap: use sampled probes for this size");
  const std::vector<int> ext(n, N);
  std::vector<RealField> kcomp;
  for (int a = 0; a < n; ++a) kcomp.push_back(wavenumber_component(g, a));
  const double prefactor = std::pow(2 * kPi * eps, 0.5 * n);  // Fourier transform of e^{-|z|^2/(2 eps)}
  const double norm = std::pow(2 * kPi * eps, -n) * std::pow(kPi * eps, -0.5 * n) /
                      static_cast<double>(g.size()) / static_cast<double>(g.size());
  RealField values = RealField::Zero(lat.size());
  int qd[kMaxDim];
  ComplexField work(g.size());
  for (Index j = 0; j < state.rank(); ++j) {
    ComplexField a = state.modes().col(j).array();
    fft::forward(a, ext);
    for (Index q = 0; q < g.size(); ++q) {
      digits(q, N, n, qd);
      RealField dk2 = RealField::Zero(g.size());
      for (int ax = 0; ax < n; ++ax) {
        const double kq = (qd[ax] - N / 2) * kPi / g.halfwidth();
        dk2 += (kcomp[ax] - kq).square();
      }
      work = a * (prefactor * (-0.5 * eps * dk2).exp());
      fft::backward(work, ext);
      const double mu = state.weights()[j];
      for (Index ix = 0; ix < g.size(); ++ix) values[ix * g.size() + q] += mu * norm * std::norm(work[ix]);
    }
  }
  return make_phase_field(lat, std::move(values), FieldTag::husimi, eps);
}

PhaseField husimi_on_lattice(const MixedState& state, const PhaseLattice& lattice) {
  const SpaceGrid& g = state.grid();
  if (g.dim() != 1 || lattice.dim != 1) throw ParameterError("husimi_on_lattice: one-dimensional only");
  const double eps = state.epsilon();
  const double reach = 8 * std::sqrt(eps);
  const double norm = std::pow(kPi * eps, -0.25) * g.spacing();
  // sqrt(mu_j) phi_j as columns
  const Eigen::MatrixXcd B = state.modes() * state.weights().cwiseSqrt().asDiagonal();
  RealField values = RealField::Zero(lattice.size());
  const Index np = lattice.p_size();
  for (int ix = 0; ix < lattice.x.count; ++ix) {
    const double q = lattice.x.coordinate(ix);
    const int lo = std::max(0, static_cast<int>(std::floor((q - reach + g.halfwidth()) / g.spacing())));
    const int hi = std::min(g.points() - 1, static_cast<int>(std::ceil((q + reach + g.halfwidth()) / g.spacing())));
    if (hi < lo) continue;
    const int w = hi - lo + 1;
    Eigen::MatrixXcd A(np, w);
    for (int k = 0; k < w; ++k) {
      const double y = g.coordinate(lo + k);
      const double env = norm * std::exp(-(y - q) * (y - q) / (2 * eps));
      for (Index ip = 0; ip < np; ++ip) A(ip, k) = env * std::polar(1.0, -lattice.p.coordinate(ip) * y / eps);
    }
    const Eigen::MatrixXcd C = A * B.middleRows(lo, w);
    const Eigen::VectorXd row = C.rowwise().squaredNorm() / (2 * kPi * eps);
    for (Index ip = 0; ip < np; ++ip) values[ix * np + ip] = row[ip];
  }
  return make_phase_field(lattice, std::move(values), FieldTag::husimi, eps);
}

double husimi_sup_sampled(const MixedState& state, int per_axis, double span) {
  const SpaceGrid& g = state.grid();
  const int n = g.dim();
  const RealField diag = kernel_diagonal(state);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
  for (Index f = 0; f < g.size(); ++f) mean += diag[f] * g.cell_volume() * g.point(f);
  Eigen::VectorXd pmean = Eigen::VectorXd::Zero(n);
  {
    const RealField md = momentum_density(state);
    const PhaseLattice lat = wigner_lattice(g, state.epsilon());
    for (Index q = 0; q < lat.p_size(); ++q) pmean += md[q] * std::pow(lat.p.spacing, n) * lat.p_point(q);
  }
  int m = std::max(1, per_axis);
  while (m > 1 && std::pow(m, 2 * n) > 4096) --m;
  const Index total = ipow(m, 2 * n);
  double best = 0.0;
  for (Index k = 0; k < total; ++k) {
    Eigen::VectorXd x(n), p(n);
    Index rest = k;
    for (int a = 0; a < 2 * n; ++a) {
      const double u = m == 1 ? 0.0 : -span + 2 * span * static_cast<double>(rest % m) / (m - 1);
      rest /= m;
      if (a < n) x[a] = mean[a] + u; else p[a - n] = pmean[a - n] + u;
    }
    best = std::max(best, coherent_matrix_element(state, x, p));
  }
  return best;
}

RealField marginal(const PhaseField& field, Marginal which) {
  const Index nx = field.lattice.x_size(), np = field.lattice.p_size();
  const Eigen::Map<const Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> v(
      field.values.data(), nx, np);
  if (which == Marginal::position)
    return v.rowwise().sum() * std::pow(field.lattice.p.spacing, field.lattice.dim);
  return v.colwise().sum().transpose() * std::pow(field.lattice.x.spacing, field.lattice.dim);
}

RealField momentum_density(const MixedState& state) {
  const SpaceGrid& g = state.grid();
  const int n = g.dim(), N = g.points();
  RealField spec = RealField::Zero(g.size());
  for (Index j = 0; j < state.rank(); ++j)
    spec += state.weights()[j] * physical_spectrum(state.modes().col(j).array(), g).abs2();
  spec /= std::pow(2 * kPi * state.epsilon(), n);
  RealField out(g.size());
  int d[kMaxDim];
  for (Index l = 0; l < g.size(); ++l) {
    digits(l, N, n, d);
    for (int a = 0; a < n; ++a) d[a] = (d[a] + N / 2) % N;
    out[undigits(d, N, n)] = spec[l];
  }
  return out;
}

RealField smoothed_position_density(const MixedState& state) {
  return gaussian_smooth(kernel_diagonal(state), state.grid(), state.epsilon());
}

RealField smoothed_momentum_density(const MixedState& state) {
  const SpaceGrid& g = state.grid();
  const int n = g.dim(), N = g.points();
  const PhaseLattice lat = wigner_lattice(g, state.epsilon());
  ComplexField work = momentum_density(state).cast<Complex>();
  const std::vector<int> ext(n, N);
  const RealField f1 = (-0.25 * state.epsilon() * axis_wavenumbers(N, lat.p.spacing).square()).exp();
  fft::forward(work, ext);
  apply_gaussian_multiplier(work, ext, std::vector<RealField>(n, f1));
  fft::backward(work, ext);
  return work.real() / static_cast<double>(g.size());
}

// ---- Weyl symbols ---------------------------------------------------------

WeylSymbol weyl_multiplication(const PhaseLattice& lattice, double epsilon,
                               const std::function<double(const Eigen::VectorXd&)>& v) {
  WeylSymbol s{lattice, ComplexField(lattice.size()), "multiplication", epsilon};
  for (Index ix = 0; ix < lattice.x_size(); ++ix) {
    const double val = v(lattice.x_point(ix));
    s.values.segment(ix * lattice.p_size(), lattice.p_size()).setConstant(val);
  }
  return s;
}

WeylSymbol weyl_negative_laplacian(const PhaseLattice& lattice, double epsilon) {
  WeylSymbol s{lattice, ComplexField(lattice.size()), "negative_laplacian", epsilon};
  RealField p2(lattice.p_size());
  for (Index ip = 0; ip < lattice.p_size(); ++ip) p2[ip] = lattice.p_point(ip).squaredNorm();
  for (Index ix = 0; ix < lattice.x_size(); ++ix)
    s.values.segment(ix * lattice.p_size(), lattice.p_size()) = p2.cast<Complex>();
  return s;
}

WeylSymbol weyl_identity(const PhaseLattice& lattice, double epsilon) {
  return WeylSymbol{lattice, ComplexField::Ones(lattice.size()), "identity", epsilon};
}

WeylSymbol weyl_hamiltonian(const PhaseLattice& lattice, double epsilon, const PotentialSpec& potential) {
  const SingularSet set(potential);
  WeylSymbol s = weyl_negative_laplacian(lattice, epsilon);
  s.values *= 0.5;
  s.origin = "hamiltonian";
  for (Index ix = 0; ix < lattice.x_size(); ++ix) {
    const Eigen::VectorXd x = lattice.x_point(ix);
    double u = eval_rough(potential, x);
    if (!set.empty() && set.distance(x) > 0) u += eval_singular(potential, x);
    s.values.segment(ix * lattice.p_size(), lattice.p_size()) += u;
  }
  return s;
}

WeylSymbol weyl_finite_rank(const MixedState& state) {
  const PhaseField w = wigner(state);
  const double f = std::pow(2 * kPi * state.epsilon(), state.grid().dim());
  return WeylSymbol{w.lattice, (f * w.values).cast<Complex>(), "finite_rank", state.epsilon()};
}

namespace {

// Fornberg weights for the `deriv`-th derivative at 0 from nodes `x`
std::vector<double> fornberg(const std::vector<double>& x, int deriv) {
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, deriv + 1);
  double c1 = 1.0, c4 = x[0];
  c(0, 0) = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, deriv);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i];
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c(i, k) = c1 * (k * c(i - 1, k - 1) - c5 * c(i - 1, k)) / c2;
        c(i, 0) = -c1 * c5 * c(i - 1, 0) / c2;
      }
      for (int k = mn; k >= 1; --k) c(j, k) = (c4 * c(j, k) - k * c(j, k - 1)) / c3;
      c(j, 0) = c4 * c(j, 0) / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = c(i, deriv);
  return w;
}

// first derivative along one of the 2n lattice axes, 9-point stencils
ComplexField lattice_derivative(const ComplexField& v, const PhaseLattice& lat, int axis) {
  const int n = lat.dim;
  const bool is_x = axis < n;
  const Axis& ax = is_x ? lat.x : lat.p;
  const int count = ax.count;
  const int width = std::min(9, count);
  // stencil tables per position along the axis
  std::vector<std::vector<double>> weights(count);
  std::vector<int> start(count);
  for (int i = 0; i < count; ++i) {
    int s = std::clamp(i - width / 2, 0, count - width);
    start[i] = s;
    std::vector<double> nodes(width);
    for (int k = 0; k < width; ++k) nodes[k] = (s + k - i) * ax.spacing;
    weights[i] = fornberg(nodes, 1);
  }
  std::vector<int> ext;
  for (int a = 0; a < n; ++a) ext.push_back(lat.x.count);
  for (int a = 0; a < n; ++a) ext.push_back(lat.p.count);
  Index stride = 1;
  for (int a = 2 * n - 1; a > axis; --a) stride *= ext[a];
  const Index block = stride * count;
  ComplexField out(v.size());
  for (Index outer = 0; outer < v.size() / block; ++outer)
    for (Index inner = 0; inner < stride; ++inner) {
      const Index base = outer * block + inner;
      for (int i = 0; i < count; ++i) {
        Complex acc = 0.0;
        for (int k = 0; k < width; ++k) acc += weights[i][k] * v[base + (start[i] + k) * stride];
        out[base + i * stride] = acc;
      }
    }
  return out;
}

}  // namespace

WeylSymbol moyal_sharp(const WeylSymbol& f, const WeylSymbol& g, int order) {
  if (!(f.lattice == g.lattice)) throw ParameterError("moyal_sharp: symbols on different lattices");
  if (order < 0 || order > 2) throw ParameterError("moyal_sharp: order must be 0, 1 or 2");
  const int n = f.lattice.dim;
  const double eps = f.epsilon;
  const Complex ie2(0.0, 0.5 * eps);
  WeylSymbol out{f.lattice, f.values * g.values, "moyal", eps};
  if (order == 0) return out;

  std::vector<ComplexField> df(2 * n), dg(2 * n);
  for (int a = 0; a < 2 * n; ++a) {
    df[a] = lattice_derivative(f.values, f.lattice, a);
    dg[a] = lattice_derivative(g.values, g.lattice, a);
  }
  for (int k = 0; k < n; ++k) out.values += ie2 * (df[k] * dg[n + k] - df[n + k] * dg[k]);
  if (order == 1) return out;

  auto second = [&](const std::vector<ComplexField>& d, const WeylSymbol& s, int a, int b) {
    return lattice_derivative(d[a], s.lattice, b);
  };
  ComplexField term = ComplexField::Zero(out.values.size());
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) {
      term += second(df, f, k, l) * second(dg, g, n + k, n + l);
      term -= second(df, f, k, n + l) * second(dg, g, n + k, l);
      term -= second(df, f, n + k, l) * second(dg, g, k, n + l);
      term += second(df, f, n + k, n + l) * second(dg, g, k, l);
    }
  out.values += 0.5 * ie2 * ie2 * term;
  return out;
}

double trace_pairing(const WeylSymbol& symbol, const MixedState& state) {
  const PhaseLattice lat = wigner_lattice(state.grid(), state.epsilon());
  if (!(symbol.lattice == lat)) throw ParameterError("trace_pairing: symbol must live on the Wigner lattice");
  const PhaseField w = wigner(state);
  return (symbol.values * w.values).sum().real() * lat.cell_volume();
}

CompositionOracle composition_laplacian_coefficient(double epsilon, int points) {
  const SpaceGrid g(1, kPi, points);
  const int N = points;
  // unitary DFT matrix in grid order
  Eigen::MatrixXcd F(N, N);
  for (int k = 0; k < N; ++k)
    for (int l = 0; l < N; ++l) F(k, l) = std::polar(1.0 / std::sqrt(N), -2 * kPi * k * l / N);
  Eigen::VectorXd k2(N);
  for (int k = 0; k < N; ++k) k2[k] = g.wavenumber(k) * g.wavenumber(k);
  const Eigen::MatrixXcd lap = F.adjoint() * (epsilon * epsilon * k2).asDiagonal() * F;
  Eigen::VectorXd u(N);
  for (int i = 0; i < N; ++i) u[i] = std::cos(g.coordinate(i));
  const Eigen::MatrixXcd product = lap * u.asDiagonal();

  std::vector<double> cs, a1s;
  const double damp = std::exp(0.25 * epsilon);
  for (double x0 : {-0.8, 0.4, 0.9})
    for (double p0 : {-0.6, 0.3, 0.9}) {
      Eigen::VectorXd xc(1), pc(1);
      xc << x0;
      pc << p0;
      const Eigen::VectorXcd phi = CoherentState{xc, pc, epsilon}.sample(g).matrix();
      const Complex m = g.spacing() * phi.dot(product * phi);
      const double base = (p0 * p0 + 0.5 * epsilon) * std::cos(x0);
      cs.push_back((m.real() * damp - base) / (-epsilon * epsilon * std::cos(x0)));
      a1s.push_back(m.imag() * damp / (epsilon * p0 * std::sin(x0)));
    }
  CompositionOracle r;
  auto mean = [](const std::vector<double>& v) { double s = 0; for (double x : v) s += x; return s / v.size(); };
  r.laplacian_coefficient = mean(cs);
  r.first_order_coefficient = mean(a1s);
  r.worst_spread = *std::max_element(cs.begin(), cs.end()) - *std::min_element(cs.begin(), cs.end());
  return r;
}

CvReport cv_regularity_check(const PhaseField& w, const PotentialSpec* smooth_potential) {
  const int n = w.lattice.dim;
  CvReport r;
  r.order = n / 2 + 1;
  std::vector<int> ext;
  std::vector<RealField> k;
  for (int a = 0; a < n; ++a) {
    ext.push_back(w.lattice.x.count);
    k.push_back(axis_wavenumbers(w.lattice.x.count, w.lattice.x.spacing));
  }
  for (int a = 0; a < n; ++a) {
    ext.push_back(w.lattice.p.count);
    k.push_back(axis_wavenumbers(w.lattice.p.count, w.lattice.p.spacing));
  }
  ComplexField spec = w.values.cast<Complex>();
  fft::forward(spec, ext);

  // all multi-indices with |alpha| <= order, |beta| <= order
  std::vector<std::vector<int>> alphas;
  std::vector<int> cur(n, 0);
  std::function<void(int, int)> gen = [&](int axis, int left) {
    if (axis == n) { alphas.push_back(cur); return; }
    for (int d = 0; d <= left; ++d) { cur[axis] = d; gen(axis + 1, left - d); }
  };
  gen(0, r.order);
  const int d2 = 2 * n;
  int idx[2 * kMaxDim];
  for (const auto& al : alphas)
    for (const auto& be : alphas) {
      ComplexField work = spec;
      for (Index f = 0; f < work.size(); ++f) {
        Index rest = f;
        for (int ax = d2 - 1; ax >= 0; --ax) { idx[ax] = static_cast<int>(rest % ext[ax]); rest /= ext[ax]; }
        Complex m = 1.0;
        for (int ax = 0; ax < n; ++ax) {
          m *= std::pow(Complex(0, k[ax][idx[ax]]), al[ax]);
          m *= std::pow(Complex(0, k[n + ax][idx[n + ax]]), be[ax]);
        }
        work[f] *= m;
      }
      fft::backward(work, ext);
      const double sup = work.abs().maxCoeff() / static_cast<double>(work.size());
      std::string name = "dx";
      for (int v : al) name += std::to_string(v);
      name += " dp";
      for (int v : be) name += std::to_string(v);
      r.derivative_sups.emplace_back(name, sup);
      r.max_sup = std::max(r.max_sup, sup);
    }

  if (smooth_potential) {
    const MollifiedRough mol(*smooth_potential, 1e-9);
    double lit = 0.0, cor = 0.0;
    const double eps = w.epsilon;
    for (Index ix = 0; ix < w.lattice.x_size(); ++ix) {
      const Eigen::VectorXd x = w.lattice.x_point(ix);
      const double u = eval_rough(*smooth_potential, x);
      const double lap = mol.hessian(x).trace();
      for (Index ip = 0; ip < w.lattice.p_size(); ++ip) {
        const double p2 = w.lattice.p_point(ip).squaredNorm();
        const double wv = w.values[ix * w.lattice.p_size() + ip];
        const double common = 0.25 * p2 * p2 + u * u + p2 * u;
        lit += (common - 0.5 * n * eps * eps * lap) * wv;
        cor += (common - 0.25 * eps * eps * lap) * wv;
      }
    }
    r.second_bullet_literal = lit * w.lattice.cell_volume();
    r.second_bullet_corrected = cor * w.lattice.cell_volume();
    r.second_bullet_computed = true;
  }
  return r;
}

}  // namespace semiclassic
