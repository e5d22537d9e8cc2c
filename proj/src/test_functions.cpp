#include "semiclassic/test_functions.hpp"

#include <algorithm>
#include <functional>

namespace semiclassic {
namespace {

double trig(Factor::Kind kind, double v) { return kind == Factor::Kind::cos ? std::cos(v) : std::sin(v); }
double trig_prime(Factor::Kind kind, double v) { return kind == Factor::Kind::cos ? -std::sin(v) : std::cos(v); }

template <typename F>
double dense_max(F f, double half, int count = 20001) {
  double m = 0.0;
  for (int i = 0; i < count; ++i) m = std::max(m, std::abs(f(-half + 2 * half * i / (count - 1))));
  return m;
}

}  // namespace

double Factor::value(double u) const {
  return amplitude * std::exp(-u * u / (2 * sigma * sigma)) * trig(kind, k * u);
}

double Factor::derivative(double u) const {
  const double w = amplitude * std::exp(-u * u / (2 * sigma * sigma));
  return w * (-u / (sigma * sigma) * trig(kind, k * u) + k * trig_prime(kind, k * u));
}

Complex Factor::fourier(double y) const {
  auto g = [&](double v) { return std::sqrt(2 * kPi) * sigma * std::exp(-0.5 * sigma * sigma * v * v); };
  if (kind == Kind::cos) return 0.5 * amplitude * (g(y - k) + g(y + k));
  return Complex(0, -0.5 * amplitude) * (g(y - k) - g(y + k));
}

Complex Factor::fourier_times_u(double y) const {
  auto dg = [&](double v) {
    return -sigma * sigma * v * std::sqrt(2 * kPi) * sigma * std::exp(-0.5 * sigma * sigma * v * v);
  };
  if (kind == Kind::cos) return Complex(0, 0.5 * amplitude) * (dg(y - k) + dg(y + k));
  return 0.5 * amplitude * (dg(y - k) - dg(y + k));
}

Factor Factor::smoothed(double epsilon) const {
  const double a = 0.5 * sigma * sigma, b = 0.25 * epsilon;
  Factor f = *this;
  f.sigma = std::sqrt(sigma * sigma + 0.5 * epsilon);
  f.k = a * k / (a + b);
  f.amplitude = amplitude * sigma / f.sigma * std::exp(-a * b * k * k / (a + b));
  return f;
}

double Factor::fourier_extent(double tail) const { return std::abs(k) + std::sqrt(2 * std::log(1 / tail)) / sigma; }

double Factor::sup_abs() const {
  if (kind == Kind::cos) return std::abs(amplitude);  // attained at u = 0
  return dense_max([&](double u) { return value(u); }, 8 * sigma);
}

double Factor::sup_abs_derivative() const {
  return dense_max([&](double u) { return derivative(u); }, 8 * sigma);
}

double Factor::l1_norm() const {
  const int count = 40001;
  const double half = 10 * sigma, h = 2 * half / (count - 1);
  double s = 0.0;
  for (int i = 0; i < count; ++i) s += std::abs(value(-half + i * h));
  return s * h;
}

double TestFunction::operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& p) const {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= factors[a].value(x[a]) * factors[dim + a].value(p[a]);
  return v;
}

TestFunction TestFunction::smoothed(double epsilon) const {
  std::vector<Factor> f;
  for (const Factor& g : factors) f.push_back(g.smoothed(epsilon));
  return make_test_function(dim, std::move(f), label + "*G");
}

TestFunction make_test_function(int dim, std::vector<Factor> factors, std::string label) {
  if (static_cast<int>(factors.size()) != 2 * dim) throw ParameterError("test function needs 2n factors");
  TestFunction t{dim, std::move(factors), 0.0, std::move(label)};
  std::vector<double> sup, dsup;
  for (const Factor& f : t.factors) {
    sup.push_back(f.sup_abs());
    dsup.push_back(f.sup_abs_derivative());
  }
  double l2 = 0.0;
  for (std::size_t a = 0; a < sup.size(); ++a) {
    double g = dsup[a];
    for (std::size_t b = 0; b < sup.size(); ++b)
      if (b != a) g *= sup[b];
    l2 += g * g;
  }
  t.lipschitz = std::sqrt(l2);
  return t;
}

TestFunctionDictionary build_dictionary(const DictionaryOptions& o) {
  if (o.dim < 1 || o.total < 1 || o.modes_per_axis < 1 || o.window_scales.empty())
    throw ParameterError("build_dictionary: bad options");
  TestFunctionDictionary d;
  d.options = o;
  const int axes = 2 * o.dim;
  auto mode_factor = [&](int m, double half, double scale) {
    Factor f;
    f.sigma = scale * half;
    if (m == 0) return f;
    const int level = (m + 1) / 2;
    f.k = level * kPi / half;
    f.kind = m % 2 == 1 ? Factor::Kind::cos : Factor::Kind::sin;
    return f;
  };
  std::vector<int> idx(axes, 0);
  // compositions of `degree` into `axes` parts bounded by modes_per_axis - 1
  std::function<void(int, int, int, std::vector<std::vector<int>>&)> gen =
      [&](int axis, int left, int degree, std::vector<std::vector<int>>& out) {
        if (axis == axes - 1) {
          if (left < o.modes_per_axis) {
            idx[axis] = left;
            out.push_back(idx);
          }
          return;
        }
        for (int m = std::min(left, o.modes_per_axis - 1); m >= 0; --m) {
          idx[axis] = m;
          gen(axis + 1, left - m, degree, out);
        }
      };
  const int max_degree = axes * (o.modes_per_axis - 1);
  for (int deg = 0; deg <= max_degree && static_cast<int>(d.functions.size()) < o.total; ++deg) {
    std::vector<std::vector<int>> level;
    gen(0, deg, deg, level);
    for (std::size_t s = 0; s < o.window_scales.size(); ++s)
      for (const auto& m : level) {
        if (static_cast<int>(d.functions.size()) >= o.total) break;
        std::vector<Factor> f;
        std::string label = "w" + std::to_string(s) + ":";
        for (int a = 0; a < axes; ++a) {
          f.push_back(mode_factor(m[a], a < o.dim ? o.x_half : o.p_half, o.window_scales[s]));
          label += std::to_string(m[a]);
        }
        d.functions.push_back(make_test_function(o.dim, std::move(f), label));
      }
  }
  for (std::size_t k = 0; k < d.functions.size(); ++k) d.weights.push_back(std::ldexp(1.0, -static_cast<int>(k)));
  return d;
}

double pair_lattice(const PhaseField& field, const TestFunction& phi) {
  const PhaseLattice& lat = field.lattice;
  const int n = lat.dim;
  if (phi.dim != n) throw ParameterError("pair_lattice: dimension mismatch");
  std::vector<Eigen::VectorXd> tx(n), tp(n);
  for (int a = 0; a < n; ++a) {
    tx[a].resize(lat.x.count);
    tp[a].resize(lat.p.count);
    for (int i = 0; i < lat.x.count; ++i) tx[a][i] = phi.factors[a].value(lat.x.coordinate(i));
    for (int i = 0; i < lat.p.count; ++i) tp[a][i] = phi.factors[n + a].value(lat.p.coordinate(i));
  }
  auto table_product = [&](const std::vector<Eigen::VectorXd>& t, int count) {
    Index size = 1;
    for (int a = 0; a < n; ++a) size *= count;
    Eigen::VectorXd out(size);
    for (Index f = 0; f < size; ++f) {
      Index rest = f;
      double v = 1.0;
      for (int a = n - 1; a >= 0; --a) {
        v *= t[a][rest % count];
        rest /= count;
      }
      out[f] = v;
    }
    return out;
  };
  const Eigen::VectorXd fx = table_product(tx, lat.x.count);
  const Eigen::VectorXd fp = table_product(tp, lat.p.count);
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> v(
      field.values.data(), lat.x_size(), lat.p_size());
  return fx.dot(v * fp) * lat.cell_volume();
}

Eigen::VectorXd dictionary_moments(const PhaseField& field, const TestFunctionDictionary& dict) {
  Eigen::VectorXd m(dict.size());
  for (std::size_t k = 0; k < dict.size(); ++k) m[k] = pair_lattice(field, dict.functions[k]);
  return m;
}

double dP_from_moments(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const TestFunctionDictionary& dict) {
  if (a.size() != static_cast<Index>(dict.size()) || b.size() != a.size())
    throw ParameterError("dP: moment vectors do not match the dictionary");
  double s = 0.0;
  for (std::size_t k = 0; k < dict.size(); ++k) s += dict.weights[k] * std::abs(a[k] - b[k]);
  return s;
}

double dP(const PhaseField& mu, const PhaseField& nu, const TestFunctionDictionary& dict, double mass_tol) {
  const double ma = mu.quadrature(), mb = nu.quadrature();
  if (std::abs(ma - mb) > mass_tol)
    throw ConsistencyError("dP: masses differ (" + std::to_string(ma) + " vs " + std::to_string(mb) + ")");
  return dP_from_moments(dictionary_moments(mu, dict), dictionary_moments(nu, dict), dict);
}

}  // namespace semiclassic
