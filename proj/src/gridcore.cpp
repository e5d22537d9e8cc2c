#include "semiclassic/gridcore.hpp"

#include <fstream>
#include <vector>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "semiclassic/fft.hpp"

namespace semiclassic {
namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

std::vector<int> extents_of(const SpaceGrid& grid) {
  return std::vector<int>(grid.dim(), grid.points());
}

Index ipow(Index base, int e) {
  Index r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

}  // namespace

SpaceGrid::SpaceGrid(int dim, double halfwidth, int points)
    : dim_(dim), halfwidth_(halfwidth), points_(points) {
  if (dim < 1 || dim > kMaxDim) throw ParameterError("SpaceGrid: dimension must be in [1, 6]");
  if (!(halfwidth > 0.0)) throw ParameterError("SpaceGrid: halfwidth must be positive");
  if (!is_power_of_two(points) || points < 2)
    throw ParameterError("SpaceGrid: points per axis must be a power of two");
  spacing_ = 2.0 * halfwidth / points;
  size_ = ipow(points, dim);
}

MultiIndex SpaceGrid::unravel(Index flat) const noexcept {
  MultiIndex idx{};
  for (int a = dim_ - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % points_);
    flat /= points_;
  }
  return idx;
}

Index SpaceGrid::ravel(const MultiIndex& idx) const noexcept {
  Index flat = 0;
  for (int a = 0; a < dim_; ++a) flat = flat * points_ + idx[a];
  return flat;
}

Eigen::VectorXd SpaceGrid::point(Index flat) const {
  const MultiIndex idx = unravel(flat);
  Eigen::VectorXd x(dim_);
  for (int a = 0; a < dim_; ++a) x[a] = coordinate(idx[a]);
  return x;
}

Index PhaseLattice::x_size() const noexcept { return ipow(x.count, dim); }
Index PhaseLattice::p_size() const noexcept { return ipow(p.count, dim); }

Eigen::VectorXd PhaseLattice::x_point(Index ix) const {
  Eigen::VectorXd z(dim);
  for (int a = dim - 1; a >= 0; --a) {
    z[a] = x.coordinate(static_cast<int>(ix % x.count));
    ix /= x.count;
  }
  return z;
}

Eigen::VectorXd PhaseLattice::p_point(Index ip) const {
  Eigen::VectorXd z(dim);
  for (int a = dim - 1; a >= 0; --a) {
    z[a] = p.coordinate(static_cast<int>(ip % p.count));
    ip /= p.count;
  }
  return z;
}

bool PhaseLattice::operator==(const PhaseLattice& o) const noexcept {
  auto same = [](const Axis& a, const Axis& b) {
    return a.count == b.count && std::abs(a.origin - b.origin) <= 1e-12 * (1 + std::abs(a.origin)) &&
           std::abs(a.spacing - b.spacing) <= 1e-12 * a.spacing;
  };
  return dim == o.dim && same(x, o.x) && same(p, o.p);
}

PhaseLattice wigner_lattice(const SpaceGrid& grid, double epsilon) {
  if (!(epsilon > 0.0)) throw ParameterError("wigner_lattice: epsilon must be positive");
  PhaseLattice lat;
  lat.dim = grid.dim();
  lat.x = Axis{grid.points(), grid.coordinate(0), grid.spacing()};
  const double dp = epsilon * kPi / grid.halfwidth();
  lat.p = Axis{grid.points(), -0.5 * grid.points() * dp, dp};
  return lat;
}

PhaseLattice cell_lattice(int dim, double x_half, int x_count, double p_half, int p_count) {
  if (x_count < 1 || p_count < 1 || !(x_half > 0) || !(p_half > 0))
    throw ParameterError("cell_lattice: counts and half-widths must be positive");
  PhaseLattice lat;
  lat.dim = dim;
  const double dx = 2 * x_half / x_count, dp = 2 * p_half / p_count;
  lat.x = Axis{x_count, -x_half + 0.5 * dx, dx};
  lat.p = Axis{p_count, -p_half + 0.5 * dp, dp};
  return lat;
}

std::string to_string(FieldTag tag) {
  switch (tag) {
    case FieldTag::wigner: return "wigner";
    case FieldTag::husimi: return "husimi";
    case FieldTag::classical: return "classical";
    case FieldTag::residual: return "residual";
  }
  return "residual";
}

FieldTag field_tag_from_string(const std::string& name) {
  if (name == "wigner") return FieldTag::wigner;
  if (name == "husimi") return FieldTag::husimi;
  if (name == "classical") return FieldTag::classical;
  if (name == "residual") return FieldTag::residual;
  throw ParameterError("unknown field tag: " + name);
}

void PhaseField::check_mass(double tol) const {
  const double q = quadrature();
  if (std::abs(q - mass) > tol)
    throw ConsistencyError("PhaseField: quadrature " + std::to_string(q) +
                           " departs from recorded mass " + std::to_string(mass));
}

PhaseField make_phase_field(PhaseLattice lattice, RealField values, FieldTag tag, double epsilon) {
  if (values.size() != lattice.size()) throw ParameterError("make_phase_field: size mismatch");
  PhaseField f{std::move(lattice), std::move(values), tag, epsilon, 0.0};
  f.mass = f.quadrature();
  return f;
}

void validate(const GaussianKernel& kernel) {
  if (!(kernel.epsilon > 0.0)) throw ParameterError("GaussianKernel: epsilon must be positive");
  if (kernel.dim < 1) throw ParameterError("GaussianKernel: dimension must be positive");
}

double gaussian_eval(const GaussianKernel& kernel, double z) {
  Eigen::Matrix<double, 1, 1> v;
  v << z;
  return gaussian_eval(kernel, v);
}

QuadratureRule gauss_hermite_rule(int order) {
  if (order < 1) throw ParameterError("gauss_hermite_rule: order must be positive");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
  for (int i = 1; i < order; ++i) jacobi(i, i - 1) = jacobi(i - 1, i) = std::sqrt(0.5 * i);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  QuadratureRule rule;
  rule.nodes = es.eigenvalues();
  rule.weights = std::sqrt(kPi) * es.eigenvectors().row(0).transpose().array().square().matrix();
  return rule;
}

ComplexField forward_transform(const ComplexField& field, const SpaceGrid& grid) {
  if (field.size() != grid.size()) throw ParameterError("forward_transform: shape mismatch");
  ComplexField out = field;
  const auto ext = extents_of(grid);
  fft::forward(out, ext);
  out /= std::sqrt(static_cast<double>(grid.size()));
  return out;
}

ComplexField inverse_transform(const ComplexField& field, const SpaceGrid& grid) {
  if (field.size() != grid.size()) throw ParameterError("inverse_transform: shape mismatch");
  ComplexField out = field;
  const auto ext = extents_of(grid);
  fft::backward(out, ext);
  out /= std::sqrt(static_cast<double>(grid.size()));
  return out;
}

ComplexField physical_spectrum(const ComplexField& field, const SpaceGrid& grid) {
  if (field.size() != grid.size()) throw ParameterError("physical_spectrum: shape mismatch");
  ComplexField out = field;
  const auto ext = extents_of(grid);
  fft::forward(out, ext);
  const double x0 = grid.coordinate(0);
  const double vol = grid.cell_volume();
  for (Index f = 0; f < grid.size(); ++f) {
    const MultiIndex idx = grid.unravel(f);
    double ksum = 0.0;
    for (int a = 0; a < grid.dim(); ++a) ksum += grid.wavenumber(idx[a]);
    out[f] *= vol * std::polar(1.0, -ksum * x0);
  }
  return out;
}

RealField wavenumber_component(const SpaceGrid& grid, int axis) {
  RealField k(grid.size());
  for (Index f = 0; f < grid.size(); ++f) k[f] = grid.wavenumber(grid.unravel(f)[axis]);
  return k;
}

RealField wavenumber_squared(const SpaceGrid& grid) {
  RealField k2 = RealField::Zero(grid.size());
  for (int a = 0; a < grid.dim(); ++a) k2 += wavenumber_component(grid, a).square();
  return k2;
}

RealField gaussian_smooth(const RealField& field, const SpaceGrid& grid, double epsilon) {
  if (!(epsilon > 0.0)) throw ParameterError("gaussian_smooth: epsilon must be positive");
  ComplexField work = field.cast<Complex>();
  const auto ext = extents_of(grid);
  fft::forward(work, ext);
  work *= (-0.25 * epsilon * wavenumber_squared(grid)).exp();
  fft::backward(work, ext);
  return work.real() / static_cast<double>(grid.size());
}

double edge_mass(const RealField& density, const SpaceGrid& grid, double edge_fraction) {
  const double inner = grid.halfwidth() * (1.0 - 2.0 * edge_fraction);
  double mass = 0.0;
  for (Index f = 0; f < grid.size(); ++f) {
    const MultiIndex idx = grid.unravel(f);
    bool edge = false;
    for (int a = 0; a < grid.dim() && !edge; ++a) edge = std::abs(grid.coordinate(idx[a])) > inner;
    if (edge) mass += density[f];
  }
  return mass * grid.cell_volume();
}

void save_phase_field(const std::filesystem::path& stem, const PhaseField& field) {
  nlohmann::json header;
  header["dim"] = field.lattice.dim;
  header["x_axis"] = {{"count", field.lattice.x.count}, {"origin", field.lattice.x.origin},
                      {"spacing", field.lattice.x.spacing}};
  header["p_axis"] = {{"count", field.lattice.p.count}, {"origin", field.lattice.p.origin},
                      {"spacing", field.lattice.p.spacing}};
  header["N"] = field.lattice.x.count;
  header["L"] = -field.lattice.x.lower_edge();
  header["epsilon"] = field.epsilon;
  header["tag"] = to_string(field.tag);
  header["mass"] = field.mass;
  header["layout"] = "row-major, x indices before p indices";
  header["dtype"] = "float64";
  header["count"] = field.values.size();
  header["values_file"] = stem.filename().string() + ".bin";

  std::ofstream hj(stem.string() + ".json");
  if (!hj) throw Error("save_phase_field: cannot open " + stem.string() + ".json");
  hj << header.dump(2) << '\n';
  std::ofstream bin(stem.string() + ".bin", std::ios::binary);
  if (!bin) throw Error("save_phase_field: cannot open " + stem.string() + ".bin");
  bin.write(reinterpret_cast<const char*>(field.values.data()),
            static_cast<std::streamsize>(field.values.size() * sizeof(double)));
}

PhaseField load_phase_field(const std::filesystem::path& stem) {
  std::ifstream hj(stem.string() + ".json");
  if (!hj) throw Error("load_phase_field: missing header " + stem.string() + ".json");
  const auto header = nlohmann::json::parse(hj);
  PhaseField field;
  field.lattice.dim = header.at("dim");
  auto axis = [](const nlohmann::json& j) {
    return Axis{j.at("count").get<int>(), j.at("origin").get<double>(), j.at("spacing").get<double>()};
  };
  field.lattice.x = axis(header.at("x_axis"));
  field.lattice.p = axis(header.at("p_axis"));
  field.epsilon = header.at("epsilon");
  field.tag = field_tag_from_string(header.at("tag"));
  field.mass = header.at("mass");
  field.values.resize(header.at("count").get<Index>());
  if (field.values.size() != field.lattice.size()) throw Error("load_phase_field: corrupt header");
  std::ifstream bin(stem.string() + ".bin", std::ios::binary);
  bin.read(reinterpret_cast<char*>(field.values.data()),
           static_cast<std::streamsize>(field.values.size() * sizeof(double)));
  if (!bin) throw Error("load_phase_field: truncated value block");
  return field;
}

}  // namespace semiclassic
