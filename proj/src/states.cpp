#include "semiclassic/states.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "semiclassic/fft.hpp"

namespace semiclassic {
namespace {

std::vector<int> extents_of(const SpaceGrid& grid) { return std::vector<int>(grid.dim(), grid.points()); }

}  // namespace

MixedState::MixedState(Unchecked, SpaceGrid grid, double epsilon, Eigen::VectorXd weights,
                       Eigen::MatrixXcd modes, double truncated_weight)
    : grid_(std::move(grid)),
      epsilon_(epsilon),
      weights_(std::move(weights)),
      modes_(std::move(modes)),
      truncated_weight_(truncated_weight) {}

MixedState::MixedState(SpaceGrid grid, double epsilon, Eigen::VectorXd weights, Eigen::MatrixXcd modes,
                       double truncated_weight)
    : MixedState(Unchecked{}, std::move(grid), epsilon, std::move(weights), std::move(modes),
                 truncated_weight) {
  if (!(epsilon_ > 0)) throw ParameterError("MixedState: epsilon must be positive");
  if (modes_.rows() != grid_.size() || modes_.cols() != weights_.size())
    throw ParameterError("MixedState: modes must be (grid size) x (number of weights)");
  if (weights_.size() == 0) throw ParameterError("MixedState: empty decomposition");
  if ((weights_.array() < 0).any()) throw ParameterError("MixedState: negative weight");
  if (std::abs(weights_.sum() - 1.0) > 1e-10)
    throw ParameterError("MixedState: weights must sum to one, got " + std::to_string(weights_.sum()));
  if (!(truncated_weight_ < 1e-8)) throw ResolutionError("MixedState: truncated weight mass exceeds 1e-8");
  const double defect = orthonormality_defect();
  if (defect > 1e-8)
    throw ResolutionError("MixedState: eigenfunctions not orthonormal on the grid (defect " +
                          std::to_string(defect) + ")");
}

MixedState MixedState::with_modes(Eigen::MatrixXcd modes) const {
  if (modes.rows() != modes_.rows() || modes.cols() != modes_.cols())
    throw ParameterError("MixedState::with_modes: shape mismatch");
  return MixedState(Unchecked{}, grid_, epsilon_, weights_, std::move(modes), truncated_weight_);
}

double MixedState::orthonormality_defect() const {
  const Eigen::MatrixXcd gram = grid_.cell_volume() * (modes_.adjoint() * modes_);
  return (gram - Eigen::MatrixXcd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

ComplexField CoherentState::sample(const SpaceGrid& grid) const {
  if (x.size() != grid.dim() || p.size() != grid.dim())
    throw ParameterError("CoherentState: centre dimension mismatch");
  if (!(epsilon > 0)) throw ParameterError("CoherentState: epsilon must be positive");
  ComplexField out(grid.size());
  const double norm = std::pow(kPi * epsilon, -0.25 * grid.dim());
  for (Index f = 0; f < grid.size(); ++f) {
    const Eigen::VectorXd y = grid.point(f);
    out[f] = norm * std::exp(-(y - x).squaredNorm() / (2 * epsilon)) * std::polar(1.0, p.dot(y) / epsilon);
  }
  return out;
}

MixedState pure_state(const SpaceGrid& grid, double epsilon, const ComplexField& psi) {
  const double n2 = psi.abs2().sum() * grid.cell_volume();
  Eigen::MatrixXcd modes = (psi / std::sqrt(n2)).matrix();
  return MixedState(grid, epsilon, Eigen::VectorXd::Ones(1), std::move(modes));
}

ProjectorSum diagonalize_projector_sum(const SpaceGrid& grid, double epsilon, const Eigen::VectorXd& coefficients,
                                       const Eigen::MatrixXcd& vectors, double truncation_tol) {
  if (coefficients.size() != vectors.cols() || vectors.rows() != grid.size())
    throw ParameterError("diagonalize_projector_sum: shape mismatch");
  if ((coefficients.array() < 0).any()) throw ParameterError("diagonalize_projector_sum: negative coefficient");

  // orthonormal coordinates: v = f dx^{n/2}; rho = B B^*
  const double sq = std::sqrt(grid.cell_volume());
  const Eigen::MatrixXcd B = sq * vectors * coefficients.cwiseSqrt().asDiagonal();
  Eigen::VectorXd lambda;
  Eigen::MatrixXcd basis;  // orthonormal coordinates, columns
  if (B.cols() <= B.rows()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(B.adjoint() * B);
    lambda = es.eigenvalues();
    basis.resize(B.rows(), B.cols());
    for (Index j = 0; j < B.cols(); ++j) {
      const Eigen::VectorXcd u = B * es.eigenvectors().col(j);
      const double n = u.norm();
      basis.col(j) = n > 0 ? Eigen::VectorXcd(u / n) : Eigen::VectorXcd::Zero(B.rows());
    }
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(B * B.adjoint());
    lambda = es.eigenvalues();
    basis = es.eigenvectors();
  }

  // eigenvalues ascending; drop from the bottom
  const double total = lambda.cwiseMax(0.0).sum();
  if (!(total > 0)) throw ParameterError("diagonalize_projector_sum: zero operator");
  Index first = 0;
  double dropped = 0.0;
  while (first < lambda.size() - 1) {
    const double next = std::max(lambda[first], 0.0);
    if (lambda[first] <= 0.0 || dropped + next < truncation_tol * total) {
      dropped += next;
      ++first;
    } else {
      break;
    }
  }
  const Index keep = lambda.size() - first;
  Eigen::VectorXd weights(keep);
  Eigen::MatrixXcd modes(grid.size(), keep);
  // store in descending order
  for (Index j = 0; j < keep; ++j) {
    const Index src = lambda.size() - 1 - j;
    weights[j] = lambda[src];
    modes.col(j) = basis.col(src) / sq;
  }
  const double kept = weights.sum();
  weights /= kept;
  ProjectorSum out{MixedState(grid, epsilon, weights, std::move(modes), dropped / total), total,
                   lambda[lambda.size() - 1]};
  return out;
}

MixedState mixture(const MixedState& a, const MixedState& b, double alpha) {
  if (!(a.grid() == b.grid()) || a.epsilon() != b.epsilon())
    throw ParameterError("mixture: states live on different grids");
  if (alpha < 0 || alpha > 1) throw ParameterError("mixture: alpha outside [0, 1]");
  Eigen::VectorXd c(a.rank() + b.rank());
  c << alpha * a.weights(), (1 - alpha) * b.weights();
  Eigen::MatrixXcd v(a.grid().size(), c.size());
  v << a.modes(), b.modes();
  return diagonalize_projector_sum(a.grid(), a.epsilon(), c, v, 1e-14).state;
}

RealField kernel_diagonal(const MixedState& state) {
  RealField d = RealField::Zero(state.grid().size());
  for (Index j = 0; j < state.rank(); ++j) d += state.weights()[j] * state.modes().col(j).array().abs2();
  return d;
}

TraceReport trace(const MixedState& state, double tol) {
  TraceReport r{state.weights().sum(), kernel_diagonal(state).sum() * state.grid().cell_volume()};
  if (std::abs(r.weight_sum - r.diagonal_quadrature) > tol)
    throw ResolutionError("trace: weight sum and diagonal quadrature disagree");
  return r;
}

double coherent_matrix_element(const MixedState& state, const Eigen::VectorXd& x, const Eigen::VectorXd& p) {
  const double eps = state.epsilon();
  const ComplexField probe = CoherentState{x, p, eps}.sample(state.grid());
  const Eigen::VectorXcd overlaps = state.grid().cell_volume() * (state.modes().adjoint() * probe.matrix());
  const double s = (state.weights().array() * overlaps.array().abs2()).sum();
  return s / std::pow(2 * kPi * eps, state.grid().dim());
}

Hamiltonian::Hamiltonian(const SpaceGrid& grid, double epsilon, const PotentialSpec& potential)
    : grid_(grid), epsilon_(epsilon), sampled_(sample_potential(potential, grid)), k2_(wavenumber_squared(grid)) {}

ComplexField Hamiltonian::kinetic(const ComplexField& psi) const {
  ComplexField w = psi;
  const auto ext = extents_of(grid_);
  fft::forward(w, ext);
  w *= (0.5 * epsilon_ * epsilon_ / static_cast<double>(grid_.size())) * k2_;
  fft::backward(w, ext);
  return w;
}

ComplexField Hamiltonian::apply(const ComplexField& psi) const { return kinetic(psi) + sampled_.total * psi; }

double Hamiltonian::gradient_norm_squared(const ComplexField& psi) const {
  ComplexField w = psi;
  const auto ext = extents_of(grid_);
  fft::forward(w, ext);
  // Parseval with the unnormalised transform
  return epsilon_ * epsilon_ * (k2_ * w.abs2()).sum() * grid_.cell_volume() / static_cast<double>(grid_.size());
}

double observable_expectation(const MixedState& state, const Hamiltonian& h, Observable which) {
  const double vol = state.grid().cell_volume();
  double total = 0.0;
  for (Index j = 0; j < state.rank(); ++j) {
    const ComplexField phi = state.modes().col(j).array();
    double v = 0.0;
    switch (which) {
      case Observable::kinetic: v = 0.5 * h.gradient_norm_squared(phi); break;
      case Observable::potential: v = (h.potential().total * phi.abs2()).sum() * vol; break;
      case Observable::hamiltonian:
        v = 0.5 * h.gradient_norm_squared(phi) + (h.potential().total * phi.abs2()).sum() * vol;
        break;
      case Observable::hamiltonian_squared: v = h.apply(phi).abs2().sum() * vol; break;
    }
    total += state.weights()[j] * v;
  }
  return total;
}

double observable_expectation(const MixedState& state, const PotentialSpec& potential, Observable which) {
  return observable_expectation(state, Hamiltonian(state.grid(), state.epsilon(), potential), which);
}

double gram_top_eigenvalue(const MixedState& state) {
  const Eigen::VectorXd s = state.weights().cwiseSqrt();
  const Eigen::MatrixXcd gram =
      state.grid().cell_volume() * (s.asDiagonal() * (state.modes().adjoint() * state.modes()) * s.asDiagonal());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

OperatorBoundReport certify_operator_bound(const MixedState& state, int random_probes, int coherent_per_axis,
                                           std::uint64_t seed) {
  const SpaceGrid& grid = state.grid();
  const double eps_n = std::pow(state.epsilon(), grid.dim());
  const double vol = grid.cell_volume();
  OperatorBoundReport r;
  r.constant = gram_top_eigenvalue(state) / eps_n;

  auto quadratic_form = [&](const Eigen::VectorXcd& psi) {
    const Eigen::VectorXcd ov = vol * (state.modes().adjoint() * psi);
    return (state.weights().array() * ov.array().abs2()).sum();
  };

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (int k = 0; k < random_probes; ++k) {
    Eigen::VectorXcd psi(grid.size());
    for (Index f = 0; f < grid.size(); ++f) psi[f] = Complex(normal(rng), normal(rng));
    // bias half the probes towards the state's own span
    if (k % 2 == 1) {
      Eigen::VectorXcd c(state.rank());
      for (Index j = 0; j < state.rank(); ++j) c[j] = Complex(normal(rng), normal(rng));
      psi = 0.05 * psi + state.modes() * c;
    }
    psi /= std::sqrt(psi.squaredNorm() * vol);
    r.max_sampled_ratio = std::max(r.max_sampled_ratio, quadratic_form(psi) / eps_n);
    ++r.random_probes;
  }

  // coherent probes on a lattice covering the position density support
  const RealField diag = kernel_diagonal(state);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(grid.dim());
  for (Index f = 0; f < grid.size(); ++f) mean += diag[f] * vol * grid.point(f);
  const double span = 3.0;
  // at most 729 probes: shrink the per-axis count in high dimension
  int m = std::max(1, coherent_per_axis);
  while (m > 1 && std::pow(m, 2 * grid.dim()) > 729) --m;
  Index total = 1;
  for (int a = 0; a < 2 * grid.dim(); ++a) total *= m;
  for (Index k = 0; k < total; ++k) {
    Eigen::VectorXd x(grid.dim()), p(grid.dim());
    Index rest = k;
    for (int a = 0; a < 2 * grid.dim(); ++a) {
      const double u = m == 1 ? 0.0 : -span + 2 * span * static_cast<double>(rest % m) / (m - 1);
      rest /= m;
      if (a < grid.dim()) x[a] = mean[a] + u; else p[a - grid.dim()] = u;
    }
    const ComplexField coh = CoherentState{x, p, state.epsilon()}.sample(grid);
    r.max_sampled_ratio = std::max(r.max_sampled_ratio, quadratic_form(coh.matrix()) / eps_n);
    ++r.coherent_probes;
  }
  r.certified = r.max_sampled_ratio * eps_n <= r.constant * eps_n + 1e-10;
  return r;
}

void save_state(const std::filesystem::path& stem, const MixedState& state) {
  nlohmann::json m;
  m["epsilon"] = state.epsilon();
  m["J"] = state.rank();
  m["weights"] = std::vector<double>(state.weights().data(), state.weights().data() + state.rank());
  m["grid"] = {{"dim", state.grid().dim()}, {"L", state.grid().halfwidth()}, {"N", state.grid().points()}};
  m["truncated_weight"] = state.truncated_weight();
  m["layout"] = "one complex128 block per eigenfunction, row-major grid order, interleaved re/im";
  m["values_file"] = stem.filename().string() + ".bin";
  std::ofstream mj(stem.string() + ".json");
  if (!mj) throw Error("save_state: cannot open manifest");
  mj << m.dump(2) << '\n';
  std::ofstream bin(stem.string() + ".bin", std::ios::binary);
  bin.write(reinterpret_cast<const char*>(state.modes().data()),
            static_cast<std::streamsize>(state.modes().size() * sizeof(Complex)));
}

MixedState load_state(const std::filesystem::path& stem) {
  std::ifstream mj(stem.string() + ".json");
  if (!mj) throw Error("load_state: missing manifest");
  const auto m = nlohmann::json::parse(mj);
  SpaceGrid grid(m.at("grid").at("dim"), m.at("grid").at("L"), m.at("grid").at("N"));
  const auto w = m.at("weights").get<std::vector<double>>();
  Eigen::VectorXd weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Index>(w.size()));
  Eigen::MatrixXcd modes(grid.size(), weights.size());
  std::ifstream bin(stem.string() + ".bin", std::ios::binary);
  bin.read(reinterpret_cast<char*>(modes.data()), static_cast<std::streamsize>(modes.size() * sizeof(Complex)));
  if (!bin) throw Error("load_state: truncated eigenfunction blocks");
  return MixedState(grid, m.at("epsilon"), weights, modes, m.at("truncated_weight"));
}

}  // namespace semiclassic
