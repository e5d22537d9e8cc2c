#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "semiclassic/gridcore.hpp"

namespace semiclassic {

// amplitude * exp(-u^2 / (2 sigma^2)) * cos(k u)   (kind cos)
// amplitude * exp(-u^2 / (2 sigma^2)) * sin(k u)   (kind sin)
struct Factor {
  enum class Kind { cos, sin };
  double amplitude = 1.0;
  double sigma = 1.0;
  double k = 0.0;
  Kind kind = Kind::cos;

  double value(double u) const;
  double derivative(double u) const;
  // \int f(u) e^{-i u y} du
  Complex fourier(double y) const;
  // \int u f(u) e^{-i u y} du
  Complex fourier_times_u(double y) const;
  // \int f'(u) e^{-i u y} du = i y fourier(y)
  Complex fourier_derivative(double y) const { return Complex(0, y) * fourier(y); }
  // f * G_eps^{(1)}, again a factor
  Factor smoothed(double epsilon) const;
  // |y| beyond which |fourier| has dropped below tail * max|fourier|
  double fourier_extent(double tail) const;
  double sup_abs() const;
  double sup_abs_derivative() const;
  double l1_norm() const;
};

// Tensor product over the 2n phase-space axes: factors[0..n) act on x,
// factors[n..2n) on p.
struct TestFunction {
  int dim = 1;
  std::vector<Factor> factors;
  double lipschitz = 0.0;
  std::string label;

  double operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& p) const;
  TestFunction smoothed(double epsilon) const;  // * G_eps^{(2n)}
};

TestFunction make_test_function(int dim, std::vector<Factor> factors, std::string label = {});

struct DictionaryOptions {
  int dim = 1;
  double x_half = 4.0;  // box half-widths the frequencies and windows refer to
  double p_half = 4.0;
  int total = 64;       // K_total
  std::vector<double> window_scales{0.5, 1.0};
  int modes_per_axis = 8;  // 1, c1, s1, c2, s2, c3, s3, c4
};

struct TestFunctionDictionary {
  DictionaryOptions options;
  std::vector<TestFunction> functions;
  std::vector<double> weights;  // 2^{-k}

  std::size_t size() const { return functions.size(); }
};

TestFunctionDictionary build_dictionary(const DictionaryOptions& options = {});

// \int phi_k d mu for a lattice density, separable evaluation
Eigen::VectorXd dictionary_moments(const PhaseField& field, const TestFunctionDictionary& dict);
double pair_lattice(const PhaseField& field, const TestFunction& phi);

// sum_k 2^{-k} |a_k - b_k|
double dP_from_moments(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const TestFunctionDictionary& dict);
// throws ConsistencyError when the masses differ by more than mass_tol
double dP(const PhaseField& mu, const PhaseField& nu, const TestFunctionDictionary& dict, double mass_tol = 1e-6);

}  // namespace semiclassic
