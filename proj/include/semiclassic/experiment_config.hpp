#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "semiclassic/initdata.hpp"
#include "semiclassic/potentials.hpp"
#include "semiclassic/test_functions.hpp"

namespace semiclassic {

enum class ExperimentKind {
  convergence_sweep,
  conservation_audit,
  assumption_check,
  residual_scan,
  rlf_stability,
  identity_suite
};

std::string to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& name);

struct InitialSpec {
  enum class Kind { toeplitz, hermite, coherent };
  Kind kind = Kind::toeplitz;
  ToeplitzSpec toeplitz;  // epsilon overwritten per run
  HermiteSpec hermite;
  Eigen::VectorXd x0;  // coherent centre
  Eigen::VectorXd p0;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::identity_suite;
  std::string id = "run";
  std::uint64_t seed = 20240601;

  int dim = 1;
  int points = 512;
  double halfwidth = 8.0;

  PotentialSpec potential;
  InitialSpec initial;

  std::vector<double> epsilons{0.4, 0.2, 0.1, 0.05};
  std::vector<double> times{0.25, 0.5, 1.0};
  double dt = 1e-2;
  std::vector<double> dt_list{1e-2, 5e-3, 2.5e-3};

  Index particles = 200000;
  std::vector<double> deltas{0.2, 0.1, 0.05, 0.025};
  double flow_step = 1e-2;
  double bandwidth = 0.2;
  double lattice_half = 4.0;
  double lattice_spacing = 0.1;
  double sample_spacing = 0.02;  // lattice the initial density is sampled from

  DictionaryOptions dictionary;
  int residual_functions = 8;
  int residual_frames = 41;
  double residual_tolerance = 1e-4;

  std::filesystem::path output_dir;
  // canonical key=value listing (sorted), the input of the hash
  std::string canonical;

  double horizon() const { return times.empty() ? 1.0 : times.back(); }
};

// Sectioned key = value text, '#' and ';' comments. Unknown keys are an
// error so typos do not silently fall back to defaults.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& file);

// SHA-256 of the canonical listing, hex
std::string config_hash(const ExperimentConfig& config);

SpaceGrid config_grid(const ExperimentConfig& config);
MixedState build_initial(const InitialSpec& spec, const SpaceGrid& grid, double epsilon);
// the analytic omega-bar the initial data is meant to approach
std::optional<SymbolSpec> initial_target(const InitialSpec& spec);

}  // namespace semiclassic
