#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "semiclassic/classical_dynamics.hpp"
#include "semiclassic/experiment_config.hpp"
#include "semiclassic/quantum_dynamics.hpp"

namespace semiclassic {

std::string format_number(double v);

// A CSV table; cells are formatted on insertion so output is byte-stable.
struct Table {
  std::string name;  // file stem
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

struct PlotSeries {
  std::string name;  // file stem
  std::string x_label;
  std::string y_label;
  std::vector<std::pair<double, double>> points;
};

struct ExperimentResult {
  ExperimentKind kind = ExperimentKind::identity_suite;
  std::string id;
  bool verdict = false;
  std::vector<Table> tables;
  std::vector<PlotSeries> plots;
  nlohmann::json summary = nlohmann::json::object();
  std::vector<std::string> aborted;
};

// ---- convergence sweep --------------------------------------------------------

struct ConvergenceRow {
  double epsilon = 0.0;
  double t = 0.0;
  double distance = 0.0;
  std::string flags;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  std::vector<std::pair<double, double>> sup_by_epsilon;  // (eps, sup_t d_P), eps descending
  double floor = 0.0;          // d_P(classical reconstruction at t = 0, omega-bar)
  double classical_energy_drift = 0.0;
  bool monotone = false;
  bool within_floor = false;   // last sup <= 3 floor
  bool verdict = false;
  std::vector<std::string> aborted;
};

ConvergenceReport run_convergence_sweep(const ExperimentConfig& config);

// ---- identity suite --------------------------------------------------------

struct IdentityRow {
  double epsilon = 0.0;
  std::string state;
  std::string check;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct IdentityReport {
  std::vector<IdentityRow> rows;
  bool pass = false;
};

// corrupt: scale the overlap-route Husimi field by 1.001, a negative
// control that must fail the Husimi mass, dual-route and Husimi marginal checks
IdentityReport run_identity_suite(const ExperimentConfig& config, bool corrupt = false);

// ---- conservation --------------------------------------------------------

struct ConservationRow {
  double requested_dt = 0.0;
  double effective_dt = 0.0;
  ConservationAudit audit;
};

struct ConservationReport {
  double epsilon = 0.0;
  std::vector<ConservationRow> runs;
  double energy_order = 0.0;
  double h2_order = 0.0;
  bool pass = false;
  std::vector<std::string> failures;
};

ConservationReport run_conservation_audit(const ExperimentConfig& config);

// ---- assumptions ------------------------------------------------------------

struct AssumptionRow {
  double epsilon = 0.0;
  AssumptionReport report;
  std::optional<SymbolMomentReport> symbol;
};

struct AssumptionSweep {
  PotentialReport potential;
  std::vector<AssumptionRow> rows;
  bool pass = false;
};

AssumptionSweep run_assumption_check(const ExperimentConfig& config);

// ---- residuals ----------------------------------------------------------------

struct ResidualRow {
  double epsilon = 0.0;
  std::string function;
  ResidualReport wigner;
  ResidualReport husimi;
};

struct ResidualScan {
  std::vector<ResidualRow> rows;
  std::vector<std::pair<double, double>> correction_by_epsilon;  // max |correction term| per eps
  double correction_order = 0.0;
  double max_wigner_residual = 0.0;
  bool pass = false;
};

ResidualScan run_residual_scan(const ExperimentConfig& config);

// ---- RLF stability ----------------------------------------------------------

struct RlfReport {
  StabilityReport stability;
  MeasureAudit measure;
  bool pass = false;
};

RlfReport run_rlf_stability(const ExperimentConfig& config);

// ---- dispatch and output ---------------------------------------------------------

ExperimentResult run_experiment(const ExperimentConfig& config);

// dry run of the validators for every epsilon of the config
ExperimentResult validate_experiment(const ExperimentConfig& config);

ExperimentResult to_result(const ExperimentConfig& c, const ConvergenceReport& r);
ExperimentResult to_result(const ExperimentConfig& c, const IdentityReport& r);
ExperimentResult to_result(const ExperimentConfig& c, const ConservationReport& r);
ExperimentResult to_result(const ExperimentConfig& c, const AssumptionSweep& r);
ExperimentResult to_result(const ExperimentConfig& c, const ResidualScan& r);
ExperimentResult to_result(const ExperimentConfig& c, const RlfReport& r);

// CSV tables, plot-data files (.dat, two columns), manifest.json and
// summary.json. Throws Error when the directory cannot be written.
void emit_outputs(const ExperimentResult& result, const ExperimentConfig& config, const std::filesystem::path& dir);

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

}  // namespace semiclassic
