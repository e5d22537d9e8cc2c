// semiclassic-lab: run or validate one experiment config.
// exit 0 pass, 2 verdict fail, 1 execution error
#include <CLI11.hpp>
#include <iostream>

#include "semiclassic/experiment.hpp"

namespace sc = semiclassic;

int main(int argc, char** argv) {
  CLI::App app{"semiclassical limit experiments"};
  app.set_version_flag("--version", sc::kVersion);
  app.require_subcommand(1);

  std::string config_file, out_dir;
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "run an experiment and write its outputs");
  run->add_option("--config", config_file, "experiment config")->required()->check(CLI::ExistingFile);
  run->add_option("--out-dir", out_dir, "output directory")->required();
  run->add_option("--seed-override", seed, "replace the config seed");

  std::string validate_file;
  auto* validate = app.add_subcommand("validate", "check the config and the model assumptions");
  validate->add_option("--config", validate_file, "experiment config")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) {
      sc::ExperimentConfig cfg = sc::load_config(config_file);
      if (seed) cfg.seed = *seed;
      const sc::ExperimentResult r = sc::run_experiment(cfg);
      sc::emit_outputs(r, cfg, out_dir);
      std::cout << sc::to_string(r.kind) << " " << r.id << ": " << (r.verdict ? "pass" : "fail") << "\n";
      for (const auto& a : r.aborted) std::cout << "  aborted " << a << "\n";
      return r.verdict ? 0 : 2;
    }
    const sc::ExperimentConfig cfg = sc::load_config(validate_file);
    const sc::ExperimentResult r = sc::validate_experiment(cfg);
    std::cout << r.summary.dump(2) << "\n";
    std::cout << "config " << sc::config_hash(cfg) << ": " << (r.verdict ? "valid" : "assumptions fail") << "\n";
    return r.verdict ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
