#include <doctest.h>

#include <fstream>
#include <sstream>

#include "semiclassic/experiment.hpp"

using namespace semiclassic;

namespace {
const char* kIdentity = R"(
[experiment]
kind = identity_suite
id = small
seed = 5
[grid]
points = 256
halfwidth = 8
[sweep]
epsilons = 0.5
)";

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}
}  // namespace

TEST_CASE("config parsing and defaults") {
  const ExperimentConfig c = parse_config(kIdentity);
  CHECK(c.kind == ExperimentKind::identity_suite);
  CHECK(c.points == 256);
  CHECK(c.seed == 5);
  CHECK(c.epsilons == std::vector<double>{0.5});
  CHECK(c.times == std::vector<double>{0.25, 0.5, 1.0});
}

TEST_CASE("unknown keys and bad values are config errors") {
  CHECK_THROWS_AS(parse_config("[grid]\npoinst = 64\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[grid]\npoints = many\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[grid]\npoints = 100\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[sweep]\nepsilons = 0.1, 0.2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[experiment]\nkind = nonsense\n"), ConfigError);
}

TEST_CASE("hash depends on content and seed, not on key order") {
  const ExperimentConfig a = parse_config(kIdentity);
  const ExperimentConfig b = parse_config("[sweep]\nepsilons = 0.5\n[grid]\nhalfwidth = 8\npoints = 256\n"
                                          "[experiment]\nid = small\nseed = 5\nkind = identity_suite\n");
  CHECK(config_hash(a) == config_hash(b));
  ExperimentConfig c = a;
  c.seed = 6;
  CHECK(config_hash(a) != config_hash(c));
  CHECK(config_hash(a).size() == 64);
}

TEST_CASE("outputs are byte-identical across runs") {
  const ExperimentConfig c = parse_config(kIdentity);
  const auto base = std::filesystem::temp_directory_path() / "semiclassic_unit_output";
  std::filesystem::remove_all(base);
  emit_outputs(run_experiment(c), c, base / "a");
  emit_outputs(run_experiment(c), c, base / "b");
  for (const char* f : {"identities.csv", "manifest.json", "summary.json"})
    CHECK(slurp(base / "a" / f) == slurp(base / "b" / f));
  CHECK(slurp(base / "a" / "identities.csv").rfind("epsilon,state,check,value,tolerance,pass\n", 0) == 0);
  const auto manifest = nlohmann::json::parse(slurp(base / "a" / "manifest.json"));
  CHECK(manifest["config_hash"] == config_hash(c));
  CHECK(manifest["seed"] == 5);
  CHECK(manifest["schema_version"] == kSchemaVersion);
  std::filesystem::remove_all(base);
}

TEST_CASE("negative control fails the husimi checks only") {
  ExperimentConfig c = parse_config(kIdentity);
  const IdentityReport bad = run_identity_suite(c, true);
  CHECK_FALSE(bad.pass);
  for (const auto& r : bad.rows)
    if (r.check.rfind("wigner", 0) == 0 || r.check.rfind("trace", 0) == 0) CHECK(r.pass);
}

TEST_CASE("convergence rows sort by epsilon descending in the plots") {
  ExperimentConfig c = parse_config(kIdentity);
  ConvergenceReport r;
  r.rows = {{0.2, 0.5, 0.1, "ok"}, {0.4, 0.5, 0.3, "ok"}};
  c.times = {0.5};
  const ExperimentResult out = to_result(c, r);
  CHECK(out.tables.front().header == std::vector<std::string>{"epsilon", "t", "d_P", "flags"});
  CHECK(out.plots.front().points.front().first == 0.4);
}
