#include <fstream>

#include "semiclassic/experiment.hpp"

namespace semiclassic {

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  return out;
}

}  // namespace

void emit_outputs(const ExperimentResult& result, const ExperimentConfig& config, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());

  nlohmann::json files = nlohmann::json::array();
  for (const Table& t : result.tables) {
    auto out = open_out(dir / (t.name + ".csv"));
    for (std::size_t k = 0; k < t.header.size(); ++k) out << (k ? "," : "") << t.header[k];
    out << "\n";
    for (const auto& row : t.rows) {
      for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << row[k];
      out << "\n";
    }
    files.push_back(t.name + ".csv");
  }
  for (const PlotSeries& s : result.plots) {
    auto out = open_out(dir / (s.name + ".dat"));
    out << "# " << s.x_label << " " << s.y_label << "\n";
    for (auto [x, y] : s.points) out << format_number(x) << " " << format_number(y) << "\n";
    files.push_back(s.name + ".dat");
  }

  nlohmann::json manifest{{"schema_version", kSchemaVersion},
                          {"version", kVersion},
                          {"experiment", to_string(result.kind)},
                          {"id", result.id},
                          {"seed", config.seed},
                          {"config_hash", config_hash(config)},
                          {"config", config.canonical},
                          {"files", files}};
  open_out(dir / "manifest.json") << manifest.dump(2) << "\n";

  nlohmann::json summary = result.summary;
  summary["verdict"] = result.verdict ? "pass" : "fail";
  summary["aborted"] = result.aborted;
  open_out(dir / "summary.json") << summary.dump(2) << "\n";
}

}  // namespace semiclassic
