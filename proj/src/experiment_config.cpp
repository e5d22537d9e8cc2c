#include "semiclassic/experiment_config.hpp"

#include <fstream>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/lexical_cast.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <openssl/evp.h>

namespace semiclassic {

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::convergence_sweep: return "convergence_sweep";
    case ExperimentKind::conservation_audit: return "conservation_audit";
    case ExperimentKind::assumption_check: return "assumption_check";
    case ExperimentKind::residual_scan: return "residual_scan";
    case ExperimentKind::rlf_stability: return "rlf_stability";
    case ExperimentKind::identity_suite: return "identity_suite";
  }
  return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  for (auto k : {ExperimentKind::convergence_sweep, ExperimentKind::conservation_audit,
                 ExperimentKind::assumption_check, ExperimentKind::residual_scan, ExperimentKind::rlf_stability,
                 ExperimentKind::identity_suite})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown experiment kind '" + name + "'");
}

namespace {

template <typename T>
T as(const std::string& key, const std::string& v) {
  try {
    return boost::lexical_cast<T>(boost::trim_copy(v));
  } catch (const boost::bad_lexical_cast&) {
    throw ConfigError("config key '" + key + "': cannot read '" + v + "'");
  }
}

std::vector<double> as_list(const std::string& key, const std::string& v) {
  std::vector<std::string> parts;
  boost::split(parts, v, boost::is_any_of(","));
  std::vector<double> out;
  for (const auto& p : parts)
    if (!boost::trim_copy(p).empty()) out.push_back(as<double>(key, p));
  return out;
}

Eigen::VectorXd as_vector(const std::string& key, const std::string& v) {
  const auto l = as_list(key, v);
  return Eigen::Map<const Eigen::VectorXd>(l.data(), l.size());
}

struct RoughParams {
  std::string name = "zero";
  double slope = 1, depth = 1, width = 1, period = 2, omega = 1, coefficient = 1;
  Eigen::VectorXd center;
  std::vector<double> nodes, values;
};

struct SingularParams {
  std::string kind = "none";
  double charge = 1.0;
  Eigen::VectorXd center;
  int first = 0, second = 1;
};

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  ExperimentConfig c;
  RoughParams rough;
  SingularParams sing;
  std::string symbol = "gaussian", window = "gaussian", hermite_rule = "uniform_band", initial_kind = "toeplitz";
  Eigen::VectorXd q0, w0;

  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> keys{
      {"experiment.kind", [&](auto& k, auto& v) { c.kind = experiment_kind_from_string(boost::trim_copy(v)); (void)k; }},
      {"experiment.id", [&](auto&, auto& v) { c.id = boost::trim_copy(v); }},
      {"experiment.seed", [&](auto& k, auto& v) { c.seed = as<std::uint64_t>(k, v); }},
      {"experiment.output_dir", [&](auto&, auto& v) { c.output_dir = boost::trim_copy(v); }},
      {"grid.dim", [&](auto& k, auto& v) { c.dim = as<int>(k, v); }},
      {"grid.points", [&](auto& k, auto& v) { c.points = as<int>(k, v); }},
      {"grid.halfwidth", [&](auto& k, auto& v) { c.halfwidth = as<double>(k, v); }},
      {"potential.rough", [&](auto&, auto& v) { rough.name = boost::trim_copy(v); }},
      {"potential.slope", [&](auto& k, auto& v) { rough.slope = as<double>(k, v); }},
      {"potential.depth", [&](auto& k, auto& v) { rough.depth = as<double>(k, v); }},
      {"potential.width", [&](auto& k, auto& v) { rough.width = as<double>(k, v); }},
      {"potential.period", [&](auto& k, auto& v) { rough.period = as<double>(k, v); }},
      {"potential.omega", [&](auto& k, auto& v) { rough.omega = as<double>(k, v); }},
      {"potential.coefficient", [&](auto& k, auto& v) { rough.coefficient = as<double>(k, v); }},
      {"potential.center", [&](auto& k, auto& v) { rough.center = as_vector(k, v); }},
      {"potential.nodes", [&](auto& k, auto& v) { rough.nodes = as_list(k, v); }},
      {"potential.values", [&](auto& k, auto& v) { rough.values = as_list(k, v); }},
      {"potential.singular", [&](auto&, auto& v) { sing.kind = boost::trim_copy(v); }},
      {"potential.charge", [&](auto& k, auto& v) { sing.charge = as<double>(k, v); }},
      {"potential.singular_center", [&](auto& k, auto& v) { sing.center = as_vector(k, v); }},
      {"potential.pair_first", [&](auto& k, auto& v) { sing.first = as<int>(k, v); }},
      {"potential.pair_second", [&](auto& k, auto& v) { sing.second = as<int>(k, v); }},
      {"initial.kind", [&](auto&, auto& v) { initial_kind = boost::trim_copy(v); }},
      {"initial.window", [&](auto&, auto& v) { window = boost::trim_copy(v); }},
      {"initial.alpha", [&](auto& k, auto& v) { c.initial.toeplitz.alpha = as<double>(k, v); }},
      {"initial.symbol", [&](auto&, auto& v) { symbol = boost::trim_copy(v); }},
      {"initial.q0", [&](auto& k, auto& v) { q0 = as_vector(k, v); }},
      {"initial.w0", [&](auto& k, auto& v) { w0 = as_vector(k, v); }},
      {"initial.s", [&](auto& k, auto& v) { c.initial.toeplitz.chi.s = as<double>(k, v); }},
      {"initial.side", [&](auto& k, auto& v) { c.initial.toeplitz.chi.side = as<double>(k, v); }},
      {"initial.spacing_factor", [&](auto& k, auto& v) { c.initial.toeplitz.spacing_factor = as<double>(k, v); }},
      {"initial.trace_tolerance", [&](auto& k, auto& v) { c.initial.toeplitz.trace_tolerance = as<double>(k, v); }},
      {"initial.hermite_rule", [&](auto&, auto& v) { hermite_rule = boost::trim_copy(v); }},
      {"initial.hermite_center", [&](auto& k, auto& v) { c.initial.hermite.center = as<double>(k, v); }},
      {"initial.hermite_width", [&](auto& k, auto& v) { c.initial.hermite.width = as<double>(k, v); }},
      {"initial.hermite_index", [&](auto& k, auto& v) { c.initial.hermite.single_index = as<int>(k, v); }},
      {"initial.x0", [&](auto& k, auto& v) { c.initial.x0 = as_vector(k, v); }},
      {"initial.p0", [&](auto& k, auto& v) { c.initial.p0 = as_vector(k, v); }},
      {"sweep.epsilons", [&](auto& k, auto& v) { c.epsilons = as_list(k, v); }},
      {"sweep.times", [&](auto& k, auto& v) { c.times = as_list(k, v); }},
      {"sweep.dt", [&](auto& k, auto& v) { c.dt = as<double>(k, v); }},
      {"sweep.dt_list", [&](auto& k, auto& v) { c.dt_list = as_list(k, v); }},
      {"classical.particles", [&](auto& k, auto& v) { c.particles = as<Index>(k, v); }},
      {"classical.deltas", [&](auto& k, auto& v) { c.deltas = as_list(k, v); }},
      {"classical.step", [&](auto& k, auto& v) { c.flow_step = as<double>(k, v); }},
      {"classical.bandwidth", [&](auto& k, auto& v) { c.bandwidth = as<double>(k, v); }},
      {"classical.lattice_half", [&](auto& k, auto& v) { c.lattice_half = as<double>(k, v); }},
      {"classical.lattice_spacing", [&](auto& k, auto& v) { c.lattice_spacing = as<double>(k, v); }},
      {"classical.sample_spacing", [&](auto& k, auto& v) { c.sample_spacing = as<double>(k, v); }},
      {"metric.x_half", [&](auto& k, auto& v) { c.dictionary.x_half = as<double>(k, v); }},
      {"metric.p_half", [&](auto& k, auto& v) { c.dictionary.p_half = as<double>(k, v); }},
      {"metric.total", [&](auto& k, auto& v) { c.dictionary.total = as<int>(k, v); }},
      {"metric.modes_per_axis", [&](auto& k, auto& v) { c.dictionary.modes_per_axis = as<int>(k, v); }},
      {"metric.window_scales", [&](auto& k, auto& v) { c.dictionary.window_scales = as_list(k, v); }},
      {"residual.functions", [&](auto& k, auto& v) { c.residual_functions = as<int>(k, v); }},
      {"residual.frames", [&](auto& k, auto& v) { c.residual_frames = as<int>(k, v); }},
      {"residual.tolerance", [&](auto& k, auto& v) { c.residual_tolerance = as<double>(k, v); }},
  };

  std::map<std::string, std::string> seen;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError("config: key '" + section + "' outside a section");
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      const auto it = keys.find(full);
      if (it == keys.end()) throw ConfigError("config: unknown key '" + full + "'");
      it->second(full, value.data());
      seen[full] = boost::trim_copy(value.data());
    }
  }
  std::ostringstream canon;
  for (const auto& [k, v] : seen) canon << k << "=" << v << "\n";
  c.canonical = canon.str();

  // assemble the potential
  c.potential.dim = c.dim;
  auto center = [&](const Eigen::VectorXd& v) {
    if (v.size() == 0) return Eigen::VectorXd(Eigen::VectorXd::Zero(c.dim));
    if (v.size() != c.dim) throw ConfigError("config: centre has the wrong dimension");
    return v;
  };
  if (rough.name == "zero") c.potential.rough = ZeroPotential{};
  else if (rough.name == "absolute_value") c.potential.rough = AbsoluteValue{rough.slope, center(rough.center)};
  else if (rough.name == "smoothed_well") c.potential.rough = SmoothedWell{rough.depth, rough.width, center(rough.center)};
  else if (rough.name == "sawtooth") c.potential.rough = Sawtooth{rough.slope, rough.period};
  else if (rough.name == "harmonic") c.potential.rough = Harmonic{rough.omega, center(rough.center)};
  else if (rough.name == "quartic") c.potential.rough = Quartic{rough.coefficient};
  else if (rough.name == "user_table") c.potential.rough = UserTable{rough.nodes, rough.values};
  else throw ConfigError("config: unknown rough potential '" + rough.name + "'");
  if (sing.kind == "point") c.potential.points.push_back({sing.charge, center(sing.center)});
  else if (sing.kind == "pair") c.potential.pairs.push_back({sing.charge, sing.first, sing.second});
  else if (sing.kind != "none") throw ConfigError("config: unknown singular part '" + sing.kind + "'");
  try {
    validate(c.potential);
  } catch (const Error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  if (initial_kind == "toeplitz") c.initial.kind = InitialSpec::Kind::toeplitz;
  else if (initial_kind == "hermite") c.initial.kind = InitialSpec::Kind::hermite;
  else if (initial_kind == "coherent") c.initial.kind = InitialSpec::Kind::coherent;
  else throw ConfigError("config: unknown initial kind '" + initial_kind + "'");
  c.initial.toeplitz.window = window_from_string(window);
  c.initial.toeplitz.chi.kind = symbol_kind_from_string(symbol);
  c.initial.toeplitz.chi.dim = c.dim;
  c.initial.toeplitz.chi.q0 = center(q0);
  c.initial.toeplitz.chi.w0 = center(w0);
  if (hermite_rule == "uniform_band") c.initial.hermite.rule = HermiteSpec::Rule::uniform_band;
  else if (hermite_rule == "smoothed_band") c.initial.hermite.rule = HermiteSpec::Rule::smoothed_band;
  else if (hermite_rule == "single") c.initial.hermite.rule = HermiteSpec::Rule::single;
  else throw ConfigError("config: unknown hermite rule '" + hermite_rule + "'");
  c.initial.x0 = center(c.initial.x0);
  c.initial.p0 = center(c.initial.p0);
  c.dictionary.dim = c.dim;

  if (c.epsilons.empty()) throw ConfigError("config: empty epsilon list");
  for (std::size_t k = 0; k < c.epsilons.size(); ++k) {
    if (!(c.epsilons[k] > 0)) throw ConfigError("config: epsilons must be positive");
    if (k > 0 && !(c.epsilons[k] < c.epsilons[k - 1])) throw ConfigError("config: epsilons must strictly decrease");
  }
  for (std::size_t k = 0; k < c.times.size(); ++k)
    if (!(c.times[k] > 0) || (k > 0 && !(c.times[k] > c.times[k - 1])))
      throw ConfigError("config: times must be positive and increasing");
  if (c.dim < 1 || c.dim > 3) throw ConfigError("config: dim must be 1, 2 or 3");
  if (c.points < 2 || (c.points & (c.points - 1))) throw ConfigError("config: points must be a power of two");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read config " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_hash(const ExperimentConfig& config) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  const std::string text = config.canonical + "seed=" + std::to_string(config.seed) + "\n";
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  EVP_DigestUpdate(ctx, text.data(), text.size());
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

SpaceGrid config_grid(const ExperimentConfig& config) {
  return SpaceGrid(config.dim, config.halfwidth, config.points);
}

MixedState build_initial(const InitialSpec& spec, const SpaceGrid& grid, double epsilon) {
  switch (spec.kind) {
    case InitialSpec::Kind::toeplitz: {
      ToeplitzSpec t = spec.toeplitz;
      t.epsilon = epsilon;
      return build_toeplitz(t, grid).state;
    }
    case InitialSpec::Kind::hermite: {
      HermiteSpec h = spec.hermite;
      h.epsilon = epsilon;
      return build_hermite(h, grid).state;
    }
    case InitialSpec::Kind::coherent: {
      const Eigen::VectorXd x = spec.x0.size() ? spec.x0 : Eigen::VectorXd::Zero(grid.dim());
      const Eigen::VectorXd p = spec.p0.size() ? spec.p0 : Eigen::VectorXd::Zero(grid.dim());
      return pure_state(grid, epsilon, CoherentState{x, p, epsilon}.sample(grid));
    }
  }
  throw ConfigError("build_initial: unknown kind");
}

std::optional<SymbolSpec> initial_target(const InitialSpec& spec) {
  if (spec.kind == InitialSpec::Kind::toeplitz) return spec.toeplitz.chi;
  if (spec.kind == InitialSpec::Kind::hermite && spec.hermite.rule != HermiteSpec::Rule::single) {
    SymbolSpec a;
    a.kind = SymbolSpec::Kind::annulus;
    a.s = spec.hermite.center;
    a.side = 2 * spec.hermite.width;
    return a;
  }
  return std::nullopt;
}

}  // namespace semiclassic
