#include "dpg/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace dpg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(key + ": not a number: '" + v + "'");
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(key + ": not an integer: '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": not a boolean: '" + v + "'");
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

struct Entry {
  std::string key;
  std::function<void(AdaptConfig&, const std::string&)> set;
  std::function<std::string(const AdaptConfig&)> get;
};

#define DPG_DOUBLE(name, member)                                                        \
  Entry {                                                                               \
    name, [](AdaptConfig& c, const std::string& v) { c.member = to_double(name, v); }, \
        [](const AdaptConfig& c) { return fmt(c.member); }                              \
  }
#define DPG_INT(name, member)                                                        \
  Entry {                                                                            \
    name, [](AdaptConfig& c, const std::string& v) { c.member = to_int(name, v); }, \
        [](const AdaptConfig& c) { return std::to_string(c.member); }                \
  }
#define DPG_BOOL(name, member)                                                        \
  Entry {                                                                             \
    name, [](AdaptConfig& c, const std::string& v) { c.member = to_bool(name, v); }, \
        [](const AdaptConfig& c) { return std::string(c.member ? "true" : "false"); } \
  }

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table{
      {"case", [](AdaptConfig& c, const std::string& v) { c.case_name = v; },
       [](const AdaptConfig& c) { return c.case_name; }},
      DPG_INT("p", space.order),
      DPG_INT("dp", space.enrichment),
      {"norm", [](AdaptConfig& c, const std::string& v) { c.space.norm = parse_norm(v); },
       [](const AdaptConfig& c) { return std::string(c.space.norm == TestNorm::scaled ? "scaled" : "standard"); }},
      DPG_INT("cycles", cycles),
      DPG_DOUBLE("n0", n0),
      DPG_DOUBLE("growth", growth),
      {"mode", [](AdaptConfig& c, const std::string& v) { c.mode = parse_mode(v); },
       [](const AdaptConfig& c) { return std::string(c.mode == AdaptMode::goal ? "goal" : "solution"); }},
      DPG_BOOL("regularize", regularize),
      DPG_BOOL("anisotropic", anisotropic),
      DPG_BOOL("condition", estimate_condition),
      {"solver", [](AdaptConfig& c, const std::string& v) { c.solver.method = parse_solver(v); },
       [](const AdaptConfig& c) { return std::string(c.solver.method == SolverMethod::dls ? "dls" : "normal"); }},
      DPG_BOOL("static_condensation", solver.static_condensation),
      {"remesher", [](AdaptConfig& c, const std::string& v) { c.remesher = parse_remesher(v); },
       [](const AdaptConfig& c) {
         return std::string(c.remesher == RemeshBackend::external ? "external" : "builtin");
       }},
      {"remesher_command", [](AdaptConfig& c, const std::string& v) { c.external_command = v; },
       [](const AdaptConfig& c) { return c.external_command; }},
      {"out", [](AdaptConfig& c, const std::string& v) { c.out = v; },
       [](const AdaptConfig& c) { return c.out.string(); }},
      // Case parameters.
      {"epsilon",
       [](AdaptConfig& c, const std::string& v) {
         c.params.epsilon = v == "default" ? std::numeric_limits<double>::quiet_NaN() : to_double("epsilon", v);
       },
       [](const AdaptConfig& c) {
         return std::isnan(c.params.epsilon) ? std::string("default") : fmt(c.params.epsilon);
       }},
      DPG_DOUBLE("gauss_alpha", params.gauss_alpha),
      DPG_DOUBLE("gauss_xc", params.gauss_xc),
      DPG_DOUBLE("gauss_yc", params.gauss_yc),
      DPG_DOUBLE("atan_alpha", params.atan_alpha),
      DPG_DOUBLE("atan_x1", params.atan_x1),
      DPG_DOUBLE("atan_x2", params.atan_x2),
      DPG_DOUBLE("ils_gamma", params.ils_gamma),
      DPG_DOUBLE("ils_theta", params.ils_theta),
      DPG_DOUBLE("sine_k", params.sine_k),
      DPG_INT("poly_degree", params.poly_degree),
      // Anisotropy.
      DPG_DOUBLE("rho_max", anisotropy.rho_max),
      DPG_DOUBLE("beta_max", anisotropy.beta_max),
      DPG_DOUBLE("drop_tol", anisotropy.drop_tol),
      DPG_INT("theta_points", anisotropy.theta_points),
      DPG_INT("scan_points", anisotropy.scan_points),
      DPG_DOUBLE("anisotropy_tolerance", anisotropy.tolerance),
      DPG_INT("anisotropy_max_iterations", anisotropy.max_iterations),
      // Sizing.
      DPG_DOUBLE("regularization_floor", sizing.regularization_floor),
      DPG_DOUBLE("clamp_low", sizing.clamp_low),
      DPG_DOUBLE("clamp_high", sizing.clamp_high),
      // Remesher.
      DPG_DOUBLE("length_low", remesh.length_low),
      DPG_DOUBLE("length_high", remesh.length_high),
      DPG_INT("max_passes", remesh.max_passes),
      DPG_DOUBLE("quality_floor", remesh.quality_floor),
      DPG_INT("smoothing_iterations", remesh.smoothing_iterations),
      DPG_INT("count_corrections", remesh.count_corrections),
      DPG_DOUBLE("count_tolerance", remesh.count_tolerance),
  };
  return table;
}

#undef DPG_DOUBLE
#undef DPG_INT
#undef DPG_BOOL

}  // namespace

AdaptMode parse_mode(const std::string& s) {
  if (s == "solution") return AdaptMode::solution;
  if (s == "goal") return AdaptMode::goal;
  throw ConfigError("mode must be solution or goal, got '" + s + "'");
}

TestNorm parse_norm(const std::string& s) {
  if (s == "scaled") return TestNorm::scaled;
  if (s == "standard") return TestNorm::standard;
  throw ConfigError("norm must be scaled or standard, got '" + s + "'");
}

SolverMethod parse_solver(const std::string& s) {
  if (s == "normal") return SolverMethod::normal;
  if (s == "dls") return SolverMethod::dls;
  throw ConfigError("solver must be normal or dls, got '" + s + "'");
}

RemeshBackend parse_remesher(const std::string& s) {
  if (s == "builtin") return RemeshBackend::builtin;
  if (s == "external") return RemeshBackend::external;
  throw ConfigError("remesher must be builtin or external, got '" + s + "'");
}

void set_config_value(AdaptConfig& config, const std::string& key, const std::string& value) {
  for (const auto& e : entries()) {
    if (e.key == key) {
      e.set(config, value);
      return;
    }
  }
  throw ConfigError("unknown configuration key '" + key + "'");
}

void parse_config(std::istream& in, AdaptConfig& config) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    try {
      set_config_value(config, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

AdaptConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  AdaptConfig config;
  parse_config(in, config);
  return config;
}

std::string config_text(const AdaptConfig& config) {
  std::string out;
  for (const auto& e : entries()) out += e.key + " = " + e.get(config) + "\n";
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& e : entries()) keys.push_back(e.key);
  return keys;
}

}  // namespace dpg
