#pragma once

// Scenario files: a JSON document holding the double well and optional run
// controls. Every object is checked against its key list before anything is
// read, so a misspelt key is an error rather than a silently ignored default.
//
//   {
//     "left":  {"family": "harmonic_cap", "depth": 1.5, "omega": 2.0, "center": 0.0}
//           |  {"family": "smooth_bump", "depth": 1.5, "support": [-1.0, 1.0]},
//     "right": {"b": 3.0, "w": 0.9675, "v": 1.5},
//     "hbar":  0.15,
//     "run": {
//       "left_level": 0, "right_level": 0, "grid_step": 1e-3, "padding": 2.0,
//       "energy": -1.0,
//       "scan":   {"param": "width", "range": [0.5, 1.5], "samples": 200, "delta_method": "wkb"},
//       "evolve": {"method": "grid", "t_final": 10.0, "steps": 400, "detuning": 0.0}
//     }
//   }
//
// `run.energy` replaces the grid ground state as E_l for scan and detect.
// `evolve.detuning` is in units of the coupling delta.

#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "tunnelcatch/model.hpp"
#include "tunnelcatch/scanner.hpp"

namespace tunnelcatch::cli {

/// Schema violation; the message names the offending key.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EvolveMethod { TwoLevel, Grid };

struct ScanControls {
  ScanParameter param = ScanParameter::Width;
  std::optional<double> lo;
  std::optional<double> hi;
  std::size_t samples = 200;
  DeltaMethod delta_method = DeltaMethod::Wkb;
};

struct EvolveControls {
  EvolveMethod method = EvolveMethod::TwoLevel;
  std::optional<double> t_final;
  std::optional<std::size_t> steps;
  double detuning = 0.0;
};

struct Scenario {
  DoubleWellSpec spec;
  std::size_t left_level = 0;
  std::size_t right_level = 0;
  double grid_step = 1e-3;
  double padding = 2.0;
  std::optional<double> energy;
  ScanControls scan;
  EvolveControls evolve;
};

namespace detail {

using json = nlohmann::json;

inline void require_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ScenarioError(std::string(where) + ": expected an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (auto k : allowed) known = known || item.key() == k;
    if (!known) {
      const std::string path = where.empty() ? item.key() : std::string(where) + "." + item.key();
      throw ScenarioError("unknown key '" + path + "'");
    }
  }
}

inline const json& member(const json& obj, std::string_view where, const char* key) {
  if (!obj.contains(key)) throw ScenarioError("missing key '" + std::string(where) + "." + key + "'");
  return obj.at(key);
}

inline double number(const json& value, const std::string& path) {
  if (!value.is_number()) throw ScenarioError("'" + path + "' must be a number");
  return value.get<double>();
}

inline double number(const json& obj, std::string_view where, const char* key) {
  return number(member(obj, where, key), std::string(where) + "." + key);
}

inline std::size_t count(const json& obj, std::string_view where, const char* key) {
  const json& v = member(obj, where, key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ScenarioError("'" + std::string(where) + "." + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

inline std::string text(const json& obj, std::string_view where, const char* key) {
  const json& v = member(obj, where, key);
  if (!v.is_string()) throw ScenarioError("'" + std::string(where) + "." + key + "' must be a string");
  return v.get<std::string>();
}

inline std::pair<double, double> pair(const json& obj, std::string_view where, const char* key) {
  const json& v = member(obj, where, key);
  const std::string path = std::string(where) + "." + key;
  if (!v.is_array() || v.size() != 2) throw ScenarioError("'" + path + "' must be a two-element array");
  return {number(v[0], path + "[0]"), number(v[1], path + "[1]")};
}

inline PhysicalWellSpec parse_left(const json& j) {
  const std::string family = text(j, "left", "family");
  if (family == "harmonic_cap") {
    require_keys(j, "left", {"family", "depth", "omega", "center"});
    const double center = j.contains("center") ? number(j, "left", "center") : 0.0;
    return PhysicalWellSpec::harmonic_cap(number(j, "left", "depth"), number(j, "left", "omega"), center);
  }
  if (family == "smooth_bump") {
    require_keys(j, "left", {"family", "depth", "support"});
    const auto [lo, hi] = pair(j, "left", "support");
    return PhysicalWellSpec::smooth_bump(number(j, "left", "depth"), lo, hi);
  }
  throw ScenarioError("'left.family' must be \"harmonic_cap\" or \"smooth_bump\", got \"" + family + "\"");
}

}  // namespace detail

inline ScanParameter parse_scan_parameter(std::string_view s) {
  if (s == "width") return ScanParameter::Width;
  if (s == "depth") return ScanParameter::Depth;
  throw ScenarioError("scan parameter must be width or depth, got \"" + std::string(s) + "\"");
}

inline DeltaMethod parse_delta_method(std::string_view s) {
  if (s == "wkb") return DeltaMethod::Wkb;
  if (s == "wronskian") return DeltaMethod::Wronskian;
  throw ScenarioError("delta method must be wkb or wronskian, got \"" + std::string(s) + "\"");
}

inline EvolveMethod parse_evolve_method(std::string_view s) {
  if (s == "two_level") return EvolveMethod::TwoLevel;
  if (s == "grid") return EvolveMethod::Grid;
  throw ScenarioError("method must be two_level or grid, got \"" + std::string(s) + "\"");
}

inline Scenario parse_scenario(const nlohmann::json& root) {
  using namespace detail;
  require_keys(root, "", {"left", "right", "hbar", "run"});
  Scenario sc;
  sc.spec.left = parse_left(member(root, "", "left"));
  const json& right = member(root, "", "right");
  require_keys(right, "right", {"b", "w", "v"});
  sc.spec.right = {number(right, "right", "b"), number(right, "right", "w"), number(right, "right", "v")};
  sc.spec.hbar = number(member(root, "", "hbar"), "hbar");

  if (root.contains("run")) {
    const json& run = root.at("run");
    require_keys(run, "run", {"left_level", "right_level", "grid_step", "padding", "energy", "scan", "evolve"});
    if (run.contains("left_level")) sc.left_level = count(run, "run", "left_level");
    if (run.contains("right_level")) sc.right_level = count(run, "run", "right_level");
    if (run.contains("grid_step")) sc.grid_step = number(run, "run", "grid_step");
    if (run.contains("padding")) sc.padding = number(run, "run", "padding");
    if (run.contains("energy")) sc.energy = number(run, "run", "energy");
    if (run.contains("scan")) {
      const json& s = run.at("scan");
      require_keys(s, "run.scan", {"param", "range", "samples", "delta_method"});
      if (s.contains("param")) sc.scan.param = parse_scan_parameter(text(s, "run.scan", "param"));
      if (s.contains("range")) {
        const auto [lo, hi] = pair(s, "run.scan", "range");
        sc.scan.lo = lo;
        sc.scan.hi = hi;
      }
      if (s.contains("samples")) sc.scan.samples = count(s, "run.scan", "samples");
      if (s.contains("delta_method")) sc.scan.delta_method = parse_delta_method(text(s, "run.scan", "delta_method"));
    }
    if (run.contains("evolve")) {
      const json& e = run.at("evolve");
      require_keys(e, "run.evolve", {"method", "t_final", "steps", "detuning"});
      if (e.contains("method")) sc.evolve.method = parse_evolve_method(text(e, "run.evolve", "method"));
      if (e.contains("t_final")) sc.evolve.t_final = number(e, "run.evolve", "t_final");
      if (e.contains("steps")) sc.evolve.steps = count(e, "run.evolve", "steps");
      if (e.contains("detuning")) sc.evolve.detuning = number(e, "run.evolve", "detuning");
    }
  }
  if (!(sc.grid_step > 0.0) || !(sc.padding > 0.0)) {
    throw ScenarioError("'run.grid_step' and 'run.padding' must be positive");
  }
  try {
    validate(sc.spec);
  } catch (const Error& e) {
    throw ScenarioError(e.what());
  }
  return sc;
}

inline Scenario parse_scenario_text(const std::string& text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError(std::string("malformed JSON: ") + e.what());
  }
  return parse_scenario(root);
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario_text(buffer.str());
}

}  // namespace tunnelcatch::cli
