#pragma once

// JSON run configuration.
//
//   {
//     "system": { "levels": [ { "omega": 0, "g": 0, "c": [re, im] }, ... ] },
//     "bath": { "type": "discrete", "modes": [ { "omega": 1, "xi": 0.2 } ] }
//           | { "type": "ohmic", "gamma": 1, "cutoff": 1 },
//     "initial_state": { "type": "vacuum" }
//                    | { "type": "fock", "occupations": [3] }
//                    | { "type": "thermal", "temperature": 1 },
//     "run": {
//       "pairs": [[0, 1]],
//       "time": { "start": 0, "stop": 10, "step": 0.1 },      // or "count"
//       "temperatures": [0, 1, 2] | { "start": 0, "stop": 4, "count": 41 },
//       "output": "out",
//       "quadrature": { "rel_tol": 1e-10, "abs_tol": 1e-14, "cutoff_multiplier": 30 },
//       "truncation": { "dims": [20], "cap": 200000 }
//     }
//   }
//
// Complex numbers are a plain number, [re, im], or {"re": .., "im": ..}.

#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dephasim/error.hpp"
#include "dephasim/model.hpp"
#include "dephasim/oracle.hpp"
#include "dephasim/quadrature.hpp"

namespace dephasim::cli {

using json = nlohmann::json;

struct Grid {
  double start = 0.0;
  double stop = 0.0;
  std::optional<double> step;
  std::optional<std::size_t> count;

  /// Points are start + k * step (never accumulated), so grids are reproducible.
  std::vector<double> points() const {
    std::vector<double> out;
    if (count) {
      if (*count == 1) return {start};
      for (std::size_t k = 0; k < *count; ++k)
        out.push_back(k + 1 == *count ? stop
                                      : start + (stop - start) * static_cast<double>(k) /
                                                    static_cast<double>(*count - 1));
      return out;
    }
    const double h = step.value_or(1.0);
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / h * (1.0 + 1e-12) + 1e-9));
    for (std::size_t k = 0; k <= n; ++k) out.push_back(start + h * static_cast<double>(k));
    return out;
  }
};

struct RunConfig {
  SystemSpec system;
  BathSpec bath;
  BathInitialState state;
  std::vector<LevelPair> pairs;  // empty: every pair n < m
  Grid time{0.0, 10.0, 0.1, std::nullopt};
  std::vector<double> temperatures;
  std::string output_dir = ".";
  QuadratureSpec quad;
  std::optional<std::vector<std::size_t>> trunc_dims;
  std::size_t dimension_cap = 200000;
  bool verify_quadrature = false;
  bool magnitude_only = false;
};

namespace detail {

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::Config, path + ": " + what);
}

inline const json& field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(path + "." + key, "missing");
  return *it;
}

inline double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(path, "not finite");
  return x;
}

inline double number_or(const json& obj, const std::string& key, double fallback,
                        const std::string& path) {
  if (!obj.contains(key)) return fallback;
  return number(obj.at(key), path + "." + key);
}

inline complex complex_value(const json& v, const std::string& path) {
  if (v.is_number()) return {number(v, path), 0.0};
  if (v.is_array()) {
    if (v.size() != 2) fail(path, "complex array must be [re, im]");
    return {number(v[0], path + "[0]"), number(v[1], path + "[1]")};
  }
  if (v.is_object())
    return {number_or(v, "re", 0.0, path), number_or(v, "im", 0.0, path)};
  fail(path, "expected a number, [re, im] or {re, im}");
}

inline std::size_t count_value(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<long long>() < 0) fail(path, "expected a nonnegative integer");
  return static_cast<std::size_t>(v.get<long long>());
}

inline std::string type_of(const json& obj, const std::string& path) {
  const json& t = field(obj, "type", path);
  if (!t.is_string()) fail(path + ".type", "expected a string");
  return t.get<std::string>();
}

inline Grid grid_value(const json& v, const std::string& path) {
  Grid g;
  g.start = number_or(v, "start", 0.0, path);
  g.stop = number(field(v, "stop", path), path + ".stop");
  if (v.contains("step")) g.step = number(v.at("step"), path + ".step");
  if (v.contains("count")) g.count = count_value(v.at("count"), path + ".count");
  if (g.step && g.count) fail(path, "give either step or count, not both");
  if (!g.step && !g.count) fail(path, "needs step or count");
  if (g.step && !(*g.step > 0.0)) fail(path + ".step", "must be > 0");
  if (g.count && *g.count == 0) fail(path + ".count", "must be > 0");
  if (g.stop < g.start) fail(path, "stop < start");
  return g;
}

}  // namespace detail

inline SystemSpec parse_system(const json& v, const std::string& path = "system") {
  SystemSpec spec;
  const json& levels = detail::field(v, "levels", path);
  if (!levels.is_array()) detail::fail(path + ".levels", "expected an array");
  for (std::size_t n = 0; n < levels.size(); ++n) {
    const std::string p = path + ".levels[" + std::to_string(n) + "]";
    const json& lv = levels[n];
    Level level;
    level.omega = detail::number(detail::field(lv, "omega", p), p + ".omega");
    level.g = detail::number(detail::field(lv, "g", p), p + ".g");
    level.amplitude = lv.contains("c") ? detail::complex_value(lv.at("c"), p + ".c") : complex(1.0, 0.0);
    spec.levels.push_back(level);
  }
  return spec;
}

inline BathSpec parse_bath(const json& v, const std::string& path = "bath") {
  const std::string type = detail::type_of(v, path);
  if (type == "discrete") {
    DiscreteBath bath;
    const json& modes = detail::field(v, "modes", path);
    if (!modes.is_array()) detail::fail(path + ".modes", "expected an array");
    for (std::size_t j = 0; j < modes.size(); ++j) {
      const std::string p = path + ".modes[" + std::to_string(j) + "]";
      BathMode mode;
      mode.omega = detail::number(detail::field(modes[j], "omega", p), p + ".omega");
      mode.xi = detail::complex_value(detail::field(modes[j], "xi", p), p + ".xi");
      bath.modes.push_back(mode);
    }
    return bath;
  }
  if (type == "ohmic") {
    return OhmicBath{detail::number(detail::field(v, "gamma", path), path + ".gamma"),
                     detail::number(detail::field(v, "cutoff", path), path + ".cutoff")};
  }
  detail::fail(path + ".type", "unknown bath type '" + type + "'");
}

inline BathInitialState parse_state(const json& v, const std::string& path = "initial_state") {
  const std::string type = detail::type_of(v, path);
  if (type == "vacuum") return VacuumState{};
  if (type == "fock") {
    FockState f;
    const json& occ = detail::field(v, "occupations", path);
    if (!occ.is_array()) detail::fail(path + ".occupations", "expected an array");
    for (std::size_t j = 0; j < occ.size(); ++j)
      f.occupations.push_back(static_cast<unsigned>(
          detail::count_value(occ[j], path + ".occupations[" + std::to_string(j) + "]")));
    return f;
  }
  if (type == "thermal")
    return ThermalState{detail::number(detail::field(v, "temperature", path), path + ".temperature")};
  detail::fail(path + ".type", "unknown initial state type '" + type + "'");
}

inline RunConfig parse_config(const json& doc) {
  RunConfig cfg;
  if (!doc.is_object()) detail::fail("$", "expected a JSON object");
  cfg.system = parse_system(detail::field(doc, "system", "$"));
  cfg.bath = parse_bath(detail::field(doc, "bath", "$"));
  cfg.state = doc.contains("initial_state") ? parse_state(doc.at("initial_state")) : VacuumState{};
  if (!doc.contains("run")) return cfg;

  const json& run = doc.at("run");
  if (!run.is_object()) detail::fail("run", "expected an object");
  if (run.contains("pairs")) {
    const json& pairs = run.at("pairs");
    if (!pairs.is_array()) detail::fail("run.pairs", "expected an array of [n, m]");
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const std::string p = "run.pairs[" + std::to_string(k) + "]";
      if (!pairs[k].is_array() || pairs[k].size() != 2) detail::fail(p, "expected [n, m]");
      cfg.pairs.push_back({detail::count_value(pairs[k][0], p + "[0]"),
                           detail::count_value(pairs[k][1], p + "[1]")});
    }
  }
  if (run.contains("time")) {
    cfg.time = detail::grid_value(run.at("time"), "run.time");
    if (cfg.time.start < 0.0) detail::fail("run.time.start", "must be >= 0");
  }
  if (run.contains("temperatures")) {
    const json& temps = run.at("temperatures");
    if (temps.is_array()) {
      for (std::size_t k = 0; k < temps.size(); ++k)
        cfg.temperatures.push_back(
            detail::number(temps[k], "run.temperatures[" + std::to_string(k) + "]"));
    } else {
      cfg.temperatures = detail::grid_value(temps, "run.temperatures").points();
    }
    if (cfg.temperatures.empty()) detail::fail("run.temperatures", "must not be empty");
    for (double T : cfg.temperatures)
      if (T < 0.0) detail::fail("run.temperatures", "temperatures must be >= 0");
  }
  if (run.contains("output")) {
    if (!run.at("output").is_string()) detail::fail("run.output", "expected a string");
    cfg.output_dir = run.at("output").get<std::string>();
  }
  if (run.contains("quadrature")) {
    const json& q = run.at("quadrature");
    cfg.quad.rel_tol = detail::number_or(q, "rel_tol", cfg.quad.rel_tol, "run.quadrature");
    cfg.quad.abs_tol = detail::number_or(q, "abs_tol", cfg.quad.abs_tol, "run.quadrature");
    cfg.quad.cutoff_multiplier =
        detail::number_or(q, "cutoff_multiplier", cfg.quad.cutoff_multiplier, "run.quadrature");
    try {
      cfg.quad.validate();
    } catch (const Error& e) {
      detail::fail("run.quadrature", e.what());
    }
  }
  if (run.contains("truncation")) {
    const json& tr = run.at("truncation");
    if (tr.contains("dims")) {
      std::vector<std::size_t> dims;
      const json& d = tr.at("dims");
      if (!d.is_array()) detail::fail("run.truncation.dims", "expected an array");
      for (std::size_t j = 0; j < d.size(); ++j)
        dims.push_back(detail::count_value(d[j], "run.truncation.dims[" + std::to_string(j) + "]"));
      cfg.trunc_dims = dims;
    }
    if (tr.contains("cap")) cfg.dimension_cap = detail::count_value(tr.at("cap"), "run.truncation.cap");
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, "cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Config, path + ": " + e.what());
  }
  return parse_config(doc);
}

inline json complex_to_json(complex z) {
  if (z.imag() == 0.0) return z.real();
  return json::array({z.real(), z.imag()});
}

inline json to_json(const SystemSpec& system) {
  json levels = json::array();
  for (const Level& lv : system.levels)
    levels.push_back({{"omega", lv.omega}, {"g", lv.g}, {"c", complex_to_json(lv.amplitude)}});
  return {{"levels", levels}};
}

inline json to_json(const BathSpec& bath) {
  if (const auto* d = std::get_if<DiscreteBath>(&bath)) {
    json modes = json::array();
    for (const BathMode& m : d->modes) modes.push_back({{"omega", m.omega}, {"xi", complex_to_json(m.xi)}});
    return {{"type", "discrete"}, {"modes", modes}};
  }
  const auto& o = std::get<OhmicBath>(bath);
  return {{"type", "ohmic"}, {"gamma", o.gamma}, {"cutoff", o.cutoff}};
}

inline json to_json(const BathInitialState& state) {
  if (const auto* f = std::get_if<FockState>(&state)) return {{"type", "fock"}, {"occupations", f->occupations}};
  if (const auto* th = std::get_if<ThermalState>(&state))
    return {{"type", "thermal"}, {"temperature", th->temperature}};
  return {{"type", "vacuum"}};
}

/// Config document for the single-boson-mode system b^dag b coupled to a
/// one-mode discrete bath.
inline json preset_boson_mode_config(double omega0, int n_max, double bath_omega = 1.0,
                                     complex bath_xi = {0.2, 0.0}) {
  json doc;
  doc["system"] = to_json(preset_boson_mode(omega0, n_max));
  doc["bath"] = to_json(BathSpec{DiscreteBath{{{bath_omega, bath_xi}}}});
  doc["initial_state"] = to_json(BathInitialState{VacuumState{}});
  doc["run"] = {{"time", {{"start", 0.0}, {"stop", 10.0}, {"step", 0.1}}}, {"output", "out"}};
  return doc;
}

}  // namespace dephasim::cli
