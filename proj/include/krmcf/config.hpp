#pragma once

#include <charconv>
#include <map>
#include <sstream>

#include "krmcf/core.hpp"

namespace krmcf {

struct ParseError : ValidationError {
  using ValidationError::ValidationError;
};

// Flat key = value configuration. Required keys: scenario, grid, r, t_end,
// seed, amplitude. Everything else carries the default noted below.
struct RunConfig {
  std::string scenario;
  int grid = 0;
  double r = 0;
  double t_end = 0;
  std::uint64_t seed = 0;
  double amplitude = 0;

  int samples = 100;            // series rows (including t = 0)
  int snapshots = 0;            // field snapshots over the run
  std::string out_dir = "out";
  double dt_safety = 1.0;       // multiplies the stability bound

  // monotonicity probe; active when probe_t0 > 0
  double probe_t0 = 0;
  double probe_cutoff = 0;
  std::string probe_weight = "angle";
};

inline const std::vector<std::string>& known_scenarios() {
  static const std::vector<std::string> names = {
      "diagonal-flat",
      "lagrangian-anti-diagonal",
      "lagrangian-anti-diagonal-curved",
      "perturbed-graph-flat",
      "perturbed-graph-torus",
      "round-horizontal",
      "round-coupled",
  };
  return names;
}

inline void validate_config(const RunConfig& c) {
  bool known = false;
  for (const std::string& n : known_scenarios())
    if (n == c.scenario) known = true;
  if (!known) throw ValidationError("unknown scenario '" + c.scenario + "'");
  int g = c.grid;
  bool pow2 = g >= 16 && g <= 512 && (g & (g - 1)) == 0;
  if (!pow2)
    throw ValidationError("grid must be even power of two in [16,512]");
  if (!(c.t_end > 0)) throw ValidationError("t_end must be positive");
  if (c.r != 0.0 && c.r != 2.0)
    throw ValidationError("r must be 0 or 2 for shipped scenarios");
  if (!(c.amplitude >= 0 && c.amplitude <= 0.5))
    throw ValidationError("amplitude must lie in [0, 0.5]");
  if (c.samples < 2) throw ValidationError("samples must be at least 2");
  if (c.snapshots < 0) throw ValidationError("snapshots must be nonnegative");
  if (!(c.dt_safety > 0 && c.dt_safety <= 1.0))
    throw ValidationError("dt_safety must lie in (0, 1]");
  if (c.probe_t0 != 0) {
    if (!(c.probe_t0 > c.t_end))
      throw ValidationError("probe_t0 must exceed t_end");
    if (!(c.probe_cutoff > 0))
      throw ValidationError("probe_cutoff must be positive");
    if (c.probe_weight != "angle" && c.probe_weight != "gauge")
      throw ValidationError("probe_weight must be 'angle' or 'gauge'");
  }
}

inline RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::map<std::string, bool> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) -> void {
    throw ParseError("line " + std::to_string(lineno) + ": " + msg);
  };
  auto trim = [](std::string s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    std::size_t b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty()) fail("empty key");
    if (val.empty()) fail("empty value for key '" + key + "'");
    if (seen.count(key)) fail("duplicate key '" + key + "'");
    seen[key] = true;
    auto as_double = [&]() {
      double d;
      auto [p, ec] = std::from_chars(val.data(), val.data() + val.size(), d);
      if (ec != std::errc() || p != val.data() + val.size())
        fail("key '" + key + "': not a number: '" + val + "'");
      return d;
    };
    auto as_int = [&]() {
      long long v;
      auto [p, ec] = std::from_chars(val.data(), val.data() + val.size(), v);
      if (ec != std::errc() || p != val.data() + val.size())
        fail("key '" + key + "': not an integer: '" + val + "'");
      return v;
    };
    if (key == "scenario") c.scenario = val;
    else if (key == "grid") c.grid = int(as_int());
    else if (key == "r") c.r = as_double();
    else if (key == "t_end") c.t_end = as_double();
    else if (key == "seed") c.seed = std::uint64_t(as_int());
    else if (key == "amplitude") c.amplitude = as_double();
    else if (key == "samples") c.samples = int(as_int());
    else if (key == "snapshots") c.snapshots = int(as_int());
    else if (key == "out_dir") c.out_dir = val;
    else if (key == "dt_safety") c.dt_safety = as_double();
    else if (key == "probe_t0") c.probe_t0 = as_double();
    else if (key == "probe_cutoff") c.probe_cutoff = as_double();
    else if (key == "probe_weight") c.probe_weight = val;
    else fail("unknown key '" + key + "'");
  }
  for (const char* req :
       {"scenario", "grid", "r", "t_end", "seed", "amplitude"})
    if (!seen.count(req))
      throw ParseError(std::string("missing required key '") + req + "'");
  validate_config(c);
  return c;
}

}  // namespace krmcf
