#pragma once

#include <isotau/checks.hpp>

#include <json.hpp>

#include <fstream>
#include <set>

namespace isotau::io {

using nlohmann::json;

inline double real_of(const json& v, const std::string& what) {
  if (!v.is_number()) throw config_error(what + " must be a number");
  return v.get<double>();
}

inline cplx complex_of(const json& v, const std::string& what) {
  if (!v.is_array() || v.size() != 2) throw config_error(what + " must be a [re, im] pair");
  return {real_of(v[0], what), real_of(v[1], what)};
}

inline Scenario scenario_from_json(const json& j) {
  if (!j.is_object()) throw config_error("scenario must be a JSON object");
  static const std::set<std::string> known{"name", "e", "a", "t", "p", "q", "seed", "checks", "tolerances"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw config_error("unknown scenario field: " + it.key());
  for (const char* k : {"e", "a", "t", "p", "q"})
    if (!j.contains(k)) throw config_error(std::string("scenario is missing field: ") + k);
  Scenario s;
  const json& e = j["e"];
  if (!e.is_array() || e.size() != 3) throw config_error("e must hold three [re, im] pairs");
  for (int k = 0; k < 3; ++k) s.e[k] = complex_of(e[k], "e[" + std::to_string(k) + "]");
  s.a = complex_of(j["a"], "a");
  s.t = complex_of(j["t"], "t");
  s.p = real_of(j["p"], "p");
  s.q = real_of(j["q"], "q");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer() || j["seed"].get<long long>() < 0) throw config_error("seed must be a non-negative integer");
    s.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("checks")) {
    if (!j["checks"].is_array()) throw config_error("checks must be a list of names");
    for (const auto& c : j["checks"]) {
      if (!c.is_string()) throw config_error("checks must be a list of names");
      s.checks.push_back(c.get<std::string>());
    }
  }
  if (j.contains("tolerances")) {
    if (!j["tolerances"].is_object()) throw config_error("tolerances must map check names to numbers");
    for (auto it = j["tolerances"].begin(); it != j["tolerances"].end(); ++it) {
      if (!find_check(it.key())) throw config_error("tolerance for unknown check: " + it.key());
      double v = real_of(it.value(), "tolerance " + it.key());
      if (!(v > 0)) throw config_error("tolerance " + it.key() + " must be positive");
      s.tolerances[it.key()] = v;
    }
  }
  select_checks(s.checks);
  scenario_params(s);  // re-validates every parameter invariant
  return s;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open scenario file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& ex) {
    throw config_error(std::string("scenario parse error: ") + ex.what());
  }
  return scenario_from_json(j);
}

inline json pair17(cplx z) { return json::array({fmt17(z.real()), fmt17(z.imag())}); }

inline json report_to_json(const Scenario& s, const Report& r, std::uint64_t seed, double tol_scale) {
  json j;
  json sc;
  sc["e"] = json::array({pair17(s.e[0]), pair17(s.e[1]), pair17(s.e[2])});
  sc["a"] = pair17(s.a);
  sc["t"] = pair17(s.t);
  sc["p"] = fmt17(s.p);
  sc["q"] = fmt17(s.q);
  j["scenario"] = sc;
  j["seed"] = std::to_string(seed);
  j["tol_scale"] = fmt17(tol_scale);
  j["environment"] = {{"precision", "IEEE 754 binary64"}, {"version", version}};
  json checks = json::array();
  for (const auto& c : r.records) {
    checks.push_back({{"name", c.name},
                      {"criterion", c.criterion},
                      {"status", status_name(c.status)},
                      {"residual", fmt17(c.residual)},
                      {"tolerance", fmt17(c.tolerance)},
                      {"runtime_ms", fmt17(c.runtime_ms)},
                      {"notes", c.notes}});
  }
  j["checks"] = checks;
  j["overall"] = status_name(r.overall);
  return j;
}

}  // namespace isotau::io
