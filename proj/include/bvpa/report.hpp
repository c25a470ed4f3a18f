#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bvpa/error.hpp"

namespace bvpa {

/// One inequality: measured < bound (strict) or measured <= bound.
struct Check {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  bool strict = true;
  bool pass = false;

  static Check make(std::string name, double measured, double bound, bool strict = true) {
    Check c{std::move(name), measured, bound, strict, false};
    c.pass = c.evaluate();
    return c;
  }
  bool evaluate() const { return strict ? measured < bound : measured <= bound; }
};

struct Report {
  std::string kind;
  std::vector<std::pair<std::string, double>> scalars;
  std::vector<Check> checks;
  nlohmann::ordered_json provenance = nlohmann::ordered_json::object();
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();

  void set(const std::string& key, double value) {
    for (auto& [k, v] : scalars)
      if (k == key) {
        v = value;
        return;
      }
    scalars.emplace_back(key, value);
  }
  double get(const std::string& key) const {
    for (const auto& [k, v] : scalars)
      if (k == key) return v;
    throw InputError("report has no scalar '" + key + "'");
  }
  const Check& check(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return c;
    throw InputError("report has no check '" + name + "'");
  }
  void add(Check c) { checks.push_back(std::move(c)); }
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

inline nlohmann::ordered_json to_json(const Report& r) {
  nlohmann::ordered_json j;
  j["kind"] = r.kind;
  nlohmann::ordered_json s = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.scalars) s[k] = v;
  j["scalars"] = s;
  nlohmann::ordered_json cs = nlohmann::ordered_json::array();
  for (const auto& c : r.checks)
    cs.push_back({{"name", c.name}, {"measured", c.measured}, {"bound", c.bound}, {"strict", c.strict}, {"pass", c.pass}});
  j["checks"] = cs;
  j["provenance"] = r.provenance;
  if (!r.extra.empty()) j["extra"] = r.extra;
  return j;
}

inline Report report_from_json(const nlohmann::ordered_json& j) {
  try {
    Report r;
    r.kind = j.at("kind").get<std::string>();
    for (const auto& [k, v] : j.at("scalars").items()) r.scalars.emplace_back(k, v.get<double>());
    for (const auto& c : j.at("checks")) {
      Check x{c.at("name").get<std::string>(), c.at("measured").get<double>(), c.at("bound").get<double>(),
              c.at("strict").get<bool>(), c.at("pass").get<bool>()};
      r.checks.push_back(std::move(x));
    }
    if (j.contains("provenance")) r.provenance = j.at("provenance");
    if (j.contains("extra")) r.extra = j.at("extra");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed report JSON: ") + e.what());
  }
}

}  // namespace bvpa
