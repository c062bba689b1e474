#pragma once

// Experiment configuration: JSON documents validated field by field, errors carry JSON-pointer paths.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "latticeq/latticeq.hpp"

namespace latticeq::cli {

using json = nlohmann::json;

/// Read-only view of a JSON object that remembers where it sits in the document.
class Node {
 public:
  Node(const json& j, std::string path) : j_(&j), path_(std::move(path)) {
    if (!j_->is_object()) throw ConfigError("expected an object", path_.empty() ? "/" : path_);
  }

  const std::string& path() const { return path_; }
  bool has(const std::string& key) const { return j_->contains(key) && !(*j_)[key].is_null(); }
  std::string at(const std::string& key) const { return path_ + "/" + key; }

  Node child(const std::string& key) const {
    if (!has(key)) throw ConfigError("missing required field", at(key));
    return {(*j_)[key], at(key)};
  }
  const json& raw(const std::string& key) const {
    if (!has(key)) throw ConfigError("missing required field", at(key));
    return (*j_)[key];
  }

  template <class T>
  T get(const std::string& key) const {
    if (!has(key)) throw ConfigError("missing required field", at(key));
    return convert<T>((*j_)[key], at(key));
  }
  template <class T>
  T get(const std::string& key, T fallback) const {
    return has(key) ? convert<T>((*j_)[key], at(key)) : fallback;
  }

  template <class T>
  static T convert(const json& v, const std::string& path) {
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ConfigError("expected a number", path);
      } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!v.is_number_integer() && !v.is_number_unsigned()) throw ConfigError("expected an integer", path);
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError("expected true or false", path);
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError("expected a string", path);
      } else {
        if (!v.is_array()) throw ConfigError("expected an array", path);
        for (std::size_t i = 0; i < v.size(); ++i) convert<typename T::value_type>(v[i], path + "/" + std::to_string(i));
      }
      return v.get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("invalid value: ") + e.what(), path);
    }
  }

 private:
  const json* j_;
  std::string path_;
};

inline json load_json(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open configuration file " + file, "");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("configuration is not valid JSON: ") + e.what(), "");
  }
}

/// Applies key=value with a dotted key (model.W=4); the value is parsed as JSON, else taken as a string.
inline void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key=value: " + assignment, "");
  const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* cur = &doc;
  std::stringstream ss(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].empty()) throw ConfigError("empty component in override key " + key, "");
    if (!cur->is_object() && !cur->is_null()) throw ConfigError("override path " + key + " crosses a non-object", "");
    if (i + 1 == parts.size()) (*cur)[parts[i]] = value;
    else cur = &(*cur)[parts[i]];
  }
}

inline Site site_from(const Node& n, const std::string& key, int dim, const Site& fallback) {
  if (!n.has(key)) return fallback;
  auto v = n.get<std::vector<std::int64_t>>(key);
  if (static_cast<int>(v.size()) != dim)
    throw ConfigError("expected " + std::to_string(dim) + " coordinates", n.at(key));
  return v;
}

/// T grid given either as an explicit ascending array or as {"from", "to", "points"} (geometric).
inline std::vector<double> t_grid_from(const Node& n, const std::string& key) {
  const json& v = n.raw(key);
  std::vector<double> grid;
  if (v.is_array()) {
    grid = Node::convert<std::vector<double>>(v, n.at(key));
  } else {
    const Node g(v, n.at(key));
    const double lo = g.get<double>("from"), hi = g.get<double>("to");
    const auto pts = g.get<std::int64_t>("points");
    if (!(lo > 0.0) || !(hi > lo)) throw ConfigError("need 0 < from < to", g.at("from"));
    if (pts < 2) throw ConfigError("need at least 2 points", g.at("points"));
    grid = geometric_grid(lo, hi, static_cast<std::size_t>(pts));
  }
  if (grid.empty()) throw ConfigError("T grid is empty", n.at(key));
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (!(grid[i] > 0.0) || (i && !(grid[i] > grid[i - 1])))
      throw ConfigError("T grid must be positive and strictly ascending", n.at(key) + "/" + std::to_string(i));
  return grid;
}

struct Limits {
  std::size_t max_sites = 20'000'000;
  std::size_t max_dense = kDefaultDenseCap;
  double max_seconds = 3600.0;
};

struct Tolerances {
  double time_tol = 1e-8;
  double prop_tol = 1e-10;
  double solve_tol = 1e-10;
  double evolve_tol = 1e-6;
  bool check_containment = true;
};

/// model block: dimension, trimming pattern, box radius and centre, potential, realizations.
struct Model {
  int dim = 1;
  TrimPattern pattern = TrimPattern::full_lattice(1);
  std::int64_t radius = 0;
  Site center;
  std::string potential = "zero";
  double width = 0.0;
  std::uint64_t seed = 0;
  std::int64_t realizations = 1;
  PotentialTable table;

  LatticeBox box() const { return {dim, center, radius}; }
  PotentialSpec spec(std::int64_t realization) const {
    if (potential == "uniform") return PotentialSpec::uniform(width, seed, realization, pattern);
    if (potential == "table") return PotentialSpec::table(table, pattern);
    return PotentialSpec::zero(dim);
  }
};

inline TrimPattern pattern_from(const Node& m, int dim) {
  if (!m.has("gamma")) return TrimPattern::full_lattice(dim);
  const json& g = m.raw("gamma");
  if (g.is_string()) {
    const auto s = g.get<std::string>();
    if (s == "full") return TrimPattern::full_lattice(dim);
    if (s == "empty") return TrimPattern::untrimmed(dim);
    throw ConfigError("gamma must be \"full\", \"empty\" or an object {rho, d2}", m.at("gamma"));
  }
  const Node gn(g, m.at("gamma"));
  const auto rho = gn.get<std::vector<std::int64_t>>("rho");
  const auto d2 = gn.get<std::int64_t>("d2");
  for (std::size_t i = 0; i < rho.size(); ++i)
    if (rho[i] < 2) throw ConfigError("every rho_i must be >= 2", gn.at("rho") + "/" + std::to_string(i));
  if (static_cast<int>(rho.size()) + d2 != dim) throw ConfigError("d1 + d2 must equal d = " + std::to_string(dim), gn.at("d2"));
  return TrimPattern::periodic(rho, static_cast<int>(d2));
}

inline Model parse_model(const Node& m, std::uint64_t seed_override, bool has_seed_override) {
  Model out;
  const auto d = m.get<std::int64_t>("d");
  if (d < 1 || d > 6) throw ConfigError("d must lie in [1, 6]", m.at("d"));
  out.dim = static_cast<int>(d);
  out.pattern = pattern_from(m, out.dim);
  out.radius = m.get<std::int64_t>("L");
  if (out.radius < 0) throw ConfigError("L must be nonnegative", m.at("L"));
  out.center = site_from(m, "center", out.dim, Site(out.dim, 0));
  out.potential = m.get<std::string>("potential", std::string("zero"));
  if (out.potential == "uniform") {
    out.width = m.get<double>("W");
    if (!(out.width > 0.0)) throw ConfigError("W must be positive", m.at("W"));
    out.seed = m.get<std::uint64_t>("seed", 0);
  } else if (out.potential == "table") {
    const json& t = m.raw("table");
    if (!t.is_array()) throw ConfigError("table must be an array of [n1, ..., nd, value] rows", m.at("table"));
    for (std::size_t i = 0; i < t.size(); ++i) {
      const std::string p = m.at("table") + "/" + std::to_string(i);
      if (!t[i].is_array() || static_cast<int>(t[i].size()) != out.dim + 1)
        throw ConfigError("expected [n1, ..., nd, value]", p);
      Site n(out.dim);
      for (int c = 0; c < out.dim; ++c) n[c] = Node::convert<std::int64_t>(t[i][c], p + "/" + std::to_string(c));
      const json& v = t[i][out.dim];
      double value = 0.0;
      if (v.is_string() && v.get<std::string>() == "inf") value = std::numeric_limits<double>::infinity();
      else value = Node::convert<double>(v, p + "/" + std::to_string(out.dim));
      out.table[n] = value;
    }
  } else if (out.potential != "zero") {
    throw ConfigError("potential must be zero, uniform or table", m.at("potential"));
  }
  if (has_seed_override) out.seed = seed_override;
  out.realizations = m.get<std::int64_t>("realizations", 1);
  if (out.realizations < 1) throw ConfigError("realizations must be >= 1", m.at("realizations"));
  try {
    (void)out.spec(0);
    (void)out.box();
  } catch (const ConfigError& e) {
    throw ConfigError(e.what(), m.path());
  }
  return out;
}

inline Model model_from(const Node& root, std::uint64_t seed_override, bool has_seed_override) {
  return parse_model(root.child("model"), seed_override, has_seed_override);
}

inline GrowthWeight weight_from(const Node& obs, int dim, const Site& fallback_base) {
  const auto kind = obs.get<std::string>("weight", std::string("power"));
  const Site base = site_from(obs, "base_site", dim, fallback_base);
  if (kind == "power") {
    const double q = obs.get<double>("q");
    if (!(q >= 0.0)) throw ConfigError("q must be nonnegative", obs.at("q"));
    return GrowthWeight::power(q, base);
  }
  if (kind == "constant_one") return GrowthWeight::constant_one();
  if (kind == "table") {
    const json& t = obs.raw("table");
    if (!t.is_array()) throw ConfigError("expected an array of [n1, ..., nd, value] rows", obs.at("table"));
    std::map<Site, double> values;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const std::string p = obs.at("table") + "/" + std::to_string(i);
      auto row = Node::convert<std::vector<double>>(t[i], p);
      if (static_cast<int>(row.size()) != dim + 1) throw ConfigError("expected [n1, ..., nd, value]", p);
      Site n(dim);
      for (int c = 0; c < dim; ++c) n[c] = static_cast<std::int64_t>(row[c]);
      values[n] = row[dim];
    }
    SubexpCertificate cert{obs.get<double>("certificate_C", 1.0), obs.get<double>("certificate_beta", 0.5)};
    try {
      return GrowthWeight::table(values, cert, obs.get<double>("default", 1.0));
    } catch (const ConfigError& e) {
      throw ConfigError(e.what(), obs.at("table"));
    }
  }
  throw ConfigError("weight must be power, constant_one or table", obs.at("weight"));
}

inline Tolerances tolerances_from(const Node& root) {
  Tolerances t;
  if (!root.has("tolerances")) return t;
  const Node n = root.child("tolerances");
  t.time_tol = n.get<double>("time_tol", t.time_tol);
  t.prop_tol = n.get<double>("prop_tol", t.prop_tol);
  t.solve_tol = n.get<double>("solve_tol", t.solve_tol);
  t.evolve_tol = n.get<double>("evolve_tol", t.evolve_tol);
  t.check_containment = n.get<bool>("check_containment", t.check_containment);
  for (const auto& [key, v] : {std::pair{"time_tol", t.time_tol}, {"prop_tol", t.prop_tol}, {"evolve_tol", t.evolve_tol}})
    if (!(v > 0.0 && v < 1.0)) throw ConfigError("tolerance must lie in (0, 1)", n.at(key));
  if (!(t.solve_tol > 0.0)) throw ConfigError("tolerance must be positive", n.at("solve_tol"));
  return t;
}

inline Limits limits_from(const Node& root) {
  Limits l;
  if (!root.has("limits")) return l;
  const Node n = root.child("limits");
  l.max_sites = n.get<std::size_t>("max_sites", l.max_sites);
  l.max_dense = n.get<std::size_t>("max_dense", l.max_dense);
  l.max_seconds = n.get<double>("max_seconds", l.max_seconds);
  if (!(l.max_seconds > 0.0)) throw ConfigError("max_seconds must be positive", n.at("max_seconds"));
  return l;
}

}  // namespace latticeq::cli
