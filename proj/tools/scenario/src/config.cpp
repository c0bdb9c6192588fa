#include "varlab/scenario.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

namespace varlab {

namespace {

namespace pt = boost::property_tree;

const std::map<ScenarioKind, std::string>& kind_names() {
  static const std::map<ScenarioKind, std::string> names = {
      {ScenarioKind::kSimulate, "simulate"},
      {ScenarioKind::kAction, "action"},
      {ScenarioKind::kElCertify, "el-certify"},
      {ScenarioKind::kVariational, "variational"},
      {ScenarioKind::kNoether, "noether"},
      {ScenarioKind::kBridge, "bridge"},
      {ScenarioKind::kFbsde, "fbsde"},
      {ScenarioKind::kNavierStokes, "navier-stokes"},
      {ScenarioKind::kOperators, "operators"},
  };
  return names;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

// Fixed-key sections; registry sections accept "name" plus the entry's keys.
const std::map<std::string, std::vector<std::string>>& fixed_sections() {
  static const std::map<std::string, std::vector<std::string>> sections = {
      {"scenario", {"kind", "name"}},
      {"grid", {"steps"}},
      {"simulation", {"paths", "seed", "horizon"}},
      {"test",
       {"threshold", "expected", "allowance", "expect_critical", "martingale", "tv_max",
        "tv_bin_cells", "shifts", "n_small", "n_large", "level", "riccati_tol"}},
      {"bridge", {"x_min", "x_max", "cells", "nu0", "nu1", "tol", "max_iter"}},
      {"output", {"dir", "sample_paths"}},
  };
  return sections;
}

const std::vector<std::string>& registry_sections() {
  static const std::vector<std::string> sections = {"model",  "fbsde", "lagrangian", "potential",
                                                    "shift",  "map",   "family"};
  return sections;
}

// Keys consumed by the scenario layer rather than the registry entry.
const std::map<std::string, std::vector<std::string>>& scenario_side_keys() {
  static const std::map<std::string, std::vector<std::string>> keys = {
      {"shift", {"projection", "n"}},
  };
  return keys;
}

std::vector<std::string> all_section_names() {
  std::vector<std::string> out;
  for (const auto& [name, keys] : fixed_sections()) out.push_back(name);
  for (const auto& name : registry_sections()) out.push_back(name);
  std::sort(out.begin(), out.end());
  return out;
}

std::string trimmed(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::size_t positive_count(const std::string& text, const std::string& what) {
  const double v = parse_double(text, what);
  if (!(v >= 1.0) || v != std::floor(v) || v > 1e12) {
    throw ConfigError(what + " must be a positive integer");
  }
  return static_cast<std::size_t>(v);
}

RegistryRef read_ref(const std::string& section, const pt::ptree& tree) {
  RegistryRef ref;
  Params all;
  for (const auto& [key, node] : tree) {
    if (!node.empty()) throw ConfigError("[" + section + "] " + key + ": nested keys");
    all[key] = trimmed(node.data());
  }
  auto it = all.find("name");
  if (it == all.end() || it->second.empty()) {
    throw ConfigError("[" + section + "] needs a 'name' key");
  }
  ref.name = it->second;
  all.erase(it);

  std::vector<std::string> valid = registry::parameter_keys(section, ref.name);
  if (auto side = scenario_side_keys().find(section); side != scenario_side_keys().end()) {
    valid.insert(valid.end(), side->second.begin(), side->second.end());
  }
  for (const auto& [key, value] : all) {
    if (std::find(valid.begin(), valid.end(), key) == valid.end()) {
      std::vector<std::string> listed = {"name"};
      listed.insert(listed.end(), valid.begin(), valid.end());
      throw ConfigError("[" + section + "] unknown key '" + key + "' for " + ref.name +
                        " (valid keys: " + join(listed) + ")");
    }
  }
  ref.params = std::move(all);
  return ref;
}

}  // namespace

std::string to_string(ScenarioKind kind) { return kind_names().at(kind); }

ScenarioKind parse_kind(const std::string& text) {
  std::vector<std::string> valid;
  for (const auto& [kind, name] : kind_names()) {
    if (name == text) return kind;
    valid.push_back(name);
  }
  throw ConfigError("unknown scenario kind '" + text + "' (valid kinds: " + join(valid) + ")");
}

ScenarioConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }

  ScenarioConfig cfg;
  cfg.base_dir = base_dir;
  bool have_kind = false;

  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw ConfigError("key '" + section + "' outside of a section (valid sections: " +
                        join(all_section_names()) + ")");
    }
    const auto& registries = registry_sections();
    if (std::find(registries.begin(), registries.end(), section) != registries.end()) {
      RegistryRef ref = read_ref(section, body);
      if (section == "model") cfg.model = ref;
      if (section == "fbsde") cfg.fbsde = ref;
      if (section == "lagrangian") cfg.lagrangian = ref;
      if (section == "potential") cfg.potential = ref;
      if (section == "shift") cfg.shift = ref;
      if (section == "map") cfg.map = ref;
      if (section == "family") cfg.family = ref;
      continue;
    }
    auto fixed = fixed_sections().find(section);
    if (fixed == fixed_sections().end()) {
      throw ConfigError("unknown section [" + section + "] (valid sections: " +
                        join(all_section_names()) + ")");
    }
    const auto& valid = fixed->second;
    for (const auto& [key, node] : body) {
      if (std::find(valid.begin(), valid.end(), key) == valid.end()) {
        throw ConfigError("[" + section + "] unknown key '" + key + "' (valid keys: " +
                          join(valid) + ")");
      }
      const std::string value = trimmed(node.data());
      const std::string what = "[" + section + "] " + key;
      if (section == "scenario") {
        if (key == "kind") {
          cfg.kind = parse_kind(value);
          have_kind = true;
        } else {
          if (value.empty() || value.find_first_of(" \t") != std::string::npos) {
            throw ConfigError(what + " must be a single token");
          }
          cfg.name = value;
        }
      } else if (section == "grid") {
        cfg.steps = positive_count(value, what);
      } else if (section == "simulation") {
        if (key == "paths") cfg.paths = positive_count(value, what);
        if (key == "seed") {
          const double s = parse_double(value, what);
          if (s < 0 || s != std::floor(s) || s > 9.007e15) {
            throw ConfigError(what + " must be a nonnegative integer");
          }
          cfg.seed = static_cast<std::uint64_t>(s);
        }
        if (key == "horizon") {
          const double h = parse_double(value, what);
          if (!(h > 0.0 && h <= 1.0)) throw ConfigError(what + " must lie in (0, 1]");
          cfg.horizon = h;
        }
      } else if (section == "test") {
        if (key == "threshold") {
          cfg.threshold = parse_double(value, what);
          if (!(cfg.threshold > 0.0)) throw ConfigError(what + " must be positive");
        } else {
          cfg.test[key] = value;
        }
      } else if (section == "bridge") {
        cfg.bridge[key] = value;
      } else if (section == "output") {
        if (key == "dir") cfg.out_dir = value;
        if (key == "sample_paths") {
          const double v = parse_double(value, what);
          if (v < 0 || v != std::floor(v)) throw ConfigError(what + " must be a count");
          cfg.sample_paths = static_cast<std::size_t>(v);
        }
      }
    }
  }
  if (!have_kind) throw ConfigError("[scenario] kind is required");
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read config " + file.string());
  return parse_config(in, file.has_parent_path() ? file.parent_path() : ".");
}

}  // namespace varlab
