#pragma once

#include "varlab/registry.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace varlab {

enum class ScenarioKind {
  kSimulate,
  kAction,
  kElCertify,
  kVariational,
  kNoether,
  kBridge,
  kFbsde,
  kNavierStokes,
  kOperators,
};

std::string to_string(ScenarioKind kind);
ScenarioKind parse_kind(const std::string& text);

struct RegistryRef {
  std::string name;
  Params params;
};

/// One scenario as read from an INI file. Sections: [scenario], [grid],
/// [simulation], [test], [output], and the registry references [model],
/// [fbsde], [lagrangian], [potential], [shift], [map], [family], [bridge].
struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::kElCertify;
  std::string name = "scenario";
  std::size_t steps = 200;
  std::size_t paths = 10000;
  std::uint64_t seed = 1;
  /// T_max; defaults to the full horizon (one step short for singular laws).
  std::optional<double> horizon;
  double threshold = 4.0;

  std::optional<RegistryRef> model;
  std::optional<RegistryRef> fbsde;
  std::optional<RegistryRef> lagrangian;
  std::optional<RegistryRef> potential;
  std::optional<RegistryRef> shift;
  std::optional<RegistryRef> map;
  std::optional<RegistryRef> family;
  /// Lattice and marginals of a bridge scenario.
  Params bridge;
  /// Kind-specific acceptance parameters (expected, allowance, ...).
  Params test;

  std::filesystem::path out_dir = "out";
  /// Number of paths written to paths.csv (0: no file).
  std::size_t sample_paths = 0;
  /// Directory relative file references are resolved against.
  std::filesystem::path base_dir = ".";
};

/// Parses INI text; throws ConfigError on unknown sections or keys (listing
/// the valid ones), malformed numbers, or missing required entries.
ScenarioConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = ".");
ScenarioConfig load_config(const std::filesystem::path& file);

struct ReportRow {
  std::string metric;
  double time = 0.0;
  std::size_t coordinate = 0;
  std::string label;
  double value = 0.0;
  double std_error = 0.0;
  double statistic = 0.0;
};

struct ScenarioResult {
  std::string name;
  ScenarioKind kind = ScenarioKind::kElCertify;
  bool passed = false;
  double max_stat = 0.0;
  std::vector<ReportRow> rows;
  /// Main ensemble, kept for paths.csv.
  std::optional<PathEnsemble> ensemble;
  /// Extra CSV artifacts (file name, contents).
  std::vector<std::pair<std::string, std::string>> artifacts;
};

/// Runs the scenario in-process. Registry errors surface as ConfigError.
ScenarioResult run_scenario(const ScenarioConfig& config);

/// CSV with header metric,time,coordinate,label,value,std_error,statistic.
/// Numbers use the shortest round-trip representation.
std::string report_csv(const ScenarioResult& result);
/// "NAME PASS max_stat=X" or "NAME FAIL max_stat=X".
std::string verdict_line(const ScenarioResult& result);

/// Writes report.csv, verdict.txt, the artifacts and (optionally) paths.csv.
void write_outputs(const ScenarioConfig& config, const ScenarioResult& result,
                   const std::filesystem::path& out_dir);

}  // namespace varlab
