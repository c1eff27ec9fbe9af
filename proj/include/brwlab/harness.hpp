#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "brwlab/samplers.hpp"

namespace brwlab {

/// Schema violation in an experiment configuration; the message names the
/// offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kExperimentKinds[] = {
    "median-sweep", "tail-fit", "census-check", "walk-check",
    "rrt-sweep",    "pratt-survey", "tight-check"};

struct ExperimentSpec {
  std::string kind;
  std::vector<Model> models{Model::pwit, Model::pd};
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::uint64_t work_limit = 2'000'000'000;
  nlohmann::json params = nlohmann::json::object();  // kind-specific

  /// Accepts either a bare spec or a run manifest (uses its "spec" member).
  static ExperimentSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct ExperimentOutput {
  std::vector<nlohmann::json> records;  // one JSONL line each
  nlohmann::json summary;               // includes a "checks" object of booleans
  double expected_seconds = 0.0;

  /// True when every entry of summary["checks"] is true.
  bool passed() const;
};

/// Runs the experiment named by spec.kind.  Throws ConfigError for bad
/// parameters and WorkLimitExceeded when a search or census hits its limit.
ExperimentOutput run_experiment(const ExperimentSpec& spec);

ExperimentOutput run_median_sweep(const ExperimentSpec& spec);
ExperimentOutput run_tail_fit(const ExperimentSpec& spec);
ExperimentOutput run_census_check(const ExperimentSpec& spec);
ExperimentOutput run_walk_check(const ExperimentSpec& spec);
ExperimentOutput run_rrt_sweep(const ExperimentSpec& spec);
ExperimentOutput run_pratt_survey(const ExperimentSpec& spec);
ExperimentOutput run_tight_check(const ExperimentSpec& spec);

/// JSONL text: records dumped one per line, each terminated by '\n'.
std::string to_jsonl(const std::vector<nlohmann::json>& records);
/// CSV over the union of record keys (sorted); nested values as JSON text.
std::string to_csv(const std::vector<nlohmann::json>& records);
/// "fnv1a64:<16 hex digits>" of the bytes.
std::string digest(const std::string& bytes);

/// Writes <kind>.jsonl, <kind>_summary.json, <kind>.csv and manifest.json
/// into `dir` (created if needed) and returns the manifest.
nlohmann::json write_outputs(const std::filesystem::path& dir, const ExperimentSpec& spec,
                             const ExperimentOutput& output, double elapsed_seconds);

}  // namespace brwlab
