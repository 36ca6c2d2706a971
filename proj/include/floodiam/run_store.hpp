#pragma once

#include "floodiam/env.hpp"
#include "floodiam/qlearning.hpp"

#include <json.hpp>

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace floodiam {

/// One line of the run log.
struct StepRecord {
  int year = 0;
  std::string action;
  bool duplicate_install = false;
  double intensity_mm = 0.0;
  std::vector<ZoneBreakdown> zones;
  double reward = 0.0;

  static StepRecord from(const StepResult& result);
  nlohmann::json to_json() const;
  static StepRecord from_json(const nlohmann::json& j);
  bool operator==(const StepRecord& other) const;
};

struct RunRecord {
  std::string id;
  std::string scenario_hash;
  std::string mode;  ///< manual | trained | evaluation
  std::uint64_t seed = 0;
  std::vector<StepRecord> steps;
  std::optional<std::string> policy_file;  ///< relative to the run directory
  std::string created_at;
  std::string updated_at;

  bool operator==(const RunRecord& other) const = default;
};

/// Log text: one compact JSON object per step, newline-terminated. Contains
/// nothing time-dependent, so equal inputs give equal bytes.
std::string format_run_log(const std::vector<StepRecord>& steps);
std::vector<StepRecord> parse_run_log(std::istream& in);

/// zone_id,I,D,C,Q,A,M for one step.
void write_impacts_csv(std::ostream& out, const StepRecord& step);

/// Directory-backed run store: <root>/<run id>/ holds scenario.json,
/// meta.json, log.jsonl, impacts/<year>.csv and optionally policy.tsv.
class RunStore {
 public:
  explicit RunStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  /// Next free id of the form run-0001.
  std::string allocate_id();
  /// Writes every file of the record. `scenario_document` is snapshotted
  /// verbatim; `policy` is written when present.
  void save(RunRecord& record, const nlohmann::json& scenario_document, const Policy* policy = nullptr);
  RunRecord load(const std::string& id) const;
  std::vector<std::string> list() const;
  std::filesystem::path dir(const std::string& id) const { return root_ / id; }

 private:
  std::filesystem::path root_;
  std::mutex mutex_;
};

std::string utc_timestamp();

}  // namespace floodiam
