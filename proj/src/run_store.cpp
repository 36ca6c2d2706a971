#include "floodiam/run_store.hpp"

#include "floodiam/common.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

namespace floodiam {

namespace fs = std::filesystem;
using nlohmann::json;

StepRecord StepRecord::from(const StepResult& result) {
  StepRecord r;
  r.year = result.info.year;
  r.action = result.info.action.key();
  r.duplicate_install = result.info.duplicate_install;
  r.intensity_mm = result.info.intensity_mm;
  r.zones = result.info.zones;
  r.reward = result.reward;
  return r;
}

json StepRecord::to_json() const {
  json zs = json::array();
  for (const auto& z : zones) {
    zs.push_back({{"zone_id", z.zone_id}, {"I", z.I}, {"D", z.D}, {"C", z.C}, {"Q", z.Q}, {"A", z.A}, {"M", z.M},
                  {"completed", z.completed}, {"delayed", z.delayed}, {"cancelled", z.cancelled}});
  }
  return {{"year", year}, {"action", action}, {"duplicate_install", duplicate_install},
          {"intensity_mm", intensity_mm}, {"zones", zs}, {"R", reward}};
}

StepRecord StepRecord::from_json(const json& j) {
  StepRecord r;
  r.year = j.at("year").get<int>();
  r.action = j.at("action").get<std::string>();
  r.duplicate_install = j.at("duplicate_install").get<bool>();
  r.intensity_mm = j.at("intensity_mm").get<double>();
  r.reward = j.at("R").get<double>();
  for (const auto& z : j.at("zones")) {
    ZoneBreakdown b;
    b.zone_id = z.at("zone_id").get<int>();
    b.I = z.at("I").get<double>();
    b.D = z.at("D").get<double>();
    b.C = z.at("C").get<double>();
    b.Q = z.at("Q").get<double>();
    b.A = z.at("A").get<double>();
    b.M = z.at("M").get<double>();
    b.completed = z.at("completed").get<int>();
    b.delayed = z.at("delayed").get<int>();
    b.cancelled = z.at("cancelled").get<int>();
    r.zones.push_back(b);
  }
  return r;
}

bool StepRecord::operator==(const StepRecord& o) const {
  if (year != o.year || action != o.action || duplicate_install != o.duplicate_install ||
      intensity_mm != o.intensity_mm || reward != o.reward || zones.size() != o.zones.size())
    return false;
  for (std::size_t i = 0; i < zones.size(); ++i) {
    const auto& a = zones[i];
    const auto& b = o.zones[i];
    if (a.zone_id != b.zone_id || a.I != b.I || a.D != b.D || a.C != b.C || a.Q != b.Q || a.A != b.A ||
        a.M != b.M || a.completed != b.completed || a.delayed != b.delayed || a.cancelled != b.cancelled)
      return false;
  }
  return true;
}

std::string format_run_log(const std::vector<StepRecord>& steps) {
  std::string out;
  for (const auto& s : steps) {
    out += s.to_json().dump();
    out += '\n';
  }
  return out;
}

std::vector<StepRecord> parse_run_log(std::istream& in) {
  std::vector<StepRecord> steps;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      steps.push_back(StepRecord::from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ParseError("run log line " + std::to_string(n) + ": " + e.what());
    }
  }
  return steps;
}

void write_impacts_csv(std::ostream& out, const StepRecord& step) {
  out << "zone_id,I,D,C,Q,A,M\n";
  for (const auto& z : step.zones) {
    out << z.zone_id << ',' << format_double(z.I) << ',' << format_double(z.D) << ',' << format_double(z.C) << ','
        << format_double(z.Q) << ',' << format_double(z.A) << ',' << format_double(z.M) << '\n';
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RunStore::RunStore(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

std::vector<std::string> RunStore::list() const {
  std::vector<std::string> ids;
  if (!fs::exists(root_)) return ids;
  for (const auto& entry : fs::directory_iterator(root_)) {
    if (entry.is_directory() && fs::exists(entry.path() / "meta.json")) ids.push_back(entry.path().filename().string());
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::string RunStore::allocate_id() {
  std::lock_guard lock(mutex_);
  for (int n = 1;; ++n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "run-%04d", n);
    // create_directory is the reservation; it fails if another caller won.
    if (fs::create_directory(root_ / buf)) return buf;
  }
}

namespace {

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  out << text;
}

}  // namespace

void RunStore::save(RunRecord& record, const json& scenario_document, const Policy* policy) {
  if (record.id.empty()) record.id = allocate_id();
  const fs::path d = dir(record.id);
  fs::create_directories(d / "impacts");
  if (record.created_at.empty()) record.created_at = utc_timestamp();
  record.updated_at = utc_timestamp();

  write_file(d / "scenario.json", scenario_document.dump(2) + "\n");
  write_file(d / "log.jsonl", format_run_log(record.steps));
  for (const auto& step : record.steps) {
    std::ostringstream csv;
    write_impacts_csv(csv, step);
    write_file(d / "impacts" / (std::to_string(step.year) + ".csv"), csv.str());
  }
  if (policy) {
    std::ostringstream p;
    write_policy(p, *policy);
    write_file(d / "policy.tsv", p.str());
    record.policy_file = "policy.tsv";
  }
  json meta = {{"id", record.id},
               {"scenario_hash", record.scenario_hash},
               {"mode", record.mode},
               {"seed", record.seed},
               {"steps", record.steps.size()},
               {"created_at", record.created_at},
               {"updated_at", record.updated_at}};
  meta["policy_file"] = record.policy_file ? json(*record.policy_file) : json(nullptr);
  write_file(d / "meta.json", meta.dump(2) + "\n");
}

RunRecord RunStore::load(const std::string& id) const {
  if (id.empty() || id.find('/') != std::string::npos || id.find("..") != std::string::npos)
    throw ValidationError("invalid run id '" + id + "'");
  const fs::path d = dir(id);
  std::ifstream meta_in(d / "meta.json");
  if (!meta_in) throw ValidationError("unknown run '" + id + "'");
  const json meta = json::parse(meta_in);
  RunRecord r;
  r.id = meta.at("id").get<std::string>();
  r.scenario_hash = meta.at("scenario_hash").get<std::string>();
  r.mode = meta.at("mode").get<std::string>();
  r.seed = meta.at("seed").get<std::uint64_t>();
  if (!meta.at("policy_file").is_null()) r.policy_file = meta.at("policy_file").get<std::string>();
  r.created_at = meta.at("created_at").get<std::string>();
  r.updated_at = meta.at("updated_at").get<std::string>();
  std::ifstream log_in(d / "log.jsonl");
  if (log_in) r.steps = parse_run_log(log_in);
  return r;
}

}  // namespace floodiam
