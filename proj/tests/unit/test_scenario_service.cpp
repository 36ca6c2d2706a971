#include "floodiam/run_store.hpp"
#include "floodiam/scenario.hpp"
#include "floodiam/service.hpp"

#include "toy.hpp"

#include <doctest.h>
#include <httplib.h>

#include <filesystem>
#include <fstream>
#include <thread>

using namespace floodiam;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scenario_path() { return fs::path(FLOODIAM_SCENARIOS) / "basin-3zone" / "scenario.json"; }

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("floodiam-" + tag + "-" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

std::string expect_error(const json& doc, const fs::path& base) {
  try {
    parse_scenario(doc, base);
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("reference scenario loads with a stable hash") {
  const auto a = load_scenario(scenario_path());
  const auto b = load_scenario(scenario_path());
  CHECK(a.name == "basin-3zone");
  CHECK(a.hash == b.hash);
  CHECK(a.hash.size() == 16);
  CHECK(a.zones.size() == 3);
  CHECK(a.catalog.size() == 8);
  CHECK(a.start_year == 2023);
  CHECK(a.end_year == 2100);
  const auto desc = describe_scenario(a);
  CHECK(desc["zones"].size() == 3);
  CHECK(desc["actions"].size() == 8);
}

TEST_CASE("scenario validation errors name the offending field") {
  const auto base = scenario_path().parent_path();
  const json doc = read_json(scenario_path());

  json seven = doc;
  seven["actions"].erase(seven["actions"].size() - 1);
  CHECK(expect_error(seven, base).find("expected 8 actions") != std::string::npos);

  json bad_horizon = doc;
  bad_horizon["horizon"]["end_year"] = 2000;
  CHECK(expect_error(bad_horizon, base).find("horizon") != std::string::npos);

  json missing = doc;
  missing["network"]["links"] = "nope.csv";
  CHECK(expect_error(missing, base).find("nope.csv") != std::string::npos);

  // A link in a zone that the zones file lacks.
  TempDir tmp("xref");
  for (const auto& entry : fs::directory_iterator(base)) fs::copy(entry.path(), tmp.path / entry.path().filename());
  std::ifstream in(tmp.path / "links.csv");
  std::string header, first, rest, line;
  std::getline(in, header);
  std::getline(in, first);
  while (std::getline(in, line)) rest += line + "\n";
  in.close();
  // zone_id is the 13th column.
  std::vector<std::string> cols;
  std::stringstream ss(first);
  while (std::getline(ss, line, ',')) cols.push_back(line);
  cols[12] = "42";
  std::string patched;
  for (std::size_t i = 0; i < cols.size(); ++i) patched += (i ? "," : "") + cols[i];
  std::ofstream(tmp.path / "links.csv") << header << "\n" << patched << "\n" << rest;
  const auto msg = expect_error(doc, tmp.path);
  CHECK(msg.find("42") != std::string::npos);
  CHECK(msg.find("zones") != std::string::npos);
}

TEST_CASE("run log and run store round trip") {
  auto ctx = testing::toy_context({.end_year = 2027});
  AdaptationEnv env(ctx);
  env.reset(4);
  RunRecord rec;
  rec.scenario_hash = "abc";
  rec.mode = "manual";
  rec.seed = 4;
  rec.steps.push_back(StepRecord::from(env.step(Action::install(1, 3))));
  rec.steps.push_back(StepRecord::from(env.step(Action::install(1, 3))));
  rec.steps.push_back(StepRecord::from(env.step(Action::noop())));

  const std::string text = format_run_log(rec.steps);
  std::istringstream in(text);
  CHECK(parse_run_log(in) == rec.steps);
  CHECK(format_run_log(rec.steps) == text);

  std::ostringstream csv;
  write_impacts_csv(csv, rec.steps[0]);
  CHECK(csv.str().rfind("zone_id,I,D,C,Q,A,M\n", 0) == 0);

  TempDir tmp("store");
  RunStore store(tmp.path);
  Policy policy;
  policy.action_keys = {"noop", "z1:a0"};
  policy.q["y0|d0"]["noop"] = -1.25;
  policy.params.seed = 3;
  store.save(rec, json{{"name", "toy"}}, &policy);
  CHECK(rec.id == "run-0001");
  const auto back = store.load(rec.id);
  CHECK(back == rec);
  std::ifstream pin(store.dir(rec.id) / *back.policy_file);
  CHECK(read_policy(pin) == policy);
  CHECK(store.list() == std::vector<std::string>{"run-0001"});
  CHECK(fs::exists(store.dir(rec.id) / "impacts" / "2023.csv"));
  CHECK_THROWS(store.load("../etc"));
  CHECK_THROWS(store.load("run-9999"));
}

TEST_CASE("session service contract") {
  TempDir tmp("svc");
  auto scenario = load_scenario(scenario_path());
  auto ctx = scenario.build_context();
  SessionService svc(scenario, ctx, tmp.path);

  const auto desc = svc.handle("GET", "/scenario", "");
  CHECK(desc.status == 200);
  CHECK(desc.body["actions"].size() == 8);

  const auto created = svc.handle("POST", "/sessions", R"({"seed": 7})");
  REQUIRE(created.status == 201);
  const std::string id = created.body["session"];
  const std::string base = "/sessions/" + id;

  // What-if never changes the state.
  const auto before = svc.handle("GET", base + "/state", "").body.dump();
  const auto preview = svc.handle("POST", base + "/whatif", R"({"action": "z2:a3"})");
  CHECK(preview.status == 200);
  CHECK(preview.body["committed"] == false);
  svc.handle("POST", base + "/whatif", R"({"zone_id": 1, "action_id": 5})");
  CHECK(svc.handle("GET", base + "/state", "").body.dump() == before);

  // Committing the previewed action gives the previewed breakdown.
  const auto committed = svc.handle("POST", base + "/step", R"({"action": "z2:a3"})");
  CHECK(committed.body["zones"] == preview.body["zones"]);
  CHECK(committed.body["reward"] == preview.body["reward"]);

  CHECK(svc.handle("POST", base + "/step", R"({"action": "bogus"})").status == 400);
  CHECK(svc.handle("POST", base + "/step", R"({"zone_id": 99, "action_id": 1})").status == 400);
  CHECK(svc.handle("POST", base + "/step", "not json").status == 400);
  CHECK(svc.handle("GET", "/sessions/nope/state", "").status == 404);

  // A second session with another seed runs independently.
  const std::string other = svc.handle("POST", "/sessions", R"({"seed": 8})").body["session"];
  const auto o1 = svc.handle("POST", "/sessions/" + other + "/step", R"({"action": "noop"})");

  for (int t = 2; t <= 78; ++t) {
    const auto r = svc.handle("POST", base + "/step", R"({"action": "noop"})");
    REQUIRE(r.status == 200);
    CHECK(r.body["done"] == (t == 78));
  }
  CHECK(svc.handle("POST", base + "/step", R"({"action": "noop"})").status == 409);
  const auto state = svc.handle("GET", base + "/state", "").body;
  CHECK(state["done"] == true);

  const auto o_state = svc.handle("GET", "/sessions/" + other + "/state", "").body;
  CHECK(o_state["year_index"] == 1);
  CHECK(o_state["seed"] == 8);
  CHECK(o1.body["intensity_mm"] != committed.body["intensity_mm"]);

  // Persisted runs carry every step.
  const auto runs = svc.handle("GET", "/runs", "").body;
  CHECK(runs["runs"].size() == 2);
  const auto run = svc.handle("GET", "/runs/" + state["run_id"].get<std::string>(), "");
  CHECK(run.status == 200);
  CHECK(run.body["steps"].size() == 78);
  CHECK(run.body["scenario_hash"] == scenario.hash);

  // Reset starts over.
  const auto reset = svc.handle("POST", base + "/reset", R"({"seed": 7})");
  CHECK(reset.status == 200);
  CHECK(svc.handle("GET", base + "/state", "").body["year_index"] == 0);
  const auto replay = svc.handle("POST", base + "/step", R"({"action": "z2:a3"})");
  CHECK(replay.body["zones"] == committed.body["zones"]);

  // Training job with a tiny budget.
  const auto job = svc.handle("POST", "/train", R"({"episodes": 2, "seed": 1})");
  REQUIRE(job.status == 202);
  const std::string job_id = job.body["job"];
  svc.wait_for_training();
  const auto status = svc.handle("GET", "/train/" + job_id, "").body;
  CHECK(status["status"] == "done");
  CHECK(status["curve"].size() == 2);
  CHECK(status["run_id"].is_string());
  const auto trained = svc.handle("GET", "/runs/" + status["run_id"].get<std::string>(), "").body;
  CHECK(trained["mode"] == "trained");
  CHECK(trained["steps"].size() == 78);
  CHECK(svc.handle("GET", "/train/none", "").status == 404);
  CHECK(svc.handle("POST", "/train", R"({"alpha": 3})").status == 400);
}

TEST_CASE("service answers over HTTP") {
  TempDir tmp("http");
  auto scenario = load_scenario(scenario_path());
  SessionService svc(scenario, scenario.build_context(), tmp.path);
  const int port = svc.bind_any("127.0.0.1");
  REQUIRE(port > 0);
  std::thread server([&] { svc.listen_after_bind(); });
  httplib::Client client("127.0.0.1", port);
  const auto created = client.Post("/sessions", R"({"seed": 3})", "application/json");
  REQUIRE(created);
  CHECK(created->status == 201);
  const std::string id = json::parse(created->body)["session"];
  const auto step = client.Post("/sessions/" + id + "/step", R"({"action": "noop"})", "application/json");
  REQUIRE(step);
  CHECK(step->status == 200);
  CHECK(json::parse(step->body)["year"] == 2023);
  const auto missing = client.Get("/sessions/zzz/state");
  REQUIRE(missing);
  CHECK(missing->status == 404);
  svc.stop();
  server.join();
}
