#include "floodiam/service.hpp"

#include "floodiam/common.hpp"

#include <httplib.h>

#include <sstream>

namespace floodiam {

using nlohmann::json;

namespace {

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : path.substr(0, path.find('?'))) {
    if (c == '/') {
      if (!cur.empty()) parts.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) parts.push_back(std::move(cur));
  return parts;
}

SessionService::Response error(int status, const std::string& message) { return {status, {{"error", message}}}; }

class HttpError : public std::runtime_error {
 public:
  HttpError(int status, const std::string& message) : std::runtime_error(message), status(status) {}
  int status;
};

}  // namespace

SessionService::SessionService(Scenario scenario, std::shared_ptr<const SimulationContext> context,
                               std::filesystem::path run_dir)
    : scenario_(std::move(scenario)),
      context_(std::move(context)),
      store_(std::move(run_dir)),
      scenario_description_(describe_scenario(scenario_)) {}

SessionService::~SessionService() {
  stop();
  wait_for_training();
}

void SessionService::wait_for_training() {
  std::lock_guard lock(thread_mutex_);
  if (training_thread_.joinable()) training_thread_.join();
}

SessionService::Response SessionService::handle(const std::string& method, const std::string& path,
                                                const std::string& body_text) {
  try {
    json body = json::object();
    if (!trim(body_text).empty()) {
      try {
        body = json::parse(body_text);
      } catch (const json::parse_error&) {
        return error(400, "request body is not valid JSON");
      }
    }
    const auto parts = split_path(path);
    const bool get = method == "GET";
    const bool post = method == "POST";

    if (parts.size() == 1 && parts[0] == "scenario" && get) return {200, scenario_description_};
    if (parts.size() == 1 && parts[0] == "sessions" && post) return create_session(body);
    if (parts.size() == 3 && parts[0] == "sessions") {
      auto session = find_session(parts[1]);
      if (!session) return error(404, "unknown session '" + parts[1] + "'");
      std::lock_guard lock(session->mutex);
      if (parts[2] == "state" && get) return session_state(*session, parts[1]);
      if (parts[2] == "step" && post) return step_session(*session, parts[1], body);
      if (parts[2] == "reset" && post) return reset_session(*session, parts[1], body);
      if (parts[2] == "whatif" && post) return whatif(*session, body);
    }
    if (parts.size() == 1 && parts[0] == "train" && post) return start_training(body);
    if (parts.size() == 2 && parts[0] == "train" && get) return training_status(parts[1]);
    if (parts.size() == 1 && parts[0] == "runs" && get) return list_runs();
    if (parts.size() == 2 && parts[0] == "runs" && get) return get_run(parts[1]);
    return error(404, "no endpoint " + method + " " + path);
  } catch (const HttpError& e) {
    return error(e.status, e.what());
  } catch (const EpisodeFinished& e) {
    return error(409, e.what());
  } catch (const ValidationError& e) {
    return error(400, e.what());
  } catch (const ParseError& e) {
    return error(400, e.what());
  } catch (const json::exception& e) {
    return error(400, e.what());
  }
}

std::shared_ptr<SessionService::Session> SessionService::find_session(const std::string& id) {
  std::lock_guard lock(sessions_mutex_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

Action SessionService::parse_action(const json& body, const AdaptationEnv& env) const {
  Action action;
  if (body.contains("zone_id") || body.contains("action_id")) {
    if (!body.contains("zone_id") || !body.contains("action_id") || !body["zone_id"].is_number_integer() ||
        !body["action_id"].is_number_integer())
      throw HttpError(400, "action needs integer zone_id and action_id");
    action = Action::install(body["zone_id"].get<int>(), body["action_id"].get<int>());
  } else if (body.contains("action") && body["action"].is_string()) {
    try {
      action = Action::parse(body["action"].get<std::string>());
    } catch (const std::exception& e) {
      throw HttpError(400, std::string("malformed action: ") + e.what());
    }
  } else {
    throw HttpError(400, "malformed action: expected {\"action\": \"noop\"} or {\"zone_id\", \"action_id\"}");
  }
  try {
    env.index_of(action);
  } catch (const std::exception& e) {
    throw HttpError(400, std::string("malformed action: ") + e.what());
  }
  return action;
}

SessionService::Response SessionService::create_session(const json& body) {
  const std::uint64_t seed = body.value("seed", scenario_.simulation_seed);
  auto session = std::make_shared<Session>(context_);
  const Observation obs = session->env.reset(seed);
  std::string id;
  {
    std::lock_guard lock(sessions_mutex_);
    id = "s" + std::to_string(next_session_++);
    sessions_[id] = session;
  }
  session->record.scenario_hash = scenario_.hash;
  session->record.mode = "manual";
  session->record.seed = seed;
  return {201, {{"session", id}, {"seed", seed}, {"observation", to_json(obs)}, {"year", session->env.current_year()}}};
}

SessionService::Response SessionService::session_state(Session& s, const std::string& id) {
  const auto& env = s.env;
  json state = {{"session", id},
                {"seed", env.seed()},
                {"year", env.current_year()},
                {"year_index", env.year_index()},
                {"horizon_steps", env.horizon_steps()},
                {"done", env.done()},
                {"observation", to_json(env.observation())},
                {"zone_states", to_json(env.zone_states())},
                {"cumulative_reward", env.cumulative_reward()},
                {"run_id", s.record.id.empty() ? json(nullptr) : json(s.record.id)}};
  state["last_step"] = env.last_step() ? to_json(*env.last_step()) : json(nullptr);
  return {200, state};
}

SessionService::Response SessionService::step_session(Session& s, const std::string&, const json& body) {
  if (s.env.done()) return error(409, "episode finished; reset the session to continue");
  const Action action = parse_action(body, s.env);
  const StepResult result = s.env.step(action);
  s.record.steps.push_back(StepRecord::from(result));
  store_.save(s.record, scenario_.document);
  json out = to_json(result);
  out["cumulative_reward"] = s.env.cumulative_reward();
  out["run_id"] = s.record.id;
  return {200, out};
}

SessionService::Response SessionService::reset_session(Session& s, const std::string&, const json& body) {
  const std::uint64_t seed = body.value("seed", s.env.seed());
  const Observation obs = s.env.reset(seed);
  // A reset starts a new run record.
  s.record = RunRecord{};
  s.record.scenario_hash = scenario_.hash;
  s.record.mode = "manual";
  s.record.seed = seed;
  return {200, {{"seed", seed}, {"observation", to_json(obs)}, {"year", s.env.current_year()}}};
}

SessionService::Response SessionService::whatif(Session& s, const json& body) {
  if (s.env.done()) return error(409, "episode finished; nothing to preview");
  const Action action = parse_action(body, s.env);
  AdaptationEnv copy = s.env;
  json out = to_json(copy.step(action));
  out["committed"] = false;
  return {200, out};
}

json SessionService::job_json(const TrainingJob& job) const {
  json out = {{"job", job.id},
              {"status", job.status},
              {"episodes", job.params.episodes},
              {"episodes_done", job.curve.size()},
              {"curve", job.curve}};
  out["greedy_return"] = job.greedy_return ? json(*job.greedy_return) : json(nullptr);
  out["run_id"] = job.run_id ? json(*job.run_id) : json(nullptr);
  if (!job.error.empty()) out["error"] = job.error;
  return out;
}

SessionService::Response SessionService::start_training(const json& body) {
  QLearningParams p;
  p.episodes = body.value("episodes", p.episodes);
  p.alpha = body.value("alpha", p.alpha);
  p.gamma = body.value("gamma", p.gamma);
  p.epsilon_start = body.value("epsilon_start", p.epsilon_start);
  p.epsilon_end = body.value("epsilon_end", p.epsilon_end);
  p.seed = body.value("seed", scenario_.simulation_seed);
  p.validate();

  std::lock_guard thread_lock(thread_mutex_);
  if (training_active_.load()) return error(409, "a training job is already running");
  if (training_thread_.joinable()) training_thread_.join();
  std::lock_guard lock(jobs_mutex_);
  auto job = std::make_shared<TrainingJob>();
  job->id = "job-" + std::to_string(next_job_++);
  job->params = p;
  jobs_[job->id] = job;
  training_active_ = true;
  training_thread_ = std::thread([this, job] { run_training(job); });
  return {202, job_json(*job)};
}

void SessionService::run_training(std::shared_ptr<TrainingJob> job) {
  try {
    const auto ctx = context_;
    TrainingResult result = train_q_learning(
        [ctx] { return std::make_unique<AdaptationTabularEnv>(ctx); }, job->params,
        [&](std::size_t, double ret) {
          std::lock_guard lock(jobs_mutex_);
          job->curve.push_back(ret);
        });

    // Persist the greedy rollout under the training seed alongside the policy.
    AdaptationEnv env(context_);
    Observation obs = env.reset(job->params.seed);
    RunRecord record;
    record.scenario_hash = scenario_.hash;
    record.mode = "trained";
    record.seed = job->params.seed;
    while (!env.done()) {
      const auto a = result.policy.greedy_action(obs.key(context_->bitmask_budget_bits)).value_or(0);
      const StepResult r = env.step(env.action_at(a));
      record.steps.push_back(StepRecord::from(r));
      obs = r.observation;
    }
    store_.save(record, scenario_.document, &result.policy);

    std::lock_guard lock(jobs_mutex_);
    job->greedy_return = result.greedy_return;
    job->run_id = record.id;
    job->status = "done";
  } catch (const std::exception& e) {
    std::lock_guard lock(jobs_mutex_);
    job->status = "failed";
    job->error = e.what();
  }
  training_active_ = false;
}

SessionService::Response SessionService::training_status(const std::string& id) {
  std::lock_guard lock(jobs_mutex_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) return error(404, "unknown training job '" + id + "'");
  return {200, job_json(*it->second)};
}

SessionService::Response SessionService::list_runs() {
  json runs = json::array();
  for (const auto& id : store_.list()) {
    const RunRecord r = store_.load(id);
    double total = 0.0;
    for (const auto& s : r.steps) total += s.reward;
    runs.push_back({{"id", r.id}, {"mode", r.mode}, {"seed", r.seed}, {"scenario_hash", r.scenario_hash},
                    {"steps", r.steps.size()}, {"total_reward", total}, {"created_at", r.created_at}});
  }
  return {200, {{"runs", runs}}};
}

SessionService::Response SessionService::get_run(const std::string& id) {
  const RunRecord r = store_.load(id);
  json steps = json::array();
  for (const auto& s : r.steps) steps.push_back(s.to_json());
  json out = {{"id", r.id},         {"mode", r.mode},     {"seed", r.seed}, {"scenario_hash", r.scenario_hash},
              {"created_at", r.created_at}, {"updated_at", r.updated_at}, {"steps", steps}};
  out["policy_file"] = r.policy_file ? json(*r.policy_file) : json(nullptr);
  return {200, out};
}

namespace {

void install_routes(httplib::Server& server, SessionService& service) {
  auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
    const auto r = service.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server.Get(".*", forward);
  server.Post(".*", forward);
}

}  // namespace

bool SessionService::listen(const std::string& host, int port) {
  server_ = std::make_unique<httplib::Server>();
  install_routes(*server_, *this);
  return server_->listen(host, port);
}

int SessionService::bind_any(const std::string& host) {
  server_ = std::make_unique<httplib::Server>();
  install_routes(*server_, *this);
  return server_->bind_to_any_port(host);
}

bool SessionService::listen_after_bind() { return server_ && server_->listen_after_bind(); }

void SessionService::stop() {
  if (server_) server_->stop();
}

}  // namespace floodiam
