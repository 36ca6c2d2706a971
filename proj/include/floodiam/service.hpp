#pragma once

#include "floodiam/qlearning.hpp"
#include "floodiam/run_store.hpp"
#include "floodiam/scenario.hpp"

#include <json.hpp>

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

namespace httplib {
class Server;
}

namespace floodiam {

/// Session service over one scenario. Every endpoint is reachable through
/// handle(), which the HTTP layer forwards to unchanged.
class SessionService {
 public:
  struct Response {
    int status = 200;
    nlohmann::json body;
  };

  SessionService(Scenario scenario, std::shared_ptr<const SimulationContext> context, std::filesystem::path run_dir);
  ~SessionService();
  SessionService(const SessionService&) = delete;
  SessionService& operator=(const SessionService&) = delete;

  Response handle(const std::string& method, const std::string& path, const std::string& body);

  /// Blocks serving HTTP until stop(). Returns false if the bind failed.
  bool listen(const std::string& host, int port);
  /// Binds to an ephemeral port and returns it, or -1.
  int bind_any(const std::string& host);
  bool listen_after_bind();
  void stop();

  /// Waits for a running training job to finish.
  void wait_for_training();

 private:
  struct Session {
    std::mutex mutex;
    AdaptationEnv env;
    RunRecord record;
    explicit Session(std::shared_ptr<const SimulationContext> ctx) : env(std::move(ctx)) {}
  };

  struct TrainingJob {
    std::string id;
    QLearningParams params;
    std::string status = "running";  ///< running | done | failed
    std::vector<double> curve;
    std::optional<double> greedy_return;
    std::optional<std::string> run_id;
    std::string error;
  };

  Response create_session(const nlohmann::json& body);
  Response session_state(Session& s, const std::string& id);
  Response step_session(Session& s, const std::string& id, const nlohmann::json& body);
  Response reset_session(Session& s, const std::string& id, const nlohmann::json& body);
  Response whatif(Session& s, const nlohmann::json& body);
  Response start_training(const nlohmann::json& body);
  Response training_status(const std::string& job);
  Response list_runs();
  Response get_run(const std::string& id);

  std::shared_ptr<Session> find_session(const std::string& id);
  Action parse_action(const nlohmann::json& body, const AdaptationEnv& env) const;
  void run_training(std::shared_ptr<TrainingJob> job);
  nlohmann::json job_json(const TrainingJob& job) const;

  Scenario scenario_;
  std::shared_ptr<const SimulationContext> context_;
  RunStore store_;
  nlohmann::json scenario_description_;

  std::mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::size_t next_session_ = 1;

  std::mutex jobs_mutex_;
  std::map<std::string, std::shared_ptr<TrainingJob>> jobs_;
  std::size_t next_job_ = 1;
  std::mutex thread_mutex_;  ///< guards training_thread_
  std::thread training_thread_;
  std::atomic<bool> training_active_{false};

  std::unique_ptr<httplib::Server> server_;
};

}  // namespace floodiam
