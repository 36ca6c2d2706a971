#pragma once

#include "floodiam/env.hpp"

#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace floodiam {

struct TabularStep {
  std::string state;
  double reward = 0.0;
  bool done = false;
  bool terminal = false;                 ///< done because the process ended (no bootstrap)
  std::map<std::string, double> terms;   ///< optional reward components for reporting
};

/// Discrete-state, discrete-action episodic environment seen by the learner.
class TabularEnv {
 public:
  virtual ~TabularEnv() = default;
  virtual std::string reset(std::uint64_t seed) = 0;
  virtual TabularStep step(std::size_t action) = 0;
  virtual std::size_t action_count() const = 0;
  virtual std::string action_key(std::size_t action) const = 0;
};

/// AdaptationEnv behind the tabular interface. Reports per-term totals
/// (I, D, C, Q, A, M summed over zones) with each step.
class AdaptationTabularEnv : public TabularEnv {
 public:
  explicit AdaptationTabularEnv(std::shared_ptr<const SimulationContext> context) : env_(std::move(context)) {}

  std::string reset(std::uint64_t seed) override;
  TabularStep step(std::size_t action) override;
  std::size_t action_count() const override { return env_.action_count(); }
  std::string action_key(std::size_t action) const override { return env_.action_at(action).key(); }

  AdaptationEnv& env() { return env_; }

 private:
  AdaptationEnv env_;
};

/// Finite deterministic MDP given by transition and reward tables. Episodes
/// are truncated after `horizon` steps (truncation still bootstraps).
class DeterministicMdp : public TabularEnv {
 public:
  DeterministicMdp(std::vector<std::vector<std::size_t>> next, std::vector<std::vector<double>> reward,
                   std::size_t start, std::size_t horizon);
  /// {"start":0,"horizon":50,"next":[[..]],"reward":[[..]]}
  static DeterministicMdp from_json(std::istream& in);
  static DeterministicMdp from_file(const std::string& path);

  std::string reset(std::uint64_t seed) override;
  TabularStep step(std::size_t action) override;
  std::size_t action_count() const override { return next_.front().size(); }
  std::string action_key(std::size_t action) const override { return "a" + std::to_string(action); }

  std::size_t state_count() const { return next_.size(); }
  std::size_t next_state(std::size_t s, std::size_t a) const { return next_[s][a]; }
  double reward(std::size_t s, std::size_t a) const { return reward_[s][a]; }
  static std::string state_key(std::size_t s) { return "s" + std::to_string(s); }

 private:
  std::vector<std::vector<std::size_t>> next_;
  std::vector<std::vector<double>> reward_;
  std::size_t start_;
  std::size_t horizon_;
  std::size_t state_ = 0;
  std::size_t steps_ = 0;
};

struct QLearningParams {
  std::size_t episodes = 500;
  double alpha = 0.1;
  double gamma = 0.95;
  double epsilon_start = 1.0;  ///< decays linearly to epsilon_end over the episodes
  double epsilon_end = 0.05;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const QLearningParams&) const = default;
};

/// Learned Q-table. Only visited (state, action) pairs are stored.
struct Policy {
  std::map<std::string, std::map<std::string, double>> q;
  std::vector<std::string> action_keys;  ///< in action-index order
  QLearningParams params;
  std::size_t episodes_trained = 0;

  /// Highest-valued stored action for the state (ties to the lowest action
  /// index), or nullopt for an unseen state.
  std::optional<std::size_t> greedy_action(const std::string& state) const;
  bool operator==(const Policy&) const = default;
};

struct TrainingResult {
  Policy policy;
  std::vector<double> episode_returns;
  /// Undiscounted return of a greedy rollout from reset(params.seed).
  double greedy_return = 0.0;
};

using EnvFactory = std::function<std::unique_ptr<TabularEnv>()>;

/// One-step Q-learning with epsilon-greedy exploration. Unvisited pairs read
/// as 0. Deterministic for a given seed.
TrainingResult train_q_learning(const EnvFactory& make_env, const QLearningParams& params,
                                const std::function<void(std::size_t, double)>& on_episode = {});

struct EvaluationEpisode {
  std::uint64_t seed = 0;
  double total_return = 0.0;
  std::vector<std::string> actions;
  std::vector<double> rewards;
  std::map<std::string, double> term_totals;
  std::size_t unseen_states = 0;  ///< steps where the policy fell back to action 0
};

struct EvaluationReport {
  double mean_return = 0.0;
  std::map<std::string, double> mean_term_totals;
  std::vector<EvaluationEpisode> episodes;
};

/// Greedy rollouts with env seeds seed, seed+1, ...; unseen states take
/// action 0 (no-op).
EvaluationReport evaluate_policy(TabularEnv& env, const Policy& policy, std::size_t n_episodes, std::uint64_t seed);

/// Policy file: '#'-prefixed header lines with the hyperparameters and the
/// action list, then one "state<TAB>action<TAB>value" line per stored pair.
void write_policy(std::ostream& out, const Policy& policy);
Policy read_policy(std::istream& in);

}  // namespace floodiam
