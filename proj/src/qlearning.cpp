#include "floodiam/qlearning.hpp"

#include "floodiam/common.hpp"
#include "floodiam/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace floodiam {

std::string AdaptationTabularEnv::reset(std::uint64_t seed) {
  const auto& obs = env_.reset(seed);
  return obs.key(env_.context().bitmask_budget_bits);
}

TabularStep AdaptationTabularEnv::step(std::size_t action) {
  const StepResult r = env_.step(env_.action_at(action));
  TabularStep out;
  out.state = r.observation.key(env_.context().bitmask_budget_bits);
  out.reward = r.reward;
  out.done = r.done;
  out.terminal = r.done;
  for (const auto& z : r.info.zones) {
    out.terms["I"] += z.I;
    out.terms["D"] += z.D;
    out.terms["C"] += z.C;
    out.terms["Q"] += z.Q;
    out.terms["A"] += z.A;
    out.terms["M"] += z.M;
  }
  return out;
}

DeterministicMdp::DeterministicMdp(std::vector<std::vector<std::size_t>> next, std::vector<std::vector<double>> reward,
                                   std::size_t start, std::size_t horizon)
    : next_(std::move(next)), reward_(std::move(reward)), start_(start), horizon_(horizon) {
  if (next_.empty() || next_.size() != reward_.size()) throw ValidationError("mdp: table sizes differ");
  const std::size_t na = next_.front().size();
  if (na == 0) throw ValidationError("mdp: no actions");
  for (std::size_t s = 0; s < next_.size(); ++s) {
    if (next_[s].size() != na || reward_[s].size() != na) throw ValidationError("mdp: ragged tables");
    for (std::size_t t : next_[s]) {
      if (t >= next_.size()) throw ValidationError("mdp: transition to unknown state");
    }
  }
  if (start_ >= next_.size()) throw ValidationError("mdp: unknown start state");
  if (horizon_ == 0) throw ValidationError("mdp: horizon must be positive");
}

DeterministicMdp DeterministicMdp::from_json(std::istream& in) {
  try {
    nlohmann::json doc;
    in >> doc;
    return DeterministicMdp(doc.at("next").get<std::vector<std::vector<std::size_t>>>(),
                            doc.at("reward").get<std::vector<std::vector<double>>>(),
                            doc.value("start", std::size_t{0}), doc.at("horizon").get<std::size_t>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("mdp fixture: ") + e.what());
  }
}

DeterministicMdp DeterministicMdp::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open mdp fixture '" + path + "'");
  return from_json(in);
}

std::string DeterministicMdp::reset(std::uint64_t) {
  state_ = start_;
  steps_ = 0;
  return state_key(state_);
}

TabularStep DeterministicMdp::step(std::size_t action) {
  if (steps_ >= horizon_) throw EpisodeFinished("mdp episode finished");
  TabularStep out;
  out.reward = reward_[state_][action];
  state_ = next_[state_][action];
  ++steps_;
  out.state = state_key(state_);
  out.done = steps_ >= horizon_;
  out.terminal = false;
  return out;
}

void QLearningParams::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ValidationError("alpha must lie in (0, 1]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ValidationError("gamma must lie in [0, 1]");
  if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0) || !(epsilon_end >= 0.0 && epsilon_end <= 1.0))
    throw ValidationError("epsilon must lie in [0, 1]");
}

std::optional<std::size_t> Policy::greedy_action(const std::string& state) const {
  auto it = q.find(state);
  if (it == q.end() || it->second.empty()) return std::nullopt;
  std::optional<std::size_t> best;
  double best_value = 0.0;
  for (std::size_t a = 0; a < action_keys.size(); ++a) {
    auto v = it->second.find(action_keys[a]);
    if (v == it->second.end()) continue;
    if (!best || v->second > best_value) {
      best = a;
      best_value = v->second;
    }
  }
  return best;
}

namespace {

struct Row {
  std::vector<double> value;
  std::vector<char> visited;
};

std::size_t argmax(const std::vector<double>& values) {
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

double greedy_rollout(TabularEnv& env, const Policy& policy, std::uint64_t seed) {
  std::string state = env.reset(seed);
  double total = 0.0;
  for (;;) {
    const TabularStep s = env.step(policy.greedy_action(state).value_or(0));
    total += s.reward;
    state = s.state;
    if (s.done) break;
  }
  return total;
}

}  // namespace

TrainingResult train_q_learning(const EnvFactory& make_env, const QLearningParams& params,
                                const std::function<void(std::size_t, double)>& on_episode) {
  params.validate();
  std::unique_ptr<TabularEnv> env = make_env();
  const std::size_t n_actions = env->action_count();
  std::unordered_map<std::string, Row> table;
  auto row = [&](const std::string& s) -> Row& {
    auto [it, inserted] = table.try_emplace(s);
    if (inserted) {
      it->second.value.assign(n_actions, 0.0);
      it->second.visited.assign(n_actions, 0);
    }
    return it->second;
  };

  RngStream explore = RngStream::keyed(params.seed, 0xe5e5);
  TrainingResult result;
  result.episode_returns.reserve(params.episodes);
  for (std::size_t episode = 0; episode < params.episodes; ++episode) {
    const double frac = params.episodes > 1 ? static_cast<double>(episode) / static_cast<double>(params.episodes - 1) : 1.0;
    const double epsilon = params.epsilon_start + (params.epsilon_end - params.epsilon_start) * frac;
    std::string state = env->reset(RngStream::keyed(params.seed, episode).next_u64());
    double total = 0.0;
    for (;;) {
      Row& current = row(state);
      std::size_t action = 0;
      if (epsilon > 0.0 && explore.uniform() < epsilon) {
        action = static_cast<std::size_t>(explore.below(n_actions));
      } else {
        action = argmax(current.value);
      }
      const TabularStep s = env->step(action);
      total += s.reward;
      double target = s.reward;
      if (!s.terminal) {
        auto it = table.find(s.state);
        const double next_best = it == table.end() ? 0.0 : *std::max_element(it->second.value.begin(), it->second.value.end());
        target += params.gamma * next_best;
      }
      // `current` may dangle if row() rehashed; look it up again.
      Row& updated = table.find(state)->second;
      updated.value[action] += params.alpha * (target - updated.value[action]);
      updated.visited[action] = 1;
      state = s.state;
      if (s.done) break;
    }
    result.episode_returns.push_back(total);
    if (on_episode) on_episode(episode, total);
  }

  Policy& policy = result.policy;
  policy.params = params;
  policy.episodes_trained = params.episodes;
  for (std::size_t a = 0; a < n_actions; ++a) policy.action_keys.push_back(env->action_key(a));
  for (const auto& [state, r] : table) {
    auto& entry = policy.q[state];
    for (std::size_t a = 0; a < n_actions; ++a) {
      if (r.visited[a]) entry[policy.action_keys[a]] = r.value[a];
    }
    if (entry.empty()) policy.q.erase(state);
  }
  result.greedy_return = greedy_rollout(*env, policy, params.seed);
  return result;
}

EvaluationReport evaluate_policy(TabularEnv& env, const Policy& policy, std::size_t n_episodes, std::uint64_t seed) {
  EvaluationReport report;
  for (std::size_t e = 0; e < n_episodes; ++e) {
    EvaluationEpisode ep;
    ep.seed = seed + e;
    std::string state = env.reset(ep.seed);
    for (;;) {
      const auto greedy = policy.greedy_action(state);
      if (!greedy) ++ep.unseen_states;
      const std::size_t action = greedy.value_or(0);
      const TabularStep s = env.step(action);
      ep.actions.push_back(env.action_key(action));
      ep.rewards.push_back(s.reward);
      ep.total_return += s.reward;
      for (const auto& [k, v] : s.terms) ep.term_totals[k] += v;
      state = s.state;
      if (s.done) break;
    }
    report.episodes.push_back(std::move(ep));
  }
  if (n_episodes > 0) {
    for (const auto& ep : report.episodes) {
      report.mean_return += ep.total_return;
      for (const auto& [k, v] : ep.term_totals) report.mean_term_totals[k] += v;
    }
    report.mean_return /= static_cast<double>(n_episodes);
    for (auto& [k, v] : report.mean_term_totals) v /= static_cast<double>(n_episodes);
  }
  return report;
}

void write_policy(std::ostream& out, const Policy& policy) {
  const auto& p = policy.params;
  out << "# floodiam q-table v1\n";
  out << "# episodes\t" << p.episodes << "\n";
  out << "# alpha\t" << format_double(p.alpha) << "\n";
  out << "# gamma\t" << format_double(p.gamma) << "\n";
  out << "# epsilon_start\t" << format_double(p.epsilon_start) << "\n";
  out << "# epsilon_end\t" << format_double(p.epsilon_end) << "\n";
  out << "# seed\t" << p.seed << "\n";
  out << "# episodes_trained\t" << policy.episodes_trained << "\n";
  out << "# actions";
  for (const auto& a : policy.action_keys) out << '\t' << a;
  out << "\n";
  for (const auto& [state, entries] : policy.q) {
    for (const auto& [action, value] : entries) out << state << '\t' << action << '\t' << format_double(value) << '\n';
  }
}

Policy read_policy(std::istream& in) {
  Policy policy;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    {
      std::istringstream ss(line);
      std::string f;
      while (std::getline(ss, f, '\t')) fields.push_back(f);
    }
    const std::string where = "policy line " + std::to_string(line_no);
    if (line[0] == '#') {
      if (fields.size() < 2) continue;
      const std::string key = std::string(trim(fields[0].substr(1)));
      if (key == "actions") {
        policy.action_keys.assign(fields.begin() + 1, fields.end());
      } else if (key == "episodes") {
        policy.params.episodes = static_cast<std::size_t>(parse_int(fields[1], where));
      } else if (key == "alpha") {
        policy.params.alpha = parse_double(fields[1], where);
      } else if (key == "gamma") {
        policy.params.gamma = parse_double(fields[1], where);
      } else if (key == "epsilon_start") {
        policy.params.epsilon_start = parse_double(fields[1], where);
      } else if (key == "epsilon_end") {
        policy.params.epsilon_end = parse_double(fields[1], where);
      } else if (key == "seed") {
        policy.params.seed = std::stoull(fields[1]);
      } else if (key == "episodes_trained") {
        policy.episodes_trained = static_cast<std::size_t>(parse_int(fields[1], where));
      }
      continue;
    }
    if (fields.size() != 3) throw ParseError(where + ": expected state, action and value");
    policy.q[fields[0]][fields[1]] = parse_double(fields[2], where);
  }
  return policy;
}

}  // namespace floodiam
