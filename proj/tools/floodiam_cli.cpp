// Command-line front end: validate, simulate, train, evaluate, serve.

#include "floodiam/common.hpp"
#include "floodiam/qlearning.hpp"
#include "floodiam/run_store.hpp"
#include "floodiam/scenario.hpp"
#include "floodiam/service.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using namespace floodiam;

namespace {

class StageError : public std::runtime_error {
 public:
  StageError(const std::string& stage, const std::string& what) : std::runtime_error(stage + ": " + what) {}
};

template <class F>
auto stage(const std::string& name, F&& f) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

// One action per line, either "<key>" (applied in order) or "<year> <key>".
// Blank lines and '#' comments are skipped. Years without an entry get no-op.
std::map<int, Action> read_action_script(const std::string& path, int start_year) {
  std::map<int, Action> script;
  if (path == "none") return script;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open action script '" + path + "'");
  std::string line;
  int next_year = start_year;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    std::istringstream ss(std::string(trim(line.substr(0, hash))));
    std::string first, second;
    if (!(ss >> first)) continue;
    if (ss >> second) {
      next_year = parse_int(first, "action script year");
      script[next_year] = Action::parse(second);
    } else {
      script[next_year] = Action::parse(first);
    }
    ++next_year;
  }
  return script;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  out << text;
}

struct Loaded {
  Scenario scenario;
  std::shared_ptr<const SimulationContext> context;
};

Loaded load(const std::string& path) {
  Loaded l;
  l.scenario = stage("load scenario", [&] { return load_scenario(path); });
  l.context = stage("build simulation context", [&] { return l.scenario.build_context(); });
  return l;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flood adaptation integrated-assessment engine"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_given = false;

  auto* validate = app.add_subcommand("validate", "Load and cross-check a scenario");
  validate->add_option("scenario", scenario_path, "Scenario file")->required();

  std::string actions_path = "none";
  auto* simulate = app.add_subcommand("simulate", "Run one episode with a fixed action script");
  simulate->add_option("scenario", scenario_path)->required();
  simulate->add_option("--seed", seed, "Rainfall seed")->each([&](const std::string&) { seed_given = true; });
  simulate->add_option("--actions", actions_path, "Action script file, or 'none' for the no-op baseline");
  simulate->add_option("--out", out_dir, "Output directory");

  QLearningParams hp;
  auto* train = app.add_subcommand("train", "Train a tabular Q-learning policy");
  train->add_option("scenario", scenario_path)->required();
  train->add_option("--episodes", hp.episodes);
  train->add_option("--alpha", hp.alpha);
  train->add_option("--gamma", hp.gamma);
  train->add_option("--epsilon", hp.epsilon_start, "Initial exploration rate");
  train->add_option("--epsilon-end", hp.epsilon_end, "Final exploration rate");
  train->add_option("--seed", seed)->each([&](const std::string&) { seed_given = true; });
  train->add_option("--out", out_dir);

  std::string policy_path;
  std::size_t eval_episodes = 20;
  auto* evaluate = app.add_subcommand("evaluate", "Greedy rollouts of a trained policy");
  evaluate->add_option("scenario", scenario_path)->required();
  evaluate->add_option("--policy", policy_path)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--episodes", eval_episodes);
  evaluate->add_option("--seed", seed)->each([&](const std::string&) { seed_given = true; });
  evaluate->add_option("--out", out_dir);

  std::string bind = "127.0.0.1:8080";
  auto* serve = app.add_subcommand("serve", "Serve the HTTP session API");
  serve->add_option("scenario", scenario_path)->required();
  serve->add_option("--bind", bind, "host:port");
  serve->add_option("--out", out_dir, "Run store directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) {
      const Loaded l = load(scenario_path);
      std::cout << "scenario '" << l.scenario.name << "' is valid\n"
                << "  hash     " << l.scenario.hash << "\n"
                << "  horizon  " << l.scenario.start_year << "-" << l.scenario.end_year << "\n"
                << "  zones    " << l.scenario.zones.size() << "\n"
                << "  nodes    " << l.scenario.network->node_count() << "\n"
                << "  links    " << l.scenario.network->links().size() << "\n"
                << "  hexes    " << l.scenario.hexes.size() << "\n"
                << "  trips    " << l.context->router.trips().size() << "\n";
      return 0;
    }

    if (*simulate) {
      const Loaded l = load(scenario_path);
      if (!seed_given) seed = l.scenario.simulation_seed;
      const auto script = stage("read action script", [&] { return read_action_script(actions_path, l.scenario.start_year); });
      RunRecord record = stage("simulate", [&] {
        AdaptationEnv env(l.context);
        env.reset(seed);
        RunRecord r;
        r.scenario_hash = l.scenario.hash;
        r.mode = "manual";
        r.seed = seed;
        while (!env.done()) {
          auto it = script.find(env.current_year());
          r.steps.push_back(StepRecord::from(env.step(it == script.end() ? Action::noop() : it->second)));
        }
        return r;
      });
      RunStore store(out_dir);
      stage("write outputs", [&] {
        store.save(record, l.scenario.document);
        return 0;
      });
      double total = 0.0;
      for (const auto& s : record.steps) total += s.reward;
      std::cout << "run " << record.id << ": " << record.steps.size() << " steps, return " << format_double(total)
                << "\n  " << store.dir(record.id).string() << "\n";
      return 0;
    }

    if (*train) {
      const Loaded l = load(scenario_path);
      hp.seed = seed_given ? seed : l.scenario.simulation_seed;
      stage("check hyperparameters", [&] {
        hp.validate();
        return 0;
      });
      const auto ctx = l.context;
      TrainingResult result = stage("train", [&] {
        return train_q_learning([ctx] { return std::make_unique<AdaptationTabularEnv>(ctx); }, hp,
                                [&](std::size_t e, double ret) {
                                  if ((e + 1) % 50 == 0 || e + 1 == hp.episodes)
                                    std::cerr << "episode " << e + 1 << "/" << hp.episodes << " return "
                                              << format_double(ret) << "\n";
                                });
      });
      stage("write outputs", [&] {
        fs::create_directories(out_dir);
        std::ostringstream policy;
        write_policy(policy, result.policy);
        write_text(fs::path(out_dir) / "policy.tsv", policy.str());
        std::ostringstream curve;
        curve << "episode,return\n";
        for (std::size_t e = 0; e < result.episode_returns.size(); ++e)
          curve << e << ',' << format_double(result.episode_returns[e]) << '\n';
        write_text(fs::path(out_dir) / "curve.csv", curve.str());
        return 0;
      });
      std::cout << "trained " << hp.episodes << " episodes; greedy return " << format_double(result.greedy_return)
                << "\n  policy " << (fs::path(out_dir) / "policy.tsv").string() << "\n";
      return 0;
    }

    if (*evaluate) {
      const Loaded l = load(scenario_path);
      if (!seed_given) seed = l.scenario.simulation_seed;
      const Policy policy = stage("read policy", [&] {
        std::ifstream in(policy_path);
        return read_policy(in);
      });
      AdaptationTabularEnv env(l.context);
      const EvaluationReport report =
          stage("evaluate", [&] { return evaluate_policy(env, policy, eval_episodes, seed); });
      stage("write outputs", [&] {
        fs::create_directories(out_dir);
        std::ostringstream csv;
        csv << "episode,seed,return,I,D,C,Q,A,M,unseen_states\n";
        for (std::size_t i = 0; i < report.episodes.size(); ++i) {
          const auto& ep = report.episodes[i];
          auto term = [&](const char* k) {
            auto it = ep.term_totals.find(k);
            return format_double(it == ep.term_totals.end() ? 0.0 : it->second);
          };
          csv << i << ',' << ep.seed << ',' << format_double(ep.total_return) << ',' << term("I") << ',' << term("D")
              << ',' << term("C") << ',' << term("Q") << ',' << term("A") << ',' << term("M") << ','
              << ep.unseen_states << '\n';
        }
        write_text(fs::path(out_dir) / "evaluation.csv", csv.str());
        std::ostringstream actions;
        for (std::size_t i = 0; i < report.episodes.size(); ++i) {
          actions << report.episodes[i].seed;
          for (const auto& a : report.episodes[i].actions) actions << ' ' << a;
          actions << '\n';
        }
        write_text(fs::path(out_dir) / "actions.txt", actions.str());
        return 0;
      });
      std::cout << "mean return over " << report.episodes.size() << " episodes: " << format_double(report.mean_return)
                << "\n";
      return 0;
    }

    if (*serve) {
      const auto colon = bind.rfind(':');
      if (colon == std::string::npos) throw StageError("parse --bind", "expected host:port");
      const std::string host = bind.substr(0, colon);
      const int port = static_cast<int>(parse_int(bind.substr(colon + 1), "port"));
      Loaded l = load(scenario_path);
      SessionService service(std::move(l.scenario), l.context, out_dir);
      std::cerr << "serving on " << host << ":" << port << "\n";
      if (!service.listen(host, port)) throw StageError("serve", "cannot bind " + bind);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
