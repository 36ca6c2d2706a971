// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include "floodiam/access.hpp"
#include "floodiam/env.hpp"
#include "floodiam/flood.hpp"
#include "floodiam/impacts.hpp"
#include "floodiam/qlearning.hpp"
#include "floodiam/routing.hpp"
#include "floodiam/run_store.hpp"
#include "floodiam/scenario.hpp"

#include "helpers.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>
#include <string>
#include <vector>

using namespace floodiam;
using namespace testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::filesystem::path reference_scenario() {
  return std::filesystem::path(FLOODIAM_SCENARIOS) / "basin-3zone" / "scenario.json";
}

Outcome flood_conservation() {
  RngStream rng(0xf100d);
  double worst_err = 0.0, worst_ms = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    auto t = random_grid(32, 32, rng, 4.0, 50.0);
    for (std::size_t i = 0; i < t.zone_of_cell.size(); ++i) t.zone_of_cell[i] = 1 + static_cast<int>((i % 32) / 11);
    const RainfallEvent ev{2050, 200.0 * rng.uniform()};
    const ZoneCapacities caps{{1, {20.0 * rng.uniform(), 5000.0 * rng.uniform()}},
                              {2, {0.0, 20000.0 * rng.uniform()}},
                              {3, {40.0 * rng.uniform(), 0.0}}};
    const auto t0 = Clock::now();
    const auto f = compute_flood_depths(t, ev, caps);
    worst_ms = std::max(worst_ms, 1000.0 * seconds_since(t0));
    const double effective = f.rain_volume_m3 - f.drained_volume_m3;
    const double accounted = f.total_water_volume_m3 + f.absorbed_volume_m3 + f.exited_volume_m3;
    const double err = effective > 0 ? std::abs(effective - accounted) / effective : std::abs(accounted);
    worst_err = std::max(worst_err, err);
  }
  return {worst_err < 1e-6 && worst_ms < 50.0,
          fmt("max relative error %.3g, slowest computation %.2f ms over 100 terrains", worst_err, worst_ms)};
}

Outcome flood_oracle() {
  const auto t = v_valley();
  const auto oracle = level_stepping_depths(t, 20.0);
  const auto f = compute_flood_depths(t, {2030, 20.0}, {});
  double worst = 0.0;
  for (std::size_t i = 0; i < oracle.size(); ++i) worst = std::max(worst, std::abs(f.depth_mm[i] - oracle[i]));
  return {worst <= 0.2, fmt("max per-cell deviation %.4f mm (tolerance 0.2)", worst)};
}

Outcome routing_optimality() {
  RngStream rng(0x5a7);
  const auto curves = DepthDisruptionCurve::defaults();
  int graphs = 0, checked = 0, mismatches = 0, ties = 0;
  while (graphs < 500) {
    const std::size_t n = 3 + static_cast<std::size_t>(rng.uniform() * 4);  // 3..6 nodes
    std::vector<Node> nodes;
    for (std::size_t i = 0; i < n; ++i) nodes.push_back({static_cast<long long>(i + 1), 0.0, 0.0});
    std::vector<Link> links;
    // Half of the graphs use round lengths and dry links so equal-time paths occur.
    const bool discrete = graphs % 2 == 0;
    std::vector<std::size_t> order;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        if (rng.uniform() < 0.6) order.push_back(a * 10 + b);
      }
    }
    if (order.empty()) continue;
    // Shuffled ids so the tie rule is not just insertion order.
    std::vector<long long> ids(order.size());
    for (std::size_t k = 0; k < ids.size(); ++k) ids[k] = static_cast<long long>(k + 1);
    for (std::size_t k = ids.size(); k > 1; --k) std::swap(ids[k - 1], ids[static_cast<std::size_t>(rng.uniform() * k)]);
    for (std::size_t k = 0; k < order.size(); ++k) {
      const double len = discrete ? 100.0 * (1 + static_cast<int>(rng.uniform() * 3)) : 50.0 + 950.0 * rng.uniform();
      // Each link samples its own cell of a one-row flood grid.
      links.push_back(make_link(ids[k], order[k] / 10, order[k] % 10, len, kAll, {36, 18, 3.6},
                                {{10.0 * static_cast<double>(k) + 5.0, 5.0}}));
    }
    const MultimodalNetwork net(nodes, links);
    FloodField flood;
    flood.geometry = GridGeometry{1, static_cast<int>(links.size()), 10.0, 0.0, 0.0};
    for (std::size_t k = 0; k < links.size(); ++k) {
      const double u = rng.uniform();
      if (discrete) flood.depth_mm.push_back(u < 0.2 ? 1000.0 : 0.0);
      else flood.depth_mm.push_back(u < 0.5 ? 0.0 : 450.0 * rng.uniform());
    }
    const std::vector<double> depth = link_depths(net, flood);
    ++graphs;
    const auto free = free_flow_times(net);
    const auto times = disrupted_times(net, curves, depth);
    std::vector<Trip> trips;
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t t = 0; t < n; ++t) {
        for (Mode m : kAllModes) {
          if (s != t && std::isfinite(brute_force_path(net, m, free, s, t).time_s))
            trips.push_back({static_cast<long long>(trips.size()), s, t, m, 1, 1});
        }
      }
    }
    if (trips.empty()) continue;
    const TripRouter router(net, curves, trips);
    const auto routed = router.route(depth);
    for (std::size_t k = 0; k < trips.size(); ++k) {
      const auto oracle = brute_force_path(net, trips[k].mode, times, trips[k].origin_node, trips[k].dest_node);
      const auto& r = routed[k];
      const auto single = route_trip(net, &flood, curves, trips[k]);
      ++checked;
      if (single.status != r.status || single.travel_time_s != r.travel_time_s || single.path != r.path) ++mismatches;
      if (std::isfinite(oracle.time_s)) {
        if (r.status != RouteStatus::completed || r.travel_time_s != oracle.time_s || r.path != oracle.ids)
          ++mismatches;
        // Count cases where an equal-time alternative exists.
        auto alt = times;
        if (!oracle.ids.empty()) {
          const auto first = static_cast<std::size_t>(
              std::find_if(net.links().begin(), net.links().end(),
                           [&](const Link& l) { return l.id == oracle.ids.front(); }) - net.links().begin());
          alt.seconds[mode_index(trips[k].mode)][first] = kUnreachable;
          if (brute_force_path(net, trips[k].mode, alt, trips[k].origin_node, trips[k].dest_node).time_s == oracle.time_s)
            ++ties;
        }
      } else if (r.status != RouteStatus::cancelled) {
        ++mismatches;
      }
    }
  }
  return {mismatches == 0, fmt("%d graphs, %d trips, %d mismatches (%d trips with equal-time alternatives)", graphs,
                               checked, mismatches, ties)};
}

Outcome disruption_defaults() {
  const auto curves = DepthDisruptionCurve::defaults();
  const auto v = disrupted_speed(curves, Mode::drive, 130.0, 150.0);
  bool impassable = true;
  for (double d = 300.0; d <= 2000.0; d += 0.5) impassable = impassable && !disrupted_speed(curves, Mode::drive, 130.0, d);
  const bool ok = v && std::abs(*v - 24.26) <= 0.01 && impassable;
  return {ok, fmt("speed at 150 mm = %.4f km/h; impassable at every depth >= 300 mm: %s", v ? *v : -1.0,
                  impassable ? "yes" : "no")};
}

Outcome impact_identities() {
  // Zero-flood run: the reference scenario with a dry rainfall model.
  auto doc = load_scenario(reference_scenario()).document;
  for (auto& period : doc["rainfall"]) period["distribution"] = {{"family", "empirical"}, {"samples_mm", {0.0}}};
  const auto dry = parse_scenario(doc, reference_scenario().parent_path());
  AdaptationEnv env(dry.build_context());
  env.reset(dry.simulation_seed);
  int nonzero = 0, steps = 0;
  while (!env.done()) {
    const auto r = env.step(Action::noop());
    ++steps;
    for (const auto& z : r.info.zones) nonzero += (z.I != 0.0) + (z.D != 0.0) + (z.C != 0.0);
  }

  // Cancellation cost on a heavy event in the reference scenario.
  const auto sc = load_scenario(reference_scenario());
  const auto ctx = sc.build_context();
  const auto flood = ctx->flood.compute({2050, 150.0}, {});
  const auto routes = ctx->router.route(flood);
  const auto& trips = ctx->router.trips();
  const auto& costs = ctx->costs;
  int cancelled = 0, wrong = 0;
  std::map<int, double> oracle;
  for (int z : ctx->zone_ids) oracle[z] = 0.0;
  for (std::size_t i = 0; i < trips.size(); ++i) {
    if (routes[i].status != RouteStatus::cancelled) continue;
    ++cancelled;
    const double vot = costs.vot_per_hour[mode_index(trips[i].mode)];
    const double expect = 0.8 * vot * (routes[i].baseline_time_s / 3600.0);
    const auto single = cancellation_cost_by_zone({routes[i]}, {trips[i]}, costs, ctx->zone_ids);
    if (single.at(trips[i].origin_zone) != expect) ++wrong;
    oracle[trips[i].origin_zone] += expect;
  }
  const auto totals = cancellation_cost_by_zone(routes, trips, costs, ctx->zone_ids);
  for (int z : ctx->zone_ids) wrong += totals.at(z) != oracle[z];
  const bool ok = steps == 78 && nonzero == 0 && cancelled > 0 && wrong == 0 && costs.cancellation_factor == 0.8;
  return {ok, fmt("dry run: %d steps, %d nonzero I/D/C terms; heavy event: %d cancelled trips, %d cost mismatches",
                  steps, nonzero, cancelled, wrong)};
}

Outcome qol_bounds() {
  RngStream rng(0x90a1);
  int out_of_range = 0;
  for (int k = 0; k < 10000; ++k) {
    const std::size_t nc = 1 + static_cast<std::size_t>(rng.uniform() * 6);
    QoLParams p;
    p.neighbor_weight = rng.uniform();
    double sum = 0.0;
    for (std::size_t c = 0; c < nc; ++c) {
      p.category_weights.push_back(rng.uniform());
      sum += p.category_weights.back();
      p.p75_norm.push_back(0.01 + 20.0 * rng.uniform());
    }
    for (double& w : p.category_weights) w /= sum;
    std::vector<double> own(nc), nb(nc);
    for (std::size_t c = 0; c < nc; ++c) {
      own[c] = std::floor(50 * rng.uniform());
      nb[c] = std::floor(300 * rng.uniform());
    }
    const double v = qol_index(1000 * rng.uniform(), own, nb, p);
    out_of_range += !(v >= 0.0 && v <= 1.0);
  }
  QoLParams p;
  p.category_weights = {0.1, 0.2, 0.3, 0.4};
  p.p75_norm = {3.0, 0.7, 11.0, 1.3};
  p.neighbor_weight = 0.5;
  const double pop = 7.0;
  std::vector<double> at_p75;
  for (double n : p.p75_norm) at_p75.push_back(n * pop);
  const double one = qol_index(pop, at_p75, {0, 0, 0, 0}, p);
  const double zero = qol_index(pop, {0, 0, 0, 0}, {0, 0, 0, 0}, p);
  return {out_of_range == 0 && one == 1.0 && zero == 0.0,
          fmt("%d of 10000 indices outside [0, 1]; at p75 -> %.17g; no POIs -> %.17g", out_of_range, one, zero)};
}

double eq1(const std::vector<ZoneBreakdown>& zones, const RewardWeights& w) {
  double r = 0.0;
  for (const auto& z : zones) r += w.beta_I * z.I + w.beta_D * z.D + w.beta_C * z.C + w.beta_Q * z.Q + w.beta_A * z.A + w.beta_M * z.M;
  return r;
}

Outcome reward_conformance() {
  const auto sc = load_scenario(reference_scenario());
  const auto base_ctx = sc.build_context();
  RngStream rng(0xbe7a);
  auto random_weights = [&] {
    return RewardWeights{4 * rng.uniform() - 2, 4 * rng.uniform() - 2, 4 * rng.uniform() - 2,
                         4 * rng.uniform() - 2, 4 * rng.uniform() - 2, 4 * rng.uniform() - 2};
  };
  int mismatches = 0, draws = 0;
  // Real steps under freshly drawn weights.
  for (int k = 0; k < 10; ++k) {
    auto ctx = std::make_shared<SimulationContext>(*base_ctx);
    ctx->weights = random_weights();
    AdaptationEnv env(ctx);
    env.reset(100 + static_cast<std::uint64_t>(k));
    for (int t = 0; t < 3; ++t) {
      const auto action = env.action_at(static_cast<std::size_t>(rng.uniform() * env.action_count()));
      const auto r = env.step(action);
      ++draws;
      mismatches += r.reward != eq1(r.info.zones, ctx->weights);
    }
  }
  // Randomized impact tables through the reward function.
  while (draws < 1000) {
    const RewardWeights w = random_weights();
    std::vector<ZoneBreakdown> zones;
    ImpactSummary s;
    std::map<int, ZoneCosts> costs;
    const int nz = 1 + static_cast<int>(rng.uniform() * 29);
    for (int z = 0; z < nz; ++z) {
      ZoneBreakdown b{z + 1, 1e6 * rng.uniform(), 1e4 * rng.uniform(), 1e4 * rng.uniform(), rng.uniform(),
                      rng.uniform() < 0.2 ? 1e5 * rng.uniform() : 0.0, 1e3 * rng.uniform(), 0, 0, 0};
      zones.push_back(b);
      ZoneImpact zi;
      zi.zone_id = b.zone_id;
      zi.I = b.I;
      zi.D = b.D;
      zi.C = b.C;
      zi.Q = b.Q;
      s.zones.push_back(zi);
      costs[b.zone_id] = {b.A, b.M};
    }
    ++draws;
    const double expect = eq1(zones, w);
    mismatches += compute_reward(s, costs, w) != expect;
    mismatches += reward_from_breakdown(zones, w) != expect;
    mismatches += compute_reward(s, costs, {0, 0, 0, 0, 0, 0}) != 0.0;
  }
  return {mismatches == 0, fmt("%d draws (30 from live steps), %d mismatches; all-zero weights give 0", draws, mismatches)};
}

Outcome episode_contract() {
  const auto sc = load_scenario(reference_scenario());
  auto run = [&] {
    const auto ctx = sc.build_context();
    AdaptationEnv env(ctx);
    env.reset(sc.simulation_seed);
    std::vector<StepRecord> log;
    while (!env.done()) {
      const int t = env.year_index();
      const Action a = t == 0 ? Action::install(2, 3) : t == 5 ? Action::install(1, 5) : Action::noop();
      log.push_back(StepRecord::from(env.step(a)));
    }
    return format_run_log(log);
  };
  const auto a = run();
  const auto b = run();
  const auto lines = std::count(a.begin(), a.end(), '\n');
  return {lines == 78 && a == b,
          fmt("%ld steps per episode; two executions byte-identical: %s (%zu bytes)", static_cast<long>(lines),
              a == b ? "yes" : "no", a.size())};
}

Outcome q_learning_oracle() {
  std::string detail;
  bool ok = true;
  const auto t0 = Clock::now();
  for (const char* name : {"mdp_2state.json", "mdp_4state.json"}) {
    const auto mdp = DeterministicMdp::from_file(std::string(FLOODIAM_FIXTURES) + "/" + name);
    QLearningParams p;
    p.episodes = 3000;
    p.alpha = 0.5;
    p.gamma = 0.9;
    p.epsilon_start = 1.0;
    p.epsilon_end = 1.0;
    p.seed = 21;
    const auto result = train_q_learning([&] { return std::make_unique<DeterministicMdp>(mdp); }, p);
    const double err = q_table_error(result.policy, mdp, value_iteration(mdp, 0.9));
    ok = ok && err < 1e-3;
    detail += fmt("%s max error %.2g; ", name, err);
  }
  const double secs = seconds_since(t0);
  return {ok && secs < 5.0, detail + fmt("training %.2f s", secs)};
}

// Training is shared by the learning and runtime criteria.
struct ReferenceTraining {
  Scenario scenario;
  std::shared_ptr<const SimulationContext> ctx;
  TrainingResult result;
  double train_seconds = 0.0;
};

const ReferenceTraining& reference_training() {
  static const ReferenceTraining cached = [] {
    ReferenceTraining rt{load_scenario(reference_scenario()), nullptr, {}, 0.0};
    rt.ctx = rt.scenario.build_context();
    QLearningParams p;
    p.seed = rt.scenario.simulation_seed;
    const auto t0 = Clock::now();
    rt.result = train_q_learning([&] { return std::make_unique<AdaptationTabularEnv>(rt.ctx); }, p,
                                 [&](std::size_t episode, double ret) {
                                   if ((episode + 1) % 50 == 0)
                                     std::cerr << "  training episode " << episode + 1 << "/" << p.episodes
                                               << " return " << ret << " (" << seconds_since(t0) << " s)\n";
                                 });
    rt.train_seconds = seconds_since(t0);
    return rt;
  }();
  return cached;
}

Outcome learning_sanity() {
  const auto& rt = reference_training();
  AdaptationTabularEnv env(rt.ctx);
  const std::uint64_t eval_seed = 1000;
  const auto trained = evaluate_policy(env, rt.result.policy, 20, eval_seed);
  Policy noop;
  noop.action_keys = rt.result.policy.action_keys;
  const auto baseline = evaluate_policy(env, noop, 20, eval_seed);
  std::string first;
  if (!trained.episodes.empty()) {
    for (const auto& a : trained.episodes[0].actions) {
      if (a != "noop") {
        first = a;
        break;
      }
    }
  }
  return {trained.mean_return > baseline.mean_return,
          fmt("greedy mean return %.6g vs no-op %.6g over 20 seeds (first install in seed %llu: %s)",
              trained.mean_return, baseline.mean_return, static_cast<unsigned long long>(eval_seed),
              first.empty() ? "none" : first.c_str())};
}

Outcome runtime() {
  const auto sc = load_scenario(reference_scenario());
  const auto ctx = sc.build_context();
  AdaptationEnv env(ctx);
  env.reset(sc.simulation_seed);
  const auto t0 = Clock::now();
  while (!env.done()) env.step(Action::noop());
  const double episode = seconds_since(t0);
  const auto& rt = reference_training();
  return {episode < 10.0 && rt.train_seconds < 900.0,
          fmt("78-year episode %.2f s; 500-episode training %.1f s (%u hardware threads)", episode, rt.train_seconds,
              std::thread::hardware_concurrency())};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"flood volume conservation", flood_conservation},
      {"flood oracle equivalence", flood_oracle},
      {"routing optimality", routing_optimality},
      {"disruption defaults", disruption_defaults},
      {"impact identities", impact_identities},
      {"qol bounds and anchors", qol_bounds},
      {"reward conformance", reward_conformance},
      {"episode contract", episode_contract},
      {"q-learning oracle", q_learning_oracle},
      {"learning sanity", learning_sanity},
      {"end-to-end runtime", runtime},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failures ? 1 : 0;
}
