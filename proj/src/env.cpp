#include "floodiam/env.hpp"

#include "floodiam/common.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace floodiam {

void validate_catalog(const ActionCatalog& catalog) {
  if (catalog.size() != kCatalogSize) {
    throw ValidationError("expected 8 actions, found " + std::to_string(catalog.size()));
  }
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    const auto& a = catalog[i];
    const std::string where = "action " + std::to_string(a.id);
    if (a.id != static_cast<int>(i)) throw ValidationError("action ids must be 0..7 in order; found " + where);
    if (!(a.drainage_boost_mm >= 0.0) || !(a.storage_boost_m3 >= 0.0))
      throw ValidationError(where + ": effects must be non-negative");
    if (!(a.drainage_boost_mm > 0.0) && !(a.storage_boost_m3 > 0.0))
      throw ValidationError(where + ": needs a positive drainage or storage effect");
    if (!(a.capex >= 0.0) || !(a.annual_maintenance >= 0.0))
      throw ValidationError(where + ": costs must be non-negative");
    if (a.lifetime_years && *a.lifetime_years < 1) throw ValidationError(where + ": lifetime must be at least 1 year");
  }
}

bool ZoneAdaptationState::has(int action_id) const {
  return std::any_of(installed.begin(), installed.end(), [&](const Installation& i) { return i.action_id == action_id; });
}

std::uint8_t ZoneAdaptationState::mask() const {
  std::uint8_t m = 0;
  for (const auto& i : installed) m = static_cast<std::uint8_t>(m | (1U << i.action_id));
  return m;
}

void RewardWeights::validate() const {
  for (double b : {beta_I, beta_D, beta_C, beta_Q, beta_A, beta_M}) {
    if (!std::isfinite(b)) throw ValidationError("reward weights must be finite");
  }
}

double compute_reward(const ImpactSummary& impacts, const std::map<int, ZoneCosts>& costs,
                      const RewardWeights& weights) {
  if (impacts.zones.size() != costs.size()) throw ValidationError("reward: impact and cost zone sets differ");
  double reward = 0.0;
  for (const ZoneImpact& z : impacts.zones) {
    auto it = costs.find(z.zone_id);
    if (it == costs.end()) throw ValidationError("reward: no action costs for zone " + std::to_string(z.zone_id));
    reward += weights.beta_I * z.I + weights.beta_D * z.D + weights.beta_C * z.C + weights.beta_Q * z.Q +
              weights.beta_A * it->second.A + weights.beta_M * it->second.M;
  }
  return reward;
}

double reward_from_breakdown(const std::vector<ZoneBreakdown>& zones, const RewardWeights& weights) {
  ImpactSummary impacts;
  std::map<int, ZoneCosts> costs;
  for (const auto& z : zones) {
    ZoneImpact zi;
    zi.zone_id = z.zone_id;
    zi.I = z.I;
    zi.D = z.D;
    zi.C = z.C;
    zi.Q = z.Q;
    impacts.zones.push_back(zi);
    costs[z.zone_id] = {z.A, z.M};
  }
  return compute_reward(impacts, costs, weights);
}

std::string Action::key() const {
  if (is_noop()) return "noop";
  return "z" + std::to_string(zone_id) + ":a" + std::to_string(action_id);
}

Action Action::parse(const std::string& key) {
  if (key == "noop") return noop();
  const auto colon = key.find(':');
  if (key.size() < 5 || key[0] != 'z' || colon == std::string::npos || key.compare(colon + 1, 1, "a") != 0)
    throw ParseError("malformed action key '" + key + "'");
  return install(static_cast<int>(parse_int(key.substr(1, colon - 1), "action zone")),
                 static_cast<int>(parse_int(key.substr(colon + 2), "action id")));
}

std::string Observation::key(std::size_t budget_bits) const {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out = "t" + std::to_string(year_index) + "|d" + std::to_string(intensity_decile) + "|m";
  const bool full = installed_mask.size() * 8 <= budget_bits;
  for (std::uint8_t m : installed_mask) {
    if (full) {
      out += kHex[m >> 4];
      out += kHex[m & 0xf];
    } else {
      out += m ? '1' : '0';
    }
  }
  return out;
}

SimulationContext::SimulationContext(RainfallModel rainfall_model, TerrainGrid terrain,
                                     std::shared_ptr<const MultimodalNetwork> net, std::vector<Zone> zone_list,
                                     std::vector<Trip> trips, DepthDisruptionCurve curves, HexGrid hexes,
                                     std::vector<POI> pois, std::size_t category_count, QoLParams qol,
                                     CostModel cost_model, ActionCatalog action_catalog, RewardWeights reward_weights,
                                     std::uint64_t decile_seed, std::size_t budget_bits)
    : rainfall(std::move(rainfall_model)),
      flood(std::move(terrain)),
      network(std::move(net)),
      zones(std::move(zone_list)),
      zone_ids([&] {
        std::vector<int> ids;
        for (const auto& z : zones) ids.push_back(z.id);
        std::sort(ids.begin(), ids.end());
        return ids;
      }()),
      router(*network, std::move(curves), std::move(trips)),
      access(*network, std::move(hexes), std::move(pois), category_count, std::move(qol), zone_ids),
      costs(std::move(cost_model)),
      catalog(std::move(action_catalog)),
      weights(reward_weights),
      deciles(intensity_decile_edges(rainfall, decile_seed)),
      bitmask_budget_bits(budget_bits) {
  validate_catalog(catalog);
  weights.validate();
  costs.validate();
}

AdaptationEnv::AdaptationEnv(std::shared_ptr<const SimulationContext> context) : context_(std::move(context)) {
  reset(0);
}

Observation AdaptationEnv::reset(std::uint64_t seed) {
  seed_ = seed;
  year_index_ = 0;
  done_ = false;
  cumulative_reward_ = 0.0;
  states_.clear();
  for (int z : context_->zone_ids) states_.push_back(ZoneAdaptationState{z, {}, 0.0, 0.0});
  last_step_.reset();
  observation_ = observe(0);
  return observation_;
}

Observation AdaptationEnv::observe(int decile) const {
  Observation obs;
  obs.year_index = year_index_;
  obs.intensity_decile = decile;
  for (const auto& s : states_) obs.installed_mask.push_back(s.mask());
  return obs;
}

Action AdaptationEnv::action_at(std::size_t index) const {
  if (index == 0) return Action::noop();
  if (index >= action_count()) throw ValidationError("action index " + std::to_string(index) + " out of range");
  const std::size_t k = index - 1;
  return Action::install(context_->zone_ids[k / kCatalogSize], static_cast<int>(k % kCatalogSize));
}

std::size_t AdaptationEnv::index_of(const Action& action) const {
  if (action.is_noop()) return 0;
  const auto& ids = context_->zone_ids;
  auto it = std::lower_bound(ids.begin(), ids.end(), action.zone_id);
  if (it == ids.end() || *it != action.zone_id)
    throw ValidationError("action references unknown zone " + std::to_string(action.zone_id));
  if (action.action_id < 0 || action.action_id >= static_cast<int>(kCatalogSize))
    throw ValidationError("action id " + std::to_string(action.action_id) + " is not in the catalog");
  return 1 + static_cast<std::size_t>(it - ids.begin()) * kCatalogSize + static_cast<std::size_t>(action.action_id);
}

ZoneCapacities AdaptationEnv::capacities() const {
  ZoneCapacities caps;
  for (const auto& s : states_) caps[s.zone_id] = {s.drainage_capacity_mm, s.storage_capacity_m3};
  return caps;
}

StepResult AdaptationEnv::step(const Action& action) {
  if (done_) throw EpisodeFinished("episode is finished; reset before stepping again");
  const std::size_t action_index = index_of(action);
  const SimulationContext& ctx = *context_;
  const int year = current_year();

  // Installations whose lifetime has elapsed stop counting this year.
  for (auto& s : states_) {
    std::erase_if(s.installed, [&](const Installation& inst) {
      const auto& life = ctx.catalog[static_cast<std::size_t>(inst.action_id)].lifetime_years;
      return life && inst.install_year + *life <= year;
    });
  }

  StepResult result;
  StepInfo& info = result.info;
  info.year = year;
  info.action = action;
  std::map<int, ZoneCosts> costs;
  for (int z : ctx.zone_ids) costs[z] = {};
  if (action_index != 0) {
    auto& state = states_[(action_index - 1) / kCatalogSize];
    if (state.has(action.action_id)) {
      info.duplicate_install = true;
    } else {
      state.installed.push_back({action.action_id, year});
      costs[state.zone_id].A = ctx.catalog[static_cast<std::size_t>(action.action_id)].capex;
    }
  }
  for (auto& s : states_) {
    s.drainage_capacity_mm = 0.0;
    s.storage_capacity_m3 = 0.0;
    for (const auto& inst : s.installed) {
      const auto& a = ctx.catalog[static_cast<std::size_t>(inst.action_id)];
      s.drainage_capacity_mm += a.drainage_boost_mm;
      s.storage_capacity_m3 += a.storage_boost_m3;
      costs[s.zone_id].M += a.annual_maintenance;
    }
  }

  const RainfallEvent event = sample_annual_event(ctx.rainfall, year, year_stream(seed_, year));
  info.intensity_mm = event.intensity_mm;
  const FloodField flood = ctx.flood.compute(event, capacities());
  info.flood = {flood.rain_volume_m3, flood.drained_volume_m3, flood.absorbed_volume_m3,
                flood.exited_volume_m3, flood.total_water_volume_m3, flood.max_depth_mm()};

  const auto depths = link_depths(*ctx.network, flood);
  const bool dry = std::all_of(depths.begin(), depths.end(), [](double d) { return d <= 0.0; });
  const auto routes = ctx.router.route(depths);
  const auto access = dry ? ctx.access.baseline()
                          : ctx.access.evaluate(disrupted_times(*ctx.network, ctx.router.curves(), depths), false);
  const ImpactSummary impacts =
      summarize_impacts(*ctx.network, depths, routes, ctx.router.trips(), ctx.costs, ctx.zone_ids, access.zone_qol);

  for (const ZoneImpact& z : impacts.zones) {
    const ZoneCosts& c = costs.at(z.zone_id);
    info.zones.push_back({z.zone_id, z.I, z.D, z.C, z.Q, c.A, c.M, z.completed, z.delayed, z.cancelled});
  }
  info.hex_qol = access.hex_index;
  result.reward = reward_from_breakdown(info.zones, ctx.weights);

  ++year_index_;
  done_ = year_index_ >= horizon_steps();
  cumulative_reward_ += result.reward;
  observation_ = observe(intensity_decile(ctx.deciles, event.intensity_mm));
  result.observation = observation_;
  result.done = done_;
  last_step_ = result;
  return result;
}

}  // namespace floodiam
