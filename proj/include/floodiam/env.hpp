#pragma once

#include "floodiam/access.hpp"
#include "floodiam/flood.hpp"
#include "floodiam/impacts.hpp"
#include "floodiam/network.hpp"
#include "floodiam/rainfall.hpp"
#include "floodiam/routing.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace floodiam {

inline constexpr std::size_t kCatalogSize = 8;

struct AdaptationAction {
  int id = 0;
  std::string name;
  double drainage_boost_mm = 0.0;
  double storage_boost_m3 = 0.0;
  double capex = 0.0;
  double annual_maintenance = 0.0;
  std::optional<int> lifetime_years;  ///< nullopt = permanent
};

/// Exactly eight actions with ids 0..7 in order.
using ActionCatalog = std::vector<AdaptationAction>;
void validate_catalog(const ActionCatalog& catalog);

struct Installation {
  int action_id = 0;
  int install_year = 0;
};

struct ZoneAdaptationState {
  int zone_id = 0;
  std::vector<Installation> installed;  ///< live installations only
  double drainage_capacity_mm = 0.0;
  double storage_capacity_m3 = 0.0;

  bool has(int action_id) const;
  std::uint8_t mask() const;
};

/// Coefficients of the reward sum. Losses carry negative weights by default
/// so that maximizing the reward minimizes them.
struct RewardWeights {
  double beta_I = -1.0;
  double beta_D = -1.0;
  double beta_C = -1.0;
  double beta_Q = 1.0;
  double beta_A = -1.0;
  double beta_M = -1.0;

  void validate() const;
};

struct ZoneCosts {
  double A = 0.0;  ///< capital cost of actions applied this year
  double M = 0.0;  ///< maintenance of actions live this year
};

/// R = sum_i beta_I I_i + beta_D D_i + beta_C C_i + beta_Q Q_i + beta_A A_i + beta_M M_i.
/// The zone sets of `impacts` and `costs` must coincide.
double compute_reward(const ImpactSummary& impacts, const std::map<int, ZoneCosts>& costs,
                      const RewardWeights& weights);

struct Action {
  int zone_id = kNoZone;
  int action_id = -1;

  static Action noop() { return {}; }
  static Action install(int zone, int action) { return {zone, action}; }
  bool is_noop() const { return action_id < 0; }
  /// "noop" or "z<zone>:a<action>".
  std::string key() const;
  static Action parse(const std::string& key);
  bool operator==(const Action&) const = default;
};

struct Observation {
  int year_index = 0;
  int intensity_decile = 0;                 ///< of the last event; 0 before the first step
  std::vector<std::uint8_t> installed_mask;  ///< per zone, bit a = action a live

  /// Hashable state key. Masks collapse to one "any installed" bit per zone
  /// when zones * 8 exceeds `budget_bits`.
  std::string key(std::size_t budget_bits) const;
  bool operator==(const Observation&) const = default;
};

struct ZoneBreakdown {
  int zone_id = 0;
  double I = 0.0, D = 0.0, C = 0.0, Q = 0.0, A = 0.0, M = 0.0;
  int completed = 0, delayed = 0, cancelled = 0;
};

struct FloodSummary {
  double rain_m3 = 0.0;
  double drained_m3 = 0.0;
  double absorbed_m3 = 0.0;
  double exited_m3 = 0.0;
  double stored_m3 = 0.0;
  double max_depth_mm = 0.0;
};

struct StepInfo {
  int year = 0;
  Action action;
  bool duplicate_install = false;  ///< requested action was live; treated as no-op
  double intensity_mm = 0.0;
  std::vector<ZoneBreakdown> zones;
  std::vector<double> hex_qol;
  FloodSummary flood;
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

/// Reward recomputed from a step's per-zone breakdown.
double reward_from_breakdown(const std::vector<ZoneBreakdown>& zones, const RewardWeights& weights);

class EpisodeFinished : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Everything a run needs that does not change during an episode.
struct SimulationContext {
  SimulationContext(RainfallModel rainfall, TerrainGrid terrain, std::shared_ptr<const MultimodalNetwork> network,
                    std::vector<Zone> zones, std::vector<Trip> trips, DepthDisruptionCurve curves, HexGrid hexes,
                    std::vector<POI> pois, std::size_t category_count, QoLParams qol, CostModel costs,
                    ActionCatalog catalog, RewardWeights weights, std::uint64_t decile_seed,
                    std::size_t bitmask_budget_bits = 64);

  RainfallModel rainfall;
  FloodModel flood;
  std::shared_ptr<const MultimodalNetwork> network;
  std::vector<Zone> zones;
  std::vector<int> zone_ids;
  TripRouter router;
  AccessibilityModel access;
  CostModel costs;
  ActionCatalog catalog;
  RewardWeights weights;
  DecileEdges deciles;
  std::size_t bitmask_budget_bits;
};

/// Year-stepped adaptation environment over the rainfall horizon. Copyable:
/// a copy shares the immutable context and owns its episode state.
class AdaptationEnv {
 public:
  explicit AdaptationEnv(std::shared_ptr<const SimulationContext> context);

  Observation reset(std::uint64_t seed);
  /// Advances one year. Throws EpisodeFinished after the last year and
  /// ValidationError for an unknown zone or action id.
  StepResult step(const Action& action);

  const SimulationContext& context() const { return *context_; }
  std::shared_ptr<const SimulationContext> shared_context() const { return context_; }
  bool done() const { return done_; }
  int year_index() const { return year_index_; }
  int current_year() const { return context_->rainfall.start_year() + year_index_; }
  int horizon_steps() const { return context_->rainfall.year_count(); }
  std::uint64_t seed() const { return seed_; }
  const Observation& observation() const { return observation_; }
  const std::vector<ZoneAdaptationState>& zone_states() const { return states_; }
  double cumulative_reward() const { return cumulative_reward_; }
  const std::optional<StepResult>& last_step() const { return last_step_; }

  /// Flat action space: 0 = no-op, then zone-major (zone, action) pairs.
  std::size_t action_count() const { return 1 + context_->zone_ids.size() * kCatalogSize; }
  Action action_at(std::size_t index) const;
  std::size_t index_of(const Action& action) const;

 private:
  ZoneCapacities capacities() const;
  Observation observe(int decile) const;

  std::shared_ptr<const SimulationContext> context_;
  std::uint64_t seed_ = 0;
  int year_index_ = 0;
  bool done_ = false;
  double cumulative_reward_ = 0.0;
  std::vector<ZoneAdaptationState> states_;
  Observation observation_;
  std::optional<StepResult> last_step_;
};

}  // namespace floodiam
