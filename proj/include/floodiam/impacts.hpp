#pragma once

#include "floodiam/demand.hpp"
#include "floodiam/flood.hpp"
#include "floodiam/network.hpp"
#include "floodiam/routing.hpp"

#include <array>
#include <map>
#include <vector>

namespace floodiam {

/// Piecewise-linear depth (mm) to damage fraction, clamped at both ends.
struct DamageCurve {
  std::vector<std::pair<double, double>> knots;

  double operator()(double depth_mm) const;
  void validate(const std::string& where) const;
};

inline constexpr std::size_t kRoadClassCount = 4;

struct CostModel {
  std::array<double, kRoadClassCount> base_cost_per_m{};   ///< by RoadClass
  double lane_factor = 1.0;              ///< multiplier = 1 + lane_factor * (lanes - 1)
  double lighting_cost_per_m = 0.0;
  double signals_cost_per_link = 0.0;
  std::array<DamageCurve, kRoadClassCount> damage;          ///< by RoadClass
  std::array<double, kModeCount> vot_per_hour{};            ///< by Mode
  double cancellation_factor = 0.8;

  void validate() const;
};

double link_construction_cost(const Link& link, const CostModel& cost_model);
double damage_fraction(const DamageCurve& curve, double depth_mm);

struct ZoneImpact {
  int zone_id = 0;
  double I = 0.0;  ///< direct infrastructure damage
  double D = 0.0;  ///< delay cost
  double C = 0.0;  ///< cancellation cost
  double Q = 0.0;  ///< quality-of-life index
  int completed = 0;  ///< includes delayed trips
  int delayed = 0;
  int cancelled = 0;
};

/// Per-zone impacts, ordered by zone id.
struct ImpactSummary {
  std::vector<ZoneImpact> zones;

  ZoneImpact& at(int zone_id);
  const ZoneImpact& at(int zone_id) const;
};

ImpactSummary empty_summary(const std::vector<int>& zone_ids);

/// I_i: construction cost times damage fraction at the link's depth, summed
/// over the zone's links. Throws for a link without a zone.
std::map<int, double> direct_damage_by_zone(const MultimodalNetwork& network, std::span<const double> link_depth_mm,
                                            const CostModel& cost_model, const std::vector<int>& zone_ids);
std::map<int, double> direct_damage_by_zone(const MultimodalNetwork& network, const FloodField& flood,
                                            const CostModel& cost_model, const std::vector<int>& zone_ids);

/// D_i: (travel - baseline) hours times the mode's VoT, by origin zone.
std::map<int, double> delay_cost_by_zone(const std::vector<RouteResult>& results, const std::vector<Trip>& trips,
                                         const CostModel& cost_model, const std::vector<int>& zone_ids);
/// C_i: cancellation_factor * VoT * baseline hours for cancelled trips, by origin zone.
std::map<int, double> cancellation_cost_by_zone(const std::vector<RouteResult>& results,
                                                const std::vector<Trip>& trips, const CostModel& cost_model,
                                                const std::vector<int>& zone_ids);

/// I, D, C and trip counters assembled into one summary; Q is filled from
/// `zone_qol` when given.
ImpactSummary summarize_impacts(const MultimodalNetwork& network, std::span<const double> link_depth_mm,
                                const std::vector<RouteResult>& results, const std::vector<Trip>& trips,
                                const CostModel& cost_model, const std::vector<int>& zone_ids,
                                const std::map<int, double>& zone_qol);

}  // namespace floodiam
