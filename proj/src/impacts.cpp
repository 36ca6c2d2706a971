#include "floodiam/impacts.hpp"

#include "floodiam/common.hpp"

#include <algorithm>
#include <cmath>

namespace floodiam {

double DamageCurve::operator()(double depth_mm) const {
  if (knots.empty()) return 0.0;
  if (depth_mm <= knots.front().first) return knots.front().second;
  if (depth_mm >= knots.back().first) return knots.back().second;
  auto hi = std::upper_bound(knots.begin(), knots.end(), depth_mm,
                             [](double d, const auto& knot) { return d < knot.first; });
  auto lo = std::prev(hi);
  const double t = (depth_mm - lo->first) / (hi->first - lo->first);
  return lo->second + t * (hi->second - lo->second);
}

void DamageCurve::validate(const std::string& where) const {
  if (knots.empty()) throw ValidationError(where + ": damage curve has no knots");
  if (knots.front().first != 0.0 || knots.front().second != 0.0)
    throw ValidationError(where + ": damage curve must start at (0, 0)");
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (!(knots[i].first > knots[i - 1].first))
      throw ValidationError(where + ": damage curve depths must increase");
    if (knots[i].second < knots[i - 1].second)
      throw ValidationError(where + ": damage curve must be non-decreasing");
  }
  if (knots.back().second > 1.0) throw ValidationError(where + ": damage fraction exceeds 1");
}

void CostModel::validate() const {
  for (std::size_t rc = 0; rc < kRoadClassCount; ++rc) {
    const std::string where = std::string("cost model ") + to_string(static_cast<RoadClass>(rc));
    if (!(base_cost_per_m[rc] >= 0.0)) throw ValidationError(where + ": negative base cost");
    damage[rc].validate(where);
  }
  if (!(lane_factor >= 0.0) || !(lighting_cost_per_m >= 0.0) || !(signals_cost_per_link >= 0.0))
    throw ValidationError("cost model: costs must be non-negative");
  for (double v : vot_per_hour) {
    if (!(v >= 0.0)) throw ValidationError("cost model: value of time must be non-negative");
  }
  if (!(cancellation_factor >= 0.0 && cancellation_factor <= 1.0))
    throw ValidationError("cost model: cancellation_factor must lie in [0, 1]");
}

double link_construction_cost(const Link& link, const CostModel& cost_model) {
  if (link.lanes < 1) throw ValidationError("link " + std::to_string(link.id) + ": lanes must be at least 1");
  const auto rc = static_cast<std::size_t>(link.road_class);
  if (rc >= kRoadClassCount) throw ValidationError("link " + std::to_string(link.id) + ": unknown road class");
  const double lane_multiplier = 1.0 + cost_model.lane_factor * (link.lanes - 1);
  double cost = link.length_m * cost_model.base_cost_per_m[rc] * lane_multiplier;
  if (link.has_lighting) cost += cost_model.lighting_cost_per_m * link.length_m;
  if (link.has_signals) cost += cost_model.signals_cost_per_link;
  return cost;
}

double damage_fraction(const DamageCurve& curve, double depth_mm) { return curve(depth_mm); }

ZoneImpact& ImpactSummary::at(int zone_id) {
  auto it = std::lower_bound(zones.begin(), zones.end(), zone_id,
                             [](const ZoneImpact& z, int id) { return z.zone_id < id; });
  if (it == zones.end() || it->zone_id != zone_id)
    throw ValidationError("impact summary has no zone " + std::to_string(zone_id));
  return *it;
}

const ZoneImpact& ImpactSummary::at(int zone_id) const { return const_cast<ImpactSummary*>(this)->at(zone_id); }

ImpactSummary empty_summary(const std::vector<int>& zone_ids) {
  ImpactSummary s;
  for (int z : zone_ids) s.zones.push_back(ZoneImpact{z});
  std::sort(s.zones.begin(), s.zones.end(), [](const auto& a, const auto& b) { return a.zone_id < b.zone_id; });
  return s;
}

namespace {

std::map<int, double> zero_map(const std::vector<int>& zone_ids) {
  std::map<int, double> m;
  for (int z : zone_ids) m[z] = 0.0;
  return m;
}

double& slot(std::map<int, double>& m, int zone, const std::string& what) {
  auto it = m.find(zone);
  if (it == m.end()) throw ValidationError(what + " references unknown zone " + std::to_string(zone));
  return it->second;
}

}  // namespace

std::map<int, double> direct_damage_by_zone(const MultimodalNetwork& network, std::span<const double> link_depth_mm,
                                            const CostModel& cost_model, const std::vector<int>& zone_ids) {
  auto out = zero_map(zone_ids);
  const auto& links = network.links();
  for (std::size_t l = 0; l < links.size(); ++l) {
    const Link& link = links[l];
    if (link.zone_id == kNoZone) throw ValidationError("link " + std::to_string(link.id) + " has no zone");
    double& total = slot(out, link.zone_id, "link " + std::to_string(link.id));
    if (!(link_depth_mm[l] > 0.0)) continue;
    const double fraction = damage_fraction(cost_model.damage[static_cast<std::size_t>(link.road_class)], link_depth_mm[l]);
    total += link_construction_cost(link, cost_model) * fraction;
  }
  return out;
}

std::map<int, double> direct_damage_by_zone(const MultimodalNetwork& network, const FloodField& flood,
                                            const CostModel& cost_model, const std::vector<int>& zone_ids) {
  const auto depths = link_depths(network, flood);
  return direct_damage_by_zone(network, depths, cost_model, zone_ids);
}

std::map<int, double> delay_cost_by_zone(const std::vector<RouteResult>& results, const std::vector<Trip>& trips,
                                         const CostModel& cost_model, const std::vector<int>& zone_ids) {
  if (results.size() != trips.size()) throw ValidationError("route results do not match the trip list");
  auto out = zero_map(zone_ids);
  for (std::size_t i = 0; i < trips.size(); ++i) {
    double& total = slot(out, trips[i].origin_zone, "trip " + std::to_string(trips[i].id));
    if (results[i].status != RouteStatus::completed) continue;
    const double delay_s = results[i].travel_time_s - results[i].baseline_time_s;
    if (delay_s > 0.0) total += delay_s / 3600.0 * cost_model.vot_per_hour[mode_index(trips[i].mode)];
  }
  return out;
}

std::map<int, double> cancellation_cost_by_zone(const std::vector<RouteResult>& results,
                                                const std::vector<Trip>& trips, const CostModel& cost_model,
                                                const std::vector<int>& zone_ids) {
  if (results.size() != trips.size()) throw ValidationError("route results do not match the trip list");
  auto out = zero_map(zone_ids);
  for (std::size_t i = 0; i < trips.size(); ++i) {
    double& total = slot(out, trips[i].origin_zone, "trip " + std::to_string(trips[i].id));
    if (results[i].status != RouteStatus::cancelled) continue;
    total += cost_model.cancellation_factor * cost_model.vot_per_hour[mode_index(trips[i].mode)] *
             (results[i].baseline_time_s / 3600.0);
  }
  return out;
}

ImpactSummary summarize_impacts(const MultimodalNetwork& network, std::span<const double> link_depth_mm,
                                const std::vector<RouteResult>& results, const std::vector<Trip>& trips,
                                const CostModel& cost_model, const std::vector<int>& zone_ids,
                                const std::map<int, double>& zone_qol) {
  ImpactSummary summary = empty_summary(zone_ids);
  const auto I = direct_damage_by_zone(network, link_depth_mm, cost_model, zone_ids);
  const auto D = delay_cost_by_zone(results, trips, cost_model, zone_ids);
  const auto C = cancellation_cost_by_zone(results, trips, cost_model, zone_ids);
  for (auto& z : summary.zones) {
    z.I = I.at(z.zone_id);
    z.D = D.at(z.zone_id);
    z.C = C.at(z.zone_id);
    if (auto it = zone_qol.find(z.zone_id); it != zone_qol.end()) z.Q = it->second;
  }
  for (std::size_t i = 0; i < trips.size(); ++i) {
    ZoneImpact& z = summary.at(trips[i].origin_zone);
    if (results[i].status == RouteStatus::cancelled) {
      ++z.cancelled;
    } else {
      ++z.completed;
      if (results[i].travel_time_s > results[i].baseline_time_s) ++z.delayed;
    }
  }
  return summary;
}

}  // namespace floodiam
