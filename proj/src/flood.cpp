#include "floodiam/flood.hpp"

#include "floodiam/common.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <set>

namespace floodiam {

namespace {

constexpr int kDr[8] = {-1, -1, -1, 0, 0, 1, 1, 1};
constexpr int kDc[8] = {-1, 0, 1, -1, 1, -1, 0, 1};
constexpr std::int64_t kOutside = -1;
constexpr std::int64_t kSealedSink = -2;

struct QueueEntry {
  double level;
  std::uint64_t seq;
  std::size_t cell;
  bool operator>(const QueueEntry& o) const {
    return level != o.level ? level > o.level : seq > o.seq;
  }
};

// Priority-Flood traversal shared by fill_depressions and FloodModel.
struct FillResult {
  std::vector<double> filled;
  std::vector<std::int64_t> receiver;  ///< cell, kOutside or kSealedSink
  std::vector<std::size_t> pop_order;
  std::vector<int> sealed_component;   ///< -1 for edge-drained cells
  int sealed_count = 0;
};

FillResult priority_flood(const TerrainGrid& terrain) {
  const auto& g = terrain.geometry;
  const std::size_t n = g.cell_count();
  FillResult out;
  out.filled = terrain.elevation;
  out.receiver.assign(n, kOutside);
  out.sealed_component.assign(n, -1);
  out.pop_order.reserve(n);
  std::vector<char> visited(n, 0);
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>> open;
  std::uint64_t seq = 0;

  for (int r = 0; r < g.n_rows; ++r) {
    for (int c = 0; c < g.n_cols; ++c) {
      if (r != 0 && c != 0 && r != g.n_rows - 1 && c != g.n_cols - 1) continue;
      const std::size_t cell = g.index(r, c);
      if (terrain.is_nodata(cell)) continue;
      visited[cell] = 1;
      open.push({terrain.elevation[cell], seq++, cell});
    }
  }
  if (open.empty()) throw ValidationError("terrain has no data cell on the grid boundary");

  int component = -1;
  auto drain = [&] {
    while (!open.empty()) {
      const QueueEntry top = open.top();
      open.pop();
      out.pop_order.push_back(top.cell);
      out.sealed_component[top.cell] = component;
      const int r = static_cast<int>(top.cell / static_cast<std::size_t>(g.n_cols));
      const int c = static_cast<int>(top.cell % static_cast<std::size_t>(g.n_cols));
      for (int k = 0; k < 8; ++k) {
        const int nr = r + kDr[k];
        const int nc = c + kDc[k];
        if (nr < 0 || nc < 0 || nr >= g.n_rows || nc >= g.n_cols) continue;
        const std::size_t nb = g.index(nr, nc);
        if (visited[nb] || terrain.is_nodata(nb)) continue;
        visited[nb] = 1;
        out.filled[nb] = std::max(terrain.elevation[nb], out.filled[top.cell]);
        out.receiver[nb] = static_cast<std::int64_t>(top.cell);
        open.push({out.filled[nb], seq++, nb});
      }
    }
  };
  drain();

  // Regions walled off by nodata: each drains to its own lowest cell.
  for (;;) {
    std::size_t seed = n;
    for (std::size_t cell = 0; cell < n; ++cell) {
      if (visited[cell] || terrain.is_nodata(cell)) continue;
      if (seed == n || terrain.elevation[cell] < terrain.elevation[seed]) seed = cell;
    }
    if (seed == n) break;
    component = out.sealed_count++;
    visited[seed] = 1;
    out.receiver[seed] = kSealedSink;
    open.push({terrain.elevation[seed], seq++, seed});
    drain();
  }
  return out;
}

}  // namespace

double FloodField::depth_at_point(double x, double y) const {
  return depth_mm[geometry.cell_at(x, y)];
}

double FloodField::max_depth_mm() const {
  double m = 0.0;
  for (double d : depth_mm) m = std::max(m, d);
  return m;
}

std::vector<double> fill_depressions(const TerrainGrid& terrain) {
  terrain.validate();
  return priority_flood(terrain).filled;
}

FloodModel::FloodModel(TerrainGrid terrain) : terrain_(std::move(terrain)) {
  terrain_.validate();
  const auto& g = terrain_.geometry;
  const std::size_t n = g.cell_count();
  const double area = g.cell_area_m2();
  FillResult fill = priority_flood(terrain_);
  filled_ = fill.filled;

  std::vector<std::size_t> pop_rank(n, n);
  for (std::size_t i = 0; i < fill.pop_order.size(); ++i) pop_rank[fill.pop_order[i]] = i;

  // Open depressions: 8-connected cells sharing one fill level above ground.
  std::vector<int> dep_of(n, -1);
  for (std::size_t start = 0; start < n; ++start) {
    if (terrain_.is_nodata(start) || fill.sealed_component[start] >= 0) continue;
    if (dep_of[start] >= 0 || !(filled_[start] > terrain_.elevation[start])) continue;
    const int id = static_cast<int>(depressions_.size());
    Depression dep;
    dep.spill_level = filled_[start];
    std::vector<std::size_t> stack{start};
    dep_of[start] = id;
    while (!stack.empty()) {
      const std::size_t cell = stack.back();
      stack.pop_back();
      dep.cells.push_back(cell);
      const int r = static_cast<int>(cell / static_cast<std::size_t>(g.n_cols));
      const int c = static_cast<int>(cell % static_cast<std::size_t>(g.n_cols));
      for (int k = 0; k < 8; ++k) {
        const int nr = r + kDr[k];
        const int nc = c + kDc[k];
        if (nr < 0 || nc < 0 || nr >= g.n_rows || nc >= g.n_cols) continue;
        const std::size_t nb = g.index(nr, nc);
        if (dep_of[nb] >= 0 || terrain_.is_nodata(nb) || fill.sealed_component[nb] >= 0) continue;
        if (filled_[nb] != dep.spill_level || !(filled_[nb] > terrain_.elevation[nb])) continue;
        dep_of[nb] = id;
        stack.push_back(nb);
      }
    }
    depressions_.push_back(std::move(dep));
  }
  const int open_count = static_cast<int>(depressions_.size());

  // Sealed basins hold every cell of their walled-off region.
  for (int s = 0; s < fill.sealed_count; ++s) {
    Depression basin;
    basin.spill_level = std::numeric_limits<double>::infinity();
    basin.capacity_m3 = std::numeric_limits<double>::infinity();
    depressions_.push_back(std::move(basin));
  }
  for (std::size_t cell = 0; cell < n; ++cell) {
    if (terrain_.is_nodata(cell) || fill.sealed_component[cell] < 0) continue;
    const int id = open_count + fill.sealed_component[cell];
    dep_of[cell] = id;
    depressions_[static_cast<std::size_t>(id)].cells.push_back(cell);
  }

  target_.assign(n, kExit);
  for (std::size_t cell : fill.pop_order) {
    if (dep_of[cell] >= 0) {
      target_[cell] = dep_of[cell];
    } else if (fill.receiver[cell] == kOutside) {
      target_[cell] = kExit;
    } else {
      target_[cell] = target_[static_cast<std::size_t>(fill.receiver[cell])];
    }
  }

  std::vector<std::size_t> first_pop(depressions_.size(), n);
  for (std::size_t id = 0; id < depressions_.size(); ++id) {
    auto& dep = depressions_[id];
    std::sort(dep.cells.begin(), dep.cells.end(), [&](std::size_t a, std::size_t b) {
      const double ea = terrain_.elevation[a];
      const double eb = terrain_.elevation[b];
      return ea != eb ? ea < eb : a < b;
    });
    dep.prefix_elev.resize(dep.cells.size() + 1, 0.0);
    for (std::size_t k = 0; k < dep.cells.size(); ++k) {
      dep.prefix_elev[k + 1] = dep.prefix_elev[k] + terrain_.elevation[dep.cells[k]];
      first_pop[id] = std::min(first_pop[id], pop_rank[dep.cells[k]]);
    }
    if (static_cast<int>(id) < open_count) {
      double capacity = 0.0;
      for (std::size_t cell : dep.cells) capacity += (dep.spill_level - terrain_.elevation[cell]) * area;
      dep.capacity_m3 = capacity;
      // The earliest-visited member's receiver lies outside the depression
      // and was visited earlier still, so overflow always moves downstream.
      const std::size_t entry = fill.pop_order[first_pop[id]];
      const std::int64_t outlet = fill.receiver[entry];
      dep.downstream = outlet == kOutside ? kExit : target_[static_cast<std::size_t>(outlet)];
    }
  }

  order_.resize(depressions_.size());
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<int>(i);
  std::sort(order_.begin(), order_.end(), [&](int a, int b) {
    return first_pop[static_cast<std::size_t>(a)] > first_pop[static_cast<std::size_t>(b)];
  });

  std::set<int> zones;
  for (int z : terrain_.zone_of_cell) {
    if (z != kNoZone) zones.insert(z);
  }
  zone_ids_.assign(zones.begin(), zones.end());
}

double FloodModel::depression_capacity_m3() const {
  double total = 0.0;
  for (const auto& dep : depressions_) {
    if (std::isfinite(dep.capacity_m3)) total += dep.capacity_m3;
  }
  return total;
}

double FloodModel::solve_level(const Depression& dep, double volume_m3) const {
  // Stored volume is piecewise linear in the level; walk the sorted ground
  // elevations until the flat water surface stops below the next cell.
  const double area = terrain_.geometry.cell_area_m2();
  const std::size_t m = dep.cells.size();
  const double height = volume_m3 / area;
  for (std::size_t k = 1; k <= m; ++k) {
    const double level = (height + dep.prefix_elev[k]) / static_cast<double>(k);
    if (k == m || level <= terrain_.elevation[dep.cells[k]]) return level;
  }
  return dep.spill_level;
}

FloodField FloodModel::compute(const RainfallEvent& event, const ZoneCapacities& capacities) const {
  if (!(event.intensity_mm >= 0.0) || !std::isfinite(event.intensity_mm))
    throw ValidationError("rainfall intensity must be finite and non-negative");
  for (const auto& [zone, cap] : capacities) {
    if (!std::binary_search(zone_ids_.begin(), zone_ids_.end(), zone))
      throw ValidationError("adaptation references zone " + std::to_string(zone) +
                            " which is absent from the zone raster");
    if (!(cap.drainage_mm >= 0.0) || !(cap.storage_m3 >= 0.0))
      throw ValidationError("zone " + std::to_string(zone) + ": negative adaptation capacity");
  }

  const auto& g = terrain_.geometry;
  const std::size_t n = g.cell_count();
  const double area = g.cell_area_m2();
  FloodField field;
  field.geometry = g;
  field.event_year = event.year;
  field.depth_mm.assign(n, 0.0);

  auto capacity_of = [&](int zone) -> ZoneCapacity {
    if (zone == kNoZone) return {};
    auto it = capacities.find(zone);
    return it == capacities.end() ? ZoneCapacity{} : it->second;
  };

  std::vector<double> runoff(n, 0.0);
  std::map<int, double> zone_runoff;
  for (std::size_t cell = 0; cell < n; ++cell) {
    if (terrain_.is_nodata(cell)) continue;
    const ZoneCapacity cap = capacity_of(terrain_.zone_of_cell[cell]);
    const double rain = event.intensity_mm / 1000.0 * area;
    const double drained = std::min(event.intensity_mm, cap.drainage_mm) / 1000.0 * area;
    field.rain_volume_m3 += rain;
    field.drained_volume_m3 += drained;
    runoff[cell] = rain - drained;
    zone_runoff[terrain_.zone_of_cell[cell]] += runoff[cell];
  }

  std::map<int, double> keep_fraction;
  for (const auto& [zone, volume] : zone_runoff) {
    const ZoneCapacity cap = capacity_of(zone);
    if (cap.storage_m3 <= 0.0) continue;
    const double absorbed = std::min(cap.storage_m3, volume);
    field.absorbed_volume_m3 += absorbed;
    keep_fraction[zone] = volume > 0.0 ? (volume - absorbed) / volume : 0.0;
  }

  std::vector<double> inflow(depressions_.size(), 0.0);
  for (std::size_t cell = 0; cell < n; ++cell) {
    if (terrain_.is_nodata(cell)) continue;
    double volume = runoff[cell];
    if (auto it = keep_fraction.find(terrain_.zone_of_cell[cell]); it != keep_fraction.end())
      volume *= it->second;
    const int t = target_[cell];
    if (t == kExit) {
      field.exited_volume_m3 += volume;
    } else {
      inflow[static_cast<std::size_t>(t)] += volume;
    }
  }

  for (int id : order_) {
    const Depression& dep = depressions_[static_cast<std::size_t>(id)];
    const double water = inflow[static_cast<std::size_t>(id)];
    if (!(water > 0.0)) continue;
    double level = 0.0;
    if (water >= dep.capacity_m3) {
      level = dep.spill_level;
      const double overflow = water - dep.capacity_m3;
      if (dep.downstream == kExit) {
        field.exited_volume_m3 += overflow;
      } else {
        inflow[static_cast<std::size_t>(dep.downstream)] += overflow;
      }
    } else {
      level = solve_level(dep, water);
    }
    for (std::size_t cell : dep.cells) {
      const double ground = terrain_.elevation[cell];
      if (ground >= level) break;
      field.depth_mm[cell] = (level - ground) * 1000.0;
    }
  }

  for (double d : field.depth_mm) field.total_water_volume_m3 += d / 1000.0 * area;
  return field;
}

FloodField compute_flood_depths(const TerrainGrid& terrain, const RainfallEvent& event,
                                const ZoneCapacities& zone_adaptation) {
  return FloodModel(terrain).compute(event, zone_adaptation);
}

}  // namespace floodiam
