#pragma once

#include "floodiam/flood.hpp"
#include "floodiam/network.hpp"
#include "floodiam/rng.hpp"
#include "floodiam/terrain.hpp"

#include <string>
#include <vector>

namespace testing {

using namespace floodiam;

/// Row-major terrain, row 0 north, every cell in `zone`.
inline TerrainGrid grid_from(const std::vector<std::vector<double>>& rows, double cell = 10.0, int zone = 1) {
  TerrainGrid t;
  t.geometry.n_rows = static_cast<int>(rows.size());
  t.geometry.n_cols = static_cast<int>(rows.front().size());
  t.geometry.cell_size_m = cell;
  for (const auto& row : rows) {
    for (double v : row) {
      t.elevation.push_back(v);
      t.zone_of_cell.push_back(zone);
    }
  }
  return t;
}

inline TerrainGrid random_grid(int rows, int cols, RngStream& rng, double relief = 5.0, double cell = 10.0) {
  std::vector<std::vector<double>> v(static_cast<std::size_t>(rows), std::vector<double>(static_cast<std::size_t>(cols)));
  for (auto& row : v) {
    for (double& x : row) x = relief * rng.uniform();
  }
  return grid_from(v, cell);
}

inline Link make_link(long long id, std::size_t from, std::size_t to, double length, std::uint8_t modes,
                      std::array<double, kModeCount> speeds, std::vector<Point> geometry, int zone = 1) {
  Link l;
  l.id = id;
  l.from = from;
  l.to = to;
  l.length_m = length;
  l.modes = modes;
  l.free_speed_kmh = speeds;
  l.geometry = std::move(geometry);
  l.zone_id = zone;
  return l;
}

inline constexpr std::uint8_t kDrive = 1U << 0;
inline constexpr std::uint8_t kCycle = 1U << 1;
inline constexpr std::uint8_t kWalk = 1U << 2;
inline constexpr std::uint8_t kAll = kDrive | kCycle | kWalk;

}  // namespace testing
