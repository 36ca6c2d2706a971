#pragma once

#include "floodiam/rainfall.hpp"
#include "floodiam/terrain.hpp"

#include <map>
#include <vector>

namespace floodiam {

/// Adaptation capacity installed in one zone.
struct ZoneCapacity {
  double drainage_mm = 0.0;  ///< removed from the event intensity in every zone cell
  double storage_m3 = 0.0;   ///< absorbed from the zone's runoff volume
};

using ZoneCapacities = std::map<int, ZoneCapacity>;

struct FloodField {
  GridGeometry geometry;
  std::vector<double> depth_mm;  ///< same shape as the terrain; 0 on nodata
  int event_year = 0;
  double total_water_volume_m3 = 0.0;  ///< standing water, sum of depth * cell area

  // Volume ledger: rain = stored + drained + absorbed + exited.
  double rain_volume_m3 = 0.0;
  double drained_volume_m3 = 0.0;
  double absorbed_volume_m3 = 0.0;
  double exited_volume_m3 = 0.0;

  /// Depth of the cell containing (x, y); see GridGeometry::cell_at for the
  /// edge rule. Throws ValidationError outside the extent.
  double depth_at_point(double x, double y) const;
  double max_depth_mm() const;
};

/// Priority-Flood depression filling (8-connected). Grid-edge data cells are
/// the outlets; nodata cells are walls. Regions walled off from every edge
/// drain to their own lowest cell, which is left unraised.
/// Nodata cells stay NaN in the output.
std::vector<double> fill_depressions(const TerrainGrid& terrain);

/// Precomputed drainage structure of a terrain: the fill surface, the
/// depression each cell's runoff reaches, and the spill graph between
/// depressions. Build once per terrain and reuse across events.
class FloodModel {
 public:
  explicit FloodModel(TerrainGrid terrain);

  const TerrainGrid& terrain() const { return terrain_; }
  const std::vector<double>& filled() const { return filled_; }
  std::size_t depression_count() const { return depressions_.size(); }
  /// Total storable volume below the spill level of every open depression.
  double depression_capacity_m3() const;

  /// Depth field for one event under the given per-zone capacities. Zone ids
  /// in `capacities` must occur in the terrain's zone raster and capacities
  /// must be non-negative (ValidationError otherwise).
  FloodField compute(const RainfallEvent& event, const ZoneCapacities& capacities) const;

 private:
  static constexpr int kExit = -1;

  struct Depression {
    std::vector<std::size_t> cells;     ///< sorted by ascending ground elevation
    std::vector<double> prefix_elev;    ///< prefix sums of sorted elevations
    double spill_level = 0.0;           ///< +inf for sealed basins
    double capacity_m3 = 0.0;           ///< +inf for sealed basins
    int downstream = kExit;             ///< depression receiving the overflow
  };

  double solve_level(const Depression& dep, double volume_m3) const;

  TerrainGrid terrain_;
  std::vector<double> filled_;
  std::vector<int> target_;               ///< per cell: depression id or kExit
  std::vector<Depression> depressions_;
  std::vector<int> order_;                ///< upstream-first processing order
  std::vector<int> zone_ids_;
};

/// One-shot convenience over FloodModel.
FloodField compute_flood_depths(const TerrainGrid& terrain, const RainfallEvent& event,
                                const ZoneCapacities& zone_adaptation);

}  // namespace floodiam
