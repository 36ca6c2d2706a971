#pragma once

#include "floodiam/network.hpp"
#include "floodiam/routing.hpp"
#include "floodiam/terrain.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace floodiam {

struct Extent {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;
};

struct HexCell {
  int q = 0;
  int r = 0;
  Point center;
  double population = 0.0;
  int zone_id = kNoZone;
};

struct HexPopulationRow {
  int q = 0;
  int r = 0;
  double population = 0.0;
};

using HexPopulationTable = std::vector<HexPopulationRow>;
/// Either a per-hex table, a raster summed by cell centre, or nothing (all 0).
using PopulationSource = std::variant<std::monostate, HexPopulationTable, AsciiGrid>;

/// Pointy-top axial hex tiling anchored at the extent's lower-left corner.
/// `resolution_m` is the hexagon edge length (= circumradius).
class HexGrid {
 public:
  HexGrid() = default;
  HexGrid(double resolution_m, Point origin, std::vector<HexCell> cells);

  double resolution_m() const { return resolution_m_; }
  Point origin() const { return origin_; }
  const std::vector<HexCell>& cells() const { return cells_; }
  std::vector<HexCell>& mutable_cells() { return cells_; }
  std::size_t size() const { return cells_.size(); }

  std::optional<std::size_t> find(int q, int r) const;
  /// Hex containing p (nearest centre), if that hex is part of the grid.
  std::optional<std::size_t> locate(Point p) const;
  /// Indices of the up-to-six neighbours present in the grid.
  const std::vector<std::size_t>& neighbors(std::size_t cell) const { return neighbors_[cell]; }
  /// Axial coordinates of the hex containing p, whether or not it is in the grid.
  std::pair<int, int> axial_of(Point p) const;
  Point center_of(int q, int r) const;
  std::array<Point, 6> corners(std::size_t cell) const;

 private:
  static long long key(int q, int r) { return (static_cast<long long>(q) << 32) ^ static_cast<unsigned>(r); }
  double resolution_m_ = 1.0;
  Point origin_;
  std::vector<HexCell> cells_;
  std::unordered_map<long long, std::size_t> lookup_;
  std::vector<std::vector<std::size_t>> neighbors_;
};

/// Every hex that intersects the extent, ordered by (r, q). Zones are
/// assigned by hex centre, clamped into the extent for edge hexes.
HexGrid build_hex_grid(const Extent& extent, double resolution_m, const PopulationSource& population,
                       const std::vector<Zone>& zones = {});

HexPopulationTable read_hex_population(std::istream& in, const std::string& source);

struct POI {
  long long id = 0;
  std::size_t category = 0;  ///< index into the scenario's category list
  Point location;
  std::array<std::optional<std::size_t>, kModeCount> attached_node;  ///< nearest subgraph node per mode
};

/// Reads pois.csv (id,category,x,y) and attaches each POI to its nearest
/// node on every mode subgraph.
std::vector<POI> load_pois(std::istream& in, const std::vector<std::string>& categories,
                           const MultimodalNetwork& network, const Extent& extent);

/// Nearest node on the mode subgraph (ties to the lower index), optionally
/// within a radius.
std::optional<std::size_t> nearest_node(const MultimodalNetwork& network, Mode mode, Point p,
                                        double max_distance_m = kUnreachable);

struct QoLParams {
  double neighbor_weight = 0.5;
  std::vector<double> p75_norm;          ///< per category, > 0
  std::vector<double> category_weights;  ///< per category, sum to 1
  std::array<double, kModeCount> threshold_s = {1800.0, 900.0, 600.0};  ///< drive, cycle, walk
  double snap_radius_m = 250.0;

  void validate() const;
};

/// counts[category][mode]: POIs reachable within the mode's threshold.
using PoiCounts = std::vector<std::array<int, kModeCount>>;

/// Per-mode bounded shortest-time search from the hex centre's snapped node.
/// A POI is counted when the time to its attached node is at most the
/// threshold. Hexes with no node inside the snap radius get zero counts for
/// that mode.
PoiCounts accessible_poi_counts(const HexCell& hex, const MultimodalNetwork& network,
                                const LinkTimes& times, const std::vector<POI>& pois,
                                std::size_t category_count, const QoLParams& params);
PoiCounts accessible_poi_counts(const HexCell& hex, const MultimodalNetwork& network,
                                const FloodField* flood, const DepthDisruptionCurve& curves,
                                const std::vector<POI>& pois, std::size_t category_count,
                                const QoLParams& params);

/// Per-category count with modes combined (max across modes).
std::vector<double> combine_modes(const PoiCounts& counts);

/// Index in [0, 1] from own and summed-neighbour combined counts.
double qol_index(double population, const std::vector<double>& own_counts,
                 const std::vector<double>& neighbor_count_sums, const QoLParams& params);

/// Population-weighted mean of hex indices per zone; unpopulated hexes are
/// skipped and a zone without population gets 0. Throws ValidationError for
/// a populated hex with no zone.
std::map<int, double> aggregate_qol_by_zone(const std::vector<double>& hex_index, const HexGrid& grid,
                                            const std::vector<int>& zone_ids);

/// 75th percentile (linear interpolation) of raw per-category scores across
/// populated hexes; non-positive results fall back to the category maximum,
/// then to 1.
std::vector<double> p75_normalizers(const HexGrid& grid, const std::vector<PoiCounts>& counts,
                                    double neighbor_weight);

/// Accessibility over a fixed grid and POI set; dry-network results are
/// computed once and reused.
class AccessibilityModel {
 public:
  struct Result {
    std::vector<PoiCounts> counts;
    std::vector<double> hex_index;
    std::map<int, double> zone_qol;
  };

  /// If params.p75_norm is empty the normalizers are computed from the
  /// no-rain baseline.
  AccessibilityModel(const MultimodalNetwork& network, HexGrid grid, std::vector<POI> pois,
                     std::size_t category_count, QoLParams params, std::vector<int> zone_ids);

  const HexGrid& grid() const { return grid_; }
  const QoLParams& params() const { return params_; }
  const std::vector<POI>& pois() const { return pois_; }
  const Result& baseline() const { return baseline_; }

  Result evaluate(const LinkTimes& times, bool dry) const;

 private:
  std::vector<PoiCounts> counts_for(const LinkTimes& times) const;
  Result finish(std::vector<PoiCounts> counts) const;

  const MultimodalNetwork* network_;
  HexGrid grid_;
  std::vector<POI> pois_;
  std::size_t category_count_;
  QoLParams params_;
  std::vector<int> zone_ids_;
  LinkTimes free_;
  std::vector<std::array<std::optional<std::size_t>, kModeCount>> snapped_;
  std::vector<std::array<std::vector<double>, kModeCount>> reach_;  ///< no-rain bounded search times
  Result baseline_;
};

}  // namespace floodiam
