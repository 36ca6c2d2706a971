#pragma once

#include "floodiam/common.hpp"

#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace floodiam {

/// Placement of a row-major raster. Row 0 is the northernmost row, as in
/// ESRI ASCII grids; (x_origin, y_origin) is the lower-left corner.
struct GridGeometry {
  int n_rows = 0;
  int n_cols = 0;
  double cell_size_m = 1.0;
  double x_origin = 0.0;
  double y_origin = 0.0;

  std::size_t cell_count() const {
    return static_cast<std::size_t>(n_rows) * static_cast<std::size_t>(n_cols);
  }
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(n_cols) +
           static_cast<std::size_t>(col);
  }
  double cell_area_m2() const { return cell_size_m * cell_size_m; }
  double x_max() const { return x_origin + n_cols * cell_size_m; }
  double y_max() const { return y_origin + n_rows * cell_size_m; }
  bool contains(double x, double y) const;
  /// Cell containing (x, y) by flooring the continuous coordinates; points on
  /// the north or east extent edge map to the last row/column. Throws
  /// ValidationError outside the extent.
  std::size_t cell_at(double x, double y) const;
  double center_x(int col) const { return x_origin + (col + 0.5) * cell_size_m; }
  double center_y(int row) const { return y_origin + (n_rows - row - 0.5) * cell_size_m; }
};

/// Elevation raster. Nodata cells hold NaN and act as impermeable walls.
struct TerrainGrid {
  GridGeometry geometry;
  std::vector<double> elevation;
  std::vector<int> zone_of_cell;  ///< kNoZone where a cell belongs to no zone

  bool is_nodata(std::size_t cell) const;
  void validate() const;
};

/// Raw contents of an ESRI ASCII grid.
struct AsciiGrid {
  GridGeometry geometry;
  std::optional<double> nodata_value;
  std::vector<double> values;  ///< row-major, north row first; nodata kept verbatim
};

AsciiGrid read_ascii_grid(std::istream& in, const std::string& source_name = "grid");
AsciiGrid read_ascii_grid_file(const std::string& path);
void write_ascii_grid(std::ostream& out, const AsciiGrid& grid);

/// Builds a terrain from an elevation grid and an optional aligned zone-id
/// grid (nodata in the zone grid means "no zone").
TerrainGrid make_terrain(const AsciiGrid& elevation, const AsciiGrid* zones);

}  // namespace floodiam
