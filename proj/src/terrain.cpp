#include "floodiam/terrain.hpp"

#include "floodiam/common.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace floodiam {

bool GridGeometry::contains(double x, double y) const {
  return x >= x_origin && x <= x_max() && y >= y_origin && y <= y_max();
}

std::size_t GridGeometry::cell_at(double x, double y) const {
  if (!contains(x, y)) {
    throw ValidationError("point (" + format_double(x) + ", " + format_double(y) +
                          ") outside grid extent");
  }
  int col = static_cast<int>(std::floor((x - x_origin) / cell_size_m));
  int row_from_south = static_cast<int>(std::floor((y - y_origin) / cell_size_m));
  col = std::clamp(col, 0, n_cols - 1);
  row_from_south = std::clamp(row_from_south, 0, n_rows - 1);
  return index(n_rows - 1 - row_from_south, col);
}

bool TerrainGrid::is_nodata(std::size_t cell) const { return std::isnan(elevation[cell]); }

void TerrainGrid::validate() const {
  if (geometry.n_rows <= 0 || geometry.n_cols <= 0)
    throw ValidationError("terrain: n_rows and n_cols must be positive");
  if (!(geometry.cell_size_m > 0.0) || !std::isfinite(geometry.cell_size_m))
    throw ValidationError("terrain: cell_size_m must be positive");
  if (elevation.size() != geometry.cell_count())
    throw ValidationError("terrain: elevation length does not match n_rows*n_cols");
  if (!zone_of_cell.empty() && zone_of_cell.size() != geometry.cell_count())
    throw ValidationError("terrain: zone raster length does not match n_rows*n_cols");
  for (double e : elevation) {
    if (std::isinf(e)) throw ValidationError("terrain: non-finite elevation");
  }
}

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

AsciiGrid read_ascii_grid(std::istream& in, const std::string& source_name) {
  std::map<std::string, std::string> header;
  std::string token;
  // Header lines are "key value"; the first token that parses as a number
  // starts the data block.
  while (in >> token) {
    const std::string key = lower(token);
    const bool is_key = !key.empty() && (std::isalpha(static_cast<unsigned char>(key[0])) != 0) &&
                        key != "nan" && key != "inf" && key != "-inf";
    if (!is_key) break;
    std::string value;
    if (!(in >> value)) throw ParseError(source_name + ": header key '" + token + "' has no value");
    header[key] = value;
    token.clear();
  }
  auto require = [&](const std::string& key) -> const std::string& {
    auto it = header.find(key);
    if (it == header.end()) throw ParseError(source_name + ": missing header key '" + key + "'");
    return it->second;
  };
  AsciiGrid grid;
  grid.geometry.n_cols = static_cast<int>(parse_int(require("ncols"), source_name + " ncols"));
  grid.geometry.n_rows = static_cast<int>(parse_int(require("nrows"), source_name + " nrows"));
  grid.geometry.x_origin = parse_double(require("xllcorner"), source_name + " xllcorner");
  grid.geometry.y_origin = parse_double(require("yllcorner"), source_name + " yllcorner");
  grid.geometry.cell_size_m = parse_double(require("cellsize"), source_name + " cellsize");
  if (auto it = header.find("nodata_value"); it != header.end()) {
    grid.nodata_value = parse_double(it->second, source_name + " NODATA_value");
  }
  if (grid.geometry.n_rows <= 0 || grid.geometry.n_cols <= 0)
    throw ParseError(source_name + ": nrows and ncols must be positive");
  if (!(grid.geometry.cell_size_m > 0.0)) throw ParseError(source_name + ": cellsize must be positive");

  const std::size_t expected = grid.geometry.cell_count();
  grid.values.reserve(expected);
  if (!token.empty()) grid.values.push_back(parse_double(token, source_name + " value"));
  while (in >> token) grid.values.push_back(parse_double(token, source_name + " value"));
  if (grid.values.size() != expected) {
    throw ParseError(source_name + ": expected " + std::to_string(expected) + " values, found " +
                     std::to_string(grid.values.size()));
  }
  return grid;
}

AsciiGrid read_ascii_grid_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open grid file '" + path + "'");
  return read_ascii_grid(in, path);
}

void write_ascii_grid(std::ostream& out, const AsciiGrid& grid) {
  const auto& g = grid.geometry;
  out << "ncols " << g.n_cols << "\nnrows " << g.n_rows << "\nxllcorner " << format_double(g.x_origin)
      << "\nyllcorner " << format_double(g.y_origin) << "\ncellsize " << format_double(g.cell_size_m)
      << "\n";
  if (grid.nodata_value) out << "NODATA_value " << format_double(*grid.nodata_value) << "\n";
  for (int r = 0; r < g.n_rows; ++r) {
    for (int c = 0; c < g.n_cols; ++c) {
      if (c) out << ' ';
      out << format_double(grid.values[g.index(r, c)]);
    }
    out << '\n';
  }
}

TerrainGrid make_terrain(const AsciiGrid& elevation, const AsciiGrid* zones) {
  TerrainGrid terrain;
  terrain.geometry = elevation.geometry;
  terrain.elevation = elevation.values;
  if (elevation.nodata_value) {
    for (double& v : terrain.elevation) {
      if (v == *elevation.nodata_value) v = std::nan("");
    }
  }
  if (zones != nullptr) {
    const auto& a = elevation.geometry;
    const auto& b = zones->geometry;
    if (a.n_rows != b.n_rows || a.n_cols != b.n_cols || a.cell_size_m != b.cell_size_m ||
        a.x_origin != b.x_origin || a.y_origin != b.y_origin) {
      throw ValidationError("zone raster is not aligned with the terrain grid");
    }
    terrain.zone_of_cell.resize(zones->values.size(), kNoZone);
    for (std::size_t i = 0; i < zones->values.size(); ++i) {
      const double v = zones->values[i];
      if (zones->nodata_value && v == *zones->nodata_value) continue;
      if (v != std::floor(v) || v < 0) {
        throw ValidationError("zone raster: cell " + std::to_string(i) +
                              " holds a non-integer or negative zone id");
      }
      terrain.zone_of_cell[i] = static_cast<int>(v);
    }
  } else {
    terrain.zone_of_cell.assign(terrain.elevation.size(), kNoZone);
  }
  terrain.validate();
  return terrain;
}

}  // namespace floodiam
