#pragma once

#include "floodiam/common.hpp"

#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace floodiam {

enum class Mode : int { drive = 0, cycle = 1, walk = 2 };
inline constexpr std::array<Mode, 3> kAllModes = {Mode::drive, Mode::cycle, Mode::walk};
inline constexpr std::size_t kModeCount = 3;

const char* to_string(Mode mode);
Mode parse_mode(std::string_view text);
constexpr std::size_t mode_index(Mode m) { return static_cast<std::size_t>(m); }

enum class RoadClass : int { motorway = 0, arterial = 1, local = 2, path = 3 };
const char* to_string(RoadClass rc);
RoadClass parse_road_class(std::string_view text);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Node {
  long long id = 0;
  double x = 0.0;
  double y = 0.0;
};

struct Link {
  long long id = 0;
  std::size_t from = 0;  ///< node index
  std::size_t to = 0;    ///< node index
  double length_m = 0.0;
  std::uint8_t modes = 0;  ///< bit per Mode
  std::array<double, kModeCount> free_speed_kmh{};
  int lanes = 1;
  RoadClass road_class = RoadClass::local;
  bool has_lighting = false;
  bool has_signals = false;
  std::vector<Point> geometry;  ///< sample points, endpoints at minimum
  int zone_id = -1;

  bool allows(Mode m) const { return (modes >> mode_index(m)) & 1U; }
};

/// Street graph shared by every mode. Links are traversable in both
/// directions by each mode they allow.
class MultimodalNetwork {
 public:
  struct Arc {
    std::size_t link;
    std::size_t head;
  };

  MultimodalNetwork() = default;
  MultimodalNetwork(std::vector<Node> nodes, std::vector<Link> links);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Link>& links() const { return links_; }
  std::size_t node_count() const { return nodes_.size(); }

  std::optional<std::size_t> node_index(long long id) const;
  std::size_t require_node(long long id) const;
  /// Outgoing arcs of `node` restricted to links allowing `mode`.
  const std::vector<Arc>& arcs(Mode mode, std::size_t node) const {
    return adjacency_[mode_index(mode)][node];
  }
  bool on_subgraph(Mode mode, std::size_t node) const { return !arcs(mode, node).empty(); }
  /// Links allowing `mode`, in input order.
  std::vector<std::size_t> subgraph_links(Mode mode) const;
  /// Connected-component label per node within the mode subgraph (-1 off it).
  const std::vector<int>& components(Mode mode) const { return components_[mode_index(mode)]; }

 private:
  std::vector<Node> nodes_;
  std::vector<Link> links_;
  std::unordered_map<long long, std::size_t> node_lookup_;
  std::array<std::vector<std::vector<Arc>>, kModeCount> adjacency_;
  std::array<std::vector<int>, kModeCount> components_;
};

MultimodalNetwork load_network(std::istream& nodes_csv, std::istream& links_csv);
MultimodalNetwork load_network_files(const std::string& nodes_path, const std::string& links_path);

struct Zone {
  int id = 0;
  std::string name;
  double population = 0.0;
  std::vector<Point> polygon;  ///< closed ring (last point may repeat the first)
};

/// Even-odd point-in-polygon test; points on the boundary count as inside.
bool contains(const std::vector<Point>& ring, Point p);

/// Reads a GeoJSON FeatureCollection of Polygon features carrying id, name
/// and population properties (outer ring only).
std::vector<Zone> load_zones_geojson(std::istream& in);
std::vector<Zone> load_zones_file(const std::string& path);
void validate_zones(const std::vector<Zone>& zones);

/// Minimal CSV reader: header row, comma-separated, no quoting.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::size_t column(const std::string& name, const std::string& source) const;
};
CsvTable read_csv(std::istream& in, const std::string& source);

}  // namespace floodiam
