#include "floodiam/network.hpp"

#include "floodiam/common.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace floodiam {

const char* to_string(Mode mode) {
  switch (mode) {
    case Mode::drive: return "drive";
    case Mode::cycle: return "cycle";
    case Mode::walk: return "walk";
  }
  return "?";
}

Mode parse_mode(std::string_view text) {
  text = trim(text);
  if (text == "drive") return Mode::drive;
  if (text == "cycle") return Mode::cycle;
  if (text == "walk") return Mode::walk;
  throw ParseError("unknown mode tag '" + std::string(text) + "'");
}

const char* to_string(RoadClass rc) {
  switch (rc) {
    case RoadClass::motorway: return "motorway";
    case RoadClass::arterial: return "arterial";
    case RoadClass::local: return "local";
    case RoadClass::path: return "path";
  }
  return "?";
}

RoadClass parse_road_class(std::string_view text) {
  text = trim(text);
  if (text == "motorway") return RoadClass::motorway;
  if (text == "arterial") return RoadClass::arterial;
  if (text == "local") return RoadClass::local;
  if (text == "path") return RoadClass::path;
  throw ParseError("unknown road class '" + std::string(text) + "'");
}

MultimodalNetwork::MultimodalNetwork(std::vector<Node> nodes, std::vector<Link> links)
    : nodes_(std::move(nodes)), links_(std::move(links)) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!node_lookup_.emplace(nodes_[i].id, i).second)
      throw ValidationError("duplicate node id " + std::to_string(nodes_[i].id));
  }
  std::set<long long> link_ids;
  for (auto& a : adjacency_) a.assign(nodes_.size(), {});
  for (std::size_t l = 0; l < links_.size(); ++l) {
    const Link& link = links_[l];
    const std::string where = "link " + std::to_string(link.id);
    if (!link_ids.insert(link.id).second) throw ValidationError("duplicate " + where);
    if (link.from >= nodes_.size() || link.to >= nodes_.size())
      throw ValidationError(where + ": endpoint index out of range");
    if (!(link.length_m > 0.0) || !std::isfinite(link.length_m))
      throw ValidationError(where + ": length_m must be positive");
    if (link.modes == 0) throw ValidationError(where + ": allows no mode");
    if (link.geometry.empty()) throw ValidationError(where + ": empty geometry");
    if (link.lanes < 1) throw ValidationError(where + ": lanes must be at least 1");
    for (Mode m : kAllModes) {
      if (!link.allows(m)) continue;
      const double v = link.free_speed_kmh[mode_index(m)];
      if (!(v > 0.0) || !std::isfinite(v))
        throw ValidationError(where + ": free speed for " + to_string(m) + " must be positive");
      adjacency_[mode_index(m)][link.from].push_back({l, link.to});
      if (link.to != link.from) adjacency_[mode_index(m)][link.to].push_back({l, link.from});
    }
  }
  for (Mode m : kAllModes) {
    auto& comp = components_[mode_index(m)];
    comp.assign(nodes_.size(), -1);
    int next = 0;
    for (std::size_t s = 0; s < nodes_.size(); ++s) {
      if (comp[s] >= 0 || adjacency_[mode_index(m)][s].empty()) continue;
      std::vector<std::size_t> stack{s};
      comp[s] = next;
      while (!stack.empty()) {
        const std::size_t u = stack.back();
        stack.pop_back();
        for (const Arc& arc : adjacency_[mode_index(m)][u]) {
          if (comp[arc.head] < 0) {
            comp[arc.head] = next;
            stack.push_back(arc.head);
          }
        }
      }
      ++next;
    }
  }
}

std::optional<std::size_t> MultimodalNetwork::node_index(long long id) const {
  auto it = node_lookup_.find(id);
  if (it == node_lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t MultimodalNetwork::require_node(long long id) const {
  auto idx = node_index(id);
  if (!idx) throw ValidationError("unknown node id " + std::to_string(id));
  return *idx;
}

std::vector<std::size_t> MultimodalNetwork::subgraph_links(Mode mode) const {
  std::vector<std::size_t> out;
  for (std::size_t l = 0; l < links_.size(); ++l) {
    if (links_[l].allows(mode)) out.push_back(l);
  }
  return out;
}

std::size_t CsvTable::column(const std::string& name, const std::string& source) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ParseError(source + ": missing column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv(std::istream& in, const std::string& source) {
  CsvTable table;
  std::string line;
  auto split = [](const std::string& text) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(text);
    while (std::getline(ss, cell, ',')) cells.emplace_back(trim(cell));
    if (!text.empty() && text.back() == ',') cells.emplace_back();
    return cells;
  };
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    table.header = split(line);
    break;
  }
  if (table.header.empty()) throw ParseError(source + ": missing header row");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split(std::string(trim(line)));
    if (cells.size() != table.header.size()) {
      throw ParseError(source + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(table.header.size()) + " fields, found " +
                       std::to_string(cells.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  return table;
}

namespace {

bool parse_bool(std::string_view text, const std::string& what) {
  text = trim(text);
  if (text == "1" || text == "true" || text == "yes") return true;
  if (text == "0" || text == "false" || text == "no" || text.empty()) return false;
  throw ParseError(what + ": expected a boolean, got '" + std::string(text) + "'");
}

std::vector<Point> parse_geometry(const std::string& text, const std::string& what) {
  std::vector<Point> pts;
  std::istringstream ss(text);
  std::string pair;
  while (std::getline(ss, pair, ';')) {
    if (trim(pair).empty()) continue;
    std::istringstream ps{std::string(trim(pair))};
    std::string xs;
    std::string ys;
    if (!(ps >> xs >> ys)) throw ParseError(what + ": malformed geometry point '" + pair + "'");
    pts.push_back({parse_double(xs, what + " geometry x"), parse_double(ys, what + " geometry y")});
  }
  return pts;
}

}  // namespace

MultimodalNetwork load_network(std::istream& nodes_csv, std::istream& links_csv) {
  const CsvTable nt = read_csv(nodes_csv, "nodes.csv");
  const std::size_t c_id = nt.column("id", "nodes.csv");
  const std::size_t c_x = nt.column("x", "nodes.csv");
  const std::size_t c_y = nt.column("y", "nodes.csv");
  std::vector<Node> nodes;
  std::unordered_map<long long, std::size_t> lookup;
  for (const auto& row : nt.rows) {
    Node node{parse_int(row[c_id], "node id"), parse_double(row[c_x], "node x"),
              parse_double(row[c_y], "node y")};
    lookup.emplace(node.id, nodes.size());
    nodes.push_back(node);
  }

  const std::string src = "links.csv";
  const CsvTable lt = read_csv(links_csv, src);
  const std::size_t l_id = lt.column("id", src), l_from = lt.column("from", src),
                    l_to = lt.column("to", src), l_len = lt.column("length_m", src),
                    l_modes = lt.column("modes", src), l_sd = lt.column("speed_drive", src),
                    l_sc = lt.column("speed_cycle", src), l_sw = lt.column("speed_walk", src),
                    l_lanes = lt.column("lanes", src), l_class = lt.column("road_class", src),
                    l_light = lt.column("lighting", src), l_sig = lt.column("signals", src),
                    l_zone = lt.column("zone_id", src), l_geom = lt.column("geometry", src);
  std::vector<Link> links;
  for (const auto& row : lt.rows) {
    Link link;
    link.id = parse_int(row[l_id], "link id");
    const std::string where = "link " + std::to_string(link.id);
    auto endpoint = [&](const std::string& cell) {
      const long long node_id = parse_int(cell, where + " endpoint");
      auto it = lookup.find(node_id);
      if (it == lookup.end())
        throw ValidationError(where + " references missing node " + std::to_string(node_id));
      return it->second;
    };
    link.from = endpoint(row[l_from]);
    link.to = endpoint(row[l_to]);
    link.length_m = parse_double(row[l_len], where + " length_m");
    if (!(link.length_m > 0.0)) throw ValidationError(where + ": non-positive length_m");
    std::istringstream ms(row[l_modes]);
    std::string tag;
    while (std::getline(ms, tag, '|')) {
      if (trim(tag).empty()) continue;
      link.modes |= static_cast<std::uint8_t>(1U << mode_index(parse_mode(tag)));
    }
    const std::array<std::size_t, kModeCount> speed_cols = {l_sd, l_sc, l_sw};
    for (Mode m : kAllModes) {
      const auto& cell = row[speed_cols[mode_index(m)]];
      link.free_speed_kmh[mode_index(m)] =
          trim(cell).empty() ? 0.0 : parse_double(cell, where + " speed_" + to_string(m));
    }
    link.lanes = static_cast<int>(parse_int(row[l_lanes], where + " lanes"));
    link.road_class = parse_road_class(row[l_class]);
    link.has_lighting = parse_bool(row[l_light], where + " lighting");
    link.has_signals = parse_bool(row[l_sig], where + " signals");
    link.zone_id = trim(row[l_zone]).empty() ? kNoZone
                                             : static_cast<int>(parse_int(row[l_zone], where + " zone_id"));
    link.geometry = parse_geometry(row[l_geom], where);
    if (link.geometry.empty()) {
      link.geometry = {{nodes[link.from].x, nodes[link.from].y}, {nodes[link.to].x, nodes[link.to].y}};
    }
    links.push_back(std::move(link));
  }
  return MultimodalNetwork(std::move(nodes), std::move(links));
}

MultimodalNetwork load_network_files(const std::string& nodes_path, const std::string& links_path) {
  std::ifstream nodes(nodes_path);
  if (!nodes) throw ParseError("cannot open nodes file '" + nodes_path + "'");
  std::ifstream links(links_path);
  if (!links) throw ParseError("cannot open links file '" + links_path + "'");
  return load_network(nodes, links);
}

bool contains(const std::vector<Point>& ring, Point p) {
  const std::size_t n = ring.size();
  if (n < 3) return false;
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point a = ring[i];
    const Point b = ring[j];
    // On-segment check first so shared zone borders are inclusive.
    const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    if (cross == 0.0 && p.x >= std::min(a.x, b.x) && p.x <= std::max(a.x, b.x) &&
        p.y >= std::min(a.y, b.y) && p.y <= std::max(a.y, b.y)) {
      return true;
    }
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

namespace {

bool segments_cross(Point a, Point b, Point c, Point d) {
  auto orient = [](Point p, Point q, Point r) {
    const double v = (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
    return (v > 0) - (v < 0);
  };
  const int o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
  return o1 * o2 < 0 && o3 * o4 < 0;
}

}  // namespace

void validate_zones(const std::vector<Zone>& zones) {
  if (zones.empty()) throw ValidationError("scenario needs at least one zone");
  std::set<int> ids;
  for (const auto& zone : zones) {
    const std::string where = "zone " + std::to_string(zone.id);
    if (!ids.insert(zone.id).second) throw ValidationError("duplicate " + where);
    if (zone.population < 0) throw ValidationError(where + ": negative population");
    std::vector<Point> ring = zone.polygon;
    if (ring.size() > 1 && ring.front().x == ring.back().x && ring.front().y == ring.back().y)
      ring.pop_back();
    if (ring.size() < 3) throw ValidationError(where + ": polygon needs at least 3 vertices");
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (j == i + 1 || (i == 0 && j == n - 1)) continue;
        if (segments_cross(ring[i], ring[(i + 1) % n], ring[j], ring[(j + 1) % n]))
          throw ValidationError(where + ": polygon is self-intersecting");
      }
    }
  }
}

std::vector<Zone> load_zones_geojson(std::istream& in) {
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("zones geojson: ") + e.what());
  }
  std::vector<Zone> zones;
  try {
    for (const auto& feature : doc.at("features")) {
      const auto& props = feature.at("properties");
      Zone zone;
      zone.id = props.at("id").get<int>();
      zone.name = props.value("name", "zone " + std::to_string(zone.id));
      zone.population = props.value("population", 0.0);
      const auto& geom = feature.at("geometry");
      if (geom.at("type").get<std::string>() != "Polygon")
        throw ParseError("zone " + std::to_string(zone.id) + ": geometry must be a Polygon");
      for (const auto& xy : geom.at("coordinates").at(0)) {
        zone.polygon.push_back({xy.at(0).get<double>(), xy.at(1).get<double>()});
      }
      zones.push_back(std::move(zone));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("zones geojson: ") + e.what());
  }
  std::sort(zones.begin(), zones.end(), [](const Zone& a, const Zone& b) { return a.id < b.id; });
  validate_zones(zones);
  return zones;
}

std::vector<Zone> load_zones_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open zones file '" + path + "'");
  return load_zones_geojson(in);
}

}  // namespace floodiam
