#include "floodiam/access.hpp"

#include "floodiam/common.hpp"
#include "floodiam/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace floodiam {

namespace {
const double kSqrt3 = std::sqrt(3.0);
constexpr int kNeighborDq[6] = {1, 1, 0, -1, -1, 0};
constexpr int kNeighborDr[6] = {0, -1, -1, 0, 1, 1};
}  // namespace

HexGrid::HexGrid(double resolution_m, Point origin, std::vector<HexCell> cells)
    : resolution_m_(resolution_m), origin_(origin), cells_(std::move(cells)) {
  if (!(resolution_m_ > 0.0)) throw ValidationError("hex resolution must be positive");
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    if (!lookup_.emplace(key(cells_[i].q, cells_[i].r), i).second) {
      throw ValidationError("duplicate hex (" + std::to_string(cells_[i].q) + ", " +
                            std::to_string(cells_[i].r) + ")");
    }
    if (cells_[i].population < 0) throw ValidationError("hex population must be non-negative");
  }
  neighbors_.resize(cells_.size());
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    for (int k = 0; k < 6; ++k) {
      if (auto nb = find(cells_[i].q + kNeighborDq[k], cells_[i].r + kNeighborDr[k])) neighbors_[i].push_back(*nb);
    }
  }
}

std::optional<std::size_t> HexGrid::find(int q, int r) const {
  auto it = lookup_.find(key(q, r));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

Point HexGrid::center_of(int q, int r) const {
  return {origin_.x + resolution_m_ * kSqrt3 * (q + r / 2.0), origin_.y + resolution_m_ * 1.5 * r};
}

std::pair<int, int> HexGrid::axial_of(Point p) const {
  const double x = p.x - origin_.x;
  const double y = p.y - origin_.y;
  const double fq = (kSqrt3 / 3.0 * x - y / 3.0) / resolution_m_;
  const double fr = (2.0 / 3.0 * y) / resolution_m_;
  const double fs = -fq - fr;
  double rq = std::round(fq);
  double rr = std::round(fr);
  const double rs = std::round(fs);
  const double dq = std::abs(rq - fq);
  const double dr = std::abs(rr - fr);
  const double ds = std::abs(rs - fs);
  if (dq > dr && dq > ds) {
    rq = -rr - rs;
  } else if (dr > ds) {
    rr = -rq - rs;
  }
  return {static_cast<int>(rq), static_cast<int>(rr)};
}

std::optional<std::size_t> HexGrid::locate(Point p) const {
  const auto [q, r] = axial_of(p);
  return find(q, r);
}

std::array<Point, 6> HexGrid::corners(std::size_t cell) const {
  std::array<Point, 6> out{};
  const Point c = cells_[cell].center;
  for (int i = 0; i < 6; ++i) {
    const double angle = (60.0 * i - 30.0) * M_PI / 180.0;
    out[static_cast<std::size_t>(i)] = {c.x + resolution_m_ * std::cos(angle), c.y + resolution_m_ * std::sin(angle)};
  }
  return out;
}

HexGrid build_hex_grid(const Extent& extent, double resolution_m, const PopulationSource& population,
                       const std::vector<Zone>& zones) {
  if (!(resolution_m > 0.0)) throw ValidationError("hex resolution must be positive");
  if (!(extent.x_max > extent.x_min) || !(extent.y_max > extent.y_min))
    throw ValidationError("hex grid extent is empty");
  const Point origin{extent.x_min, extent.y_min};
  const double s = resolution_m;
  const double width = extent.x_max - extent.x_min;
  const double height = extent.y_max - extent.y_min;
  const int r_lo = static_cast<int>(std::floor(-s / (1.5 * s))) - 1;
  const int r_hi = static_cast<int>(std::ceil((height + s) / (1.5 * s))) + 1;
  std::vector<HexCell> cells;
  for (int r = r_lo; r <= r_hi; ++r) {
    const int q_lo = static_cast<int>(std::floor(-s / (kSqrt3 * s) - r / 2.0)) - 1;
    const int q_hi = static_cast<int>(std::ceil((width + s) / (kSqrt3 * s) - r / 2.0)) + 1;
    for (int q = q_lo; q <= q_hi; ++q) {
      const Point c{origin.x + s * kSqrt3 * (q + r / 2.0), origin.y + s * 1.5 * r};
      // Keep hexes whose shape reaches into the extent.
      const double dx = std::max({extent.x_min - c.x, 0.0, c.x - extent.x_max});
      const double dy = std::max({extent.y_min - c.y, 0.0, c.y - extent.y_max});
      if (dx > s * kSqrt3 / 2.0 || dy > s) continue;
      if (dx > 0.0 && dy > 0.0) {
        // Corner region: test the extent corner against the hexagon.
        const Point corner{c.x < extent.x_min ? extent.x_min : extent.x_max,
                           c.y < extent.y_min ? extent.y_min : extent.y_max};
        const double ax = std::abs(corner.x - c.x);
        const double ay = std::abs(corner.y - c.y);
        if (ax > s * kSqrt3 / 2.0 || ay > s || ax / kSqrt3 + ay > s) continue;
      }
      HexCell cell;
      cell.q = q;
      cell.r = r;
      cell.center = c;
      // Edge hexes centred outside the extent are zoned by the clamped centre.
      const Point probe{std::clamp(c.x, extent.x_min, extent.x_max), std::clamp(c.y, extent.y_min, extent.y_max)};
      for (const Zone& z : zones) {
        if (contains(z.polygon, probe)) {
          cell.zone_id = z.id;
          break;
        }
      }
      cells.push_back(cell);
    }
  }
  HexGrid grid(resolution_m, origin, std::move(cells));

  if (const auto* table = std::get_if<HexPopulationTable>(&population)) {
    for (const auto& row : *table) {
      auto idx = grid.find(row.q, row.r);
      if (!idx) {
        throw ValidationError("hex population row (" + std::to_string(row.q) + ", " + std::to_string(row.r) +
                              ") is outside the hex grid");
      }
      if (!(row.population >= 0.0)) throw ValidationError("hex population must be non-negative");
      grid.mutable_cells()[*idx].population = row.population;
    }
  } else if (const auto* raster = std::get_if<AsciiGrid>(&population)) {
    const auto& g = raster->geometry;
    for (int r = 0; r < g.n_rows; ++r) {
      for (int c = 0; c < g.n_cols; ++c) {
        const double v = raster->values[g.index(r, c)];
        if (raster->nodata_value && v == *raster->nodata_value) continue;
        if (v < 0) throw ValidationError("population raster holds a negative value");
        auto idx = grid.locate({g.center_x(c), g.center_y(r)});
        if (!idx) throw ValidationError("population raster cell centre lies outside the hex grid");
        grid.mutable_cells()[*idx].population += v;
      }
    }
  }
  return grid;
}

HexPopulationTable read_hex_population(std::istream& in, const std::string& source) {
  const CsvTable t = read_csv(in, source);
  const auto cq = t.column("q", source), cr = t.column("r", source), cp = t.column("population", source);
  HexPopulationTable rows;
  for (const auto& row : t.rows) {
    rows.push_back({static_cast<int>(parse_int(row[cq], source + " q")), static_cast<int>(parse_int(row[cr], source + " r")),
                    parse_double(row[cp], source + " population")});
  }
  return rows;
}

std::optional<std::size_t> nearest_node(const MultimodalNetwork& network, Mode mode, Point p,
                                        double max_distance_m) {
  std::optional<std::size_t> best;
  double best_d2 = max_distance_m == kUnreachable ? kUnreachable : max_distance_m * max_distance_m;
  for (std::size_t i = 0; i < network.node_count(); ++i) {
    if (!network.on_subgraph(mode, i)) continue;
    const double dx = network.nodes()[i].x - p.x;
    const double dy = network.nodes()[i].y - p.y;
    const double d2 = dx * dx + dy * dy;
    if (d2 < best_d2 || (d2 == best_d2 && !best)) {
      best_d2 = d2;
      best = i;
    }
  }
  return best;
}

std::vector<POI> load_pois(std::istream& in, const std::vector<std::string>& categories,
                           const MultimodalNetwork& network, const Extent& extent) {
  const std::string src = "pois.csv";
  const CsvTable t = read_csv(in, src);
  const auto ci = t.column("id", src), cc = t.column("category", src), cx = t.column("x", src), cy = t.column("y", src);
  std::vector<POI> pois;
  std::set<long long> ids;
  for (const auto& row : t.rows) {
    POI poi;
    poi.id = parse_int(row[ci], "poi id");
    const std::string where = "poi " + std::to_string(poi.id);
    if (!ids.insert(poi.id).second) throw ValidationError("duplicate " + where);
    auto it = std::find(categories.begin(), categories.end(), row[cc]);
    if (it == categories.end()) throw ValidationError(where + ": unknown category '" + row[cc] + "'");
    poi.category = static_cast<std::size_t>(it - categories.begin());
    poi.location = {parse_double(row[cx], where + " x"), parse_double(row[cy], where + " y")};
    if (poi.location.x < extent.x_min || poi.location.x > extent.x_max || poi.location.y < extent.y_min ||
        poi.location.y > extent.y_max) {
      throw ValidationError(where + ": location outside the study extent");
    }
    for (Mode m : kAllModes) poi.attached_node[mode_index(m)] = nearest_node(network, m, poi.location);
    pois.push_back(poi);
  }
  return pois;
}

void QoLParams::validate() const {
  if (!(neighbor_weight >= 0.0 && neighbor_weight <= 1.0))
    throw ValidationError("qol: neighbor_weight must lie in [0, 1]");
  if (category_weights.empty()) throw ValidationError("qol: no category weights");
  double sum = 0.0;
  for (double w : category_weights) {
    if (!(w >= 0.0)) throw ValidationError("qol: category weights must be non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("qol: category weights sum to " + format_double(sum) + ", expected 1");
  if (!p75_norm.empty()) {
    if (p75_norm.size() != category_weights.size())
      throw ValidationError("qol: p75 normalizer count does not match the category count");
    for (double v : p75_norm) {
      if (!(v > 0.0)) throw ValidationError("qol: p75 normalizers must be positive");
    }
  }
  for (double t : threshold_s) {
    if (!(t >= 0.0)) throw ValidationError("qol: thresholds must be non-negative");
  }
  if (!(snap_radius_m >= 0.0)) throw ValidationError("qol: snap radius must be non-negative");
}

namespace {

ShortestPaths bounded_search(const MultimodalNetwork& network, Mode m, const LinkTimes& times, std::size_t source,
                             const QoLParams& params) {
  SearchOptions options;
  options.max_time_s = params.threshold_s[mode_index(m)];
  options.lexicographic_ties = false;
  return shortest_paths(network, m, times, source, options);
}

void count_reached(const std::vector<double>& time_s, Mode m, const std::vector<POI>& pois, const QoLParams& params,
                   PoiCounts& counts) {
  for (const POI& poi : pois) {
    const auto node = poi.attached_node[mode_index(m)];
    if (node && time_s[*node] <= params.threshold_s[mode_index(m)]) ++counts[poi.category][mode_index(m)];
  }
}

PoiCounts counts_from_nodes(const std::array<std::optional<std::size_t>, kModeCount>& snapped,
                            const MultimodalNetwork& network, const LinkTimes& times,
                            const std::vector<POI>& pois, std::size_t category_count, const QoLParams& params) {
  PoiCounts counts(category_count, std::array<int, kModeCount>{});
  for (Mode m : kAllModes) {
    const auto source = snapped[mode_index(m)];
    if (!source) continue;
    count_reached(bounded_search(network, m, times, *source, params).time_s, m, pois, params, counts);
  }
  return counts;
}

std::array<std::optional<std::size_t>, kModeCount> snap(const MultimodalNetwork& network, Point p,
                                                        const QoLParams& params) {
  std::array<std::optional<std::size_t>, kModeCount> out;
  for (Mode m : kAllModes) out[mode_index(m)] = nearest_node(network, m, p, params.snap_radius_m);
  return out;
}

}  // namespace

PoiCounts accessible_poi_counts(const HexCell& hex, const MultimodalNetwork& network, const LinkTimes& times,
                                const std::vector<POI>& pois, std::size_t category_count, const QoLParams& params) {
  return counts_from_nodes(snap(network, hex.center, params), network, times, pois, category_count, params);
}

PoiCounts accessible_poi_counts(const HexCell& hex, const MultimodalNetwork& network, const FloodField* flood,
                                const DepthDisruptionCurve& curves, const std::vector<POI>& pois,
                                std::size_t category_count, const QoLParams& params) {
  const LinkTimes times = flood ? disrupted_times(network, curves, link_depths(network, *flood))
                                : free_flow_times(network);
  return accessible_poi_counts(hex, network, times, pois, category_count, params);
}

std::vector<double> combine_modes(const PoiCounts& counts) {
  std::vector<double> out;
  out.reserve(counts.size());
  for (const auto& per_mode : counts) out.push_back(*std::max_element(per_mode.begin(), per_mode.end()));
  return out;
}

double qol_index(double population, const std::vector<double>& own_counts,
                 const std::vector<double>& neighbor_count_sums, const QoLParams& params) {
  const std::size_t n = params.category_weights.size();
  if (own_counts.size() != n || neighbor_count_sums.size() != n || params.p75_norm.size() != n)
    throw ValidationError("qol: category count mismatch");
  const double divisor = std::max(population, 1.0);
  bool saturated = true;
  double index = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    const double raw = (own_counts[c] + params.neighbor_weight * neighbor_count_sums[c]) / divisor;
    const double norm = std::min(raw / params.p75_norm[c], 1.0);
    saturated = saturated && norm == 1.0;
    index += params.category_weights[c] * norm;
  }
  if (saturated) return 1.0;
  return std::clamp(index, 0.0, 1.0);
}

std::map<int, double> aggregate_qol_by_zone(const std::vector<double>& hex_index, const HexGrid& grid,
                                            const std::vector<int>& zone_ids) {
  if (hex_index.size() != grid.size()) throw ValidationError("qol: index vector does not match hex grid");
  std::map<int, std::pair<double, double>> sums;
  for (int z : zone_ids) sums[z] = {0.0, 0.0};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const HexCell& cell = grid.cells()[i];
    if (!(cell.population > 0.0)) continue;
    auto it = sums.find(cell.zone_id);
    if (cell.zone_id == kNoZone || it == sums.end()) {
      throw ValidationError("hex (" + std::to_string(cell.q) + ", " + std::to_string(cell.r) +
                            ") has population but no zone");
    }
    it->second.first += cell.population * hex_index[i];
    it->second.second += cell.population;
  }
  std::map<int, double> out;
  for (const auto& [zone, s] : sums) out[zone] = s.second > 0.0 ? std::clamp(s.first / s.second, 0.0, 1.0) : 0.0;
  // The weighted mean can round just outside its members' range.
  for (auto& [zone, q] : out) {
    double lo = 1.0, hi = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const HexCell& cell = grid.cells()[i];
      if (cell.zone_id != zone || !(cell.population > 0.0)) continue;
      lo = std::min(lo, hex_index[i]);
      hi = std::max(hi, hex_index[i]);
      any = true;
    }
    if (any) q = std::clamp(q, lo, hi);
  }
  return out;
}

std::vector<double> p75_normalizers(const HexGrid& grid, const std::vector<PoiCounts>& counts,
                                    double neighbor_weight) {
  if (counts.empty()) return {};
  const std::size_t n_cat = counts.front().size();
  std::vector<std::vector<double>> combined(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) combined[i] = combine_modes(counts[i]);
  bool any_populated = false;
  for (const auto& cell : grid.cells()) any_populated = any_populated || cell.population > 0.0;
  std::vector<double> out(n_cat, 1.0);
  for (std::size_t c = 0; c < n_cat; ++c) {
    std::vector<double> raw;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const HexCell& cell = grid.cells()[i];
      if (any_populated && !(cell.population > 0.0)) continue;
      double nb = 0.0;
      for (std::size_t j : grid.neighbors(i)) nb += combined[j][c];
      raw.push_back((combined[i][c] + neighbor_weight * nb) / std::max(cell.population, 1.0));
    }
    if (raw.empty()) continue;
    std::sort(raw.begin(), raw.end());
    const double pos = 0.75 * static_cast<double>(raw.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, raw.size() - 1);
    double p75 = raw[lo] + (raw[hi] - raw[lo]) * (pos - static_cast<double>(lo));
    if (!(p75 > 0.0)) p75 = raw.back();
    out[c] = p75 > 0.0 ? p75 : 1.0;
  }
  return out;
}

AccessibilityModel::AccessibilityModel(const MultimodalNetwork& network, HexGrid grid, std::vector<POI> pois,
                                       std::size_t category_count, QoLParams params, std::vector<int> zone_ids)
    : network_(&network),
      grid_(std::move(grid)),
      pois_(std::move(pois)),
      category_count_(category_count),
      params_(std::move(params)),
      zone_ids_(std::move(zone_ids)) {
  if (params_.category_weights.size() != category_count_)
    throw ValidationError("qol: category weight count does not match the category list");
  params_.validate();
  free_ = free_flow_times(network);
  snapped_.resize(grid_.size());
  reach_.resize(grid_.size());
  std::vector<PoiCounts> counts(grid_.size());
  parallel_for(grid_.size(), [&](std::size_t i) {
    snapped_[i] = snap(*network_, grid_.cells()[i].center, params_);
    counts[i].assign(category_count_, std::array<int, kModeCount>{});
    for (Mode m : kAllModes) {
      if (!snapped_[i][mode_index(m)]) continue;
      reach_[i][mode_index(m)] = bounded_search(*network_, m, free_, *snapped_[i][mode_index(m)], params_).time_s;
      count_reached(reach_[i][mode_index(m)], m, pois_, params_, counts[i]);
    }
  });
  if (params_.p75_norm.empty()) params_.p75_norm = p75_normalizers(grid_, counts, params_.neighbor_weight);
  baseline_ = finish(std::move(counts));
}

std::vector<PoiCounts> AccessibilityModel::counts_for(const LinkTimes& times) const {
  // Links slowed or closed for each mode. Times never fall below free flow,
  // so a search whose no-rain reach touches none of them is unchanged.
  std::array<std::vector<std::size_t>, kModeCount> changed;
  for (Mode m : kAllModes) {
    for (std::size_t l = 0; l < network_->links().size(); ++l) {
      if (times[m][l] != free_[m][l]) changed[mode_index(m)].push_back(l);
    }
  }
  std::vector<PoiCounts> counts(grid_.size());
  parallel_for(grid_.size(), [&](std::size_t i) {
    counts[i].assign(category_count_, std::array<int, kModeCount>{});
    for (Mode m : kAllModes) {
      const auto source = snapped_[i][mode_index(m)];
      if (!source) continue;
      const auto& reach = reach_[i][mode_index(m)];
      const bool affected = std::any_of(changed[mode_index(m)].begin(), changed[mode_index(m)].end(), [&](std::size_t l) {
        const Link& link = network_->links()[l];
        return reach[link.from] != kUnreachable || reach[link.to] != kUnreachable;
      });
      if (affected) {
        count_reached(bounded_search(*network_, m, times, *source, params_).time_s, m, pois_, params_, counts[i]);
      } else {
        for (std::size_t c = 0; c < category_count_; ++c) counts[i][c][mode_index(m)] = baseline_.counts[i][c][mode_index(m)];
      }
    }
  });
  return counts;
}

AccessibilityModel::Result AccessibilityModel::finish(std::vector<PoiCounts> counts) const {
  Result out;
  std::vector<std::vector<double>> combined(grid_.size());
  for (std::size_t i = 0; i < grid_.size(); ++i) combined[i] = combine_modes(counts[i]);
  out.hex_index.resize(grid_.size());
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    std::vector<double> nb(category_count_, 0.0);
    for (std::size_t j : grid_.neighbors(i)) {
      for (std::size_t c = 0; c < category_count_; ++c) nb[c] += combined[j][c];
    }
    out.hex_index[i] = qol_index(grid_.cells()[i].population, combined[i], nb, params_);
  }
  out.zone_qol = aggregate_qol_by_zone(out.hex_index, grid_, zone_ids_);
  out.counts = std::move(counts);
  return out;
}

AccessibilityModel::Result AccessibilityModel::evaluate(const LinkTimes& times, bool dry) const {
  if (dry) return baseline_;
  return finish(counts_for(times));
}

}  // namespace floodiam
