#include "floodiam/scenario.hpp"

#include "floodiam/common.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace floodiam {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Field access that reports the dotted path of whatever is wrong.
class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {}

  bool has(const char* key) const { return node_.is_object() && node_.contains(key) && !node_.at(key).is_null(); }
  Reader at(const char* key) const {
    if (!has(key)) throw ValidationError("scenario: missing field '" + child(key) + "'");
    return Reader(node_.at(key), child(key));
  }
  Reader at(std::size_t i) const { return Reader(node_.at(i), path_ + "[" + std::to_string(i) + "]"); }
  std::size_t size() const {
    if (!node_.is_array()) throw ValidationError("scenario: field '" + path_ + "' must be a list");
    return node_.size();
  }

  template <class T>
  T as() const {
    try {
      return node_.get<T>();
    } catch (const json::exception&) {
      throw ValidationError("scenario: field '" + path_ + "' has the wrong type");
    }
  }
  template <class T>
  T get(const char* key) const { return at(key).as<T>(); }
  template <class T>
  T get(const char* key, T fallback) const { return has(key) ? at(key).as<T>() : fallback; }

  const json& raw() const { return node_; }
  const std::string& path() const { return path_; }
  std::string child(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const json& node_;
  std::string path_;
};

DistributionSpec parse_distribution(const Reader& r) {
  const auto family = r.get<std::string>("family");
  if (family == "gumbel") return Gumbel{r.get<double>("location_mm"), r.get<double>("scale_mm")};
  if (family == "lognormal") return LogNormal{r.get<double>("mu"), r.get<double>("sigma")};
  if (family == "empirical") return Empirical{r.get<std::vector<double>>("samples_mm")};
  throw ValidationError("scenario: field '" + r.child("family") + "' must be gumbel, lognormal or empirical");
}

ModeDisruption parse_mode_curve(const Reader& r) {
  return ModeDisruption{r.get<std::vector<double>>("coefficients"), r.get<double>("cutoff_mm")};
}

std::string read_bytes(const fs::path& p, const std::string& field) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ValidationError("scenario: field '" + field + "' names missing file '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <std::size_t N, class Names>
std::array<double, N> parse_named(const Reader& r, const Names& names) {
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = r.get<double>(names[i]);
  return out;
}

constexpr std::array<const char*, kModeCount> kModeNames = {"drive", "cycle", "walk"};
constexpr std::array<const char*, kRoadClassCount> kRoadClassNames = {"motorway", "arterial", "local", "path"};

}  // namespace

Scenario parse_scenario(const json& document, const fs::path& base_dir) {
  Scenario s;
  s.document = document;
  s.base_dir = base_dir;
  const Reader root(document, "");
  Fnv1a hash;
  hash.update(document.dump());

  // Referenced files are hashed in the order they are read.
  auto file = [&](const Reader& parent, const char* key) {
    const fs::path p = base_dir / parent.get<std::string>(key);
    const std::string bytes = read_bytes(p, parent.child(key));
    hash.update(bytes);
    return std::make_pair(p, bytes);
  };

  s.name = root.get<std::string>("name");
  const Reader horizon = root.at("horizon");
  s.start_year = horizon.get<int>("start_year");
  s.end_year = horizon.get<int>("end_year");
  if (s.start_year >= s.end_year) throw ValidationError("scenario: horizon.start_year must precede horizon.end_year");

  const Reader seeds = root.at("seeds");
  s.simulation_seed = seeds.get<std::uint64_t>("simulation", 0);
  s.demand_seed = seeds.get<std::uint64_t>("demand", 1);
  s.decile_seed = seeds.get<std::uint64_t>("deciles", 2);

  {
    const Reader periods = root.at("rainfall");
    std::vector<RainfallPeriod> list;
    for (std::size_t i = 0; i < periods.size(); ++i) {
      const Reader p = periods.at(i);
      list.push_back({p.get<int>("year_start"), p.get<int>("year_end"), parse_distribution(p.at("distribution"))});
    }
    try {
      s.rainfall = build_rainfall_model(std::move(list), s.start_year, s.end_year);
    } catch (const ValidationError& e) {
      throw ValidationError(std::string("scenario: rainfall: ") + e.what());
    }
  }

  {
    const Reader t = root.at("terrain");
    auto [elev_path, elev_bytes] = file(t, "elevation");
    auto [zone_path, zone_bytes] = file(t, "zones");
    std::istringstream elev_in(elev_bytes), zone_in(zone_bytes);
    const AsciiGrid elev = read_ascii_grid(elev_in, elev_path.string());
    const AsciiGrid zone_grid = read_ascii_grid(zone_in, zone_path.string());
    s.terrain = make_terrain(elev, &zone_grid);
  }

  {
    const Reader n = root.at("network");
    auto [nodes_path, nodes_bytes] = file(n, "nodes");
    auto [links_path, links_bytes] = file(n, "links");
    std::istringstream nodes_in(nodes_bytes), links_in(links_bytes);
    s.network = std::make_shared<const MultimodalNetwork>(load_network(nodes_in, links_in));
  }

  {
    auto [zones_path, zones_bytes] = file(root, "zones");
    std::istringstream in(zones_bytes);
    s.zones = load_zones_geojson(in);
    validate_zones(s.zones);
  }

  std::set<int> zone_ids;
  for (const auto& z : s.zones) zone_ids.insert(z.id);
  for (const auto& link : s.network->links()) {
    if (!zone_ids.count(link.zone_id)) {
      throw ValidationError("scenario: network.links: link " + std::to_string(link.id) + " has zone_id " +
                            std::to_string(link.zone_id) + " absent from the zones file");
    }
  }
  for (int z : s.terrain.zone_of_cell) {
    if (z != kNoZone && !zone_ids.count(z)) {
      throw ValidationError("scenario: terrain.zones: raster zone id " + std::to_string(z) +
                            " absent from the zones file");
    }
  }

  const auto& g = s.terrain.geometry;
  const Extent extent{g.x_origin, g.y_origin, g.x_max(), g.y_max()};
  for (const auto& link : s.network->links()) {
    for (const auto& p : link.geometry) {
      if (!g.contains(p.x, p.y)) {
        throw ValidationError("scenario: network.links: link " + std::to_string(link.id) +
                              " geometry leaves the terrain extent");
      }
    }
  }

  {
    const Reader p = root.at("pois");
    s.categories = p.get<std::vector<std::string>>("categories");
    if (s.categories.empty()) throw ValidationError("scenario: pois.categories is empty");
    auto [pois_path, pois_bytes] = file(p, "file");
    std::istringstream in(pois_bytes);
    s.pois = load_pois(in, s.categories, *s.network, extent);
  }

  {
    const Reader h = root.at("hexes");
    const double resolution = h.get<double>("resolution_m");
    PopulationSource population;
    if (h.has("population_table")) {
      auto [path, bytes] = file(h, "population_table");
      std::istringstream in(bytes);
      population = read_hex_population(in, path.string());
    } else if (h.has("population_raster")) {
      auto [path, bytes] = file(h, "population_raster");
      std::istringstream in(bytes);
      population = read_ascii_grid(in, path.string());
    }
    s.hexes = build_hex_grid(extent, resolution, population, s.zones);
  }

  s.curves = DepthDisruptionCurve::defaults();
  if (root.has("disruption")) {
    const Reader d = root.at("disruption");
    for (Mode m : kAllModes) {
      if (d.has(kModeNames[mode_index(m)])) s.curves[m] = parse_mode_curve(d.at(kModeNames[mode_index(m)]));
    }
  }
  s.curves.validate();

  {
    const Reader c = root.at("costs");
    s.costs.base_cost_per_m = parse_named<kRoadClassCount>(c.at("base_cost_per_m"), kRoadClassNames);
    s.costs.lane_factor = c.get<double>("lane_factor", 0.0);
    s.costs.lighting_cost_per_m = c.get<double>("lighting_cost_per_m", 0.0);
    s.costs.signals_cost_per_link = c.get<double>("signals_cost_per_link", 0.0);
    const Reader damage = c.at("damage");
    for (std::size_t i = 0; i < kRoadClassCount; ++i) {
      const Reader curve = damage.at(kRoadClassNames[i]);
      for (std::size_t k = 0; k < curve.size(); ++k) {
        const auto knot = curve.at(k).as<std::array<double, 2>>();
        s.costs.damage[i].knots.emplace_back(knot[0], knot[1]);
      }
    }
    s.costs.vot_per_hour = parse_named<kModeCount>(c.at("vot_per_hour"), kModeNames);
    s.costs.cancellation_factor = c.get<double>("cancellation_factor", 0.8);
    s.costs.validate();
  }

  {
    const Reader q = root.at("qol");
    s.qol.neighbor_weight = q.get<double>("neighbor_weight", 0.5);
    s.qol.category_weights = q.get<std::vector<double>>("category_weights");
    s.qol.p75_norm = q.get<std::vector<double>>("p75_norm", {});
    if (q.has("thresholds_s")) s.qol.threshold_s = parse_named<kModeCount>(q.at("thresholds_s"), kModeNames);
    s.qol.snap_radius_m = q.get<double>("snap_radius_m", 250.0);
    if (s.qol.category_weights.size() != s.categories.size())
      throw ValidationError("scenario: qol.category_weights needs one weight per category");
    if (!s.qol.p75_norm.empty() && s.qol.p75_norm.size() != s.categories.size())
      throw ValidationError("scenario: qol.p75_norm needs one value per category");
    if (!s.qol.p75_norm.empty()) s.qol.validate();
  }

  {
    const Reader a = root.at("actions");
    for (std::size_t i = 0; i < a.size(); ++i) {
      const Reader e = a.at(i);
      AdaptationAction act;
      act.id = e.get<int>("id");
      act.name = e.get<std::string>("name");
      act.drainage_boost_mm = e.get<double>("drainage_boost_mm", 0.0);
      act.storage_boost_m3 = e.get<double>("storage_boost_m3", 0.0);
      act.capex = e.get<double>("capex", 0.0);
      act.annual_maintenance = e.get<double>("annual_maintenance", 0.0);
      if (e.has("lifetime_years")) act.lifetime_years = e.get<int>("lifetime_years");
      s.catalog.push_back(std::move(act));
    }
    try {
      validate_catalog(s.catalog);
    } catch (const ValidationError& e) {
      throw ValidationError(std::string("scenario: actions: ") + e.what());
    }
  }

  if (root.has("reward_weights")) {
    const Reader w = root.at("reward_weights");
    s.weights.beta_I = w.get<double>("beta_I", s.weights.beta_I);
    s.weights.beta_D = w.get<double>("beta_D", s.weights.beta_D);
    s.weights.beta_C = w.get<double>("beta_C", s.weights.beta_C);
    s.weights.beta_Q = w.get<double>("beta_Q", s.weights.beta_Q);
    s.weights.beta_A = w.get<double>("beta_A", s.weights.beta_A);
    s.weights.beta_M = w.get<double>("beta_M", s.weights.beta_M);
  }
  s.weights.validate();

  {
    const Reader d = root.at("demand");
    s.demand.trips_per_year = d.get<std::size_t>("trips_per_year");
    s.demand.mode_shares = parse_named<kModeCount>(d.at("mode_shares"), kModeNames);
    s.demand.od_weights = d.get<std::vector<std::vector<double>>>("od_weights", {});
    if (!s.demand.od_weights.empty()) {
      bool square = s.demand.od_weights.size() == s.zones.size();
      for (const auto& row : s.demand.od_weights) square = square && row.size() == s.zones.size();
      if (!square) throw ValidationError("scenario: demand.od_weights must be a zones x zones matrix");
    }
  }

  if (root.has("observation")) {
    s.bitmask_budget_bits = root.at("observation").get<std::size_t>("bitmask_budget_bits", 64);
  }

  s.hash = hash.hex();
  return s;
}

Scenario load_scenario(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("scenario: cannot open '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("scenario '" + path.string() + "': " + e.what());
  }
  return parse_scenario(doc, path.parent_path());
}

std::shared_ptr<const SimulationContext> Scenario::build_context() const {
  std::vector<Trip> trips = generate_od_demand(zones, *network, demand, demand_seed);
  return std::make_shared<const SimulationContext>(rainfall, terrain, network, zones, std::move(trips), curves, hexes,
                                                   pois, categories.size(), qol, costs, catalog, weights, decile_seed,
                                                   bitmask_budget_bits);
}

json describe_scenario(const Scenario& s) {
  json out;
  out["name"] = s.name;
  out["hash"] = s.hash;
  out["horizon"] = {{"start_year", s.start_year}, {"end_year", s.end_year}};
  out["zones"] = json::array();
  for (const auto& z : s.zones) {
    json ring = json::array();
    for (const auto& p : z.polygon) ring.push_back({p.x, p.y});
    out["zones"].push_back({{"id", z.id}, {"name", z.name}, {"population", z.population}, {"polygon", ring}});
  }
  out["actions"] = json::array();
  for (const auto& a : s.catalog) {
    json e = {{"id", a.id},
              {"name", a.name},
              {"drainage_boost_mm", a.drainage_boost_mm},
              {"storage_boost_m3", a.storage_boost_m3},
              {"capex", a.capex},
              {"annual_maintenance", a.annual_maintenance}};
    e["lifetime_years"] = a.lifetime_years ? json(*a.lifetime_years) : json(nullptr);
    out["actions"].push_back(std::move(e));
  }
  const auto& w = s.weights;
  out["reward_weights"] = {{"beta_I", w.beta_I}, {"beta_D", w.beta_D}, {"beta_C", w.beta_C},
                           {"beta_Q", w.beta_Q}, {"beta_A", w.beta_A}, {"beta_M", w.beta_M}};
  out["categories"] = s.categories;
  out["hexes"] = {{"resolution_m", s.hexes.resolution_m()}, {"cells", json::array()}};
  for (const auto& c : s.hexes.cells()) {
    out["hexes"]["cells"].push_back(
        {{"q", c.q}, {"r", c.r}, {"x", c.center.x}, {"y", c.center.y}, {"population", c.population}, {"zone_id", c.zone_id}});
  }
  return out;
}

json to_json(const Observation& o) {
  return {{"year_index", o.year_index}, {"intensity_decile", o.intensity_decile}, {"installed_mask", o.installed_mask}};
}

json to_json(const std::vector<ZoneAdaptationState>& states) {
  json out = json::array();
  for (const auto& z : states) {
    json installed = json::array();
    for (const auto& i : z.installed) installed.push_back({{"action_id", i.action_id}, {"install_year", i.install_year}});
    out.push_back({{"zone_id", z.zone_id},
                   {"installed", installed},
                   {"drainage_capacity_mm", z.drainage_capacity_mm},
                   {"storage_capacity_m3", z.storage_capacity_m3}});
  }
  return out;
}

json to_json(const StepResult& r) {
  json zones = json::array();
  for (const auto& z : r.info.zones) {
    zones.push_back({{"zone_id", z.zone_id}, {"I", z.I}, {"D", z.D}, {"C", z.C}, {"Q", z.Q}, {"A", z.A}, {"M", z.M},
                     {"completed", z.completed}, {"delayed", z.delayed}, {"cancelled", z.cancelled}});
  }
  const auto& f = r.info.flood;
  return {{"year", r.info.year},
          {"action", r.info.action.key()},
          {"duplicate_install", r.info.duplicate_install},
          {"intensity_mm", r.info.intensity_mm},
          {"reward", r.reward},
          {"done", r.done},
          {"observation", to_json(r.observation)},
          {"zones", zones},
          {"hex_qol", r.info.hex_qol},
          {"flood",
           {{"rain_m3", f.rain_m3},
            {"drained_m3", f.drained_m3},
            {"absorbed_m3", f.absorbed_m3},
            {"exited_m3", f.exited_m3},
            {"stored_m3", f.stored_m3},
            {"max_depth_mm", f.max_depth_mm}}}};
}

}  // namespace floodiam
