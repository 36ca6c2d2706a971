#pragma once

#include "floodiam/env.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace floodiam {

/// A fully loaded and cross-validated scenario document together with the
/// inputs it references.
struct Scenario {
  std::string name;
  std::filesystem::path base_dir;   ///< referenced files resolve against this
  nlohmann::json document;          ///< the parsed document as read
  std::string hash;                 ///< FNV-1a over the canonical document and referenced file bytes

  int start_year = 0;
  int end_year = 0;
  std::uint64_t simulation_seed = 0;
  std::uint64_t demand_seed = 0;
  std::uint64_t decile_seed = 0;

  RainfallModel rainfall;
  TerrainGrid terrain;
  std::shared_ptr<const MultimodalNetwork> network;
  std::vector<Zone> zones;
  std::vector<std::string> categories;
  std::vector<POI> pois;
  HexGrid hexes;
  DepthDisruptionCurve curves;
  CostModel costs;
  QoLParams qol;
  ActionCatalog catalog;
  RewardWeights weights;
  DemandSpec demand;
  std::size_t bitmask_budget_bits = 64;

  /// Generates demand, precomputes baselines and returns the shared
  /// simulation context. Costly; build once and share.
  std::shared_ptr<const SimulationContext> build_context() const;
};

/// Reads and validates the scenario file. Errors name the offending field.
Scenario load_scenario(const std::filesystem::path& path);
/// Same, from an already parsed document whose relative paths resolve
/// against `base_dir`.
Scenario parse_scenario(const nlohmann::json& document, const std::filesystem::path& base_dir);

/// Static description served to clients: zones, catalog, weights, hexes.
nlohmann::json describe_scenario(const Scenario& scenario);

nlohmann::json to_json(const StepResult& result);
nlohmann::json to_json(const Observation& observation);
nlohmann::json to_json(const std::vector<ZoneAdaptationState>& states);

}  // namespace floodiam
