#pragma once

#include "floodiam/network.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace floodiam {

struct Trip {
  long long id = 0;
  std::size_t origin_node = 0;  ///< node index
  std::size_t dest_node = 0;    ///< node index
  Mode mode = Mode::drive;
  int origin_zone = 0;
  int dest_zone = 0;
};

struct DemandSpec {
  std::size_t trips_per_year = 0;
  std::array<double, kModeCount> mode_shares{};  ///< indexed by Mode
  /// Zone-pair weights in the order of the zones argument; empty means
  /// uniform over all pairs.
  std::vector<std::vector<double>> od_weights;
};

/// Nodes of `zone` on the `mode` subgraph, in index order.
std::vector<std::size_t> zone_nodes(const MultimodalNetwork& network, const Zone& zone, Mode mode);

/// Draws the yearly trip set. Each trip draws its mode from the shares, its
/// zone pair from the weight matrix, and origin and destination uniformly
/// among that zone's mode nodes. Destinations are restricted to nodes
/// connected to the origin on the mode subgraph so every trip has a
/// no-rain route.
std::vector<Trip> generate_od_demand(const std::vector<Zone>& zones, const MultimodalNetwork& network,
                                     const DemandSpec& spec, std::uint64_t seed);

}  // namespace floodiam
