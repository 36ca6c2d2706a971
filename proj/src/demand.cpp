#include "floodiam/demand.hpp"

#include "floodiam/common.hpp"
#include "floodiam/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace floodiam {

std::vector<std::size_t> zone_nodes(const MultimodalNetwork& network, const Zone& zone, Mode mode) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < network.node_count(); ++i) {
    const Node& node = network.nodes()[i];
    if (network.on_subgraph(mode, i) && contains(zone.polygon, {node.x, node.y})) out.push_back(i);
  }
  return out;
}

namespace {

std::size_t draw_weighted(RngStream& rng, const std::vector<double>& cumulative) {
  const double u = rng.uniform() * cumulative.back();
  auto idx = static_cast<std::size_t>(
      std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
  if (idx < cumulative.size()) return idx;
  // u rounded up to the total: take the last entry with positive weight.
  idx = cumulative.size() - 1;
  while (idx > 0 && cumulative[idx] == cumulative[idx - 1]) --idx;
  return idx;
}

}  // namespace

std::vector<Trip> generate_od_demand(const std::vector<Zone>& zones, const MultimodalNetwork& network,
                                     const DemandSpec& spec, std::uint64_t seed) {
  if (zones.empty()) throw ValidationError("demand: no zones");
  double share_sum = 0.0;
  for (double s : spec.mode_shares) {
    if (!(s >= 0.0)) throw ValidationError("demand: mode shares must be non-negative");
    share_sum += s;
  }
  if (std::abs(share_sum - 1.0) > 1e-9)
    throw ValidationError("demand: mode shares sum to " + format_double(share_sum) + ", expected 1");

  const std::size_t nz = zones.size();
  std::vector<double> pair_cumulative;
  pair_cumulative.reserve(nz * nz);
  double acc = 0.0;
  if (spec.od_weights.empty()) {
    for (std::size_t k = 0; k < nz * nz; ++k) pair_cumulative.push_back(acc += 1.0);
  } else {
    if (spec.od_weights.size() != nz)
      throw ValidationError("demand: OD weight matrix must be " + std::to_string(nz) + "x" +
                            std::to_string(nz));
    for (const auto& row : spec.od_weights) {
      if (row.size() != nz) throw ValidationError("demand: OD weight matrix row has wrong length");
      for (double w : row) {
        if (!(w >= 0.0) || !std::isfinite(w))
          throw ValidationError("demand: OD weights must be finite and non-negative");
        pair_cumulative.push_back(acc += w);
      }
    }
    if (!(acc > 0.0)) throw ValidationError("demand: OD weight matrix is all zero");
  }
  std::vector<double> mode_cumulative;
  acc = 0.0;
  for (double s : spec.mode_shares) mode_cumulative.push_back(acc += s);

  std::array<std::vector<std::vector<std::size_t>>, kModeCount> nodes_by_zone;
  for (Mode m : kAllModes) {
    for (const Zone& z : zones) nodes_by_zone[mode_index(m)].push_back(zone_nodes(network, z, m));
  }

  RngStream rng = RngStream::keyed(seed, 0x0d0d);
  std::vector<Trip> trips;
  trips.reserve(spec.trips_per_year);
  constexpr int kAttempts = 64;
  for (std::size_t t = 0; t < spec.trips_per_year; ++t) {
    const Mode mode = static_cast<Mode>(draw_weighted(rng, mode_cumulative));
    const std::size_t pair = draw_weighted(rng, pair_cumulative);
    const std::size_t oz = pair / nz;
    const std::size_t dz = pair % nz;
    const auto& origins = nodes_by_zone[mode_index(mode)][oz];
    const auto& dests = nodes_by_zone[mode_index(mode)][dz];
    if (origins.empty() || dests.empty()) {
      throw ValidationError("demand: zone " + std::to_string(origins.empty() ? zones[oz].id : zones[dz].id) +
                            " has no " + to_string(mode) + " node");
    }
    const auto& comp = network.components(mode);
    bool placed = false;
    for (int attempt = 0; attempt < kAttempts && !placed; ++attempt) {
      const std::size_t o = origins[rng.below(origins.size())];
      std::vector<std::size_t> candidates;
      for (std::size_t d : dests) {
        if (d != o && comp[d] == comp[o]) candidates.push_back(d);
      }
      if (candidates.empty()) continue;
      const std::size_t d = candidates[rng.below(candidates.size())];
      trips.push_back(Trip{static_cast<long long>(t), o, d, mode, zones[oz].id, zones[dz].id});
      placed = true;
    }
    if (!placed) {
      throw ValidationError("demand: no connected " + std::string(to_string(mode)) +
                            " origin-destination pair between zones " + std::to_string(zones[oz].id) +
                            " and " + std::to_string(zones[dz].id));
    }
  }
  return trips;
}

}  // namespace floodiam
