#pragma once

#include "floodiam/demand.hpp"
#include "floodiam/flood.hpp"
#include "floodiam/network.hpp"

#include <array>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace floodiam {

/// Speed under standing water for one mode: a polynomial in depth (mm)
/// giving km/h, and the depth from which the mode cannot pass.
struct ModeDisruption {
  std::vector<double> coefficients;  ///< c0 + c1*w + c2*w^2 + ...
  double cutoff_depth_mm = 0.0;

  double evaluate(double depth_mm) const;
};

struct DepthDisruptionCurve {
  std::array<ModeDisruption, kModeCount> modes;

  const ModeDisruption& operator[](Mode m) const { return modes[mode_index(m)]; }
  ModeDisruption& operator[](Mode m) { return modes[mode_index(m)]; }

  /// Drive: quadratic depth-disruption fit with a 300 mm cutoff. Cycle and
  /// walk: linear ramps reaching zero at 200 mm and 400 mm.
  static DepthDisruptionCurve defaults();
  /// Checks speed(0) > 0 and that speed does not increase on [0, cutoff]
  /// (sampled every millimetre).
  void validate() const;
};

/// km/h on a link with the given free speed and water depth, or nullopt when
/// impassable. Dry links (depth 0) run at free speed; otherwise the result is
/// min(free, max(0, poly(depth))), and depth >= cutoff or a zero speed is
/// impassable.
std::optional<double> disrupted_speed(const DepthDisruptionCurve& curve, Mode mode,
                                      double free_speed_kmh, double depth_mm);

/// Seconds to traverse `length_m` at `speed_kmh`.
inline double travel_time_s(double length_m, double speed_kmh) { return length_m / (speed_kmh / 3.6); }

/// Maximum depth over the link's geometry sample points.
double link_depth(const FloodField& flood, const Link& link);
std::vector<double> link_depths(const MultimodalNetwork& network, const FloodField& flood);

/// Per-mode traversal time of every link; +inf where the mode is not
/// allowed or the link is impassable.
struct LinkTimes {
  std::array<std::vector<double>, kModeCount> seconds;
  const std::vector<double>& operator[](Mode m) const { return seconds[mode_index(m)]; }
};

LinkTimes free_flow_times(const MultimodalNetwork& network);
LinkTimes disrupted_times(const MultimodalNetwork& network, const DepthDisruptionCurve& curve,
                          std::span<const double> link_depth_mm);

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();
inline constexpr std::size_t kNoLink = std::numeric_limits<std::size_t>::max();

/// Single-source shortest times on one mode subgraph.
struct ShortestPaths {
  std::vector<double> time_s;
  std::vector<std::size_t> pred_link;  ///< kNoLink at the source and unreached nodes
  std::vector<std::size_t> pred_node;

  /// Link ids from the source to `node` (empty if unreached or the source).
  std::vector<long long> path_ids(const MultimodalNetwork& network, std::size_t node) const;
};

struct SearchOptions {
  std::optional<std::size_t> target;  ///< stop once this node is settled
  double max_time_s = kUnreachable;   ///< do not settle nodes beyond this time
  /// Among equal-time paths keep the one whose link-id sequence is
  /// lexicographically smallest. Accessibility counts only need times.
  bool lexicographic_ties = true;
};

ShortestPaths shortest_paths(const MultimodalNetwork& network, Mode mode, const LinkTimes& times,
                             std::size_t source, const SearchOptions& options = {});

enum class RouteStatus { completed, cancelled };

struct RouteResult {
  long long trip_id = 0;
  RouteStatus status = RouteStatus::cancelled;
  double travel_time_s = 0.0;     ///< completed trips only
  std::vector<long long> path;    ///< link ids, completed trips only
  double baseline_time_s = 0.0;   ///< no-rain shortest time
};

/// Shortest-time route under `flood` (nullptr = no rain). Throws
/// ValidationError if an endpoint is off the trip's mode subgraph or the trip
/// has no route even without rain.
RouteResult route_trip(const MultimodalNetwork& network, const FloodField* flood,
                       const DepthDisruptionCurve& curves, const Trip& trip);

/// Order-preserving batch form; per-trip failures are collected into a single
/// ValidationError.
std::vector<RouteResult> route_all(const MultimodalNetwork& network, const FloodField* flood,
                                   const DepthDisruptionCurve& curves, const std::vector<Trip>& trips);

/// Routes a fixed trip set repeatedly. No-rain baselines are computed once at
/// construction and reused for every event.
class TripRouter {
 public:
  TripRouter(const MultimodalNetwork& network, DepthDisruptionCurve curves, std::vector<Trip> trips);

  const std::vector<Trip>& trips() const { return trips_; }
  const std::vector<RouteResult>& baseline() const { return baseline_; }
  const DepthDisruptionCurve& curves() const { return curves_; }

  /// Routes every trip given per-link depths (as from link_depths).
  std::vector<RouteResult> route(std::span<const double> link_depth_mm) const;
  std::vector<RouteResult> route(const FloodField& flood) const;

 private:
  const MultimodalNetwork* network_;
  DepthDisruptionCurve curves_;
  std::vector<Trip> trips_;
  LinkTimes free_;
  std::vector<RouteResult> baseline_;
  std::vector<std::vector<std::size_t>> baseline_links_;  ///< link indices of each baseline path
};

}  // namespace floodiam
