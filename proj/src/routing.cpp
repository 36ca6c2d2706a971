#include "floodiam/routing.hpp"

#include "floodiam/common.hpp"
#include "floodiam/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <unordered_map>

namespace floodiam {

double ModeDisruption::evaluate(double depth_mm) const {
  double value = 0.0;
  for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) value = value * depth_mm + *it;
  return value;
}

DepthDisruptionCurve DepthDisruptionCurve::defaults() {
  DepthDisruptionCurve curve;
  curve[Mode::drive] = {{86.9448, -0.5529, 0.0009}, 300.0};
  curve[Mode::cycle] = {{25.0, -0.125}, 200.0};
  curve[Mode::walk] = {{6.0, -0.015}, 400.0};
  return curve;
}

void DepthDisruptionCurve::validate() const {
  for (Mode m : kAllModes) {
    const auto& md = (*this)[m];
    const std::string where = std::string("depth-disruption curve for ") + to_string(m);
    if (md.coefficients.empty()) throw ValidationError(where + ": no coefficients");
    if (!(md.cutoff_depth_mm > 0.0)) throw ValidationError(where + ": cutoff must be positive");
    if (!(md.evaluate(0.0) > 0.0)) throw ValidationError(where + ": speed at zero depth must be positive");
    double previous = md.evaluate(0.0);
    for (double w = 1.0; w <= md.cutoff_depth_mm; w += 1.0) {
      const double v = md.evaluate(w);
      if (v > previous + 1e-12) {
        throw ValidationError(where + ": speed increases with depth near " + format_double(w) + " mm");
      }
      previous = v;
    }
  }
}

std::optional<double> disrupted_speed(const DepthDisruptionCurve& curve, Mode mode,
                                      double free_speed_kmh, double depth_mm) {
  if (depth_mm <= 0.0) return free_speed_kmh;
  const auto& md = curve[mode];
  if (depth_mm >= md.cutoff_depth_mm) return std::nullopt;
  const double speed = std::min(free_speed_kmh, std::max(0.0, md.evaluate(depth_mm)));
  if (!(speed > 0.0)) return std::nullopt;
  return speed;
}

double link_depth(const FloodField& flood, const Link& link) {
  double depth = 0.0;
  for (const Point& p : link.geometry) {
    if (!flood.geometry.contains(p.x, p.y)) {
      throw ValidationError("link " + std::to_string(link.id) + ": geometry point outside flood grid");
    }
    depth = std::max(depth, flood.depth_at_point(p.x, p.y));
  }
  return depth;
}

std::vector<double> link_depths(const MultimodalNetwork& network, const FloodField& flood) {
  std::vector<double> out;
  out.reserve(network.links().size());
  for (const Link& link : network.links()) out.push_back(link_depth(flood, link));
  return out;
}

LinkTimes free_flow_times(const MultimodalNetwork& network) {
  std::vector<double> dry(network.links().size(), 0.0);
  return disrupted_times(network, DepthDisruptionCurve::defaults(), dry);
}

LinkTimes disrupted_times(const MultimodalNetwork& network, const DepthDisruptionCurve& curve,
                          std::span<const double> link_depth_mm) {
  const auto& links = network.links();
  if (link_depth_mm.size() != links.size())
    throw ValidationError("link depth vector does not match the network");
  LinkTimes times;
  for (Mode m : kAllModes) {
    auto& out = times.seconds[mode_index(m)];
    out.assign(links.size(), kUnreachable);
    for (std::size_t l = 0; l < links.size(); ++l) {
      if (!links[l].allows(m)) continue;
      const auto speed = disrupted_speed(curve, m, links[l].free_speed_kmh[mode_index(m)], link_depth_mm[l]);
      if (speed) out[l] = travel_time_s(links[l].length_m, *speed);
    }
  }
  return times;
}

std::vector<long long> ShortestPaths::path_ids(const MultimodalNetwork& network, std::size_t node) const {
  std::vector<long long> ids;
  while (pred_link[node] != kNoLink) {
    ids.push_back(network.links()[pred_link[node]].id);
    node = pred_node[node];
  }
  std::reverse(ids.begin(), ids.end());
  return ids;
}

ShortestPaths shortest_paths(const MultimodalNetwork& network, Mode mode, const LinkTimes& times,
                             std::size_t source, const SearchOptions& options) {
  const std::size_t n = network.node_count();
  ShortestPaths sp;
  sp.time_s.assign(n, kUnreachable);
  sp.pred_link.assign(n, kNoLink);
  sp.pred_node.assign(n, n);
  std::vector<char> settled(n, 0);
  const auto& cost = times[mode];

  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  sp.time_s[source] = 0.0;
  open.push({0.0, source});

  // True if the path to `u` extended by `link` sorts before v's current path.
  auto lex_smaller = [&](std::size_t u, std::size_t link, std::size_t v) {
    std::vector<long long> candidate = sp.path_ids(network, u);
    candidate.push_back(network.links()[link].id);
    std::vector<long long> current = sp.path_ids(network, sp.pred_node[v]);
    current.push_back(network.links()[sp.pred_link[v]].id);
    return std::lexicographical_compare(candidate.begin(), candidate.end(), current.begin(), current.end());
  };

  while (!open.empty()) {
    const auto [t, u] = open.top();
    open.pop();
    if (settled[u] || t > sp.time_s[u]) continue;
    if (t > options.max_time_s) break;
    settled[u] = 1;
    if (options.target && *options.target == u) break;
    for (const auto& arc : network.arcs(mode, u)) {
      const double w = cost[arc.link];
      if (w == kUnreachable || settled[arc.head]) continue;
      const double candidate = t + w;
      if (candidate < sp.time_s[arc.head]) {
        sp.time_s[arc.head] = candidate;
        sp.pred_link[arc.head] = arc.link;
        sp.pred_node[arc.head] = u;
        open.push({candidate, arc.head});
      } else if (options.lexicographic_ties && candidate == sp.time_s[arc.head] &&
                 lex_smaller(u, arc.link, arc.head)) {
        sp.pred_link[arc.head] = arc.link;
        sp.pred_node[arc.head] = u;
      }
    }
  }
  if (options.max_time_s != kUnreachable) {
    for (std::size_t v = 0; v < n; ++v) {
      if (!settled[v]) sp.time_s[v] = kUnreachable;
    }
  }
  return sp;
}

namespace {

void check_endpoints(const MultimodalNetwork& network, const Trip& trip) {
  for (std::size_t node : {trip.origin_node, trip.dest_node}) {
    if (node >= network.node_count() || !network.on_subgraph(trip.mode, node)) {
      throw ValidationError("trip " + std::to_string(trip.id) + ": node " +
                            (node < network.node_count() ? std::to_string(network.nodes()[node].id)
                                                         : std::string("?")) +
                            " is not on the " + to_string(trip.mode) + " subgraph");
    }
  }
  if (trip.origin_node == trip.dest_node)
    throw ValidationError("trip " + std::to_string(trip.id) + ": origin equals destination");
}

RouteResult solve(const MultimodalNetwork& network, const LinkTimes& times, const Trip& trip,
                  double baseline_time_s) {
  SearchOptions options;
  options.target = trip.dest_node;
  const ShortestPaths sp = shortest_paths(network, trip.mode, times, trip.origin_node, options);
  RouteResult result;
  result.trip_id = trip.id;
  result.baseline_time_s = baseline_time_s;
  const double t = sp.time_s[trip.dest_node];
  if (t == kUnreachable) {
    result.status = RouteStatus::cancelled;
  } else {
    result.status = RouteStatus::completed;
    result.travel_time_s = t;
    result.path = sp.path_ids(network, trip.dest_node);
  }
  return result;
}

RouteResult baseline_route(const MultimodalNetwork& network, const LinkTimes& free, const Trip& trip) {
  check_endpoints(network, trip);
  RouteResult base = solve(network, free, trip, 0.0);
  if (base.status == RouteStatus::cancelled) {
    throw ValidationError("trip " + std::to_string(trip.id) + " has no route even without rain");
  }
  base.baseline_time_s = base.travel_time_s;
  return base;
}

bool all_dry(std::span<const double> depths) {
  return std::all_of(depths.begin(), depths.end(), [](double d) { return d <= 0.0; });
}

}  // namespace

RouteResult route_trip(const MultimodalNetwork& network, const FloodField* flood,
                       const DepthDisruptionCurve& curves, const Trip& trip) {
  const LinkTimes free = free_flow_times(network);
  RouteResult base = baseline_route(network, free, trip);
  if (flood == nullptr) return base;
  const auto depths = link_depths(network, *flood);
  const LinkTimes times = disrupted_times(network, curves, depths);
  return solve(network, times, trip, base.baseline_time_s);
}

std::vector<RouteResult> route_all(const MultimodalNetwork& network, const FloodField* flood,
                                   const DepthDisruptionCurve& curves, const std::vector<Trip>& trips) {
  const LinkTimes free = free_flow_times(network);
  std::optional<LinkTimes> times;
  if (flood != nullptr) times = disrupted_times(network, curves, link_depths(network, *flood));
  std::vector<RouteResult> results(trips.size());
  std::vector<std::string> errors(trips.size());
  parallel_for(trips.size(), [&](std::size_t i) {
    try {
      RouteResult base = baseline_route(network, free, trips[i]);
      results[i] = times ? solve(network, *times, trips[i], base.baseline_time_s) : std::move(base);
    } catch (const ValidationError& e) {
      errors[i] = e.what();
    }
  });
  std::ostringstream msg;
  std::size_t failures = 0;
  for (const auto& e : errors) {
    if (e.empty()) continue;
    msg << (failures++ ? "; " : "") << e;
  }
  if (failures) throw ValidationError(std::to_string(failures) + " trip(s) failed: " + msg.str());
  return results;
}

TripRouter::TripRouter(const MultimodalNetwork& network, DepthDisruptionCurve curves, std::vector<Trip> trips)
    : network_(&network), curves_(std::move(curves)), trips_(std::move(trips)), free_(free_flow_times(network)) {
  curves_.validate();
  baseline_ = route_all(network, nullptr, curves_, trips_);
  std::unordered_map<long long, std::size_t> index;
  for (std::size_t l = 0; l < network.links().size(); ++l) index.emplace(network.links()[l].id, l);
  baseline_links_.resize(trips_.size());
  for (std::size_t i = 0; i < trips_.size(); ++i) {
    for (long long id : baseline_[i].path) baseline_links_[i].push_back(index.at(id));
  }
}

std::vector<RouteResult> TripRouter::route(std::span<const double> link_depth_mm) const {
  if (all_dry(link_depth_mm)) return baseline_;
  const LinkTimes times = disrupted_times(*network_, curves_, link_depth_mm);
  std::vector<RouteResult> results(trips_.size());
  parallel_for(trips_.size(), [&](std::size_t i) {
    // Times never drop below free flow, so a baseline path whose links all
    // kept their times is still the (tie-rule) shortest path.
    const auto& t = times[trips_[i].mode];
    const auto& f = free_[trips_[i].mode];
    const bool untouched = std::all_of(baseline_links_[i].begin(), baseline_links_[i].end(),
                                       [&](std::size_t l) { return t[l] == f[l]; });
    results[i] = untouched ? baseline_[i] : solve(*network_, times, trips_[i], baseline_[i].baseline_time_s);
  });
  return results;
}

std::vector<RouteResult> TripRouter::route(const FloodField& flood) const {
  const auto depths = link_depths(*network_, flood);
  return route(depths);
}

}  // namespace floodiam
