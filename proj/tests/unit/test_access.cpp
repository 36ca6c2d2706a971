#include "floodiam/access.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

using namespace floodiam;
using namespace testing;

namespace {

QoLParams one_category(double p75 = 1.0) {
  QoLParams p;
  p.category_weights = {1.0};
  p.p75_norm = {p75};
  return p;
}

MultimodalNetwork two_node_walk(double length, double speed) {
  std::vector<Node> nodes = {{1, 0.0, 0.0}, {2, length, 0.0}};
  std::vector<Link> links = {make_link(1, 0, 1, length, kWalk, {0, 0, speed}, {{0, 0}, {length, 0}})};
  return MultimodalNetwork(nodes, links);
}

}  // namespace

TEST_CASE("hex grid tiles the extent") {
  const Extent e{0, 0, 1000, 1000};
  const auto grid = build_hex_grid(e, 100.0, {});
  RngStream rng(5);
  for (int k = 0; k < 2000; ++k) {
    const Point p{1000 * rng.uniform(), 1000 * rng.uniform()};
    const auto idx = grid.locate(p);
    REQUIRE(idx.has_value());
    // Oracle: the hex containing p is the one with the nearest centre.
    std::size_t best = 0;
    double best_d = kUnreachable;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double d = std::hypot(grid.cells()[i].center.x - p.x, grid.cells()[i].center.y - p.y);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    CHECK(*idx == best);
    CHECK(best_d <= 100.0 + 1e-9);
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(grid.neighbors(i).size() <= 6);
    for (std::size_t j : grid.neighbors(i)) {
      const double d = std::hypot(grid.cells()[i].center.x - grid.cells()[j].center.x,
                                  grid.cells()[i].center.y - grid.cells()[j].center.y);
      CHECK(d == doctest::Approx(100.0 * std::sqrt(3.0)));
    }
  }
  CHECK_THROWS_AS(build_hex_grid({0, 0, 0, 10}, 100.0, {}), ValidationError);
}

TEST_CASE("hex population from a table and from a raster") {
  const Extent e{0, 0, 1000, 1000};
  const auto plain = build_hex_grid(e, 100.0, {});
  HexPopulationTable table = {{plain.cells()[3].q, plain.cells()[3].r, 42.5}, {plain.cells()[7].q, plain.cells()[7].r, 7.0}};
  const auto g = build_hex_grid(e, 100.0, table);
  CHECK(g.cells()[3].population == 42.5);
  CHECK(g.cells()[7].population == 7.0);

  AsciiGrid raster;
  raster.geometry = GridGeometry{20, 20, 50.0, 0.0, 0.0};
  RngStream rng(8);
  double total = 0.0;
  for (int i = 0; i < 400; ++i) {
    raster.values.push_back(std::floor(100 * rng.uniform()));
    total += raster.values.back();
  }
  const auto rg = build_hex_grid(e, 100.0, raster);
  double sum = 0.0;
  for (const auto& c : rg.cells()) sum += c.population;
  CHECK(sum == doctest::Approx(total).epsilon(1e-12));
}

TEST_CASE("walk reachability and the closed threshold") {
  const auto params = one_category();
  {
    const auto net = two_node_walk(400.0, 5.0);
    const auto times = free_flow_times(net);
    CHECK(times[Mode::walk][0] == doctest::Approx(400.0 / (5000.0 / 3600.0)));
    CHECK(times[Mode::walk][0] == doctest::Approx(288.0));
    POI poi{1, 0, {400, 0}, {}};
    poi.attached_node[mode_index(Mode::walk)] = 1;
    const auto counts = accessible_poi_counts(HexCell{0, 0, {0, 0}, 1, 1}, net, times, {poi}, 1, params);
    CHECK(counts[0][mode_index(Mode::walk)] == 1);
    CHECK(counts[0][mode_index(Mode::drive)] == 0);
  }
  {
    // 600 m at 1 m/s takes exactly 600 s.
    const auto net = two_node_walk(600.0, 3.6);
    const auto times = free_flow_times(net);
    CHECK(times[Mode::walk][0] == 600.0);
    POI poi{1, 0, {600, 0}, {}};
    poi.attached_node[mode_index(Mode::walk)] = 1;
    CHECK(accessible_poi_counts(HexCell{0, 0, {0, 0}, 1, 1}, net, times, {poi}, 1, params)[0][2] == 1);
    auto slower = times;
    slower.seconds[2][0] = std::nextafter(600.0, 1e9);
    CHECK(accessible_poi_counts(HexCell{0, 0, {0, 0}, 1, 1}, net, slower, {poi}, 1, params)[0][2] == 0);
    auto closed = times;
    closed.seconds[2][0] = kUnreachable;
    CHECK(accessible_poi_counts(HexCell{0, 0, {0, 0}, 1, 1}, net, closed, {poi}, 1, params)[0][2] == 0);
    // Hex centre beyond the snap radius gets nothing.
    CHECK(accessible_poi_counts(HexCell{0, 0, {0, 5000}, 1, 1}, net, times, {poi}, 1, params)[0][2] == 0);
  }
}

TEST_CASE("qol index examples and properties") {
  QoLParams p;
  p.category_weights = {0.5, 0.5};
  p.p75_norm = {2.0, 5.0};
  p.neighbor_weight = 0.5;
  CHECK(qol_index(1, {10, 10}, {0, 0}, p) == 1.0);
  CHECK(qol_index(1, {0, 0}, {0, 0}, p) == 0.0);
  // Normalized values (1, 0.4).
  CHECK(qol_index(1, {2, 2}, {0, 0}, p) == doctest::Approx(0.7));
  // Neighbours count at half weight and population divides.
  CHECK(qol_index(2, {0, 4}, {0, 4}, p) == doctest::Approx(0.5 * (6.0 / 2.0) / 5.0));
  // Zero population uses divisor 1.
  CHECK(qol_index(0, {1, 0}, {0, 0}, p) == doctest::Approx(0.25));
  // Clipping: raising a saturated category changes nothing.
  CHECK(qol_index(1, {5, 2}, {0, 0}, p) == qol_index(1, {50, 2}, {0, 0}, p));
  RngStream rng(4);
  for (int k = 0; k < 500; ++k) {
    const double pop = 10 * rng.uniform();
    std::vector<double> own = {std::floor(10 * rng.uniform()), std::floor(10 * rng.uniform())};
    std::vector<double> nb = {std::floor(30 * rng.uniform()), std::floor(30 * rng.uniform())};
    const double v = qol_index(pop, own, nb, p);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    own[k % 2] += 1;
    CHECK(qol_index(pop, own, nb, p) >= v);
  }
}

TEST_CASE("zone aggregation") {
  std::vector<HexCell> cells = {{0, 0, {0, 0}, 100, 1}, {1, 0, {1, 0}, 300, 1}, {2, 0, {2, 0}, 50, 2},
                                {3, 0, {3, 0}, 0, kNoZone}};
  const HexGrid grid(1.0, {0, 0}, cells);
  const auto q = aggregate_qol_by_zone({1.0, 0.5, 0.6, 0.9}, grid, {1, 2, 3});
  CHECK(q.at(1) == doctest::Approx(0.625));
  CHECK(q.at(2) == doctest::Approx(0.6));
  CHECK(q.at(3) == 0.0);
  cells[3].population = 1;
  const HexGrid bad(1.0, {0, 0}, cells);
  CHECK_THROWS_AS(aggregate_qol_by_zone({1.0, 0.5, 0.6, 0.9}, bad, {1, 2, 3}), ValidationError);
}

TEST_CASE("accessibility model under flooding matches direct counts") {
  // 8x8 street grid, 100 m spacing, all modes.
  const int n = 8;
  std::vector<Node> nodes;
  std::vector<Link> links;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) nodes.push_back({r * n + c, 100.0 * c, 100.0 * r});
  }
  long long id = 1;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const auto i = static_cast<std::size_t>(r * n + c);
      auto add = [&](std::size_t j) {
        links.push_back(make_link(id++, i, j, 100.0, kAll, {30, 12, 4.5},
                                  {{nodes[i].x, nodes[i].y}, {nodes[j].x, nodes[j].y}}));
      };
      if (c + 1 < n) add(i + 1);
      if (r + 1 < n) add(i + static_cast<std::size_t>(n));
    }
  }
  const MultimodalNetwork net(nodes, links);
  const Extent e{0, 0, 700, 700};
  const std::vector<Zone> zones = {
      {1, "west", 0, {{0, 0}, {350, 0}, {350, 700}, {0, 700}}},
      {2, "east", 0, {{350, 0}, {700, 0}, {700, 700}, {350, 700}}}};
  HexPopulationTable table;
  auto grid = build_hex_grid(e, 120.0, {}, zones);
  for (const auto& c : grid.cells()) table.push_back({c.q, c.r, 10.0});
  grid = build_hex_grid(e, 120.0, table, zones);

  RngStream rng(12);
  std::vector<POI> pois;
  std::ostringstream csv;
  csv << "id,category,x,y\n";
  for (int k = 0; k < 30; ++k) csv << k << "," << (k % 2 ? "shop" : "park") << "," << 700 * rng.uniform() << ","
                                   << 700 * rng.uniform() << "\n";
  std::istringstream in(csv.str());
  pois = load_pois(in, {"shop", "park"}, net, e);
  QoLParams params;
  params.category_weights = {0.6, 0.4};
  params.threshold_s = {120.0, 150.0, 300.0};
  const AccessibilityModel model(net, grid, pois, 2, params, {1, 2});
  REQUIRE(model.params().p75_norm.size() == 2);
  for (double v : model.params().p75_norm) CHECK(v > 0.0);

  const auto curves = DepthDisruptionCurve::defaults();
  const auto base = model.baseline();
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> depth(links.size(), 0.0);
    for (double& d : depth) {
      if (rng.uniform() < 0.2) d = 350.0 * rng.uniform();
    }
    const auto times = disrupted_times(net, curves, depth);
    const auto flooded = model.evaluate(times, false);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto direct = accessible_poi_counts(grid.cells()[i], net, times, model.pois(), 2, model.params());
      CHECK(flooded.counts[i] == direct);
      for (std::size_t c = 0; c < 2; ++c) {
        for (std::size_t m = 0; m < kModeCount; ++m) CHECK(flooded.counts[i][c][m] <= base.counts[i][c][m]);
      }
    }
    for (const auto& [zone, q] : flooded.zone_qol) CHECK(q <= base.zone_qol.at(zone) + 1e-12);
  }
  // Fully flooded: every zone drops to its floor.
  const auto all_wet = disrupted_times(net, curves, std::vector<double>(links.size(), 1000.0));
  for (const auto& [zone, q] : model.evaluate(all_wet, false).zone_qol) CHECK(q <= base.zone_qol.at(zone));
}
