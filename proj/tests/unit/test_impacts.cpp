#include "floodiam/impacts.hpp"

#include "helpers.hpp"

#include <doctest.h>

using namespace floodiam;
using namespace testing;

namespace {

CostModel simple_costs() {
  CostModel m;
  m.base_cost_per_m = {900, 700, 500, 200};
  m.lane_factor = 0.5;
  for (auto& d : m.damage) d.knots = {{0, 0}, {500, 0.4}, {1000, 1.0}};
  m.vot_per_hour = {120, 60, 30};
  m.cancellation_factor = 0.8;
  return m;
}

Link local_link(long long id, int zone, double length = 100.0) {
  Link l = make_link(id, 0, 1, length, kAll, {50, 15, 5}, {{0, 0}, {length, 0}}, zone);
  l.road_class = RoadClass::local;
  return l;
}

}  // namespace

TEST_CASE("construction cost examples") {
  auto costs = simple_costs();
  Link l = local_link(1, 1);
  CHECK(link_construction_cost(l, costs) == doctest::Approx(50000));
  costs.lighting_cost_per_m = 20;
  l.has_lighting = true;
  CHECK(link_construction_cost(l, costs) == doctest::Approx(52000));
  costs.signals_cost_per_link = 1500;
  l.has_signals = true;
  l.lanes = 3;
  CHECK(link_construction_cost(l, costs) == doctest::Approx(100 * 500 * (1 + 0.5 * 2) + 2000 + 1500));
  l.lanes = 0;
  CHECK_THROWS_AS(link_construction_cost(l, costs), ValidationError);
}

TEST_CASE("damage curve interpolation and clamping") {
  const DamageCurve curve{{{0, 0}, {500, 0.4}, {1000, 1.0}}};
  CHECK(damage_fraction(curve, 0) == 0.0);
  CHECK(damage_fraction(curve, 750) == doctest::Approx(0.7));
  CHECK(damage_fraction(curve, 250) == doctest::Approx(0.2));
  CHECK(damage_fraction(curve, 2000) == 1.0);
  CHECK_THROWS_AS(DamageCurve({{{0, 0.1}, {10, 0.2}}}).validate("c"), ValidationError);
  CHECK_THROWS_AS(DamageCurve({{{0, 0}, {10, 0.5}, {20, 0.3}}}).validate("c"), ValidationError);
  CHECK_THROWS_AS(DamageCurve({{{0, 0}, {10, 1.5}}}).validate("c"), ValidationError);
}

TEST_CASE("direct damage by zone") {
  const auto costs = simple_costs();
  std::vector<Node> nodes = {{1, 0, 0}, {2, 100, 0}};
  std::vector<Link> links = {local_link(1, 1), local_link(2, 2, 60), local_link(3, 3, 250)};
  links[2].road_class = RoadClass::arterial;
  links[2].lanes = 2;
  const MultimodalNetwork net(nodes, links);
  const std::vector<int> zones = {1, 2, 3};

  const auto dry = direct_damage_by_zone(net, std::vector<double>{0, 0, 0}, costs, zones);
  for (int z : zones) CHECK(dry.at(z) == 0.0);

  const auto one = direct_damage_by_zone(net, std::vector<double>{500, 0, 0}, costs, zones);
  CHECK(one.at(1) == doctest::Approx(20000));
  CHECK(one.at(2) == 0.0);
  CHECK(one.at(3) == 0.0);

  // Hand-summed: 60 m local at 250 mm (0.2), 250 m two-lane arterial at 750 mm (0.7).
  const auto mixed = direct_damage_by_zone(net, std::vector<double>{0, 250, 750}, costs, zones);
  CHECK(mixed.at(2) == doctest::Approx(60 * 500 * 0.2));
  CHECK(mixed.at(3) == doctest::Approx(250 * 700 * 1.5 * 0.7));

  links[0].zone_id = kNoZone;
  const MultimodalNetwork orphan(nodes, links);
  CHECK_THROWS_AS(direct_damage_by_zone(orphan, std::vector<double>{0, 0, 0}, costs, zones), ValidationError);
}

TEST_CASE("delay and cancellation costs by origin zone") {
  const auto costs = simple_costs();
  const std::vector<Trip> trips = {{1, 0, 1, Mode::drive, 1, 2},
                                   {2, 0, 1, Mode::drive, 2, 1},
                                   {3, 0, 1, Mode::cycle, 3, 1},
                                   {4, 0, 1, Mode::walk, 1, 3}};
  auto completed = [](long long id, double t, double base) {
    RouteResult r;
    r.trip_id = id;
    r.status = RouteStatus::completed;
    r.travel_time_s = t;
    r.baseline_time_s = base;
    return r;
  };
  auto cancelled = [](long long id, double base) {
    RouteResult r;
    r.trip_id = id;
    r.baseline_time_s = base;
    return r;
  };
  const std::vector<int> zones = {1, 2, 3};

  const std::vector<RouteResult> none = {completed(1, 300, 300), completed(2, 50, 50), completed(3, 80, 80),
                                         completed(4, 90, 90)};
  for (const auto& [z, v] : delay_cost_by_zone(none, trips, costs, zones)) CHECK(v == 0.0);
  for (const auto& [z, v] : cancellation_cost_by_zone(none, trips, costs, zones)) CHECK(v == 0.0);

  const std::vector<RouteResult> one = {completed(1, 900, 300), completed(2, 50, 50), completed(3, 80, 80),
                                        completed(4, 90, 90)};
  CHECK(delay_cost_by_zone(one, trips, costs, zones).at(1) == doctest::Approx(20.0));

  const std::vector<RouteResult> cx = {cancelled(1, 1800), cancelled(2, 900), completed(3, 80, 80),
                                       completed(4, 90, 90)};
  const auto c = cancellation_cost_by_zone(cx, trips, costs, zones);
  CHECK(c.at(1) == doctest::Approx(48.0));
  CHECK(c.at(2) == doctest::Approx(0.8 * 120 * 0.25));
  CHECK(c.at(3) == 0.0);

  // Mixed batch against a per-trip summation.
  const std::vector<RouteResult> mixed = {completed(1, 400, 300), cancelled(2, 700), completed(3, 200, 80),
                                          cancelled(4, 1000)};
  std::map<int, double> d_oracle{{1, 0}, {2, 0}, {3, 0}}, c_oracle{{1, 0}, {2, 0}, {3, 0}};
  for (std::size_t k = 0; k < trips.size(); ++k) {
    const double vot = costs.vot_per_hour[mode_index(trips[k].mode)];
    if (mixed[k].status == RouteStatus::completed)
      d_oracle[trips[k].origin_zone] += (mixed[k].travel_time_s - mixed[k].baseline_time_s) / 3600 * vot;
    else
      c_oracle[trips[k].origin_zone] += 0.8 * vot * mixed[k].baseline_time_s / 3600;
  }
  const auto d = delay_cost_by_zone(mixed, trips, costs, zones);
  const auto cc = cancellation_cost_by_zone(mixed, trips, costs, zones);
  for (int z : zones) {
    CHECK(d.at(z) == doctest::Approx(d_oracle[z]));
    CHECK(cc.at(z) == doctest::Approx(c_oracle[z]));
  }

  std::vector<Node> nodes = {{1, 0, 0}, {2, 100, 0}};
  const MultimodalNetwork net(nodes, {local_link(1, 1)});
  const auto s = summarize_impacts(net, std::vector<double>{0}, mixed, trips, costs, zones, {{1, 0.5}, {2, 0.25}, {3, 1}});
  int total = 0;
  for (const auto& z : s.zones) total += z.completed + z.cancelled;
  CHECK(total == 4);
  CHECK(s.at(1).delayed == 1);
  CHECK(s.at(3).delayed == 1);
  CHECK(s.at(2).cancelled == 1);
  CHECK(s.at(2).Q == 0.25);
  CHECK(s.at(1).D == doctest::Approx(d_oracle[1]));
}
