#!/usr/bin/env python3
"""Writes the bundled basin-3zone reference scenario.

Three vertical-strip zones over a 1.6 km square, each with a bowl-shaped
basin that ponds water after rain, a 14 x 14 street grid and four POI
categories. Output is deterministic.
"""

import argparse
import json
import math
import os
import random

CELL = 50.0
N = 32
SIZE = CELL * N
GRID = 14
ZONE_EDGES = [0.0, 533.0, 1066.0, SIZE]
BASINS = [  # x, y, depth m, sigma m
    (280.0, 1060.0, 1.5, 130.0),
    (800.0, 520.0, 1.4, 140.0),
    (1300.0, 1120.0, 1.3, 120.0),
]


def zone_of(x):
    for i in range(3):
        if x < ZONE_EDGES[i + 1] or i == 2:
            return i + 1
    return 3


def elevation(x, y, rng):
    # East-west ridge through the middle: water runs north or south to the
    # grid edge, so each bowl only collects its own strip of upslope ground.
    z = 12.0 - 0.002 * abs(y - SIZE / 2) + 0.0002 * x
    for bx, by, depth, sigma in BASINS:
        z -= depth * math.exp(-((x - bx) ** 2 + (y - by) ** 2) / (2 * sigma * sigma))
    return z + rng.uniform(-0.01, 0.01)


def write_asc(path, values, fmt):
    with open(path, "w") as f:
        f.write(f"ncols {N}\nnrows {N}\nxllcorner 0\nyllcorner 0\ncellsize {CELL:g}\nNODATA_value -9999\n")
        for row in values:
            f.write(" ".join(fmt(v) for v in row) + "\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out", nargs="?", default=os.path.join(os.path.dirname(__file__), "..", "scenarios", "basin-3zone"))
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    rng = random.Random(20230101)

    # Rasters: row 0 is the north row.
    elev, zones, pop = [], [], []
    for row in range(N):
        y = SIZE - (row + 0.5) * CELL
        erow, zrow, prow = [], [], []
        for col in range(N):
            x = (col + 0.5) * CELL
            erow.append(elevation(x, y, rng))
            zrow.append(zone_of(x))
            prow.append(rng.choice([0, 20, 40, 60, 80]) if rng.random() < 0.85 else 0)
        elev.append(erow)
        zones.append(zrow)
        pop.append(prow)
    write_asc(os.path.join(args.out, "terrain.asc"), elev, lambda v: f"{v:.3f}")
    write_asc(os.path.join(args.out, "zones.asc"), zones, str)
    write_asc(os.path.join(args.out, "population.asc"), pop, str)

    zone_pop = {1: 0, 2: 0, 3: 0}
    for r in range(N):
        for c in range(N):
            zone_pop[zones[r][c]] += pop[r][c]
    features = []
    names = {1: "Vestbro", 2: "Indre By", 3: "Osterbro"}
    for z in (1, 2, 3):
        x0, x1 = ZONE_EDGES[z - 1], ZONE_EDGES[z]
        ring = [[x0, 0.0], [x1, 0.0], [x1, SIZE], [x0, SIZE], [x0, 0.0]]
        features.append({
            "type": "Feature",
            "properties": {"id": z, "name": names[z], "population": zone_pop[z]},
            "geometry": {"type": "Polygon", "coordinates": [ring]},
        })
    with open(os.path.join(args.out, "zones.geojson"), "w") as f:
        json.dump({"type": "FeatureCollection", "features": features}, f, indent=1)

    # Street grid. Columns/rows 3, 7 and 10 are two-lane arterials.
    spacing = (SIZE - 120.0) / (GRID - 1)
    def node_id(i, j):
        return 1 + j * GRID + i
    def node_xy(i, j):
        return 60.0 + i * spacing, 60.0 + j * spacing
    with open(os.path.join(args.out, "nodes.csv"), "w") as f:
        f.write("id,x,y\n")
        for j in range(GRID):
            for i in range(GRID):
                x, y = node_xy(i, j)
                f.write(f"{node_id(i, j)},{x:.3f},{y:.3f}\n")

    arterial = {3, 7, 10}
    link_rows = []
    lid = 1
    for j in range(GRID):
        for i in range(GRID):
            for di, dj in ((1, 0), (0, 1)):
                i2, j2 = i + di, j + dj
                if i2 >= GRID or j2 >= GRID:
                    continue
                x0, y0 = node_xy(i, j)
                x1, y1 = node_xy(i2, j2)
                line = j if dj == 0 else i
                is_arterial = line in arterial
                # A few park paths carry only bikes and pedestrians.
                is_path = not is_arterial and rng.random() < 0.08
                if is_path:
                    modes, cls, lanes, sd = "cycle|walk", "path", 1, 0
                elif is_arterial:
                    modes, cls, lanes, sd = "drive|cycle|walk", "arterial", 2, 50
                else:
                    modes, cls, lanes, sd = "drive|cycle|walk", "local", 1, 30
                samples = [(x0 + (x1 - x0) * t, y0 + (y1 - y0) * t) for t in (0.0, 0.25, 0.5, 0.75, 1.0)]
                geom = ";".join(f"{x:.3f} {y:.3f}" for x, y in samples)
                mx = (x0 + x1) / 2
                lighting = "1" if is_arterial or rng.random() < 0.5 else "0"
                signals = "1" if is_arterial and (i in arterial or j in arterial) else "0"
                link_rows.append(
                    f"{lid},{node_id(i, j)},{node_id(i2, j2)},{spacing:.3f},{modes},{sd},18,5,{lanes},{cls},"
                    f"{lighting},{signals},{zone_of(mx)},{geom}")
                lid += 1
    with open(os.path.join(args.out, "links.csv"), "w") as f:
        f.write("id,from,to,length_m,modes,speed_drive,speed_cycle,speed_walk,lanes,road_class,lighting,signals,zone_id,geometry\n")
        f.write("\n".join(link_rows) + "\n")

    cats = ["groceries", "healthcare", "education", "leisure"]
    counts = [24, 8, 12, 20]
    with open(os.path.join(args.out, "pois.csv"), "w") as f:
        f.write("id,category,x,y\n")
        pid = 1
        for cat, n in zip(cats, counts):
            for _ in range(n):
                f.write(f"{pid},{cat},{rng.uniform(40, SIZE - 40):.2f},{rng.uniform(40, SIZE - 40):.2f}\n")
                pid += 1

    scenario = {
        "name": "basin-3zone",
        "horizon": {"start_year": 2023, "end_year": 2100},
        "seeds": {"simulation": 7, "demand": 11, "deciles": 13},
        "rainfall": [
            {"year_start": 2023, "year_end": 2060,
             "distribution": {"family": "gumbel", "location_mm": 30.0, "scale_mm": 8.0}},
            {"year_start": 2061, "year_end": 2100,
             "distribution": {"family": "gumbel", "location_mm": 35.0, "scale_mm": 9.0}},
        ],
        "terrain": {"elevation": "terrain.asc", "zones": "zones.asc"},
        "network": {"nodes": "nodes.csv", "links": "links.csv"},
        "zones": "zones.geojson",
        "pois": {"file": "pois.csv", "categories": cats},
        "hexes": {"resolution_m": 100.0, "population_raster": "population.asc"},
        "disruption": {
            "drive": {"coefficients": [86.9448, -0.5529, 0.0009], "cutoff_mm": 300.0},
            "cycle": {"coefficients": [25.0, -0.125], "cutoff_mm": 200.0},
            "walk": {"coefficients": [6.0, -0.015], "cutoff_mm": 400.0},
        },
        "costs": {
            "base_cost_per_m": {"motorway": 4000.0, "arterial": 1800.0, "local": 900.0, "path": 300.0},
            "lane_factor": 0.6,
            "lighting_cost_per_m": 40.0,
            "signals_cost_per_link": 60000.0,
            "damage": {
                "motorway": [[0, 0], [150, 0.05], [500, 0.25], [1000, 0.6], [2000, 0.9]],
                "arterial": [[0, 0], [150, 0.06], [500, 0.3], [1000, 0.65], [2000, 0.95]],
                "local": [[0, 0], [150, 0.08], [500, 0.35], [1000, 0.7], [2000, 1.0]],
                "path": [[0, 0], [150, 0.1], [500, 0.4], [1000, 0.8], [2000, 1.0]],
            },
            "vot_per_hour": {"drive": 150.0, "cycle": 110.0, "walk": 110.0},
            "cancellation_factor": 0.8,
        },
        "qol": {
            "neighbor_weight": 0.5,
            "category_weights": [0.35, 0.25, 0.2, 0.2],
            "thresholds_s": {"drive": 1800.0, "cycle": 900.0, "walk": 600.0},
            "snap_radius_m": 250.0,
        },
        "actions": [
            {"id": 0, "name": "permeable paving", "drainage_boost_mm": 8.0, "capex": 400000.0,
             "annual_maintenance": 6000.0, "lifetime_years": 25},
            {"id": 1, "name": "gully upgrade", "drainage_boost_mm": 15.0, "capex": 900000.0,
             "annual_maintenance": 12000.0, "lifetime_years": 40},
            {"id": 2, "name": "sewer separation", "drainage_boost_mm": 30.0, "capex": 6000000.0,
             "annual_maintenance": 40000.0},
            {"id": 3, "name": "smart drain retrofit", "drainage_boost_mm": 100.0, "capex": 0.0,
             "annual_maintenance": 0.0},
            {"id": 4, "name": "rain gardens", "storage_boost_m3": 2000.0, "capex": 300000.0,
             "annual_maintenance": 5000.0, "lifetime_years": 20},
            {"id": 5, "name": "retention pond", "storage_boost_m3": 10000.0, "capex": 1500000.0,
             "annual_maintenance": 15000.0},
            {"id": 6, "name": "underground tank", "storage_boost_m3": 25000.0, "capex": 5000000.0,
             "annual_maintenance": 25000.0},
            {"id": 7, "name": "cloudburst boulevard", "drainage_boost_mm": 10.0, "storage_boost_m3": 15000.0,
             "capex": 8000000.0, "annual_maintenance": 60000.0, "lifetime_years": 50},
        ],
        "reward_weights": {"beta_I": -1.0, "beta_D": -1.0, "beta_C": -1.0, "beta_Q": 1.0,
                           "beta_A": -1.0, "beta_M": -1.0},
        "demand": {
            "trips_per_year": 500,
            "mode_shares": {"drive": 0.3, "cycle": 0.45, "walk": 0.25},
        },
        "observation": {"bitmask_budget_bits": 64},
    }
    with open(os.path.join(args.out, "scenario.json"), "w") as f:
        json.dump(scenario, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
