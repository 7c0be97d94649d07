#!/usr/bin/env python3
"""Regenerate the bundled scenario files under src/coabox/data/.

The 14-box scenario is synthetic: a two-road corridor (north/south) with a
middle connector road, a western entry point for the blue side, and a red
force of 13 BMP-3 infantry platoons plus 3 T80 tank platoons advancing
west from box 1 in staggered waves.  All itinerary times are derived from
the edge road distances at a fixed red road speed so the file stays
self-consistent when the geometry is edited.
"""

import json
from pathlib import Path

DATA = Path(__file__).resolve().parents[1] / "src" / "coabox" / "data"

RED_SPEED_MPS = 5.0          # 18 km/h column speed
BLUE_SPEED_MPS = 30.0 / 3.6  # 30 km/h
BOX_AREA_M2 = 4.0e6
WAVE_GAP_S = 45600           # one hasty-band combat (43200 s) plus slack
FIRST_WAVE_S = 300
INTRA_WAVE_STAGGER_S = 240

BOXES = {
    1: (24500, 3000),
    2: (21000, 4500),
    3: (21000, 1500),
    4: (17500, 5000),
    5: (17500, 1000),
    6: (15750, 3000),
    7: (14000, 5000),
    8: (14000, 800),
    9: (12250, 3000),
    10: (10500, 4800),
    11: (10500, 1200),
    12: (7000, 4200),
    13: (7000, 2000),
    14: (3500, 3000),
}

EDGES = [
    (1, 2, 4400), (1, 3, 4400),
    (2, 4, 4100), (3, 5, 4100),
    (4, 5, 4600), (4, 6, 3100), (5, 6, 3100),
    (4, 7, 4000), (5, 8, 4000),
    (6, 9, 4000),
    (7, 8, 4800), (7, 10, 4000), (8, 11, 4100),
    (9, 10, 2900), (9, 11, 2900),
    (10, 11, 4100), (10, 12, 4100), (11, 13, 4100),
    (12, 13, 2500), (12, 14, 4300), (13, 14, 4200),
]

ROUTES = {
    "N": [1, 2, 4, 7, 10, 12, 14],
    "S": [1, 3, 5, 8, 11, 13, 14],
    "M1": [1, 2, 4, 6, 9, 10, 12, 14],
    "M2": [1, 3, 5, 6, 9, 11, 13, 14],
}

BMP3 = 4    # Infantry Bn (BMP-3)
T80 = 21    # Indep Tank Bn (51xT80)

# (wave index, unit type, route) per red platoon; waves leave box 1
# WAVE_GAP_S apart so earlier combats resolve before the next wave hits.
RED_PLAN = [
    (0, BMP3, "N"), (0, BMP3, "S"),
    (1, BMP3, "N"), (1, BMP3, "S"), (1, BMP3, "M1"),
    (2, BMP3, "N"), (2, BMP3, "S"), (2, BMP3, "M2"),
    (3, BMP3, "N"), (3, BMP3, "S"), (3, BMP3, "M1"),
    (4, T80, "N"), (4, T80, "S"), (4, BMP3, "M2"),
    (5, T80, "M1"), (5, BMP3, "M2"),
]


def edge_map():
    dist = {}
    for a, b, road in EDGES:
        dist[(a, b)] = road
        dist[(b, a)] = road
    return dist


def itinerary(route, start_s, dist):
    route_boxes = ROUTES[route]
    t = float(start_s)
    stops = [{"box": route_boxes[0], "arrival_s": t}]
    for a, b in zip(route_boxes, route_boxes[1:]):
        t += dist[(a, b)] / RED_SPEED_MPS
        stops.append({"box": b, "arrival_s": t})
    return stops


def build_main():
    dist = edge_map()
    wave_members = {}
    red = []
    for wave, type_id, route in RED_PLAN:
        slot = wave_members.get(wave, 0)
        wave_members[wave] = slot + 1
        start = FIRST_WAVE_S + wave * WAVE_GAP_S + slot * INTRA_WAVE_STAGGER_S
        red.append({"type_id": type_id, "route": itinerary(route, start, dist)})
    return {
        "name": "westgate14",
        "boxes": [
            {"id": i, "x_m": x, "y_m": y, "area_m2": BOX_AREA_M2}
            for i, (x, y) in sorted(BOXES.items())
        ],
        "edges": [{"a": a, "b": b, "road_m": road} for a, b, road in EDGES],
        "entry_points": [
            {"name": "westport", "x_m": 500, "y_m": 2800, "connects_to": 14, "road_m": 3200}
        ],
        "red": red,
        "blue_roster": [{"type_id": 2, "count": 13}, {"type_id": 8, "count": 3}],
        # Field-expedient defense: neither side digs in during the short
        # campaign, so the hasty window is set beyond the scenario horizon
        # and defenders always fight from hasty positions.
        "params": {
            "t_meet_s": 600.0,
            "t_hasty_s": 864000.0,
            "blue_speed_mps": BLUE_SPEED_MPS,
        },
    }


def build_mini():
    return {
        "name": "mini3",
        "boxes": [
            {"id": 1, "x_m": 8000, "y_m": 1000, "area_m2": BOX_AREA_M2},
            {"id": 2, "x_m": 4500, "y_m": 1000, "area_m2": BOX_AREA_M2},
            {"id": 3, "x_m": 1000, "y_m": 1000, "area_m2": BOX_AREA_M2},
        ],
        "edges": [{"a": 1, "b": 2, "road_m": 4000}, {"a": 2, "b": 3, "road_m": 4000}],
        "entry_points": [
            {"name": "campfield", "x_m": 500, "y_m": 500, "connects_to": 3, "road_m": 1000}
        ],
        "red": [
            {
                "type_id": BMP3,
                "route": [
                    {"box": 1, "arrival_s": 4000.0},
                    {"box": 2, "arrival_s": 4800.0},
                    {"box": 3, "arrival_s": 5600.0},
                ],
            }
        ],
        "blue_roster": [{"type_id": 2, "count": 2}],
        "params": {
            "t_meet_s": 600.0,
            "t_hasty_s": 3600.0,
            "blue_speed_mps": BLUE_SPEED_MPS,
        },
    }


def main():
    for name, doc in [("scenario14.json", build_main()), ("mini3.json", build_mini())]:
        path = DATA / name
        path.write_text(json.dumps(doc, indent=2) + "\n")
        print("wrote", path)


if __name__ == "__main__":
    main()
