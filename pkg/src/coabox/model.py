"""Scenario structure: the box graph, red itineraries, and the blue roster.

A scenario is a small undirected road graph of battle boxes, one or more
blue entry points hanging off it, and a scripted red force whose platoons
follow fixed box itineraries with absolute arrival times.  Everything here
is static input; the simulator owns all dynamic state.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Union

from .tables import blue_catalog, red_catalog


@dataclass(frozen=True)
class Box:
    id: int
    x_m: float
    y_m: float
    area_m2: float


@dataclass(frozen=True)
class Edge:
    a: int
    b: int
    road_m: float


@dataclass(frozen=True)
class EntryPoint:
    name: str
    x_m: float
    y_m: float
    connects_to: int
    road_m: float


@dataclass(frozen=True)
class RouteStop:
    box: int
    arrival_s: float


@dataclass(frozen=True)
class RedPlatoon:
    type_id: int
    route: tuple[RouteStop, ...]


@dataclass(frozen=True)
class Params:
    t_meet_s: float = 600.0
    t_hasty_s: float = 3600.0
    blue_speed_mps: float = 30.0 / 3.6


@dataclass
class Scenario:
    name: str
    boxes: dict[int, Box]
    edges: list[Edge]
    entry_points: dict[str, EntryPoint]
    red: list[RedPlatoon]
    blue_roster: list[tuple[int, int]]  # (type_id, count), file order
    params: Params
    adjacency: dict[int, list[tuple[int, float]]] = field(default_factory=dict)

    def box_ids(self) -> list[int]:
        return sorted(self.boxes)

    def roster_size(self) -> int:
        return sum(c for _, c in self.blue_roster)


class ScenarioError(ValueError):
    pass


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ScenarioError(msg)


def load_scenario(source: Union[str, Path, dict]) -> Scenario:
    """Parse and validate a scenario from a JSON file path or a dict."""
    if isinstance(source, (str, Path)):
        doc = json.loads(Path(source).read_text(encoding="utf-8"))
        default_name = Path(source).stem
    else:
        doc = source
        default_name = "scenario"

    boxes: dict[int, Box] = {}
    for raw in doc.get("boxes", []):
        box = Box(int(raw["id"]), float(raw["x_m"]), float(raw["y_m"]), float(raw["area_m2"]))
        _require(box.id not in boxes, f"duplicate box id {box.id}")
        _require(box.area_m2 > 0, f"box {box.id} has non-positive area")
        boxes[box.id] = box
    _require(bool(boxes), "scenario has no boxes")

    edges: list[Edge] = []
    seen_pairs: set[tuple[int, int]] = set()
    for raw in doc.get("edges", []):
        edge = Edge(int(raw["a"]), int(raw["b"]), float(raw["road_m"]))
        for end in (edge.a, edge.b):
            _require(end in boxes, f"edge references unknown box {end}")
        _require(edge.a != edge.b, f"edge {edge.a}-{edge.b} is a self loop")
        _require(edge.road_m > 0, f"edge {edge.a}-{edge.b} has non-positive length")
        pair = (min(edge.a, edge.b), max(edge.a, edge.b))
        _require(pair not in seen_pairs, f"duplicate edge {pair[0]}-{pair[1]}")
        seen_pairs.add(pair)
        edges.append(edge)

    entries: dict[str, EntryPoint] = {}
    for raw in doc.get("entry_points", []):
        ep = EntryPoint(
            str(raw["name"]), float(raw["x_m"]), float(raw["y_m"]),
            int(raw["connects_to"]), float(raw["road_m"]),
        )
        _require(ep.name not in entries, f"duplicate entry point {ep.name!r}")
        _require(ep.connects_to in boxes, f"entry {ep.name!r} connects to unknown box {ep.connects_to}")
        _require(ep.road_m > 0, f"entry {ep.name!r} has non-positive road length")
        entries[ep.name] = ep
    _require(bool(entries), "scenario has no entry points")

    cat = red_catalog()
    red: list[RedPlatoon] = []
    for i, raw in enumerate(doc.get("red", [])):
        type_id = int(raw["type_id"])
        _require(type_id in cat, f"red platoon {i} has unknown type {type_id}")
        stops = tuple(RouteStop(int(s["box"]), float(s["arrival_s"])) for s in raw["route"])
        _require(len(stops) >= 1, f"red platoon {i} has an empty route")
        for stop in stops:
            _require(stop.box in boxes, f"red platoon {i} route visits unknown box {stop.box}")
        for prev, nxt in zip(stops, stops[1:]):
            _require(
                nxt.arrival_s > prev.arrival_s,
                f"red platoon {i} arrival times must increase ({prev.box}->{nxt.box})",
            )
            pair = (min(prev.box, nxt.box), max(prev.box, nxt.box))
            _require(pair in seen_pairs, f"red platoon {i} route uses missing edge {pair[0]}-{pair[1]}")
        red.append(RedPlatoon(type_id, stops))
    _require(bool(red), "scenario has no red platoons")

    bcat = blue_catalog()
    roster: list[tuple[int, int]] = []
    for raw in doc.get("blue_roster", []):
        type_id, count = int(raw["type_id"]), int(raw["count"])
        _require(type_id in bcat, f"blue roster has unknown type {type_id}")
        _require(count > 0, f"blue roster count for type {type_id} must be positive")
        roster.append((type_id, count))
    _require(bool(roster), "scenario has no blue roster")

    p = doc.get("params", {})
    params = Params(
        t_meet_s=float(p.get("t_meet_s", 600.0)),
        t_hasty_s=float(p.get("t_hasty_s", 3600.0)),
        blue_speed_mps=float(p.get("blue_speed_mps", 30.0 / 3.6)),
    )
    _require(0 < params.t_meet_s < params.t_hasty_s, "need 0 < t_meet_s < t_hasty_s")
    _require(params.blue_speed_mps > 0, "blue speed must be positive")

    adjacency: dict[int, list[tuple[int, float]]] = {b: [] for b in boxes}
    for edge in edges:
        adjacency[edge.a].append((edge.b, edge.road_m))
        adjacency[edge.b].append((edge.a, edge.road_m))
    for nbrs in adjacency.values():
        nbrs.sort()

    scn = Scenario(
        name=str(doc.get("name", default_name)),
        boxes=boxes,
        edges=edges,
        entry_points=entries,
        red=red,
        blue_roster=roster,
        params=params,
        adjacency=adjacency,
    )
    _require(_connected(scn), "box graph is not connected")
    return scn


def _connected(scn: Scenario) -> bool:
    ids = scn.box_ids()
    seen = {ids[0]}
    frontier = [ids[0]]
    while frontier:
        u = frontier.pop()
        for v, _ in scn.adjacency[u]:
            if v not in seen:
                seen.add(v)
                frontier.append(v)
    return len(seen) == len(ids)


def dijkstra_from(scn: Scenario, src_box: int) -> dict[int, float]:
    """Shortest road distance from a box to every box (cached per scenario)."""
    import heapq

    cache = scn.__dict__.setdefault("_dist_cache", {})
    hit = cache.get(src_box)
    if hit is not None:
        return hit
    dist = {src_box: 0.0}
    heap = [(0.0, src_box)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist.get(u, math.inf):
            continue
        for v, w in scn.adjacency[u]:
            nd = d + w
            if nd < dist.get(v, math.inf):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    cache[src_box] = dist
    return dist


def all_pairs_distances(scn: Scenario) -> dict[int, dict[int, float]]:
    return {b: dijkstra_from(scn, b) for b in scn.box_ids()}


def shortest_path(scn: Scenario, src_box: int, dst_box: int) -> list[int]:
    """Box sequence of the shortest road path, ties broken by the smallest
    next box id at every step."""
    if src_box == dst_box:
        return [src_box]
    cache = scn.__dict__.setdefault("_path_cache", {})
    hit = cache.get((src_box, dst_box))
    if hit is not None:
        return hit
    to_dst = dijkstra_from(scn, dst_box)
    if src_box not in to_dst:
        raise ScenarioError(f"no path from box {src_box} to box {dst_box}")
    path = [src_box]
    u = src_box
    while u != dst_box:
        best: tuple[float, int] | None = None
        for v, w in scn.adjacency[u]:
            if v not in to_dst:
                continue
            cand = (w + to_dst[v], v)
            if best is None or cand < best:
                best = cand
        assert best is not None
        u = best[1]
        path.append(u)
    cache[(src_box, dst_box)] = path
    return path


def entry_path(scn: Scenario, entry_name: str, dst_box: int) -> list[int]:
    """Box sequence from an entry point (the entry itself is not a box)."""
    ep = scn.entry_points[entry_name]
    return shortest_path(scn, ep.connects_to, dst_box)


def entry_distance(scn: Scenario, entry_name: str, dst_box: int) -> float:
    ep = scn.entry_points[entry_name]
    return ep.road_m + dijkstra_from(scn, ep.connects_to)[dst_box]


def blue_slots(scn: Scenario, n_platoons: int) -> list[int]:
    """Type ids of the first ``n_platoons`` blue slots.

    The roster is split proportionally across its types by largest
    remainder, so a 13:3 infantry/armor pool at n=7 yields 6 infantry and
    1 armor slot.  Slots are ordered by roster file order.
    """
    total = scn.roster_size()
    if not 1 <= n_platoons <= total:
        raise ScenarioError(f"platoon count must be in [1, {total}], got {n_platoons}")
    quotas = []
    for idx, (type_id, count) in enumerate(scn.blue_roster):
        exact = n_platoons * count / total
        quotas.append([int(exact), exact - int(exact), idx, type_id, count])
    assigned = sum(q[0] for q in quotas)
    # hand out the remaining slots by largest fractional part, earliest
    # roster entry first on ties
    for q in sorted(quotas, key=lambda q: (-q[1], q[2])):
        if assigned == n_platoons:
            break
        if q[0] < q[4]:
            q[0] += 1
            assigned += 1
    slots: list[int] = []
    for q in sorted(quotas, key=lambda q: q[2]):
        slots.extend([q[3]] * q[0])
    return slots


def bundled_scenario_path(name: str = "scenario14") -> Path:
    from importlib import resources

    ref = resources.files("coabox.data").joinpath(f"{name}.json")
    with resources.as_file(ref) as p:
        return Path(p)


Config = tuple[int, ...]


def config_key(config: Iterable[int]) -> Config:
    return tuple(int(b) for b in config)
