"""Event-driven engagement simulation over the box graph.

Blue platoons deploy from an entry point to their assigned boxes at time
zero and defend; red platoons follow their scripted itineraries.  Arrivals
and combat-end events drive the clock.  Combat inside a box is resolved
up front (types, duration, end-state) and the end state is applied when
the end event fires; a platoon arriving mid-fight pro-rates everyone
linearly to the elapsed fraction, joins its side, and the engagement is
re-typed against the newest arrival.

A blue move is illegal when its edge transit window overlaps a red transit
window of the same edge taken from the scripted itinerary (open-interval
comparison).  Illegal movers are struck from the board and each adds a
fixed penalty to the course-of-action value.

After every blue victory the engine branches: survivors may regroup to
other boxes, each sampled alternative is rolled out recursively to the end
of the scenario, and the branch with the lowest value is adopted.  A
shared rollout budget bounds the total branching work; with the budget
exhausted the victors hold in place.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import combat as cb
from .model import Scenario, blue_slots, dijkstra_from, shortest_path

RED_WEIGHT = 1.1
BLUE_WEIGHT = 0.2
ILLEGAL_PENALTY = 10.0
DEFAULT_BRANCH_BUDGET = 10000
REGROUP_ALTERNATIVES_PER_PLATOON = 40

_PRIO_END = 0
_PRIO_MOVE = 1


@dataclass
class _BlueUnit:
    uid: str
    type_id: int
    value: float
    rel: float = 1.0
    status: str = "moving"  # moving | parked | fighting | eliminated | illegal
    box: Optional[int] = None
    arrival_s: float = 0.0
    hops: tuple = ()  # ((a, b, t_start, t_end), ...); a may be an entry name
    hop_idx: int = 0
    plan_id: int = 0

    def copy(self) -> "_BlueUnit":
        return _BlueUnit(self.uid, self.type_id, self.value, self.rel, self.status,
                         self.box, self.arrival_s, self.hops, self.hop_idx, self.plan_id)


@dataclass
class _RedUnit:
    uid: str
    type_id: int
    value: float
    rel: float = 1.0
    status: str = "moving"  # moving | fighting | exited | eliminated
    leg: int = 0
    delay_s: float = 0.0
    box: Optional[int] = None
    box_since: float = 0.0

    def copy(self) -> "_RedUnit":
        return _RedUnit(self.uid, self.type_id, self.value, self.rel, self.status,
                        self.leg, self.delay_s, self.box, self.box_since)


@dataclass
class _Combat:
    box: int
    t0: float
    st: float
    blue_uids: list[str]
    red_uids: list[str]
    blue_type: cb.Engagement
    red_type: cb.Engagement
    start_rel: dict[str, float]
    result: cb.CombatResult
    version: int

    def copy(self) -> "_Combat":
        return _Combat(self.box, self.t0, self.st, list(self.blue_uids),
                       list(self.red_uids), self.blue_type, self.red_type,
                       dict(self.start_rel), self.result, self.version)


class _Budget:
    # truncated flips when a victory had candidate regroupings it could not
    # afford to roll out; the result is then best-so-far, not exhaustive.
    __slots__ = ("remaining", "truncated")

    def __init__(self, remaining: int):
        self.remaining = remaining
        self.truncated = False


@dataclass
class SimResult:
    x: float
    x_cost: float
    red_final: float
    blue_final: float
    blue_initial: float
    illegal_moves: int
    victories: int
    end_time: float
    rollouts_explored: int
    truncated: bool
    n_platoons: int
    config: tuple[int, ...]
    decisions: list[dict] = field(default_factory=list)
    log: list[dict] = field(default_factory=list)


class _State:
    __slots__ = ("scn", "blue", "red", "heap", "seq", "t", "combats", "illegal",
                 "victory_count", "rng_path", "budget", "base_seed", "record_log",
                 "log", "decisions", "red_windows", "blue_initial")

    def __init__(self):
        pass

    def clone(self) -> "_State":
        s = _State()
        s.scn = self.scn
        s.blue = {k: u.copy() for k, u in self.blue.items()}
        s.red = {k: u.copy() for k, u in self.red.items()}
        s.heap = list(self.heap)
        s.seq = self.seq
        s.t = self.t
        s.combats = {k: c.copy() for k, c in self.combats.items()}
        s.illegal = self.illegal
        s.victory_count = self.victory_count
        s.rng_path = self.rng_path
        s.budget = self.budget  # shared on purpose
        s.base_seed = self.base_seed
        s.record_log = self.record_log
        s.log = list(self.log)
        s.decisions = list(self.decisions)
        s.red_windows = self.red_windows  # static
        s.blue_initial = self.blue_initial
        return s

    def push(self, t: float, prio: int, payload: tuple) -> None:
        heapq.heappush(self.heap, (t, prio, self.seq, payload))
        self.seq += 1

    def note(self, t: float, event: str, **extra) -> None:
        if self.record_log:
            entry = {"t": t, "event": event}
            entry.update(extra)
            self.log.append(entry)


def red_edge_windows(scn: Scenario) -> dict[tuple[int, int], list[tuple[float, float]]]:
    """Scripted red transit windows per undirected edge."""
    windows: dict[tuple[int, int], list[tuple[float, float]]] = {}
    for platoon in scn.red:
        stops = platoon.route
        for a, b in zip(stops, stops[1:]):
            key = (min(a.box, b.box), max(a.box, b.box))
            windows.setdefault(key, []).append((a.arrival_s, b.arrival_s))
    return windows


def _nearest_entry(scn: Scenario, dest: int) -> str:
    best: tuple[float, int, str] | None = None
    for idx, (name, ep) in enumerate(scn.entry_points.items()):
        d = ep.road_m + dijkstra_from(scn, ep.connects_to)[dest]
        cand = (d, idx, name)
        if best is None or cand < best:
            best = cand
    assert best is not None
    return best[2]


def _plan_from_entry(state: _State, unit: _BlueUnit, entry_name: str, dest: int) -> None:
    scn = state.scn
    ep = scn.entry_points[entry_name]
    speed = scn.params.blue_speed_mps
    boxes = shortest_path(scn, ep.connects_to, dest)
    hops: list[tuple] = []
    t = 0.0
    t2 = t + ep.road_m / speed
    hops.append((entry_name, boxes[0], t, t2))
    t = t2
    for a, b in zip(boxes, boxes[1:]):
        w = _edge_len(scn, a, b)
        hops.append((a, b, t, t + w / speed))
        t += w / speed
    _launch_plan(state, unit, hops, 0.0)


def _plan_from_box(state: _State, unit: _BlueUnit, origin: int, dest: int, t0: float) -> None:
    scn = state.scn
    speed = scn.params.blue_speed_mps
    boxes = shortest_path(scn, origin, dest)
    hops: list[tuple] = []
    t = t0
    for a, b in zip(boxes, boxes[1:]):
        w = _edge_len(scn, a, b)
        hops.append((a, b, t, t + w / speed))
        t += w / speed
    _launch_plan(state, unit, hops, t0)


def _edge_len(scn: Scenario, a: int, b: int) -> float:
    for v, w in scn.adjacency[a]:
        if v == b:
            return w
    raise KeyError((a, b))


def _launch_plan(state: _State, unit: _BlueUnit, hops: list[tuple], t0: float) -> None:
    unit.plan_id += 1
    unit.hops = tuple(hops)
    unit.hop_idx = 0
    unit.status = "moving"
    unit.box = None
    if not hops:
        raise ValueError("empty move plan")
    if _hop_illegal(state, hops[0]):
        _strike_illegal(state, unit, t0, hops[0])
        return
    state.push(hops[0][3], _PRIO_MOVE, ("blue", unit.uid, 0, unit.plan_id))


def _hop_illegal(state: _State, hop: tuple) -> bool:
    a, b, t0, t1 = hop
    if not isinstance(a, int):
        return False  # entry links are never on a red itinerary
    key = (min(a, b), max(a, b))
    for w0, w1 in state.red_windows.get(key, ()):
        if t0 < w1 and w0 < t1:  # open-interval overlap
            return True
    return False


def _strike_illegal(state: _State, unit: _BlueUnit, t: float, hop: tuple) -> None:
    unit.status = "illegal"
    unit.rel = 0.0
    unit.box = None
    state.illegal += 1
    state.note(t, "illegal_move", unit=unit.uid, edge=(hop[0], hop[1]),
               window=(hop[2], hop[3]))


def _blue_present(state: _State, box: int) -> list[_BlueUnit]:
    return [u for u in state.blue.values()
            if u.box == box and u.status in ("parked", "fighting")]


def simulate(scn: Scenario, config: Sequence[int], *, base_seed: int = 0,
             rng_key: tuple = (), branch_budget: int = DEFAULT_BRANCH_BUDGET,
             record_log: bool = False) -> SimResult:
    """Roll out one blue initial grouping against the scripted red force.

    ``config`` assigns a destination box to each blue platoon slot; an
    empty config runs the red itineraries unopposed.  Identical inputs
    produce identical results, including all regroup branching.
    """
    config = tuple(int(b) for b in config)
    for b in config:
        if b not in scn.boxes:
            raise ValueError(f"config references unknown box {b}")
    slots = blue_slots(scn, len(config)) if config else []

    state = _State()
    state.scn = scn
    state.blue = {}
    state.red = {}
    state.heap = []
    state.seq = 0
    state.t = 0.0
    state.combats = {}
    state.illegal = 0
    state.victory_count = 0
    state.rng_path = tuple(rng_key)
    state.budget = _Budget(int(branch_budget))
    state.base_seed = int(base_seed)
    state.record_log = bool(record_log)
    state.log = []
    state.decisions = []
    state.red_windows = red_edge_windows(scn)

    for i, (type_id, dest) in enumerate(zip(slots, config)):
        uid = f"b{i:02d}"
        unit = _BlueUnit(uid=uid, type_id=type_id,
                         value=cb.platoon_value("blue", type_id))
        state.blue[uid] = unit
        _plan_from_entry(state, unit, _nearest_entry(scn, dest), dest)

    for i, platoon in enumerate(scn.red):
        uid = f"r{i:02d}"
        unit = _RedUnit(uid=uid, type_id=platoon.type_id,
                        value=cb.platoon_value("red", platoon.type_id))
        state.red[uid] = unit
        state.push(platoon.route[0].arrival_s, _PRIO_MOVE, ("red", uid, 0))

    state.blue_initial = sum(u.value for u in state.blue.values())
    result = _run(state, initial_budget=int(branch_budget))
    result.config = config
    result.rollouts_explored = int(branch_budget) - state.budget.remaining
    result.truncated = state.budget.truncated
    return result


def _run(state: _State, initial_budget: int) -> SimResult:
    while state.heap:
        t, prio, _seq, payload = heapq.heappop(state.heap)
        state.t = t
        tag = payload[0]
        if tag == "end":
            _, box, version = payload
            c = state.combats.get(box)
            if c is None or c.version != version:
                continue
            winner = _apply_combat_end(state, c, t)
            if winner == "blue":
                adopted = _branch_on_victory(state, box, t, initial_budget)
                if adopted is not None:
                    return adopted
        elif tag == "blue":
            _, uid, hop_idx, plan_id = payload
            unit = state.blue[uid]
            if unit.plan_id != plan_id or unit.status != "moving":
                continue
            _blue_arrive(state, unit, hop_idx, t)
        elif tag == "red":
            _, uid, leg = payload
            unit = state.red[uid]
            if unit.status in ("eliminated", "exited"):
                continue
            _red_arrive(state, unit, leg, t)
    return _finalize(state, initial_budget)


def _finalize(state: _State, initial_budget: int) -> SimResult:
    red_final = sum(u.value * u.rel for u in state.red.values() if u.status == "exited")
    blue_final = sum(u.value * u.rel for u in state.blue.values())
    x = RED_WEIGHT * red_final - BLUE_WEIGHT * blue_final + ILLEGAL_PENALTY * state.illegal
    x_cost = (RED_WEIGHT * red_final + BLUE_WEIGHT * (state.blue_initial - blue_final)
              + ILLEGAL_PENALTY * state.illegal)
    return SimResult(
        x=x, x_cost=x_cost, red_final=red_final, blue_final=blue_final,
        blue_initial=state.blue_initial, illegal_moves=state.illegal,
        victories=state.victory_count, end_time=state.t,
        rollouts_explored=initial_budget - state.budget.remaining,
        truncated=state.budget.truncated,
        n_platoons=len(state.blue), config=tuple(),
        decisions=state.decisions, log=state.log,
    )


def _blue_arrive(state: _State, unit: _BlueUnit, hop_idx: int, t: float) -> None:
    hop = unit.hops[hop_idx]
    box = hop[1]
    unit.box = box
    unit.arrival_s = t
    state.note(t, "blue_arrive", unit=unit.uid, box=box)
    if box in state.combats:
        unit.status = "fighting"
        _join_combat(state, box, t, blue_unit=unit)
        return
    if hop_idx + 1 >= len(unit.hops):
        unit.status = "parked"
        return
    nxt = unit.hops[hop_idx + 1]
    if _hop_illegal(state, nxt):
        _strike_illegal(state, unit, t, nxt)
        return
    unit.box = None
    unit.hop_idx = hop_idx + 1
    state.push(nxt[3], _PRIO_MOVE, ("blue", unit.uid, hop_idx + 1, unit.plan_id))


def _red_arrive(state: _State, unit: _RedUnit, leg: int, t: float) -> None:
    stop = state.scn.red[int(unit.uid[1:])].route[leg]
    unit.leg = leg
    unit.box = stop.box
    unit.box_since = t
    state.note(t, "red_arrive", unit=unit.uid, box=stop.box)
    if stop.box in state.combats:
        unit.status = "fighting"
        _join_combat(state, stop.box, t, red_unit=unit)
        return
    defenders = _blue_present(state, stop.box)
    if defenders:
        unit.status = "fighting"
        _start_combat(state, stop.box, t, unit)
        return
    _red_continue(state, unit, t)


def _red_continue(state: _State, unit: _RedUnit, t: float) -> None:
    route = state.scn.red[int(unit.uid[1:])].route
    leg = unit.leg
    if leg + 1 >= len(route):
        unit.status = "exited"
        unit.box = None
        state.note(t, "red_exit", unit=unit.uid, rel=unit.rel)
        return
    planned_here = route[leg].arrival_s
    unit.delay_s = max(unit.delay_s, t - planned_here)
    unit.status = "moving"
    unit.box = None
    state.push(route[leg + 1].arrival_s + unit.delay_s, _PRIO_MOVE,
               ("red", unit.uid, leg + 1))


def _side_since(state: _State, c: _Combat) -> tuple[float, float]:
    blue_since = min(state.blue[u].arrival_s for u in c.blue_uids)
    red_since = min(state.red[u].box_since for u in c.red_uids)
    return blue_since, red_since


def _start_combat(state: _State, box: int, t: float, red_unit: _RedUnit) -> None:
    blues = _blue_present(state, box)
    for u in blues:
        u.status = "fighting"
    blue_since = min(u.arrival_s for u in blues)
    blue_type, red_type = cb.classify(blue_since, t, state.scn.params.t_meet_s,
                                      state.scn.params.t_hasty_s)
    c = _Combat(box=box, t0=t, st=0.0, blue_uids=sorted(u.uid for u in blues),
                red_uids=[red_unit.uid], blue_type=blue_type, red_type=red_type,
                start_rel={}, result=None, version=0)  # type: ignore[arg-type]
    state.combats[box] = c
    _resolve_and_schedule(state, c, t)
    state.note(t, "combat_start", box=box, blue=list(c.blue_uids),
               red=list(c.red_uids), blue_type=blue_type.value,
               red_type=red_type.value, duration=c.st)


def _combatants(state: _State, c: _Combat) -> tuple[list[cb.Combatant], list[cb.Combatant]]:
    blue = [cb.Combatant(u, "blue", state.blue[u].type_id, state.blue[u].value,
                         state.blue[u].rel) for u in c.blue_uids]
    red = [cb.Combatant(u, "red", state.red[u].type_id, state.red[u].value,
                        state.red[u].rel) for u in c.red_uids]
    return blue, red


def _resolve_and_schedule(state: _State, c: _Combat, t: float) -> None:
    blue, red = _combatants(state, c)
    c.result = cb.resolve_rounds(blue, red, c.blue_type, c.red_type)
    c.st = cb.combat_duration_s(state.scn.boxes[c.box].area_m2, blue, red,
                                c.blue_type, c.red_type)
    c.t0 = t
    c.start_rel = {u.uid: u.rel for u in blue + red}
    c.version += 1
    state.push(t + c.st, _PRIO_END, ("end", c.box, c.version))


def _join_combat(state: _State, box: int, t: float,
                 blue_unit: Optional[_BlueUnit] = None,
                 red_unit: Optional[_RedUnit] = None) -> None:
    c = state.combats[box]
    u_frac = 0.0 if c.st <= 0 else min(1.0, (t - c.t0) / c.st)
    for uid in c.blue_uids:
        unit = state.blue[uid]
        end = c.result.final_rel[uid]
        unit.rel = c.start_rel[uid] + u_frac * (end - c.start_rel[uid])
    for uid in c.red_uids:
        unit = state.red[uid]
        end = c.result.final_rel[uid]
        unit.rel = c.start_rel[uid] + u_frac * (end - c.start_rel[uid])

    if blue_unit is not None:
        c.blue_uids = sorted(c.blue_uids + [blue_unit.uid])
    if red_unit is not None:
        c.red_uids = sorted(c.red_uids + [red_unit.uid])

    # the longer-present side keeps the defender role; preparedness is
    # graded against the newest arrival
    blue_since, red_since = _side_since(state, c)
    first = min(blue_since, red_since)
    a, b = cb.classify(first, t, state.scn.params.t_meet_s, state.scn.params.t_hasty_s)
    if blue_since <= red_since:
        c.blue_type, c.red_type = a, b
    else:
        c.red_type, c.blue_type = a, b
    _resolve_and_schedule(state, c, t)
    state.note(t, "combat_retype", box=box, blue=list(c.blue_uids),
               red=list(c.red_uids), blue_type=c.blue_type.value,
               red_type=c.red_type.value, duration=c.st)


def _apply_combat_end(state: _State, c: _Combat, t: float) -> str:
    del state.combats[c.box]
    for uid in c.blue_uids:
        unit = state.blue[uid]
        unit.rel = c.result.final_rel[uid]
        if unit.rel <= 0.0:
            unit.rel = 0.0
            unit.status = "eliminated"
            unit.box = None
        else:
            unit.status = "parked"
    for uid in c.red_uids:
        unit = state.red[uid]
        unit.rel = c.result.final_rel[uid]
        if unit.rel <= 0.0:
            unit.rel = 0.0
            unit.status = "eliminated"
            unit.box = None
    winner = c.result.winner
    state.note(t, "combat_end", box=c.box, winner=winner,
               rels={u: c.result.final_rel[u] for u in c.blue_uids + c.red_uids})
    if winner == "blue":
        state.victory_count += 1
    else:
        for uid in c.red_uids:
            unit = state.red[uid]
            if unit.status != "eliminated":
                _red_continue(state, unit, t)
    return winner


def _branch_on_victory(state: _State, box: int, t: float,
                       initial_budget: int) -> Optional[SimResult]:
    survivors = sorted(u.uid for u in state.blue.values()
                       if u.box == box and u.status == "parked" and u.rel > 0.0)
    if not survivors:
        return None
    if state.budget.remaining <= 0:
        state.budget.truncated = True
        return None  # out of rollouts: hold in place on the main line
    dests = [b for b in state.scn.box_ids() if b != box]
    k = len(survivors)
    space = len(dests) ** k
    cap = min(REGROUP_ALTERNATIVES_PER_PLATOON * k, space)
    vc = state.victory_count

    # never draw more alternatives than the budget can evaluate (the hold
    # branch uses one rollout); the draw sequence itself is seed-fixed, so
    # truncation keeps the evaluated prefix identical
    if cap > state.budget.remaining - 1:
        state.budget.truncated = True
    cap = min(cap, max(state.budget.remaining - 1, 0))
    if space <= REGROUP_ALTERNATIVES_PER_PLATOON * k:
        assignments = list(itertools.islice(itertools.product(dests, repeat=k), cap))
    else:
        rng = np.random.default_rng(
            np.random.SeedSequence((state.base_seed,) + state.rng_path + (vc,)))
        seen: set[tuple[int, ...]] = set()
        assignments = []
        while len(assignments) < cap:
            tup = tuple(dests[i] for i in rng.integers(0, len(dests), size=k))
            if tup not in seen:
                seen.add(tup)
                assignments.append(tup)

    candidates: list[Optional[tuple[int, ...]]] = [None] + assignments
    best: Optional[SimResult] = None
    best_idx = -1
    evaluated = 0
    for bi, cand in enumerate(candidates):
        if state.budget.remaining <= 0:
            state.budget.truncated = True  # nested rollouts ate the budget
            break
        state.budget.remaining -= 1
        evaluated += 1
        child = state.clone()
        child.rng_path = state.rng_path + (vc, bi)
        if cand is not None:
            for uid, dest in zip(survivors, cand):
                _plan_from_box(child, child.blue[uid], box, dest, t)
            child.note(t, "regroup", box=box, units=list(survivors), dests=list(cand))
        res = _run(child, initial_budget)
        if best is None or res.x < best.x:
            best = res
            best_idx = bi
    if best is None:
        return None  # no budget at all: hold in place on the main line
    decision = {
        "t": t, "box": box, "victory": vc, "survivors": list(survivors),
        "candidates": len(candidates), "evaluated": evaluated,
        "chosen": "hold" if best_idx == 0 else list(candidates[best_idx]),
        "x": best.x,
    }
    best.decisions.insert(0, decision)
    return best
