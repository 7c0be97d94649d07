"""Replay of one simulation into a sequence of drawable frames.

The simulator's event log carries arrivals, strikes, combat typing changes,
final effectiveness per combat, exits, and regroup decisions of the adopted
line.  Walking that log forward reconstructs where every platoon is and how
effective it still is after each event, which is all a timeline rendering
needs.  Frame 0 is synthetic: the moment before anything moves, with the
whole blue force at its entry points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import tables
from .model import Scenario, blue_slots
from .sim import SimResult, simulate, _nearest_entry


@dataclass
class UnitView:
    uid: str
    side: str
    type_id: int
    value: float
    rel: float = 1.0
    box: Optional[int] = None      # None while off the map
    entry: Optional[str] = None    # entry point name while staging
    dest: Optional[int] = None     # movement target, if moving
    status: str = "moving"         # moving|parked|fighting|eliminated|exited

    def copy(self) -> "UnitView":
        return UnitView(self.uid, self.side, self.type_id, self.value, self.rel,
                        self.box, self.entry, self.dest, self.status)


@dataclass
class Frame:
    index: int
    t: float
    event: str
    caption: str
    blue: dict[str, UnitView]
    red: dict[str, UnitView]
    combats: dict[int, tuple[str, str]]  # box -> (blue typing, red typing)
    blue_total: float
    blue_count: int
    red_total: float
    red_count: int


def _totals(units: dict[str, UnitView]) -> tuple[float, int]:
    total = 0.0
    count = 0
    for u in units.values():
        if u.status == "eliminated":
            continue
        total += u.value * u.rel
        count += 1
    return total, count


def _snap(index: int, t: float, event: str, caption: str,
          blue: dict[str, UnitView], red: dict[str, UnitView],
          combats: dict[int, tuple[str, str]]) -> Frame:
    bt, bc = _totals(blue)
    rt, rc = _totals(red)
    return Frame(index=index, t=t, event=event, caption=caption,
                 blue={k: u.copy() for k, u in blue.items()},
                 red={k: u.copy() for k, u in red.items()},
                 combats=dict(combats),
                 blue_total=bt, blue_count=bc, red_total=rt, red_count=rc)


def replay(scn: Scenario, config: tuple[int, ...], *, base_seed: int = 0,
           branch_budget: int = 64) -> tuple[list[Frame], SimResult]:
    """Simulate ``config`` and expand the adopted line into frames."""
    result = simulate(scn, config, base_seed=base_seed,
                      branch_budget=branch_budget, record_log=True)
    cb = tables.blue_catalog()
    cr = tables.red_catalog()

    blue: dict[str, UnitView] = {}
    for i, (type_id, dest) in enumerate(zip(blue_slots(scn, len(config)), config)):
        blue[f"b{i:02d}"] = UnitView(
            uid=f"b{i:02d}", side="blue", type_id=type_id,
            value=cb[type_id].combatv / (16.0 * cb[type_id].size),
            entry=_nearest_entry(scn, dest), dest=dest, status="moving")
    red: dict[str, UnitView] = {}
    for i, platoon in enumerate(scn.red):
        red[f"r{i:02d}"] = UnitView(
            uid=f"r{i:02d}", side="red", type_id=platoon.type_id,
            value=cr[platoon.type_id].combatv / (16.0 * cr[platoon.type_id].size),
            dest=platoon.route[0].box, status="moving")

    combats: dict[int, tuple[str, str]] = {}
    frames = [_snap(0, 0.0, "start", "t=0: blue force staged at entry", blue, red, combats)]

    for entry_i, ev in enumerate(result.log, start=1):
        kind = ev["event"]
        t = ev["t"]
        caption = kind
        if kind == "blue_arrive":
            u = blue[ev["unit"]]
            u.box = ev["box"]
            u.entry = None
            if u.dest == u.box:
                u.status = "parked"
                u.dest = None
            caption = f"{ev['unit']} reaches box {ev['box']}"
        elif kind == "red_arrive":
            u = red[ev["unit"]]
            u.box = ev["box"]
            u.dest = None
            caption = f"{ev['unit']} reaches box {ev['box']}"
        elif kind == "illegal_move":
            u = blue[ev["unit"]]
            u.status = "eliminated"
            u.rel = 0.0
            u.box = None
            a, b = ev["edge"]
            caption = f"{ev['unit']} struck crossing {a}-{b} against traffic"
        elif kind in ("combat_start", "combat_retype"):
            combats[ev["box"]] = (ev["blue_type"], ev["red_type"])
            for uid in ev["blue"]:
                blue[uid].status = "fighting"
                blue[uid].box = ev["box"]
            for uid in ev["red"]:
                red[uid].status = "fighting"
                red[uid].box = ev["box"]
            caption = (f"box {ev['box']}: {ev['blue_type']} vs "
                       f"{ev['red_type']}")
        elif kind == "combat_end":
            combats.pop(ev["box"], None)
            for uid, rel in ev["rels"].items():
                u = blue.get(uid) or red[uid]
                u.rel = rel
                if rel <= 0.0:
                    u.status = "eliminated"
                    u.box = None
                elif u.side == "blue":
                    u.status = "parked"
                else:
                    u.status = "moving"
            caption = f"box {ev['box']}: {ev['winner']} side prevails"
        elif kind == "red_exit":
            u = red[ev["unit"]]
            u.status = "exited"
            u.box = None
            u.rel = ev["rel"]
            caption = f"{ev['unit']} breaks through (rel {ev['rel']:.2f})"
        elif kind == "regroup":
            for uid, dest in zip(ev["units"], ev["dests"]):
                blue[uid].status = "moving"
                blue[uid].dest = dest
            caption = f"survivors at box {ev['box']} redeploy"
        frames.append(_snap(entry_i, t, kind, caption, blue, red, combats))
    return frames, result
