"""Engagement typing, round-based attrition, and combat durations.

Forces fight inside one box at a time.  The arrival-time gap between the
first and second force decides the engagement pair (meeting, hasty, or
deliberate); per-round percentage losses come from the bundled loss table
at the current blue:red value ratio and are re-read every round as the
ratio shifts.  A platoon whose relative strength would cross 0.3 within a
round has that round scaled linearly so it lands exactly on the threshold,
then drops out.  The engagement's wall-clock duration is the box width
divided by the attacker's doctrinal advance rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .tables import advance_rate_kmday, blue_catalog, loss_fractions, red_catalog

INEFFECTIVE_REL = 0.3
_REL_EPS = 1e-9


class Engagement(Enum):
    MEETING = "meeting"
    HASTY_ATTACK = "hasty_attack"
    HASTY_DEFENSE = "hasty_defense"
    DELIBERATE_ATTACK = "deliberate_attack"
    DELIBERATE_DEFENSE = "deliberate_defense"

    @property
    def is_attack(self) -> bool:
        return self in (Engagement.HASTY_ATTACK, Engagement.DELIBERATE_ATTACK)

    @property
    def is_defense(self) -> bool:
        return self in (Engagement.HASTY_DEFENSE, Engagement.DELIBERATE_DEFENSE)


@dataclass
class Combatant:
    uid: str
    side: str  # "blue" or "red"
    type_id: int
    value: float  # full-strength platoon value
    rel: float = 1.0

    def effective(self) -> float:
        return self.value * self.rel


def platoon_value(side: str, type_id: int) -> float:
    cat = blue_catalog() if side == "blue" else red_catalog()
    unit = cat[type_id]
    return unit.combatv / (16.0 * unit.size)


def force_value(units: list[Combatant]) -> float:
    return sum(u.effective() for u in units)


def classify(first_arrival_s: float, second_arrival_s: float,
             t_meet_s: float, t_hasty_s: float) -> tuple[Engagement, Engagement]:
    """Engagement pair (first force, second force) from the arrival gap.

    The force already in the box defends; how prepared it is depends on
    how long it held the box before contact.
    """
    delta = second_arrival_s - first_arrival_s
    if delta < 0:
        raise ValueError("second arrival precedes first")
    if delta <= t_meet_s:
        return Engagement.MEETING, Engagement.MEETING
    if delta <= t_hasty_s:
        return Engagement.HASTY_DEFENSE, Engagement.HASTY_ATTACK
    return Engagement.DELIBERATE_DEFENSE, Engagement.DELIBERATE_ATTACK


def unit_mobility(side: str, type_id: int) -> str:
    """Mobility class from the catalog description text."""
    cat = blue_catalog() if side == "blue" else red_catalog()
    text = cat[type_id].text.lower()
    if "tank" in text or "armor" in text:
        return "armored"
    if "cav" in text:
        return "cavalry"
    vehicle_marks = ("bmp", "btr", "m2", "m113", "mech", "mrb", "marine", "mlrs")
    if any(m in text for m in vehicle_marks):
        return "mechanized"
    return "infantry"


def force_mobility(units: list[Combatant]) -> str:
    """Dominant mobility class by effective value share."""
    shares = {"armored": 0.0, "mechanized": 0.0, "infantry": 0.0, "cavalry": 0.0}
    for u in units:
        shares[unit_mobility(u.side, u.type_id)] += u.effective()
    order = ("armored", "mechanized", "infantry", "cavalry")
    return max(order, key=lambda m: (shares[m], -order.index(m)))


_POSTURE = {
    Engagement.MEETING: "hasty",
    Engagement.HASTY_DEFENSE: "hasty",
    Engagement.DELIBERATE_DEFENSE: "prepared",
}


def attacker_side(blue_type: Engagement, red_type: Engagement) -> str:
    if blue_type.is_attack:
        return "blue"
    if red_type.is_attack:
        return "red"
    return "red"  # mutual meeting: treat the scripted force as the mover


def combat_duration_s(area_m2: float, blue: list[Combatant], red: list[Combatant],
                      blue_type: Engagement, red_type: Engagement) -> float:
    """Wall-clock engagement time: box width over the attacker advance rate."""
    atk = attacker_side(blue_type, red_type)
    attackers, defenders = (blue, red) if atk == "blue" else (red, blue)
    def_type = red_type if atk == "blue" else blue_type
    dv = force_value(defenders)
    av = force_value(attackers)
    pp = av / dv if dv > 0 else math.inf
    posture = _POSTURE.get(def_type, "hasty")
    rate = advance_rate_kmday(pp, posture, force_mobility(attackers))
    rate_mps = rate * 1000.0 / 86400.0
    return math.sqrt(area_m2) / rate_mps


@dataclass
class CombatResult:
    winner: str  # "blue" or "red"
    final_rel: dict[str, float]  # uid -> rel after full resolution
    rounds: float  # fractional round count actually fought


def resolve_rounds(blue: list[Combatant], red: list[Combatant],
                   blue_type: Engagement, red_type: Engagement) -> CombatResult:
    """Fight to elimination; returns each unit's final relative strength.

    Rounds apply the loss-table fractions at the current value ratio.  The
    round in which a unit would fall past ``INEFFECTIVE_REL`` is scaled so
    the unit lands exactly on the threshold and is then removed.  Ties go
    to the defender; a mutual meeting tie goes to the initially stronger
    force, and red wins an exact dead heat.
    """
    state: dict[str, float] = {}
    for u in blue + red:
        state[u.uid] = u.rel if u.rel >= INEFFECTIVE_REL - _REL_EPS else 0.0

    blue_v0 = sum(u.value * state[u.uid] for u in blue)
    red_v0 = sum(u.value * state[u.uid] for u in red)
    rounds = 0.0

    def tie_winner() -> str:
        if blue_type.is_defense and red_type.is_attack:
            return "blue"
        if red_type.is_defense and blue_type.is_attack:
            return "red"
        if blue_v0 > red_v0:
            return "blue"
        return "red"

    while True:
        bv = sum(u.value * state[u.uid] for u in blue if state[u.uid] > 0.0)
        rv = sum(u.value * state[u.uid] for u in red if state[u.uid] > 0.0)
        blue_alive = bv > 0.0
        red_alive = rv > 0.0
        if not blue_alive and not red_alive:
            winner = tie_winner()
            break
        if not red_alive:
            winner = "blue"
            break
        if not blue_alive:
            winner = "red"
            break

        fb, fr = loss_fractions(blue_type.value, red_type.value, bv / rv)
        if fb <= 0.0 and fr <= 0.0:
            raise RuntimeError("loss table produced a zero-loss round")

        # scale factor at which the first unit touches the threshold
        lam = 1.0
        for u in blue:
            r = state[u.uid]
            if r > 0.0 and fb > 0.0:
                lam = min(lam, (1.0 - INEFFECTIVE_REL / r) / fb)
        for u in red:
            r = state[u.uid]
            if r > 0.0 and fr > 0.0:
                lam = min(lam, (1.0 - INEFFECTIVE_REL / r) / fr)
        lam = max(lam, 0.0)

        for u in blue:
            if state[u.uid] > 0.0:
                state[u.uid] *= 1.0 - lam * fb
        for u in red:
            if state[u.uid] > 0.0:
                state[u.uid] *= 1.0 - lam * fr
        rounds += lam

        if lam < 1.0:
            cut = INEFFECTIVE_REL * (1.0 + _REL_EPS)
            for u in blue + red:
                if 0.0 < state[u.uid] <= cut:
                    state[u.uid] = 0.0

    return CombatResult(winner=winner, final_rel=state, rounds=rounds)
