"""Bundled lookup tables: unit catalogs, loss fractions, advance rates.

The tables ship as CSV files under ``coabox/data`` and are parsed once on
first access.  Loss fractions are anchored at seven force-ratio points and
interpolated linearly between them; advance rates are banded by the
attacker/defender power ratio and keyed by defense posture and attacker
mobility class.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources

# Anchor force ratios of the loss table, ascending.  Outside the span the
# nearest anchor applies unchanged.
RATIO_ANCHORS = (
    Fraction(1, 4),
    Fraction(1, 3),
    Fraction(1, 2),
    Fraction(1, 1),
    Fraction(2, 1),
    Fraction(3, 1),
    Fraction(4, 1),
)

_RATIO_COLS = ("1_4", "1_3", "1_2", "1_1", "2_1", "3_1", "4_1")
_ANCHOR_X = tuple(float(a) for a in RATIO_ANCHORS)

POSTURES = ("hasty", "prepared", "fortified")
MOBILITY_CLASSES = ("armored", "mechanized", "infantry", "cavalry")


@dataclass(frozen=True)
class UnitType:
    type_id: int
    text: str
    combatv: float
    size: float


def _read_rows(name: str) -> list[dict[str, str]]:
    ref = resources.files("coabox.data").joinpath(name)
    with ref.open("r", encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


@lru_cache(maxsize=None)
def blue_catalog() -> dict[int, UnitType]:
    return _parse_catalog("blue_units.csv")


@lru_cache(maxsize=None)
def red_catalog() -> dict[int, UnitType]:
    return _parse_catalog("red_units.csv")


def _parse_catalog(name: str) -> dict[int, UnitType]:
    out: dict[int, UnitType] = {}
    for row in _read_rows(name):
        t = UnitType(
            type_id=int(row["type"]),
            text=row["text"],
            combatv=float(row["combatv"]),
            size=float(row["size"]),
        )
        if t.type_id in out:
            raise ValueError(f"duplicate type id {t.type_id} in {name}")
        out[t.type_id] = t
    return out


@lru_cache(maxsize=None)
def loss_table() -> dict[tuple[str, str], tuple[tuple[float, float], ...]]:
    """Map (friendly_type, enemy_type) to 7 (friendly%, enemy%) anchors."""
    out: dict[tuple[str, str], tuple[tuple[float, float], ...]] = {}
    for row in _read_rows("loss_table.csv"):
        key = (row["friendly"], row["enemy"])
        anchors = tuple(
            (float(row[f"f_{c}"]), float(row[f"e_{c}"])) for c in _RATIO_COLS
        )
        out[key] = anchors
    if len(out) != 9:
        raise ValueError(f"expected 9 loss rows, got {len(out)}")
    return out


@dataclass(frozen=True)
class RateBand:
    pp_low: float
    pp_high: float  # inf on the open-ended top band


@lru_cache(maxsize=None)
def advance_table() -> tuple[tuple[RateBand, ...], dict[tuple[int, str, str], float]]:
    """Rate bands plus (band_index, posture, mobility) -> km/day."""
    bands: list[RateBand] = []
    rates: dict[tuple[int, str, str], float] = {}
    for row in _read_rows("advance_rates.csv"):
        low = float(row["pp_low"])
        high = float("inf") if row["pp_high"] == "inf" else float(row["pp_high"])
        band = RateBand(low, high)
        if band not in bands:
            bands.append(band)
        idx = bands.index(band)
        for mob in MOBILITY_CLASSES:
            rates[(idx, row["posture"], mob)] = float(row[mob])
    if len(bands) != 9:
        raise ValueError(f"expected 9 rate bands, got {len(bands)}")
    return tuple(bands), rates


def band_index(pp_ratio: float) -> int:
    """Band for an attacker/defender power ratio; below-table clamps to 0.

    The printed edges are two-decimal roundings, so each band covers from
    its own lower edge up to the next band's lower edge; a ratio in the
    print gap (say 1.105, between 1.10 and 1.11) stays with the band below.
    """
    bands, _ = advance_table()
    idx = 0
    for i, band in enumerate(bands):
        if pp_ratio >= band.pp_low:
            idx = i
    return idx


def advance_rate_kmday(pp_ratio: float, posture: str, mobility: str) -> float:
    if posture not in POSTURES:
        raise ValueError(f"unknown posture {posture!r}")
    if mobility not in MOBILITY_CLASSES:
        raise ValueError(f"unknown mobility class {mobility!r}")
    _, rates = advance_table()
    return rates[(band_index(pp_ratio), posture, mobility)]


def loss_fractions(friendly: str, enemy: str, ratio: float) -> tuple[float, float]:
    """Per-round (friendly, enemy) loss fractions at a friendly:enemy ratio.

    Linear interpolation between the anchor ratios; the 1:4 and 4:1 columns
    apply unchanged beyond the table span.
    """
    anchors = loss_table()[(friendly, enemy)]
    xs = _ANCHOR_X
    if ratio <= xs[0]:
        f, e = anchors[0]
    elif ratio >= xs[-1]:
        f, e = anchors[-1]
    else:
        f = e = 0.0
        for i in range(len(xs) - 1):
            if xs[i] <= ratio <= xs[i + 1]:
                t = (ratio - xs[i]) / (xs[i + 1] - xs[i])
                f = anchors[i][0] + t * (anchors[i + 1][0] - anchors[i][0])
                e = anchors[i][1] + t * (anchors[i + 1][1] - anchors[i][1])
                break
    return f / 100.0, e / 100.0
