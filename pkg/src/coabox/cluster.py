"""Grouping of evaluated groupings into decision clusters.

Two configurations are close when they assign mostly the same boxes to the
same platoon slots and score nearly the same value.  The combined distance is

    1 - (1 - struct/n) * (1 - |dv|/(v_max - v_min))

which is 0 only for an identical twin and 1 when nothing matches.  A single
ordered pass over the candidates (best value first) grows complete-linkage
clusters under a threshold, so every pair inside a cluster stays within it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .optimizer import Candidate

DEFAULT_TAU = 0.2
_SMACOF_ITERS = 500
_SMACOF_EPS = 1e-15


@dataclass
class Cluster:
    members: list[Candidate]
    best: Candidate
    x_min: float = 0.0
    x_median: float = 0.0
    x_max: float = 0.0
    # (type_id, box) -> mean platoon count over members
    avg_allocation: dict[tuple[int, int], float] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.members)


def struct_sim(a: tuple[int, ...], b: tuple[int, ...]) -> int:
    """Number of platoon slots assigned to different boxes."""
    if len(a) != len(b):
        raise ValueError(f"configuration lengths differ: {len(a)} != {len(b)}")
    return sum(1 for x, y in zip(a, b) if x != y)


def similarity(a: Candidate, b: Candidate, v_min: float, v_max: float) -> float:
    """Combined structural/value distance in [0, 1]; 0 only for identical."""
    if a.x is None or b.x is None:
        raise ValueError("cannot compare unevaluated configurations")
    if v_max < v_min:
        raise ValueError("v_max must be >= v_min")
    n = len(a.config)
    struct = struct_sim(a.config, b.config) / n if n else 0.0
    span = v_max - v_min
    value = abs(a.x - b.x) / span if span > 0.0 else 0.0
    # guard against tiny negative/overshoot from float noise
    value = min(value, 1.0)
    return 1.0 - (1.0 - struct) * (1.0 - value)


def cluster_all(cands: Sequence[Candidate], tau: float = DEFAULT_TAU) -> list[Cluster]:
    """One ordered pass, best value first; complete linkage under ``tau``."""
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must be in (0, 1)")
    if not cands:
        return []
    v_min = min(c.x for c in cands)
    v_max = max(c.x for c in cands)
    ordered = sorted(cands, key=lambda c: (c.x, c.config))
    clusters: list[Cluster] = []
    for cand in ordered:
        best_i = -1
        best_d = None
        for i, cl in enumerate(clusters):
            worst = max(similarity(cand, m, v_min, v_max) for m in cl.members)
            if worst <= tau and (best_d is None or worst < best_d):
                best_i, best_d = i, worst
        if best_i >= 0:
            clusters[best_i].members.append(cand)
        else:
            clusters.append(Cluster(members=[cand], best=cand))
    return clusters


def cluster_stats(cluster: Cluster,
                  slot_types: Optional[Sequence[int]] = None) -> Cluster:
    """Fill best member, order statistics, and mean per-box allocation."""
    if not cluster.members:
        raise ValueError("empty cluster")
    xs = sorted(m.x for m in cluster.members)
    n = len(xs)
    cluster.best = min(cluster.members, key=lambda m: (m.x, m.config))
    cluster.x_min = xs[0]
    cluster.x_max = xs[-1]
    if n % 2:
        cluster.x_median = xs[n // 2]
    else:
        cluster.x_median = 0.5 * (xs[n // 2 - 1] + xs[n // 2])
    if slot_types is not None:
        counts: dict[tuple[int, int], float] = {}
        for m in cluster.members:
            if len(m.config) != len(slot_types):
                raise ValueError("slot_types length does not match configurations")
            for type_id, box in zip(slot_types, m.config):
                counts[(type_id, box)] = counts.get((type_id, box), 0.0) + 1.0
        cluster.avg_allocation = {
            key: total / n for key, total in sorted(counts.items())
        }
    return cluster


def rank_clusters(clusters: Sequence[Cluster]) -> list[Cluster]:
    """Ascending best value; the first cluster holds the global best."""
    return sorted(clusters, key=lambda c: (c.best.x, c.best.config))


def _pairwise_distances(bests: Sequence[Candidate],
                        v_min: float, v_max: float) -> np.ndarray:
    k = len(bests)
    dist = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            d = similarity(bests[i], bests[j], v_min, v_max)
            dist[i, j] = dist[j, i] = d
    return dist


def layout_stress(coords: np.ndarray, dist: np.ndarray) -> float:
    """Raw stress: sum of squared distance errors over all pairs."""
    delta = np.sqrt(
        np.maximum(((coords[:, None, :] - coords[None, :, :]) ** 2).sum(-1), 0.0))
    iu = np.triu_indices(len(dist), k=1)
    return float(((delta[iu] - dist[iu]) ** 2).sum())


def layout_topk(clusters: Sequence[Cluster], k: int,
                v_min: float, v_max: float) -> np.ndarray:
    """Deterministic 2-D embedding of the ``k`` best clusters.

    Classical scaling seeds a Guttman-transform descent, so the layout is a
    pure function of the pairwise distances between cluster best members.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    ranked = rank_clusters(clusters)[:k]
    k = len(ranked)
    if k == 1:
        return np.zeros((1, 2))
    dist = _pairwise_distances([c.best for c in ranked], v_min, v_max)

    # classical MDS on the double-centered squared distances
    j = np.eye(k) - np.full((k, k), 1.0 / k)
    b = -0.5 * j @ (dist ** 2) @ j
    w, v = np.linalg.eigh(b)
    order = np.argsort(w)[::-1][:2]
    coords = v[:, order] * np.sqrt(np.maximum(w[order], 0.0))
    if coords.shape[1] < 2:
        coords = np.hstack([coords, np.zeros((k, 1))])

    # coincident starts would freeze the descent; split them deterministically
    if np.allclose(dist, 0.0):
        return np.zeros((k, 2))
    for it in range(_SMACOF_ITERS):
        delta = np.sqrt(
            np.maximum(((coords[:, None, :] - coords[None, :, :]) ** 2).sum(-1), 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(delta > 0.0, dist / delta, 0.0)
        bmat = -ratio
        bmat[np.diag_indices(k)] = ratio.sum(axis=1)
        new = bmat @ coords / k
        if np.max(np.abs(new - coords)) < _SMACOF_EPS:
            coords = new
            break
        coords = new
    coords = coords - coords.mean(axis=0)
    return coords
