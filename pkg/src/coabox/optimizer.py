"""Population search over initial blue groupings.

The population holds up to 256 unique groupings ranked by simulated value
(lower is better).  Each iteration proposes a small batch of unseen
groupings, drawn either by a local search move (relocate one platoon,
favoring nearby boxes) or by genetic recombination of rank-selected
parents, evaluates the batch, and keeps the best 256 of the union.  The
run stops once the top of the ranking has been stagnant for a fixed
number of consecutive iterations.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .design import build_design, design_configs
from .model import Scenario, dijkstra_from
from .sim import simulate

POPULATION_CAPACITY = 256
BATCH_SIZE = 12
P_SEARCH_MOVE = 0.4
P_GA_MUTATE = 0.05
STAGNANT_TOP = 40
STAGNANT_ITERATIONS = 17
PROPOSAL_RETRY_CAP = 1000
# Per-candidate rollout budget during search.  Deliberately lighter than the
# simulate default: the optimizer runs thousands of rollouts and the ranking
# of groupings is stable under a shallow regrouping tree; audit the winner
# with a deep simulate afterwards if the full tree matters.
EVAL_BRANCH_BUDGET = 64


@dataclass
class Candidate:
    config: tuple[int, ...]
    x: float


@dataclass
class OptimizeResult:
    population: list[Candidate]  # ascending x
    trace: list[float]  # best x after the initial ranking and each iteration
    iterations: int
    evaluations: int
    converged: bool
    n_platoons: int
    seed: int

    @property
    def best(self) -> Candidate:
        return self.population[0]


@lru_cache(maxsize=64)
def _rank_cumweights(n: int, direction: str) -> np.ndarray:
    # index 0 is the best candidate; "best" weights n..1, "worst" 1..n
    if direction == "best":
        w = np.arange(n, 0, -1, dtype=np.int64)
    elif direction == "worst":
        w = np.arange(1, n + 1, dtype=np.int64)
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return np.cumsum(w)


def rank_select(n: int, rng: np.random.Generator, direction: str = "best") -> int:
    """Index into an ascending-by-value ranking; linear rank weights, the
    top index drawn with probability n / (n (n + 1) / 2)."""
    cum = _rank_cumweights(n, direction)
    u = int(rng.integers(1, int(cum[-1]) + 1))
    return int(np.searchsorted(cum, u, side="left"))


def _distance_ranked(scn: Scenario, origin: int) -> list[int]:
    cache = scn.__dict__.setdefault("_move_rank_cache", {})
    ranked = cache.get(origin)
    if ranked is None:
        d = dijkstra_from(scn, origin)
        ranked = [b for b in scn.box_ids() if b != origin]
        ranked.sort(key=lambda b: (d[b], b))
        cache[origin] = ranked
    return ranked


def search_move(scn: Scenario, config: tuple[int, ...],
                rng: np.random.Generator) -> tuple[int, ...]:
    """Relocate one platoon, weighting candidate boxes by distance rank:
    the nearest box gets weight B-1 down to 1 for the farthest."""
    i = int(rng.integers(len(config)))
    ranked = _distance_ranked(scn, config[i])
    cum = _rank_cumweights(len(ranked), "best")
    u = int(rng.integers(1, int(cum[-1]) + 1))
    j = int(np.searchsorted(cum, u, side="left"))
    return config[:i] + (ranked[j],) + config[i + 1:]


def ga_mutate(scn: Scenario, config: tuple[int, ...],
              rng: np.random.Generator) -> tuple[int, ...]:
    i = int(rng.integers(len(config)))
    others = [b for b in scn.box_ids() if b != config[i]]
    return config[:i] + (others[int(rng.integers(len(others)))],) + config[i + 1:]


def ga_crossover(a: tuple[int, ...], b: tuple[int, ...],
                 rng: np.random.Generator) -> tuple[int, ...]:
    return tuple(x if rng.random() < 0.5 else y for x, y in zip(a, b))


def propose_batch(scn: Scenario, population: list[Candidate],
                  rng: np.random.Generator, *, batch_size: int = BATCH_SIZE,
                  p_method: float = P_SEARCH_MOVE,
                  retry_cap: int = PROPOSAL_RETRY_CAP) -> list[tuple[int, ...]]:
    """Up to ``batch_size`` unique groupings absent from the population."""
    member = {c.config for c in population}
    batch: list[tuple[int, ...]] = []
    seen: set[tuple[int, ...]] = set()
    attempts = 0
    n = len(population)
    while len(batch) < batch_size and attempts < retry_cap:
        attempts += 1
        if rng.random() < p_method:
            parent = population[rank_select(n, rng)].config
            cand = search_move(scn, parent, rng)
        elif rng.random() < P_GA_MUTATE:
            parent = population[rank_select(n, rng)].config
            cand = ga_mutate(scn, parent, rng)
        else:
            ia = rank_select(n, rng)
            ib = rank_select(n, rng)
            tries = 0
            while ib == ia and n > 1 and tries < 100:
                ib = rank_select(n, rng)
                tries += 1
            cand = ga_crossover(population[ia].config, population[ib].config, rng)
        if cand in member or cand in seen:
            continue
        seen.add(cand)
        batch.append(cand)
    return batch


def _workers() -> int:
    env = os.environ.get("COA_THREADS")
    if env:
        return max(1, int(env))
    return max(1, min(8, os.cpu_count() or 1))


_POOL_STATE: dict = {}


def _pool_init(scn: Scenario, seed: int, branch_budget: int) -> None:
    _POOL_STATE["args"] = (scn, seed, branch_budget)


def _pool_eval(config: tuple[int, ...]) -> float:
    scn, seed, budget = _POOL_STATE["args"]
    return simulate(scn, config, base_seed=seed, rng_key=config,
                    branch_budget=budget).x


class _Evaluator:
    """Evaluates configs, inline for one worker or via a process pool."""

    def __init__(self, scn: Scenario, seed: int, branch_budget: int, workers: int):
        self.scn = scn
        self.seed = seed
        self.branch_budget = branch_budget
        self.workers = workers
        self.pool = None
        if workers > 1:
            self.pool = ProcessPoolExecutor(
                max_workers=workers, initializer=_pool_init,
                initargs=(scn, seed, branch_budget))
        self.evaluations = 0
        # Rollouts are deterministic per config, so configs that fall out of
        # the population and get re-proposed later are served from cache.
        self._memo: dict[tuple[int, ...], float] = {}

    def __call__(self, configs: list[tuple[int, ...]]) -> list[float]:
        fresh = [c for c in configs if c not in self._memo]
        self.evaluations += len(fresh)
        if fresh:
            if self.pool is None:
                xs = [
                    simulate(self.scn, c, base_seed=self.seed, rng_key=c,
                             branch_budget=self.branch_budget).x
                    for c in fresh
                ]
            else:
                xs = list(self.pool.map(_pool_eval, fresh, chunksize=4))
            self._memo.update(zip(fresh, xs))
        return [self._memo[c] for c in configs]

    def close(self) -> None:
        if self.pool is not None:
            self.pool.shutdown()
            self.pool = None


def _ranked(cands: list[Candidate]) -> list[Candidate]:
    return sorted(cands, key=lambda c: (c.x, c.config))


def optimize(scn: Scenario, n_platoons: int, *, seed: int = 0,
             p_method: float = P_SEARCH_MOVE, batch_size: int = BATCH_SIZE,
             capacity: int = POPULATION_CAPACITY,
             branch_budget: int = EVAL_BRANCH_BUDGET,
             stagnant_top: int = STAGNANT_TOP,
             stagnant_iterations: int = STAGNANT_ITERATIONS,
             max_iterations: int = 10_000,
             workers: int | None = None) -> OptimizeResult:
    """Search initial groupings of ``n_platoons`` blue platoons."""
    from .model import blue_slots

    blue_slots(scn, n_platoons)  # validates the platoon count
    box_ids = scn.box_ids()
    rng = np.random.default_rng(np.random.SeedSequence((int(seed), 0x0907)))
    evaluator = _Evaluator(scn, int(seed), int(branch_budget),
                           workers if workers is not None else _workers())
    try:
        matrix = build_design(n_platoons, seed=int(seed))
        initial = []
        seen: set[tuple[int, ...]] = set()
        for cfg in design_configs(matrix, box_ids):
            if cfg not in seen:
                seen.add(cfg)
                initial.append(cfg)
        xs = evaluator(initial)
        population = _ranked([Candidate(c, x) for c, x in zip(initial, xs)])
        population = population[:capacity]

        trace = [population[0].x]
        stagnant = 0
        prev_top = tuple(c.x for c in population[:stagnant_top])
        iterations = 0
        space_exhausted = False
        while stagnant < stagnant_iterations and iterations < max_iterations:
            batch = propose_batch(scn, population, rng,
                                  batch_size=batch_size, p_method=p_method)
            if not batch:
                space_exhausted = True  # nothing new to try
                break
            xs = evaluator(batch)
            population = _ranked(population + [Candidate(c, x)
                                               for c, x in zip(batch, xs)])
            population = population[:capacity]
            iterations += 1
            trace.append(population[0].x)
            top = tuple(c.x for c in population[:stagnant_top])
            if top == prev_top:
                stagnant += 1
            else:
                stagnant = 0
                prev_top = top
        return OptimizeResult(
            population=population, trace=trace, iterations=iterations,
            evaluations=evaluator.evaluations,
            converged=stagnant >= stagnant_iterations or space_exhausted,
            n_platoons=n_platoons, seed=int(seed),
        )
    finally:
        evaluator.close()


@dataclass
class SweepRow:
    n_platoons: int
    repetitions: int
    mean_best_x: float
    sdom_best_x: Optional[float]  # std of the mean; None for a single rep
    best_x: float


@dataclass
class SweepResult:
    rows: list[SweepRow]
    halt_threshold: Optional[int]  # smallest count whose mean dips below zero


def sweep_seed(base_seed: int, n_platoons: int, rep: int) -> int:
    """Independent, reproducible seed for one sweep cell."""
    ss = np.random.SeedSequence((int(base_seed), int(n_platoons), int(rep)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def sweep(scn: Scenario, counts: Sequence[int], *, repetitions: int = 5,
          seed: int = 0, branch_budget: int = EVAL_BRANCH_BUDGET,
          workers: int | None = None, **optimize_kwargs) -> SweepResult:
    """Re-run the optimizer over a range of platoon counts.

    Each (count, repetition) cell gets its own derived seed so repetitions
    are independent draws; the row reports the mean best value and the
    standard deviation of that mean.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    rows = []
    for n in counts:
        bests = []
        for rep in range(repetitions):
            res = optimize(scn, n, seed=sweep_seed(seed, n, rep),
                           branch_budget=branch_budget, workers=workers,
                           **optimize_kwargs)
            bests.append(res.best.x)
        arr = np.asarray(bests)
        sdom = None
        if repetitions > 1:
            sdom = float(arr.std(ddof=1) / math.sqrt(repetitions))
        rows.append(SweepRow(n_platoons=int(n), repetitions=repetitions,
                             mean_best_x=float(arr.mean()), sdom_best_x=sdom,
                             best_x=float(arr.min())))
    halt = None
    for row in rows:
        if row.mean_best_x < 0.0:
            halt = row.n_platoons
            break
    return SweepResult(rows=rows, halt_threshold=halt)
