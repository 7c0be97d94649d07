"""Space-filling design for the initial population of groupings.

Each column is an independent random permutation of the 256 levels, which
makes the matrix Latin in every column.  Random in-column transpositions
are then accepted whenever they shrink the worst pairwise correlation,
until no column pair correlates beyond the threshold.  Levels map to
boxes by scaling onto the box list.
"""

from __future__ import annotations

import math

import numpy as np

N_LEVELS = 256
MAX_ABS_CORR = 0.05


def build_design(n_cols: int, seed: int = 0, n_levels: int = N_LEVELS,
                 max_abs_corr: float = MAX_ABS_CORR,
                 max_attempts: int = 2_000_000) -> np.ndarray:
    """(n_levels, n_cols) int matrix; columns are decorrelated permutations
    of 1..n_levels."""
    if n_cols < 1:
        raise ValueError("need at least one column")
    rng = np.random.default_rng(np.random.SeedSequence((int(seed), 0xDE51)))
    m = np.column_stack([rng.permutation(n_levels) + 1 for _ in range(n_cols)])
    if n_cols == 1:
        return m

    # with every column holding the same values, Pearson correlation of a
    # pair reduces to an affine function of the dot product
    mean = (n_levels + 1) / 2.0
    var = float(np.sum((np.arange(1, n_levels + 1) - mean) ** 2))

    def pair_corr(i: int, j: int) -> float:
        dot = float(np.dot(m[:, i] - mean, m[:, j] - mean))
        return dot / var

    corr = np.eye(n_cols)
    for i in range(n_cols):
        for j in range(i + 1, n_cols):
            corr[i, j] = corr[j, i] = pair_corr(i, j)

    for _ in range(max_attempts):
        off = np.abs(corr - np.eye(n_cols))
        worst = float(off.max())
        if worst <= max_abs_corr:
            return m
        i, j = np.unravel_index(int(off.argmax()), off.shape)
        col = int(j if rng.integers(2) else i)
        other = int(i if col == j else j)
        p, q = (int(v) for v in rng.choice(n_levels, size=2, replace=False))
        trial = m[:, col].copy()
        trial[p], trial[q] = trial[q], trial[p]
        new = float(np.dot(trial - mean, m[:, other] - mean)) / var
        if abs(new) < abs(corr[col, other]):
            m[:, col] = trial
            # only the swapped column's correlations moved
            for k in range(n_cols):
                if k != col:
                    corr[col, k] = corr[k, col] = pair_corr(col, k)
    raise RuntimeError("design decorrelation did not reach the threshold")


def level_to_box(level: int, box_ids: list[int], n_levels: int = N_LEVELS) -> int:
    """Scale a 1-based level onto the ordered box list."""
    if not 1 <= level <= n_levels:
        raise ValueError(f"level {level} outside 1..{n_levels}")
    idx = math.ceil(level * len(box_ids) / n_levels)
    return box_ids[idx - 1]


def design_configs(matrix: np.ndarray, box_ids: list[int]) -> list[tuple[int, ...]]:
    n_levels = matrix.shape[0]
    return [
        tuple(level_to_box(int(v), box_ids, n_levels) for v in row)
        for row in matrix
    ]
