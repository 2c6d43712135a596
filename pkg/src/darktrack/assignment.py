"""Gated optimal bipartite assignment on IoU-derived costs."""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment


def assign(cost: np.ndarray, gate: float):
    """Minimum-total-cost assignment with IoU gating.

    ``cost`` is (n_rows, n_cols) with entries 1 - IoU. The assignment is
    globally optimal before gating; any match whose IoU (= 1 - cost) falls
    below ``gate`` is dissolved into an unmatched row and column.

    Returns (matches, unmatched_rows, unmatched_cols) where matches is a list
    of (row, col) pairs sorted by row.
    """
    cost = np.asarray(cost, dtype=float)
    n_rows, n_cols = cost.shape if cost.ndim == 2 else (0, 0)
    if n_rows == 0 or n_cols == 0:
        return [], list(range(n_rows)), list(range(n_cols))

    rows, cols = linear_sum_assignment(cost)
    matches = []
    matched_rows, matched_cols = set(), set()
    for r, c in zip(rows, cols):
        if 1.0 - cost[r, c] < gate:
            continue
        matches.append((int(r), int(c)))
        matched_rows.add(int(r))
        matched_cols.add(int(c))
    unmatched_rows = [r for r in range(n_rows) if r not in matched_rows]
    unmatched_cols = [c for c in range(n_cols) if c not in matched_cols]
    matches.sort()
    return matches, unmatched_rows, unmatched_cols
