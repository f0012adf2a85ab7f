"""Retrospectively optimal retraining strategy via dynamic programming.

Given a complete cost matrix over [start, end], the table value at (t, p) is
the cheapest cost of any reachable strategy through batch t whose current
model was trained at batch p. Filling the table row by row and walking the
argmins backwards recovers the set of batches where the optimal strategy
retrains; the walk always terminates by including the range start, where
training is forced.

Runs in O(n^2) time; entries above the feasible region stay +inf, and
negative staleness entries are handled like any other value.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .costmatrix import CostMatrix, Strategy, format_value
from .errors import InvalidInputError


@dataclass(frozen=True)
class DPTable:
    """Memoized best-cost table; ``values[t, p]`` uses range-relative indices."""

    start: int
    values: np.ndarray

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def optimal_cost(self) -> float:
        return float(self.values[-1].min())

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "p", "value"])
            for t in range(self.n):
                for p in range(self.n):
                    writer.writerow([self.start + t, self.start + p, format_value(self.values[t, p])])


@dataclass(frozen=True)
class OracleRetrains:
    """Sorted batches where the optimal strategy retrains; always includes
    the range start."""

    batches: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "batches", tuple(sorted(int(b) for b in self.batches)))


def memoize_dp(c: CostMatrix) -> DPTable:
    """Fill the best-cost table from a cost matrix.

    The first column is the never-retrain prefix: cumulative costs of serving
    every batch with the model from the range start. Interior cells either
    extend the same model by one batch or pay the diagonal cost on top of the
    best table value from the previous row.
    """
    n = c.n
    E = c.entries
    V = np.full((n, n), math.inf)
    V[:, 0] = np.cumsum(E[0, :])
    for t in range(1, n):
        prev = V[t - 1]
        if t > 1:
            V[t, 1:t] = E[1:t, t] + prev[1:t]
        V[t, t] = E[t, t] + prev[:t].min()
    return DPTable(c.start, V)


def oracle_retrains(table: DPTable) -> OracleRetrains:
    """Walk the table backwards, collecting the retrain batches.

    Argmin ties resolve to the smallest batch index. The walk stops once the
    range start has been collected.
    """
    V = table.values
    p = int(np.argmin(V[-1]))
    collected = [p]
    while p > 0:
        p = int(np.argmin(V[p - 1]))
        collected.append(p)
    return OracleRetrains(tuple(table.start + b for b in collected))


def expand_to_strategy(retrains: OracleRetrains, start: int, end: int) -> Strategy:
    """Fill in the Keep decisions: each batch is served by the most recent
    retrain at or before it."""
    batches = retrains.batches
    if not batches or batches[0] != start:
        raise InvalidInputError(
            f"retrain set must include the range start {start}, got {batches}"
        )
    if batches[-1] > end:
        raise InvalidInputError(f"retrain batch {batches[-1]} outside range end {end}")
    served = np.empty(end - start + 1, dtype=np.int64)
    current = start
    pos = 0
    for t in range(start, end + 1):
        if pos < len(batches) and batches[pos] == t:
            current = t
            pos += 1
        served[t - start] = current
    return Strategy(start, end, served)


def oracle_strategy(c: CostMatrix) -> tuple[Strategy, float]:
    """Optimal strategy for a cost matrix together with its cost."""
    table = memoize_dp(c)
    retrains = oracle_retrains(table)
    return expand_to_strategy(retrains, c.start, c.end), table.optimal_cost
