"""Interval cost matrices and retraining strategies.

For a batch range [start, end] the cost matrix C holds, at C[t', t]:

* t' <  t : the relative staleness of serving batch t with the model
            trained at t' (may be negative, never clamped);
* t' == t : the retraining cost kappa_t charged for training at t;
* t' >  t : +inf (a model cannot serve batches before it exists).

A strategy records which trained model served each batch. Reachable
strategies start with a forced training at ``start`` and at every later step
either keep the previous model or switch to one trained at the current
batch. The cost of a strategy is the sum of its matrix entries.

``StreamCosts`` is the shared computation cache behind matrix builds, policy
runs and evaluation: per-batch fitted models, per-pair 0/1 error vectors and
query kernel weights are computed once and reused. Staleness entries do not
depend on kappa, so sweeping kappa only rewrites the diagonal.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolationError, InvalidInputError
from .models import BaseClassifier, fit_model
from .staleness import KernelConfig, default_gamma, rbf_weights
from .streams import DataBatch, QueryBatch
from .validation import check_same_dim


@dataclass(frozen=True)
class Strategy:
    """Model assignment s_t for every batch t in [start, end]."""

    start: int
    end: int
    served_by: np.ndarray

    def __post_init__(self):
        served = np.asarray(self.served_by, dtype=np.int64)
        if served.ndim != 1 or served.size != self.end - self.start + 1:
            raise InvalidInputError(
                f"served_by must have length {self.end - self.start + 1}, got {served.size}"
            )
        object.__setattr__(self, "served_by", served)

    def serving(self, t: int) -> int:
        """Training batch of the model that served batch t."""
        if not self.start <= t <= self.end:
            raise InvalidInputError(f"batch {t} outside strategy range [{self.start}, {self.end}]")
        return int(self.served_by[t - self.start])

    @property
    def n_retrains(self) -> int:
        """Number of trainings, including the forced one at ``start``."""
        t = np.arange(self.start, self.end + 1)
        return int(np.count_nonzero(self.served_by == t))

    @property
    def retrain_batches(self) -> tuple[int, ...]:
        t = np.arange(self.start, self.end + 1)
        return tuple(int(v) for v in t[self.served_by == t])

    def __str__(self):
        return "|".join(str(int(s)) for s in self.served_by)


def validate_strategy(strategy: Strategy) -> str | None:
    """Return None if the strategy is reachable by the decision loop,
    otherwise a description of the first violation."""
    s = strategy.served_by
    if s[0] != strategy.start:
        return (
            f"s_{strategy.start} = {s[0]} but the initial training must happen "
            f"at the range start {strategy.start}"
        )
    for i in range(1, s.size):
        t = strategy.start + i
        if s[i] != s[i - 1] and s[i] != t:
            return f"s_{t} = {s[i]} is neither the previous model {s[i - 1]} nor {t}"
    return None


@dataclass(frozen=True)
class CostMatrix:
    """Upper-triangular decision costs for batches [start, end].

    ``entries[i, j]`` corresponds to batches (start + i, start + j).
    """

    start: int
    entries: np.ndarray
    kappa: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.float64)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise InvalidInputError(f"entries must be square, got shape {entries.shape}")
        kappa = np.broadcast_to(np.asarray(self.kappa, dtype=np.float64), (entries.shape[0],)).copy()
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "kappa", kappa)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def end(self) -> int:
        return self.start + self.n - 1

    def cost(self, t_prime: int, t: int) -> float:
        """C[t', t] with absolute batch indices."""
        return float(self.entries[t_prime - self.start, t - self.start])

    def staleness_entries(self) -> np.ndarray:
        """The kappa-free view: staleness above the diagonal, zero on it."""
        out = self.entries.copy()
        np.fill_diagonal(out, 0.0)
        return out

    def with_kappa(self, kappa) -> "CostMatrix":
        """Same staleness entries, new retraining costs on the diagonal."""
        entries = self.entries.copy()
        kappa_vec = np.broadcast_to(np.asarray(kappa, dtype=np.float64), (self.n,))
        np.fill_diagonal(entries, kappa_vec)
        return CostMatrix(self.start, entries, kappa_vec)

    def to_csv(self, path) -> None:
        """Write all cells as (t_prime, t, value) rows; inf as the literal 'inf'."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t_prime", "t", "value"])
            for i in range(self.n):
                for j in range(self.n):
                    writer.writerow([self.start + i, self.start + j, format_value(self.entries[i, j])])

    @classmethod
    def from_csv(cls, path) -> "CostMatrix":
        cells: dict[tuple[int, int], float] = {}
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != ["t_prime", "t", "value"]:
                raise InvalidInputError(f"unexpected matrix CSV header: {header}")
            for row in reader:
                if not row:
                    continue
                cells[(int(row[0]), int(row[1]))] = parse_value(row[2])
        if not cells:
            raise InvalidInputError("matrix CSV contains no cells")
        start = min(tp for tp, _ in cells)
        end = max(t for _, t in cells)
        n = end - start + 1
        entries = np.full((n, n), math.inf)
        for (tp, t), value in cells.items():
            entries[tp - start, t - start] = value
        kappa = np.diagonal(entries).copy()
        return cls(start, entries, kappa)


def format_value(x: float) -> str:
    """Shortest round-trip decimal text; infinities as 'inf' / '-inf'."""
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def parse_value(text: str) -> float:
    return float(text)


class StreamCosts:
    """Caches everything derivable from (streams, model prototype, kernel).

    Streams are passed as sequences of batches; batches are indexed by their
    own ``t`` field, so partial streams work as long as the batches needed by
    a request are present and contiguous in dimensionality.
    """

    def __init__(
        self,
        data,
        queries,
        model: BaseClassifier,
        kernel: KernelConfig | None = None,
    ):
        self._data: dict[int, DataBatch] = {b.t: b for b in data}
        self._queries: dict[int, QueryBatch] = {b.t: b for b in queries}
        if not self._data:
            raise InvalidInputError("data stream is empty")
        dim = next(iter(self._data.values())).dim
        for b in self._data.values():
            check_same_dim(dim, b.dim, name=f"DataBatch[{b.t}]")
        for q in self._queries.values():
            check_same_dim(dim, q.dim, name=f"QueryBatch[{q.t}]")
        self.model = model
        self.kernel = kernel if kernel is not None else KernelConfig(default_gamma(dim))
        self._models: dict[int, BaseClassifier] = {}
        self._errors: dict[tuple[int, int], np.ndarray] = {}
        self._weights: dict[tuple[int, int], np.ndarray] = {}
        self._query_preds: dict[tuple[int, int], np.ndarray] = {}
        self._staleness_base: dict[tuple[int, int], np.ndarray] = {}

    def data_batch(self, t: int) -> DataBatch:
        try:
            return self._data[t]
        except KeyError:
            raise InvalidInputError(f"data stream has a gap: no batch {t}") from None

    def query_batch(self, t: int) -> QueryBatch:
        try:
            return self._queries[t]
        except KeyError:
            raise InvalidInputError(f"query stream has a gap: no batch {t}") from None

    def model_at(self, t: int) -> BaseClassifier:
        """The model trained on batch t (fitted lazily, cached)."""
        if t not in self._models:
            self._models[t] = fit_model(self.data_batch(t), self.model)
        return self._models[t]

    def errors(self, t_model: int, t_data: int) -> np.ndarray:
        """0/1 losses of model t_model on data batch t_data, stream order."""
        key = (t_model, t_data)
        if key not in self._errors:
            batch = self.data_batch(t_data)
            preds = self.model_at(t_model).predict(batch.X)
            self._errors[key] = (preds != batch.y).astype(np.float64)
        return self._errors[key]

    def query_weight(self, t_query: int, t_data: int) -> np.ndarray:
        """Per-data-point kernel mass of the query batch: sum_q sim(q, x)."""
        key = (t_query, t_data)
        if key not in self._weights:
            sims = rbf_weights(
                self.query_batch(t_query).X, self.data_batch(t_data).X, self.kernel.gamma
            )
            self._weights[key] = sims.sum(axis=0)
        return self._weights[key]

    def query_predictions(self, t_model: int, t_query: int) -> np.ndarray:
        key = (t_model, t_query)
        if key not in self._query_preds:
            self._query_preds[key] = self.model_at(t_model).predict(self.query_batch(t_query).X)
        return self._query_preds[key]

    def batch_staleness(self, t_query: int, t_data: int, t_model: int) -> float:
        """Total staleness of model t_model for queries t_query over data t_data."""
        w = self.query_weight(t_query, t_data)
        losses = self.errors(t_model, t_data)
        return float(w @ losses) / self.data_batch(t_data).size

    def staleness(self, t: int, t_prime: int) -> float:
        """Relative staleness of serving batch t with the model from t_prime."""
        if t_prime > t:
            raise InvalidInputError(f"model batch {t_prime} is newer than batch {t}")
        if t_prime == t:
            return 0.0
        return self.batch_staleness(t, t, t_prime) - self.batch_staleness(t, t_prime, t_prime)

    def staleness_matrix(self, start: int, end: int) -> np.ndarray:
        """Upper-triangular relative staleness over [start, end]; zero diagonal,
        +inf below. Cached per range and shared across kappa values."""
        key = (start, end)
        if key not in self._staleness_base:
            n = end - start + 1
            if n < 1:
                raise InvalidInputError(f"invalid batch range [{start}, {end}]")
            out = np.full((n, n), math.inf)
            np.fill_diagonal(out, 0.0)
            for j in range(n):
                for i in range(j):
                    out[i, j] = self.staleness(start + j, start + i)
            self._staleness_base[key] = out
        return self._staleness_base[key]

    def cost_matrix(self, start: int, end: int, kappa) -> CostMatrix:
        entries = self.staleness_matrix(start, end).copy()
        n = end - start + 1
        kappa_vec = np.broadcast_to(np.asarray(kappa, dtype=np.float64), (n,))
        np.fill_diagonal(entries, kappa_vec)
        return CostMatrix(start, entries, kappa_vec)


def build_cost_matrix(
    data,
    queries,
    kappa,
    model: BaseClassifier,
    kernel: KernelConfig | None = None,
) -> CostMatrix:
    """Train one model per batch and fill the cost matrix for the full range
    covered by ``data``; ``queries`` must cover the same contiguous range."""
    data = list(data)
    queries = list(queries)
    if not data or not queries:
        raise InvalidInputError("data and query streams must be non-empty")
    data_ts = [b.t for b in data]
    query_ts = [q.t for q in queries]
    start, end = min(data_ts), max(data_ts)
    if sorted(data_ts) != list(range(start, end + 1)):
        raise InvalidInputError("data batches do not form a contiguous range")
    if sorted(query_ts) != list(range(start, end + 1)):
        raise InvalidInputError(
            f"query batches cover {min(query_ts)}..{max(query_ts)}, expected {start}..{end}"
        )
    kappa_vec = np.broadcast_to(np.asarray(kappa, dtype=np.float64), (end - start + 1,))
    costs = StreamCosts(data, queries, model, kernel)
    return costs.cost_matrix(start, end, kappa_vec)


def strategy_cost(strategy: Strategy, c: CostMatrix) -> float:
    """Sum of C[s_t, t] over the strategy's range."""
    if strategy.start != c.start or strategy.end != c.end:
        raise ContractViolationError(
            f"strategy range [{strategy.start}, {strategy.end}] does not match "
            f"matrix range [{c.start}, {c.end}]"
        )
    violation = validate_strategy(strategy)
    if violation is not None:
        raise ContractViolationError(violation)
    rows = strategy.served_by - c.start
    cols = np.arange(c.n)
    return float(np.sum(c.entries[rows, cols]))


def cumulative_cost_trace(strategy: Strategy, c: CostMatrix) -> np.ndarray:
    """Partial sums of the per-batch cost terms; the last value equals
    ``strategy_cost``. Useful for plot-ready exports."""
    if strategy.start != c.start or strategy.end != c.end:
        raise ContractViolationError("strategy and matrix ranges do not match")
    violation = validate_strategy(strategy)
    if violation is not None:
        raise ContractViolationError(violation)
    rows = strategy.served_by - c.start
    cols = np.arange(c.n)
    return np.cumsum(c.entries[rows, cols])
