"""Seeded synthetic drift streams and the two query regimes.

Three 2-D binary stream families:

* gauss  -- recurring covariate drift: points from a Gaussian whose center
  walks along (c, 0.5 - c) with c = ((t + 1) % 15) / 30, labeled by the fixed
  parabola x2 > 4 (x1 - 0.5)^2.
* circle -- gradual concept drift: uniform points on the unit square labeled
  by whether they fall outside a circle; the circle grows/moves through a
  schedule of concepts split over equal segments of the stream.
* covcon -- covariate and concept drift: both coordinates from a Gaussian
  with mean ((t + 1) % 7) / 10 and sigma 0.1, labeled by
  alpha * sin(pi * x1) > x2 with the inequality direction flipping every 10
  batches (first flip at t = 10).

Query regimes: mode "D" samples queries (with their labels) from the data
batch without replacement and without removing them from it; mode "S" draws
queries from a static Gaussian at (0.5, 0.5) with sigma 0.015 and labels them
with the concept active at t.

Labels are pure functions of (point, t), and each batch's randomness is
seeded by (seed, t), so any batch can be regenerated independently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidInputError
from .streams import DataBatch, QueryBatch

DATASETS = ("gauss", "circle", "covcon")
QUERY_MODES = ("D", "S")

DEFAULT_CIRCLE_SCHEDULE = (
    (0.2, 0.5, 0.15),
    (0.4, 0.5, 0.2),
    (0.6, 0.5, 0.25),
    (0.8, 0.5, 0.3),
)

STATIC_QUERY_CENTER = (0.5, 0.5)
STATIC_QUERY_SIGMA = 0.015


@dataclass(frozen=True)
class StreamSpec:
    """Everything needed to regenerate a synthetic stream deterministically."""

    dataset: str
    n_batches: int = 100
    batch_size: int = 1000
    queries_per_batch: int = 100
    query_mode: str = "D"
    seed: int = 0
    covcon_alpha: float = 1.0
    gauss_sigma: float = 0.1
    circle_schedule: tuple = DEFAULT_CIRCLE_SCHEDULE

    def __post_init__(self):
        if self.dataset not in DATASETS:
            raise InvalidInputError(f"dataset must be one of {DATASETS}, got {self.dataset!r}")
        if self.n_batches < 1 or self.batch_size < 1 or self.queries_per_batch < 1:
            raise InvalidInputError("n_batches, batch_size and queries_per_batch must be >= 1")
        if self.query_mode not in QUERY_MODES:
            raise InvalidInputError(f"query_mode must be 'D' or 'S', got {self.query_mode!r}")
        if self.query_mode == "D" and self.queries_per_batch > self.batch_size:
            raise InvalidInputError("mode D cannot sample more queries than the batch size")
        schedule = tuple(tuple(float(v) for v in concept) for concept in self.circle_schedule)
        if not schedule or any(len(c) != 3 for c in schedule):
            raise InvalidInputError("circle_schedule must be a non-empty list of (c1, c2, r)")
        object.__setattr__(self, "circle_schedule", schedule)

    def with_seed(self, seed: int) -> "StreamSpec":
        return replace(self, seed=seed)

    @property
    def name(self) -> str:
        return f"{self.dataset}-{self.query_mode}"


def _rng(seed: int, t: int, substream: int) -> np.random.Generator:
    return np.random.default_rng([seed % (2**32), t, substream])


def gauss_center(t: int) -> tuple[float, float]:
    c = ((t + 1) % 15) / 30.0
    return (c, 0.5 - c)


def covcon_mean(t: int) -> float:
    return ((t + 1) % 7) / 10.0


def covcon_flipped(t: int) -> bool:
    return (t // 10) % 2 == 1


def circle_concept(spec: StreamSpec, t: int) -> tuple[float, float, float]:
    """Concept active at batch t: the schedule covers equal stream segments."""
    k = len(spec.circle_schedule)
    seg = min(k - 1, (t * k) // spec.n_batches)
    return spec.circle_schedule[seg]


def concept_label(spec: StreamSpec, X, t: int) -> np.ndarray:
    """Ground-truth labels for points under the concept active at batch t."""
    X = np.asarray(X, dtype=np.float64)
    if spec.dataset == "gauss":
        labels = X[:, 1] > 4.0 * (X[:, 0] - 0.5) ** 2
    elif spec.dataset == "circle":
        c1, c2, r = circle_concept(spec, t)
        labels = (X[:, 0] - c1) ** 2 + (X[:, 1] - c2) ** 2 - r**2 > 0
    else:
        boundary = spec.covcon_alpha * np.sin(math.pi * X[:, 0])
        if covcon_flipped(t):
            labels = boundary < X[:, 1]
        else:
            labels = boundary > X[:, 1]
    return labels.astype(np.int64)


def gen_gauss(t: int, spec: StreamSpec) -> DataBatch:
    rng = _rng(spec.seed, t, 0)
    X = rng.normal(loc=gauss_center(t), scale=spec.gauss_sigma, size=(spec.batch_size, 2))
    return DataBatch(t, X, concept_label(spec, X, t))


def gen_circle(t: int, spec: StreamSpec) -> DataBatch:
    rng = _rng(spec.seed, t, 0)
    X = rng.uniform(0.0, 1.0, size=(spec.batch_size, 2))
    return DataBatch(t, X, concept_label(spec, X, t))


def gen_covcon(t: int, spec: StreamSpec) -> DataBatch:
    rng = _rng(spec.seed, t, 0)
    X = rng.normal(loc=covcon_mean(t), scale=0.1, size=(spec.batch_size, 2))
    return DataBatch(t, X, concept_label(spec, X, t))


_GENERATORS = {"gauss": gen_gauss, "circle": gen_circle, "covcon": gen_covcon}


def gen_batch(spec: StreamSpec, t: int) -> DataBatch:
    if not 0 <= t < spec.n_batches:
        raise InvalidInputError(f"batch index {t} outside [0, {spec.n_batches})")
    return _GENERATORS[spec.dataset](t, spec)


def make_queries(spec: StreamSpec, t: int, data_batch: DataBatch) -> QueryBatch:
    rng = _rng(spec.seed, t, 1)
    if spec.query_mode == "D":
        if spec.queries_per_batch > data_batch.size:
            raise InvalidInputError(
                f"cannot sample {spec.queries_per_batch} queries from a batch of {data_batch.size}"
            )
        idx = rng.choice(data_batch.size, size=spec.queries_per_batch, replace=False)
        return QueryBatch(t, data_batch.X[idx], data_batch.y[idx])
    Q = rng.normal(loc=STATIC_QUERY_CENTER, scale=STATIC_QUERY_SIGMA, size=(spec.queries_per_batch, 2))
    return QueryBatch(t, Q, concept_label(spec, Q, t))


def generate_stream(spec: StreamSpec) -> tuple[list[DataBatch], list[QueryBatch]]:
    """All data and query batches for the spec, in batch order."""
    data = [gen_batch(spec, t) for t in range(spec.n_batches)]
    queries = [make_queries(spec, t, data[t]) for t in range(spec.n_batches)]
    return data, queries
