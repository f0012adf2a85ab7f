"""Kernel-weighted staleness costs.

The staleness of a model with respect to a query is the model's expected
misclassification in the query's neighborhood:

    query_staleness(q, D, M) = (1/|D|) * sum over (x, y) in D of
                                   sim(q, x) * loss(M, x, y)

with an RBF similarity sim(q, x) = exp(-gamma * ||q - x||^2) and the 0/1
loss. Summing over a query batch gives the batch staleness; the decision
signal used by cost-aware policies is the *relative* staleness: how much
worse the model does on today's data than on the data it was trained on,

    relative_staleness = total(Q_t, D_t, M) - total(Q_t, D_train, M).

The relative form is zero when the data distribution is static (retraining
would reproduce the same model), and can be negative.

All operations are pure functions over immutable inputs; sums accumulate in
float64 in input order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError, InvalidInputError
from .models import BaseClassifier
from .streams import DataBatch, QueryBatch
from .validation import as_point, as_point_matrix, check_same_dim


@dataclass(frozen=True)
class KernelConfig:
    """RBF kernel width; gamma is the inverse squared length scale."""

    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise InvalidInputError(f"gamma must be > 0, got {self.gamma}")


def default_gamma(dim: int) -> float:
    """Scale-free default: gamma = 1/d."""
    if dim < 1:
        raise InvalidInputError("dimensionality must be >= 1")
    return 1.0 / dim


def rbf_similarity(q, x, kernel: KernelConfig) -> float:
    """exp(-gamma * ||q - x||^2); symmetric, in (0, 1]."""
    q = as_point(q, name="q")
    x = as_point(x, dim=q.size, name="x")
    diff = q - x
    return float(np.exp(-kernel.gamma * float(diff @ diff)))


def rbf_weights(Q, X, gamma: float) -> np.ndarray:
    """Pairwise similarity matrix of shape (n_queries, n_points)."""
    Q = as_point_matrix(Q, name="Q")
    X = as_point_matrix(X, name="X")
    check_same_dim(Q.shape[1], X.shape[1], name="X")
    sq = np.sum(Q * Q, axis=1)[:, None] + np.sum(X * X, axis=1)[None, :] - 2.0 * (Q @ X.T)
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


def zero_one_loss(model: BaseClassifier, x, y: int) -> int:
    """1 if the model mislabels the point, else 0."""
    from .models import predict_one

    return int(predict_one(model, x) != int(y))


def error_vector(model: BaseClassifier, batch: DataBatch) -> np.ndarray:
    """Per-point 0/1 losses of the model on a batch, in stream order."""
    return (model.predict(batch.X) != batch.y).astype(np.float64)


def query_staleness(q, data: DataBatch, model: BaseClassifier, kernel: KernelConfig) -> float:
    """Expected loss of one query in the region of the data; in [0, 1]."""
    if data.size == 0:
        raise InvalidInputError("data batch is empty")
    q = as_point(q, dim=data.dim, name="q")
    sims = rbf_weights(q.reshape(1, -1), data.X, kernel.gamma)[0]
    losses = error_vector(model, data)
    return float(sims @ losses) / data.size


def staleness_total(queries: QueryBatch, data: DataBatch, model: BaseClassifier, kernel: KernelConfig) -> float:
    """Sum of per-query staleness over the batch; in [0, n_queries]."""
    if data.size == 0:
        raise InvalidInputError("data batch is empty")
    check_same_dim(data.dim, queries.dim, name="queries")
    sims = rbf_weights(queries.X, data.X, kernel.gamma)
    losses = error_vector(model, data)
    return float(sims.sum(axis=0) @ losses) / data.size


def relative_staleness(
    queries: QueryBatch,
    data_now: DataBatch,
    data_train: DataBatch,
    model: BaseClassifier,
    kernel: KernelConfig,
) -> float:
    """Increase in staleness from the training batch to the current batch.

    Requires the model to actually have been trained on ``data_train``;
    bounded by the query count in absolute value and exactly zero when the
    two data batches coincide.
    """
    trained_at = getattr(model, "trained_at_", None)
    if trained_at is not None and trained_at != data_train.t:
        raise ContractViolationError(
            f"model was trained at batch {trained_at}, not at {data_train.t}"
        )
    if data_train.t > data_now.t:
        raise ContractViolationError(
            f"training batch {data_train.t} is newer than current batch {data_now.t}"
        )
    return staleness_total(queries, data_now, model, kernel) - staleness_total(
        queries, data_train, model, kernel
    )
