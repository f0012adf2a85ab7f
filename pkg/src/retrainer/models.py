"""Binary classifiers used as the retrainable model.

Two native model classes are provided behind a small sklearn-style estimator
API (``fit`` / ``predict`` / ``get_params``), so they compose with pipeline
tooling without pulling in an ML framework:

* ``LogisticClassifier`` -- logistic regression trained with full-batch
  gradient descent on the log loss. Full-batch (rather than stochastic)
  updates keep training deterministic for the small per-batch datasets this
  package targets.
* ``ForestClassifier`` -- bagging of greedy CART trees grown on Gini
  impurity with midpoint thresholds.

Determinism contract: fitting the same data with the same hyperparameters
(including ``seed``) produces a model with bit-identical predictions. To keep
that guarantee under drifting streams, single-class training batches produce
a constant classifier instead of raising.

Fitted models are immutable by convention and safe to share across threads.
"""

from __future__ import annotations

import inspect
import math

import numpy as np

from .errors import InvalidInputError
from .streams import DataBatch
from .validation import as_binary_labels, as_point, as_point_matrix, check_fitted, check_same_dim


def _sigmoid(z: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function."""
    z = np.clip(z, -500.0, 500.0)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class BaseClassifier:
    """Shared estimator plumbing: parameter introspection and prediction glue.

    Subclasses store constructor arguments verbatim under the same attribute
    names, which is what makes ``get_params`` / ``set_params`` (and therefore
    sklearn-style cloning) work.
    """

    @classmethod
    def _param_names(cls) -> list[str]:
        sig = inspect.signature(cls.__init__)
        return [name for name in sig.parameters if name != "self"]

    def get_params(self, deep: bool = True) -> dict:
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params):
        valid = set(self._param_names())
        for key, value in params.items():
            if key not in valid:
                raise ValueError(f"invalid parameter {key!r} for {type(self).__name__}")
            setattr(self, key, value)
        return self

    def clone(self):
        """Unfitted copy with identical hyperparameters."""
        return type(self)(**self.get_params())

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.get_params().items())
        return f"{type(self).__name__}({args})"

    def _check_X(self, X) -> np.ndarray:
        check_fitted(self)
        X = as_point_matrix(X, name="X")
        check_same_dim(self.n_features_in_, X.shape[1], name="X")
        return X

    def predict(self, X) -> np.ndarray:
        """Predicted 0/1 labels for each row of X."""
        X = self._check_X(X)
        if self.constant_ is not None:
            return np.full(X.shape[0], self.constant_, dtype=np.int64)
        return self._predict_impl(X)

    def _predict_impl(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class LogisticClassifier(BaseClassifier):
    """Logistic regression via full-batch gradient descent.

    Parameters
    ----------
    learning_rate : float
        Step size for each gradient update; must be positive.
    epochs : int
        Number of full passes over the batch; must be >= 1.
    l2 : float
        L2 penalty on the weights (the intercept is not penalized).
    seed : int
        Kept for API uniformity; weights start at zero so training is
        deterministic regardless of the seed.

    Attributes (after fit)
    ----------------------
    coef_ : ndarray of shape (d,)
    intercept_ : float
    n_features_in_ : int
    constant_ : int or None
        Set when the training batch contained a single class.
    """

    def __init__(self, learning_rate: float = 0.1, epochs: int = 100, l2: float = 0.0, seed: int = 0):
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.l2 = l2
        self.seed = seed

    def _validate_params(self):
        if self.learning_rate <= 0:
            raise InvalidInputError("learning_rate must be > 0")
        if self.epochs < 1:
            raise InvalidInputError("epochs must be >= 1")
        if self.l2 < 0:
            raise InvalidInputError("l2 must be >= 0")

    def fit(self, X, y):
        self._validate_params()
        X = as_point_matrix(X, name="X")
        y = as_binary_labels(y, n=X.shape[0], name="y")
        n, d = X.shape
        self.n_features_in_ = d
        if y.min() == y.max():
            self.constant_ = int(y[0])
            self.coef_ = np.zeros(d)
            self.intercept_ = 0.0
            return self
        self.constant_ = None
        w = np.zeros(d)
        b = 0.0
        yf = y.astype(np.float64)
        for _ in range(self.epochs):
            residual = _sigmoid(X @ w + b) - yf
            w -= self.learning_rate * (X.T @ residual / n + self.l2 * w)
            b -= self.learning_rate * float(residual.mean())
        self.coef_ = w
        self.intercept_ = b
        return self

    def decision_function(self, X) -> np.ndarray:
        X = self._check_X(X)
        if self.constant_ is not None:
            margin = math.inf if self.constant_ == 1 else -math.inf
            return np.full(X.shape[0], margin)
        return X @ self.coef_ + self.intercept_

    def _predict_impl(self, X: np.ndarray) -> np.ndarray:
        # probability 0.5 (margin exactly 0) resolves to class 0
        return (X @ self.coef_ + self.intercept_ > 0).astype(np.int64)


class _CartTree:
    """Greedy CART tree on Gini impurity, stored as flat node arrays.

    Splits scan every distinct value of each candidate feature and place the
    threshold at the midpoint between consecutive sorted values. Ties in
    impurity resolve to the lowest feature index and then the smallest
    threshold, so tree structure is a pure function of the data.
    """

    __slots__ = ("feature", "threshold", "left", "right", "value", "max_depth")

    def __init__(self, max_depth: int):
        self.max_depth = max_depth
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[int] = []

    def fit(self, X: np.ndarray, y: np.ndarray, feature_fraction: float, rng: np.random.Generator | None):
        self._grow(X, y, depth=0, feature_fraction=feature_fraction, rng=rng)
        self.feature = np.asarray(self.feature, dtype=np.int64)
        self.threshold = np.asarray(self.threshold, dtype=np.float64)
        self.left = np.asarray(self.left, dtype=np.int64)
        self.right = np.asarray(self.right, dtype=np.int64)
        self.value = np.asarray(self.value, dtype=np.int64)
        return self

    def _add_node(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(0)
        self.right.append(0)
        self.value.append(0)
        return len(self.feature) - 1

    def _grow(self, X, y, depth, feature_fraction, rng) -> int:
        node = self._add_node()
        n = y.size
        ones = int(y.sum())
        majority = 1 if 2 * ones > n else 0
        self.value[node] = majority
        self.left[node] = node
        self.right[node] = node
        if depth >= self.max_depth or ones == 0 or ones == n:
            return node
        d = X.shape[1]
        if feature_fraction >= 1.0 or rng is None:
            candidates = np.arange(d)
        else:
            k = max(1, math.ceil(feature_fraction * d))
            candidates = np.sort(rng.choice(d, size=k, replace=False))
        split = self._best_split(X, y, candidates)
        if split is None:
            return node
        feat, thr = split
        mask = X[:, feat] <= thr
        self.feature[node] = int(feat)
        self.threshold[node] = float(thr)
        self.left[node] = self._grow(X[mask], y[mask], depth + 1, feature_fraction, rng)
        self.right[node] = self._grow(X[~mask], y[~mask], depth + 1, feature_fraction, rng)
        return node

    @staticmethod
    def _best_split(X, y, candidates) -> tuple[int, float] | None:
        n = y.size
        best_gini = math.inf
        best = None
        for feat in candidates:
            vals = X[:, feat]
            order = np.argsort(vals, kind="stable")
            sv = vals[order]
            ones = np.cumsum(y[order])
            boundaries = np.nonzero(sv[1:] > sv[:-1])[0]
            if boundaries.size == 0:
                continue
            n_left = boundaries + 1.0
            ones_left = ones[boundaries].astype(np.float64)
            n_right = n - n_left
            ones_right = ones[-1] - ones_left
            gini_left = 1.0 - (ones_left / n_left) ** 2 - ((n_left - ones_left) / n_left) ** 2
            gini_right = 1.0 - (ones_right / n_right) ** 2 - ((n_right - ones_right) / n_right) ** 2
            weighted = (n_left * gini_left + n_right * gini_right) / n
            k = int(np.argmin(weighted))  # first minimum -> smallest threshold
            if weighted[k] < best_gini:
                best_gini = float(weighted[k])
                cut = boundaries[k]
                best = (int(feat), 0.5 * (sv[cut] + sv[cut + 1]))
        return best

    def predict(self, X: np.ndarray) -> np.ndarray:
        idx = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        for _ in range(self.max_depth):
            feat = self.feature[idx]
            internal = feat >= 0
            if not internal.any():
                break
            xf = X[rows, np.where(internal, feat, 0)]
            go_left = xf <= self.threshold[idx]
            nxt = np.where(go_left, self.left[idx], self.right[idx])
            idx = np.where(internal, nxt, idx)
        return self.value[idx]


class ForestClassifier(BaseClassifier):
    """Bagged CART forest with majority voting.

    Parameters
    ----------
    n_trees : int
        Number of trees; must be >= 1.
    max_depth : int
        Maximum tree depth; must be >= 1.
    feature_fraction : float in (0, 1]
        Fraction of features considered at each split. With the value 1 no
        random feature draw happens at all, so together with
        ``bootstrap=False`` the fit is seed-independent.
    bootstrap : bool
        Whether each tree trains on a bootstrap resample of the batch.
    seed : int
        Seeds the bootstrap / feature subsampling generator.

    Ties in the vote (possible with an even tree count) resolve to class 0.
    """

    def __init__(
        self,
        n_trees: int = 25,
        max_depth: int = 8,
        feature_fraction: float = 1.0,
        bootstrap: bool = True,
        seed: int = 0,
    ):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.feature_fraction = feature_fraction
        self.bootstrap = bootstrap
        self.seed = seed

    def _validate_params(self):
        if self.n_trees < 1:
            raise InvalidInputError("n_trees must be >= 1")
        if self.max_depth < 1:
            raise InvalidInputError("max_depth must be >= 1")
        if not 0.0 < self.feature_fraction <= 1.0:
            raise InvalidInputError("feature_fraction must be in (0, 1]")

    def fit(self, X, y):
        self._validate_params()
        X = as_point_matrix(X, name="X")
        y = as_binary_labels(y, n=X.shape[0], name="y")
        n, d = X.shape
        self.n_features_in_ = d
        if y.min() == y.max():
            self.constant_ = int(y[0])
            self.trees_ = []
            return self
        self.constant_ = None
        needs_rng = self.bootstrap or self.feature_fraction < 1.0
        rng = np.random.default_rng(self.seed) if needs_rng else None
        self.trees_ = []
        for _ in range(self.n_trees):
            if self.bootstrap:
                idx = rng.integers(0, n, size=n)
                Xb, yb = X[idx], y[idx]
            else:
                Xb, yb = X, y
            tree = _CartTree(self.max_depth).fit(Xb, yb, self.feature_fraction, rng)
            self.trees_.append(tree)
        return self

    def _predict_impl(self, X: np.ndarray) -> np.ndarray:
        votes = np.zeros(X.shape[0], dtype=np.int64)
        for tree in self.trees_:
            votes += tree.predict(X)
        return (2 * votes > self.n_trees).astype(np.int64)


def fit_model(batch: DataBatch, model: BaseClassifier) -> BaseClassifier:
    """Train a fresh copy of ``model`` on one data batch.

    The returned estimator records the batch it was trained on in
    ``trained_at_``; the prototype passed in is left untouched.
    """
    fitted = model.clone().fit(batch.X, batch.y)
    fitted.trained_at_ = batch.t
    return fitted


def predict_one(model: BaseClassifier, point) -> int:
    """Predict the 0/1 label of a single point."""
    check_fitted(model)
    x = as_point(point, dim=model.n_features_in_)
    return int(model.predict(x.reshape(1, -1))[0])


MODEL_KINDS = {
    "logistic": LogisticClassifier,
    "forest": ForestClassifier,
}


def make_model(kind: str, **params) -> BaseClassifier:
    """Instantiate a model prototype by name ('logistic' or 'forest')."""
    try:
        cls = MODEL_KINDS[kind]
    except KeyError:
        raise InvalidInputError(
            f"unknown model kind {kind!r}; expected one of {sorted(MODEL_KINDS)}"
        ) from None
    return cls(**params)
