"""Online retraining policies and their offline calibration.

A policy looks at one batch at a time and answers Keep or Retrain. The
decision loop (``run_policy``) trains an initial model at the range start,
then per batch feeds each policy the inputs it declares:

* ``requires_staleness`` -- the relative staleness of the current model
  (threshold, cumulative and markov policies);
* ``requires_errors`` -- the model's per-sample 0/1 errors on the current
  data batch, in stream order (drift detector policies).

Policies that keep mutable state reset it when they decide to retrain, so a
single instance can be reused across runs via ``reset()``.

``optimize_offline`` calibrates the threshold, cumulative and periodic
families against a prebuilt cost matrix by replaying the decision loop over
the matrix rows; no model is ever refit during calibration. The search is a
deterministic grid: candidate thresholds are the realized staleness values
(cumulative sums for the cumulative family) with -inf/+inf sentinels, plus a
64-point uniform refinement around the stage-1 optimum. The sentinels
guarantee the result is never worse than never-retraining or
retrain-every-batch where the family can express them, and equal-cost ties
prefer the largest (most conservative) threshold.
"""

from __future__ import annotations

import enum
import math

import numpy as np

from .costmatrix import CostMatrix, Strategy, StreamCosts, strategy_cost
from .detectors import AdwinDetector, DdmDetector
from .errors import InvalidInputError


class Decision(enum.Enum):
    KEEP = "keep"
    RETRAIN = "retrain"


class RetrainPolicy:
    """Base decision function; subclasses override ``decide``."""

    name = "base"
    requires_staleness = False
    requires_errors = False

    def reset(self) -> None:
        """Clear any per-run mutable state."""

    def decide(self, t: int, t_prime: int, *, staleness=None, errors=None, kappa=None) -> Decision:
        raise NotImplementedError

    def get_params(self) -> dict:
        return {}

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.get_params().items())
        return f"{type(self).__name__}({args})"


class ThresholdPolicy(RetrainPolicy):
    """Retrain as soon as the current staleness reaches ``tau``.

    Keep requires strictly smaller staleness, so a value exactly at the
    threshold retrains; tau = +inf never retrains and tau = -inf always
    does.
    """

    name = "threshold"
    requires_staleness = True

    def __init__(self, tau: float):
        self.tau = float(tau)

    def decide(self, t, t_prime, *, staleness=None, errors=None, kappa=None) -> Decision:
        return Decision.KEEP if staleness < self.tau else Decision.RETRAIN

    def get_params(self):
        return {"tau": self.tau}


class CumulativeThresholdPolicy(RetrainPolicy):
    """Retrain when staleness accumulated since the last training reaches
    ``tau_cum``; the accumulator resets to zero on retrain."""

    name = "cumulative"
    requires_staleness = True

    def __init__(self, tau_cum: float):
        self.tau_cum = float(tau_cum)
        self.cumulative_ = 0.0

    def reset(self):
        self.cumulative_ = 0.0

    def decide(self, t, t_prime, *, staleness=None, errors=None, kappa=None) -> Decision:
        self.cumulative_ += staleness
        if self.cumulative_ < self.tau_cum:
            return Decision.KEEP
        self.cumulative_ = 0.0
        return Decision.RETRAIN

    def get_params(self):
        return {"tau_cum": self.tau_cum}


class PeriodicPolicy(RetrainPolicy):
    """Retrain on a fixed schedule: whenever (t - offset) % period == 0."""

    name = "periodic"

    def __init__(self, period: int, offset: int = 0):
        if period < 1:
            raise InvalidInputError("period must be >= 1")
        if offset < 0:
            raise InvalidInputError("offset must be >= 0")
        self.period = int(period)
        self.offset = int(offset)

    def decide(self, t, t_prime, *, staleness=None, errors=None, kappa=None) -> Decision:
        return Decision.RETRAIN if (t - self.offset) % self.period == 0 else Decision.KEEP

    def get_params(self):
        return {"period": self.period, "offset": self.offset}


class NeverRetrainPolicy(RetrainPolicy):
    """Always keep the initial model."""

    name = "never"

    def decide(self, t, t_prime, *, staleness=None, errors=None, kappa=None) -> Decision:
        return Decision.KEEP


class MarkovPolicy(RetrainPolicy):
    """Uncalibrated threshold rule: keep only while the current staleness is
    below the current retraining cost."""

    name = "markov"
    requires_staleness = True

    def decide(self, t, t_prime, *, staleness=None, errors=None, kappa=None) -> Decision:
        return Decision.KEEP if staleness < kappa else Decision.RETRAIN


class DriftDetectorPolicy(RetrainPolicy):
    """Adapter from a per-sample drift detector to a per-batch decision.

    Error bits are fed in stream order; any detection inside the batch means
    Retrain, and the detector restarts from scratch after a retrain. Neither
    the queries nor the retraining cost influence the decision.
    """

    requires_errors = True

    def __init__(self):
        self.detector_ = self._make_detector()

    def _make_detector(self):
        raise NotImplementedError

    def reset(self):
        self.detector_ = self._make_detector()

    def decide(self, t, t_prime, *, staleness=None, errors=None, kappa=None) -> Decision:
        drifted = False
        for bit in errors:
            if self.detector_.update(int(bit)):
                drifted = True
                break
        if drifted:
            self.reset()
            return Decision.RETRAIN
        return Decision.KEEP


class DdmPolicy(DriftDetectorPolicy):
    name = "ddm"

    def __init__(self, min_samples: int = 30, warn_sigma: float = 2.0, drift_sigma: float = 3.0):
        self.min_samples = int(min_samples)
        self.warn_sigma = float(warn_sigma)
        self.drift_sigma = float(drift_sigma)
        super().__init__()

    def _make_detector(self):
        return DdmDetector(self.min_samples, self.warn_sigma, self.drift_sigma)

    def get_params(self):
        return {
            "min_samples": self.min_samples,
            "warn_sigma": self.warn_sigma,
            "drift_sigma": self.drift_sigma,
        }


class AdwinPolicy(DriftDetectorPolicy):
    name = "adwin"

    def __init__(self, delta: float = 0.002, max_buckets: int = 5):
        self.delta = float(delta)
        self.max_buckets = int(max_buckets)
        super().__init__()

    def _make_detector(self):
        return AdwinDetector(self.delta, self.max_buckets)

    def get_params(self):
        return {"delta": self.delta, "max_buckets": self.max_buckets}


POLICY_KINDS = {
    cls.name: cls
    for cls in (
        ThresholdPolicy,
        CumulativeThresholdPolicy,
        PeriodicPolicy,
        NeverRetrainPolicy,
        MarkovPolicy,
        AdwinPolicy,
        DdmPolicy,
    )
}


def make_policy(name: str, **params) -> RetrainPolicy:
    try:
        cls = POLICY_KINDS[name]
    except KeyError:
        raise InvalidInputError(
            f"unknown policy {name!r}; expected one of {sorted(POLICY_KINDS)}"
        ) from None
    return cls(**params)


def _kappa_vector(kappa, start: int, end: int) -> np.ndarray:
    return np.broadcast_to(np.asarray(kappa, dtype=np.float64), (end - start + 1,))


def run_policy(
    policy: RetrainPolicy,
    data,
    queries,
    kappa,
    model,
    kernel=None,
    *,
    start: int | None = None,
    end: int | None = None,
    costs: StreamCosts | None = None,
) -> Strategy:
    """Run the online decision loop over [start, end].

    Trains the initial model at ``start``, asks the policy once per batch,
    refits on the current batch after each Retrain, and returns the resulting
    strategy. ``costs`` may carry a prefilled cache shared across runs; the
    result is identical either way because model fits are deterministic.
    """
    if costs is None:
        costs = StreamCosts(data, queries, model, kernel)
    if start is None or end is None:
        ts = sorted(b.t for b in data)
        start = ts[0] if start is None else start
        end = ts[-1] if end is None else end
    if end < start:
        raise InvalidInputError(f"invalid batch range [{start}, {end}]")
    for t in range(start, end + 1):
        costs.data_batch(t)
        costs.query_batch(t)
    kappa_vec = _kappa_vector(kappa, start, end)
    policy.reset()
    costs.model_at(start)
    t_prime = start
    served = np.empty(end - start + 1, dtype=np.int64)
    for t in range(start, end + 1):
        inputs = {"kappa": float(kappa_vec[t - start])}
        if policy.requires_staleness:
            inputs["staleness"] = costs.staleness(t, t_prime)
        if policy.requires_errors:
            inputs["errors"] = costs.errors(t_prime, t)
        if policy.decide(t, t_prime, **inputs) is Decision.RETRAIN:
            t_prime = t
            costs.model_at(t)
        served[t - start] = t_prime
    return Strategy(start, end, served)


def replay_policy(policy: RetrainPolicy, c: CostMatrix) -> Strategy:
    """Run the decision loop against a prebuilt cost matrix.

    The matrix rows supply every staleness value the policy can ask for, so
    no model is fit. Detector policies need per-sample errors and cannot be
    replayed this way.
    """
    if policy.requires_errors:
        raise InvalidInputError(
            f"policy {policy.name!r} consumes per-sample errors and cannot be "
            "replayed from a cost matrix"
        )
    psi = c.staleness_entries()
    policy.reset()
    rel_prime = 0
    served = np.empty(c.n, dtype=np.int64)
    for j in range(c.n):
        inputs = {"kappa": float(c.kappa[j])}
        if policy.requires_staleness:
            inputs["staleness"] = float(psi[rel_prime, j])
        if policy.decide(c.start + j, c.start + rel_prime, **inputs) is Decision.RETRAIN:
            rel_prime = j
        served[j] = c.start + rel_prime
    return Strategy(c.start, c.end, served)


def _replay_cost(policy: RetrainPolicy, c: CostMatrix) -> float:
    return strategy_cost(replay_policy(policy, c), c)


def _threshold_candidates(values: np.ndarray) -> np.ndarray:
    finite = np.unique(values[np.isfinite(values)])
    return np.concatenate(([-math.inf], finite, [math.inf]))


def _search_threshold(make, candidates: np.ndarray, c: CostMatrix, refine: int = 64) -> float:
    """Two-stage grid search; ties resolve to the largest threshold.

    Preferring the largest tied threshold means the +inf sentinel wins
    whenever never retraining is already offline-optimal, so policies
    calibrated under a huge retraining cost stay retrain-free online instead
    of inheriting a knife-edge finite threshold.
    """
    evaluated: list[tuple[float, float]] = [
        (float(tau), _replay_cost(make(tau), c)) for tau in candidates
    ]
    best_tau, _ = min(evaluated, key=lambda item: (item[1], -item[0]))
    idx = int(np.searchsorted(candidates, best_tau))
    lo = candidates[idx - 1] if idx > 0 else -math.inf
    hi = candidates[idx + 1] if idx + 1 < candidates.size else math.inf
    if math.isfinite(lo) and math.isfinite(hi) and hi > lo:
        for tau in np.linspace(lo, hi, refine):
            evaluated.append((float(tau), _replay_cost(make(tau), c)))
    best_tau, _ = min(evaluated, key=lambda item: (item[1], -item[0]))
    return best_tau


def optimize_offline(family: str, c: CostMatrix) -> RetrainPolicy:
    """Pick the policy parameters that minimize the strategy cost over the
    offline matrix.

    ``family`` is 'threshold', 'cumulative' or 'periodic'. A matrix whose
    staleness entries are all zero short-circuits the threshold families to
    +inf (never retrain). The periodic search is exhaustive over periods up
    to the matrix end with every feasible offset; its ties prefer the largest
    period, then the smallest offset.
    """
    psi = c.staleness_entries()
    upper = psi[np.triu_indices(c.n, k=1)] if c.n > 1 else np.empty(0)

    if family == "threshold":
        if upper.size == 0 or not np.any(upper != 0.0):
            return ThresholdPolicy(math.inf)
        tau = _search_threshold(ThresholdPolicy, _threshold_candidates(upper), c)
        return ThresholdPolicy(tau)

    if family == "cumulative":
        if upper.size == 0 or not np.any(upper != 0.0):
            return CumulativeThresholdPolicy(math.inf)
        sums = []
        for i in range(c.n - 1):
            row = psi[i, i + 1 :]
            sums.append(np.cumsum(row[np.isfinite(row)]))
        candidates = _threshold_candidates(np.concatenate(sums))
        tau = _search_threshold(CumulativeThresholdPolicy, candidates, c)
        return CumulativeThresholdPolicy(tau)

    if family == "periodic":
        max_period = max(1, c.end)
        best = None
        for period in range(1, max_period + 1):
            for offset in range(period):
                cost = _replay_cost(PeriodicPolicy(period, offset), c)
                key = (cost, -period, offset)
                if best is None or key < best[0]:
                    best = (key, period, offset)
        return PeriodicPolicy(best[1], best[2])

    raise InvalidInputError(
        f"unknown optimizable family {family!r}; expected 'threshold', 'cumulative' or 'periodic'"
    )
