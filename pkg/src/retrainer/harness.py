"""Stream ingestion, sweep orchestration, evaluation metrics and reporting.

A run is driven by a ``RunConfig``: stream source (generator spec or CSV),
offline/online split, retraining costs to sweep, the policies to evaluate,
the model and kernel, and the seeds. Per (seed, kappa) the sweep

1. builds the offline cost matrix over [0, t_offline] and calibrates every
   policy marked "optimize" on it,
2. builds the online matrix over (t_offline, t_online], computes the optimal
   strategy on it, and
3. runs each policy through the online decision loop, pricing its strategy
   on the online matrix and scoring prequential query accuracy.

Staleness entries do not depend on kappa, so each seed computes them once;
the kappa sweep only rewrites matrix diagonals. All outputs are plain CSV
with full-precision floats, so identical configs produce byte-identical
files.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .costmatrix import CostMatrix, Strategy, StreamCosts, strategy_cost, format_value
from .datagen import StreamSpec, generate_stream
from .errors import InvalidInputError, StreamParseError, UndefinedMetricError
from .models import BaseClassifier, MODEL_KINDS, make_model
from .oracle import oracle_strategy
from .policies import RetrainPolicy, make_policy, optimize_offline, run_policy
from .staleness import KernelConfig
from .streams import DataBatch, QueryBatch

OPTIMIZABLE = ("threshold", "cumulative", "periodic")

RESULT_COLUMNS = (
    "dataset",
    "policy",
    "kappa",
    "seed",
    "strategy_cost",
    "oracle_cost",
    "scpe",
    "n_retrains",
    "query_accuracy",
    "strategy",
)


def scpe(policy_cost: float, oracle_cost: float) -> float:
    """Strategy-cost percentage error against the optimal cost."""
    if oracle_cost == 0:
        raise UndefinedMetricError("percentage error is undefined for a zero optimal cost")
    return 100.0 * abs(policy_cost - oracle_cost) / abs(oracle_cost)


def evaluate_prequential(
    strategy: Strategy,
    data,
    queries,
    model: BaseClassifier | None = None,
    kernel: KernelConfig | None = None,
    *,
    costs: StreamCosts | None = None,
) -> float:
    """Mean per-batch query accuracy under test-then-train staggering.

    Queries at batch t are answered by the model in hand *before* the
    decision at t, i.e. the model assigned at t - 1; at the first batch this
    is the initial model trained at the range start.
    """
    if costs is None:
        costs = StreamCosts(data, queries, model, kernel)
    accs = []
    for t in range(strategy.start, strategy.end + 1):
        serving = strategy.start if t == strategy.start else strategy.serving(t - 1)
        batch = costs.query_batch(t)
        if batch.eval_labels is None:
            raise InvalidInputError(f"query batch {t} has no eval labels")
        preds = costs.query_predictions(serving, t)
        accs.append(float(np.mean(preds == batch.eval_labels)))
    return float(np.mean(accs))


@dataclass(frozen=True)
class PolicySpec:
    """One policy entry of a run config; params is a dict or 'optimize'."""

    name: str
    params: dict | str = field(default_factory=dict)

    def __post_init__(self):
        if isinstance(self.params, str):
            if self.params != "optimize":
                raise InvalidInputError(f"policy params must be a dict or 'optimize', got {self.params!r}")
            if self.name not in OPTIMIZABLE:
                raise InvalidInputError(f"policy {self.name!r} has no optimizable parameters")

    @property
    def optimize(self) -> bool:
        return self.params == "optimize"

    def build(self, offline_matrix: CostMatrix | None = None) -> RetrainPolicy:
        if self.optimize:
            if offline_matrix is None:
                raise InvalidInputError(f"policy {self.name!r} needs an offline matrix to optimize")
            return optimize_offline(self.name, offline_matrix)
        return make_policy(self.name, **self.params)


@dataclass
class RunConfig:
    """Declarative description of a sweep."""

    stream: StreamSpec | None
    t_offline: int
    t_online: int
    kappas: list
    policies: list
    model_kind: str = "forest"
    model_params: dict = field(default_factory=dict)
    gamma: float | None = None
    seeds: list = field(default_factory=lambda: [0])
    csv_path: str | None = None
    n_batches: int | None = None
    queries_per_batch: int | None = None
    output: str | None = None

    def __post_init__(self):
        if (self.stream is None) == (self.csv_path is None):
            raise InvalidInputError("exactly one of stream spec and csv_path must be set")
        if not 0 <= self.t_offline < self.t_online:
            raise InvalidInputError(
                f"need 0 <= t_offline < t_online, got {self.t_offline}, {self.t_online}"
            )
        total = self.stream.n_batches if self.stream is not None else self.n_batches
        if total is not None and self.t_online >= total:
            raise InvalidInputError(f"t_online {self.t_online} needs {self.t_online + 1} batches, stream has {total}")
        self.kappas = [float(k) for k in self.kappas]
        if not self.kappas or any(k < 0 for k in self.kappas):
            raise InvalidInputError("kappas must be a non-empty list of values >= 0")
        if not self.seeds:
            raise InvalidInputError("seeds must be non-empty")
        self.seeds = [int(s) for s in self.seeds]
        if self.model_kind not in MODEL_KINDS:
            raise InvalidInputError(f"unknown model kind {self.model_kind!r}")
        if self.gamma is not None and not self.gamma > 0:
            raise InvalidInputError("gamma must be > 0 when given")
        self.policies = [
            p if isinstance(p, PolicySpec) else PolicySpec(p["name"], p.get("params", {}))
            for p in self.policies
        ]

    @property
    def dataset_name(self) -> str:
        if self.stream is not None:
            return self.stream.name
        return Path(self.csv_path).stem

    @property
    def kernel(self) -> KernelConfig | None:
        return KernelConfig(self.gamma) if self.gamma is not None else None

    def model_for_seed(self, seed: int) -> BaseClassifier:
        params = dict(self.model_params)
        params["seed"] = int(params.get("seed", 0)) + seed
        return make_model(self.model_kind, **params)

    def stream_for_seed(self, seed: int) -> tuple[list[DataBatch], list[QueryBatch]]:
        if self.stream is not None:
            return generate_stream(self.stream.with_seed(seed))
        if self.n_batches is None:
            raise InvalidInputError("csv streams need n_batches in the config")
        return load_csv_stream(
            self.csv_path,
            self.n_batches,
            seed=seed,
            queries_per_batch=self.queries_per_batch,
        )

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        raw = dict(raw)
        stream_raw = raw.pop("stream", None)
        stream = None
        csv_path = raw.pop("csv_path", None)
        n_batches = raw.pop("n_batches", None)
        queries_per_batch = raw.pop("queries_per_batch", None)
        if stream_raw is not None:
            stream_raw = dict(stream_raw)
            if stream_raw.get("dataset") == "csv":
                csv_path = stream_raw.get("path")
                n_batches = stream_raw.get("n_batches", n_batches)
                queries_per_batch = stream_raw.get("queries_per_batch", queries_per_batch)
                stream = None
            else:
                stream_raw.pop("path", None)
                if "circle_schedule" in stream_raw and stream_raw["circle_schedule"] is None:
                    stream_raw.pop("circle_schedule")
                stream = StreamSpec(**stream_raw)
        model_raw = dict(raw.pop("model", {"kind": "forest"}))
        model_kind = model_raw.pop("kind", "forest")
        return cls(
            stream=stream,
            csv_path=csv_path,
            n_batches=n_batches,
            queries_per_batch=queries_per_batch,
            t_offline=raw.pop("t_offline"),
            t_online=raw.pop("t_online"),
            kappas=raw.pop("kappas"),
            policies=raw.pop("policies"),
            model_kind=model_kind,
            model_params=model_raw,
            gamma=raw.pop("gamma", None),
            seeds=raw.pop("seeds", [0]),
            output=raw.pop("output", None),
        )

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class RunResult:
    """One (policy, kappa, seed) outcome."""

    dataset: str
    policy: str
    kappa: float
    seed: int
    strategy_cost: float
    oracle_cost: float
    scpe: float | None
    n_retrains: int
    query_accuracy: float
    strategy: Strategy


def load_csv_stream(
    path,
    n_batches: int | None = None,
    *,
    seed: int = 0,
    queries_per_batch: int | None = None,
) -> tuple[list[DataBatch], list[QueryBatch]]:
    """Read a stream CSV (header ``t,f0..f{d-1},label,is_query``).

    Files carrying explicit query rows (is_query = 1) are trusted as-is: rows
    are grouped by their t column, so a saved stream reloads identically.
    Plain data files (no query rows) are re-batched: rows are partitioned in
    file order into ``n_batches`` equal batches (trailing remainder dropped)
    and 10% of each batch (or ``queries_per_batch``) is sampled, seeded, as
    data-mode queries.
    """
    rows: list[tuple[int, np.ndarray, int, int]] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise StreamParseError(1, "empty file")
        n_cols = len(header)
        expected = ["t"] + [f"f{i}" for i in range(n_cols - 3)] + ["label", "is_query"]
        if n_cols < 4 or header != expected:
            raise StreamParseError(1, f"unexpected header {header!r}")
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != n_cols:
                raise StreamParseError(row_no, f"expected {n_cols} columns, got {len(row)}")
            try:
                t = int(row[0])
                feats = np.array([float(v) for v in row[1:-2]], dtype=np.float64)
                label = int(row[-2])
                is_query = int(row[-1])
            except ValueError as exc:
                raise StreamParseError(row_no, str(exc)) from None
            if label not in (0, 1):
                raise StreamParseError(row_no, f"label must be 0 or 1, got {label}")
            if is_query not in (0, 1):
                raise StreamParseError(row_no, f"is_query must be 0 or 1, got {is_query}")
            if not np.all(np.isfinite(feats)):
                raise StreamParseError(row_no, "non-finite feature value")
            rows.append((t, feats, label, is_query))
    if not rows:
        raise StreamParseError(2, "no data rows")

    if any(r[3] == 1 for r in rows):
        return _group_marked_rows(rows, n_batches)
    return _rebatch_rows(rows, n_batches, seed, queries_per_batch)


def _group_marked_rows(rows, n_batches):
    grouped: dict[int, tuple[list, list]] = {}
    for t, feats, label, is_query in rows:
        bucket = grouped.setdefault(t, ([], []))[is_query]
        bucket.append((feats, label))
    ts = sorted(grouped)
    if ts != list(range(len(ts))):
        raise InvalidInputError(f"batch indices are not contiguous from 0: {ts[:5]}...")
    if n_batches is not None and len(ts) != n_batches:
        raise InvalidInputError(f"file holds {len(ts)} batches, expected {n_batches}")
    data, queries = [], []
    for t in ts:
        d, q = grouped[t]
        if not d or not q:
            raise InvalidInputError(f"batch {t} is missing data or query rows")
        data.append(DataBatch(t, np.stack([f for f, _ in d]), [lab for _, lab in d]))
        queries.append(QueryBatch(t, np.stack([f for f, _ in q]), [lab for _, lab in q]))
    return data, queries


def _rebatch_rows(rows, n_batches, seed, queries_per_batch):
    if n_batches is None or n_batches < 1:
        raise InvalidInputError("n_batches is required to batch a plain data file")
    if len(rows) < n_batches:
        raise InvalidInputError(f"{len(rows)} rows cannot fill {n_batches} batches")
    batch_size = len(rows) // n_batches
    q_per_batch = queries_per_batch if queries_per_batch is not None else max(1, batch_size // 10)
    if q_per_batch > batch_size:
        raise InvalidInputError(f"cannot sample {q_per_batch} queries from batches of {batch_size}")
    data, queries = [], []
    for t in range(n_batches):
        chunk = rows[t * batch_size : (t + 1) * batch_size]
        X = np.stack([r[1] for r in chunk])
        y = np.array([r[2] for r in chunk], dtype=np.int64)
        batch = DataBatch(t, X, y)
        rng = np.random.default_rng([seed % (2**32), t, 1])
        idx = rng.choice(batch_size, size=q_per_batch, replace=False)
        data.append(batch)
        queries.append(QueryBatch(t, X[idx], y[idx]))
    return data, queries


def save_stream_csv(path, data, queries) -> None:
    """Write a stream in the shared CSV format (data rows then query rows per
    batch; query labels are required)."""
    if not data:
        raise InvalidInputError("nothing to save: empty data stream")
    d = data[0].dim
    query_by_t = {q.t: q for q in queries}
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t"] + [f"f{i}" for i in range(d)] + ["label", "is_query"])
        for batch in data:
            for x, y in zip(batch.X, batch.y):
                writer.writerow([batch.t] + [format_value(v) for v in x] + [int(y), 0])
            q = query_by_t.get(batch.t)
            if q is not None:
                if q.eval_labels is None:
                    raise InvalidInputError(f"query batch {q.t} has no labels to save")
                for x, y in zip(q.X, q.eval_labels):
                    writer.writerow([batch.t] + [format_value(v) for v in x] + [int(y), 1])


def run_sweep(cfg: RunConfig, cost_cache: dict | None = None) -> list[RunResult]:
    """Evaluate oracle and every configured policy over seeds and kappas.

    ``cost_cache`` (seed -> (data, queries, StreamCosts)) is consulted and
    populated when given, so repeated sweeps over the same streams skip the
    expensive staleness recomputation.
    """
    results: list[RunResult] = []
    on_start, on_end = cfg.t_offline + 1, cfg.t_online
    for seed in cfg.seeds:
        if cost_cache is not None and seed in cost_cache:
            data, queries, costs = cost_cache[seed]
        else:
            data, queries = cfg.stream_for_seed(seed)
            costs = StreamCosts(data, queries, cfg.model_for_seed(seed), cfg.kernel)
            if cost_cache is not None:
                cost_cache[seed] = (data, queries, costs)
        for kappa in cfg.kappas:
            offline_c = costs.cost_matrix(0, cfg.t_offline, kappa)
            online_c = costs.cost_matrix(on_start, on_end, kappa)
            opt_strategy, opt_cost = oracle_strategy(online_c)
            results.append(
                RunResult(
                    dataset=cfg.dataset_name,
                    policy="oracle",
                    kappa=kappa,
                    seed=seed,
                    strategy_cost=opt_cost,
                    oracle_cost=opt_cost,
                    scpe=0.0 if opt_cost != 0 else None,
                    n_retrains=opt_strategy.n_retrains,
                    query_accuracy=evaluate_prequential(opt_strategy, data, queries, costs=costs),
                    strategy=opt_strategy,
                )
            )
            for spec in cfg.policies:
                try:
                    policy = spec.build(offline_c)
                    strat = run_policy(
                        policy, data, queries, kappa, costs.model,
                        start=on_start, end=on_end, costs=costs,
                    )
                    cost = strategy_cost(strat, online_c)
                    acc = evaluate_prequential(strat, data, queries, costs=costs)
                except UndefinedMetricError:
                    raise
                except Exception as exc:
                    raise RuntimeError(
                        f"policy={spec.name} kappa={kappa} seed={seed}: {exc}"
                    ) from exc
                results.append(
                    RunResult(
                        dataset=cfg.dataset_name,
                        policy=spec.name,
                        kappa=kappa,
                        seed=seed,
                        strategy_cost=cost,
                        oracle_cost=opt_cost,
                        scpe=scpe(cost, opt_cost) if opt_cost != 0 else None,
                        n_retrains=strat.n_retrains,
                        query_accuracy=acc,
                        strategy=strat,
                    )
                )
    return results


def results_to_csv(results, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULT_COLUMNS)
        for r in results:
            writer.writerow(
                [
                    r.dataset,
                    r.policy,
                    format_value(r.kappa),
                    r.seed,
                    format_value(r.strategy_cost),
                    format_value(r.oracle_cost),
                    "" if r.scpe is None else format_value(r.scpe),
                    r.n_retrains,
                    format_value(r.query_accuracy),
                    str(r.strategy),
                ]
            )


def results_from_csv(path) -> list[dict]:
    """Read a results CSV back into dict rows (strategy stays textual)."""
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != list(RESULT_COLUMNS):
            raise InvalidInputError(f"unexpected results header: {reader.fieldnames}")
        for row in reader:
            out.append(
                {
                    "dataset": row["dataset"],
                    "policy": row["policy"],
                    "kappa": float(row["kappa"]),
                    "seed": int(row["seed"]),
                    "strategy_cost": float(row["strategy_cost"]),
                    "oracle_cost": float(row["oracle_cost"]),
                    "scpe": None if row["scpe"] == "" else float(row["scpe"]),
                    "n_retrains": int(row["n_retrains"]),
                    "query_accuracy": float(row["query_accuracy"]),
                    "strategy": row["strategy"],
                }
            )
    return out


_POLICY_ORDER = ("oracle", "threshold", "cumulative", "periodic", "never", "markov", "adwin", "ddm")


def _policy_rank(name: str) -> tuple:
    try:
        return (0, _POLICY_ORDER.index(name))
    except ValueError:
        return (1, name)


def report(results) -> list[dict]:
    """Per (dataset, policy) means of SCPE, query accuracy and retrain counts.

    Accepts RunResult objects or dict rows from ``results_from_csv``. SCPE
    means skip undefined entries and stay blank when nothing is defined.
    """
    rows = [r.__dict__ if isinstance(r, RunResult) else r for r in results]
    if not rows:
        raise InvalidInputError("no results to report")
    groups: dict[tuple[str, str], list[dict]] = {}
    for row in rows:
        groups.setdefault((row["dataset"], row["policy"]), []).append(row)
    summary = []
    for (dataset, policy) in sorted(groups, key=lambda k: (k[0], _policy_rank(k[1]))):
        rs = groups[(dataset, policy)]
        scpes = [r["scpe"] for r in rs if r["scpe"] is not None]
        n_retrains = float(np.mean([r["n_retrains"] for r in rs]))
        summary.append(
            {
                "dataset": dataset,
                "policy": policy,
                "runs": len(rs),
                "mean_scpe": float(np.mean(scpes)) if scpes else None,
                "mean_query_accuracy": float(np.mean([r["query_accuracy"] for r in rs])),
                "mean_n_retrains": n_retrains,
                "mean_extra_retrains": n_retrains - 1.0,
            }
        )
    return summary


SUMMARY_COLUMNS = (
    "dataset",
    "policy",
    "runs",
    "mean_scpe",
    "mean_query_accuracy",
    "mean_n_retrains",
    "mean_extra_retrains",
)


def summary_to_csv(summary, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_COLUMNS)
        for row in summary:
            writer.writerow(
                [
                    row["dataset"],
                    row["policy"],
                    row["runs"],
                    "" if row["mean_scpe"] is None else format_value(row["mean_scpe"]),
                    format_value(row["mean_query_accuracy"]),
                    format_value(row["mean_n_retrains"]),
                    format_value(row["mean_extra_retrains"]),
                ]
            )


def render_summary(summary) -> str:
    """Aligned text table of the report rows."""
    headers = ["dataset", "policy", "runs", "scpe", "accuracy", "retrains", "extra"]
    table = [headers]
    for row in summary:
        table.append(
            [
                row["dataset"],
                row["policy"],
                str(row["runs"]),
                "-" if row["mean_scpe"] is None else f"{row['mean_scpe']:.2f}",
                f"{row['mean_query_accuracy']:.3f}",
                f"{row['mean_n_retrains']:.2f}",
                f"{row['mean_extra_retrains']:.2f}",
            ]
        )
    widths = [max(len(r[i]) for r in table) for i in range(len(headers))]
    lines = []
    for i, row in enumerate(table):
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)
