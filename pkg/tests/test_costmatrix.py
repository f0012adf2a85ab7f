import math

import numpy as np
import pytest
from helpers import (
    drift_scenario,
    naive_strategy_cost,
    random_cost_matrix,
    reachable_strategies,
)

from retrainer import (
    ContractViolationError,
    CostMatrix,
    DataBatch,
    InvalidInputError,
    QueryBatch,
    Strategy,
    build_cost_matrix,
    cumulative_cost_trace,
    strategy_cost,
    validate_strategy,
)
from retrainer.costmatrix import StreamCosts
from retrainer.models import LogisticClassifier


def small_stream(n=4, seed=0):
    rng = np.random.default_rng(seed)
    data, queries = [], []
    for t in range(n):
        X = rng.normal(size=(12, 2)) + 0.3 * t
        y = (X[:, 0] + X[:, 1] > 0.6 * t).astype(int)
        data.append(DataBatch(t, X, y))
        queries.append(QueryBatch(t, rng.normal(size=(5, 2)) + 0.3 * t))
    return data, queries


MODEL = LogisticClassifier(learning_rate=0.5, epochs=100)


class TestBuild:
    def test_diagonal_equals_kappa(self):
        data, queries = small_stream()
        kappa = [0.5, 1.5, 2.5, 3.5]
        c = build_cost_matrix(data, queries, kappa, MODEL)
        assert np.array_equal(np.diagonal(c.entries), kappa)
        assert np.all(np.isinf(c.entries[np.tril_indices(4, k=-1)]))
        assert np.all(np.isfinite(c.entries[np.triu_indices(4, k=1)]))

    def test_identical_batches_give_zero_staleness(self):
        rng = np.random.default_rng(1)
        X = rng.normal(size=(10, 2))
        y = rng.integers(0, 2, 10)
        data = [DataBatch(t, X.copy(), y.copy()) for t in range(4)]
        queries = [QueryBatch(t, rng.normal(size=(4, 2))) for t in range(4)]
        c = build_cost_matrix(data, queries, 1.0, MODEL)
        assert np.all(c.entries[np.triu_indices(4, k=1)] == 0.0)

    def test_drift_scenario_first_row_strictly_increasing(self):
        data, queries, model = drift_scenario("near")
        c = build_cost_matrix(data, queries, 1.0, model)
        row = c.entries[0, 1:]
        assert np.all(row > 0)
        assert np.all(np.diff(row) > 0)

    def test_build_is_deterministic(self):
        data, queries = small_stream()
        a = build_cost_matrix(data, queries, 1.0, MODEL)
        b = build_cost_matrix(data, queries, 1.0, MODEL)
        assert np.array_equal(a.entries, b.entries)

    def test_range_mismatch_rejected(self):
        data, queries = small_stream()
        with pytest.raises(InvalidInputError):
            build_cost_matrix(data, queries[:-1], 1.0, MODEL)
        with pytest.raises(InvalidInputError):
            build_cost_matrix([data[0], data[2], data[3]], queries[1:], 1.0, MODEL)

    def test_kappa_patch_leaves_staleness_bit_identical(self):
        data, queries = small_stream()
        c1 = build_cost_matrix(data, queries, 1.0, MODEL)
        c2 = c1.with_kappa(7.5)
        off = ~np.eye(4, dtype=bool)
        assert np.array_equal(c1.entries[off], c2.entries[off])
        assert np.all(np.diagonal(c2.entries) == 7.5)

    def test_shared_cache_reuses_staleness(self):
        data, queries = small_stream()
        costs = StreamCosts(data, queries, MODEL)
        c1 = costs.cost_matrix(0, 3, 1.0)
        c2 = costs.cost_matrix(0, 3, 9.0)
        off = ~np.eye(4, dtype=bool)
        assert np.array_equal(c1.entries[off], c2.entries[off])


class TestStrategyCost:
    def test_never_retrain_formula(self):
        c = random_cost_matrix(np.random.default_rng(0), 5, kappa=2.0)
        never = Strategy(0, 4, np.zeros(5, dtype=int))
        expected = 2.0 + float(np.sum(c.entries[0, 1:]))
        assert strategy_cost(never, c) == pytest.approx(expected, abs=1e-12)

    def test_retrain_every_batch_is_n_kappa(self):
        c = random_cost_matrix(np.random.default_rng(1), 6, kappa=3.0)
        every = Strategy(0, 5, np.arange(6))
        assert strategy_cost(every, c) == 6 * 3.0

    def test_matches_naive_sum_on_random_strategies(self):
        rng = np.random.default_rng(2)
        c = random_cost_matrix(rng, 6, kappa=0.7)
        for s in reachable_strategies(0, 5):
            assert strategy_cost(s, c) == pytest.approx(naive_strategy_cost(s, c), abs=1e-12)

    def test_monotone_in_kappa_with_retrains(self):
        rng = np.random.default_rng(3)
        base = random_cost_matrix(rng, 6, kappa=0.0)
        s = Strategy(0, 5, np.array([0, 0, 2, 2, 4, 4]))
        costs = [strategy_cost(s, base.with_kappa(k)) for k in (0.0, 0.5, 1.0, 4.0)]
        assert all(a < b for a, b in zip(costs, costs[1:]))

    def test_range_mismatch_is_contract_error(self):
        c = random_cost_matrix(np.random.default_rng(4), 5, kappa=1.0)
        with pytest.raises(ContractViolationError):
            strategy_cost(Strategy(0, 3, np.zeros(4, dtype=int)), c)

    def test_invalid_strategy_is_contract_error(self):
        c = random_cost_matrix(np.random.default_rng(5), 4, kappa=1.0)
        with pytest.raises(ContractViolationError):
            strategy_cost(Strategy(0, 3, np.array([0, 2, 2, 2])), c)


class TestValidateStrategy:
    def test_valid(self):
        assert validate_strategy(Strategy(0, 3, np.array([0, 0, 2, 2]))) is None

    def test_jump_ahead_invalid(self):
        msg = validate_strategy(Strategy(0, 3, np.array([0, 2, 2, 2])))
        assert msg is not None and "s_1" in msg

    def test_missing_initial_training_invalid(self):
        msg = validate_strategy(Strategy(0, 3, np.array([1, 1, 1, 1])))
        assert msg is not None and "initial" in msg

    def test_reverting_to_older_model_invalid(self):
        assert validate_strategy(Strategy(0, 3, np.array([0, 1, 0, 0]))) is not None

    def test_retrain_counting(self):
        s = Strategy(0, 3, np.array([0, 0, 2, 2]))
        assert s.n_retrains == 2
        assert s.retrain_batches == (0, 2)
        assert str(s) == "0|0|2|2"


class TestCsvRoundTrip:
    def test_export_import_exact(self, tmp_path):
        c = random_cost_matrix(np.random.default_rng(6), 5, kappa=1.25, start=3)
        path = tmp_path / "matrix.csv"
        c.to_csv(path)
        text = path.read_text()
        assert "inf" in text
        back = CostMatrix.from_csv(path)
        assert back.start == 3
        assert np.array_equal(back.entries, c.entries)
        assert np.array_equal(back.kappa, c.kappa)


class TestTrace:
    def test_last_point_equals_strategy_cost(self):
        c = random_cost_matrix(np.random.default_rng(7), 6, kappa=1.0, low=0.0, high=1.0)
        s = Strategy(0, 5, np.array([0, 0, 2, 2, 2, 5]))
        trace = cumulative_cost_trace(s, c)
        assert trace[-1] == pytest.approx(strategy_cost(s, c), abs=1e-12)
        assert trace.shape == (6,)
        assert np.all(np.diff(trace) >= 0)  # nonnegative entries -> monotone

    def test_trace_is_cumsum_of_terms(self):
        c = random_cost_matrix(np.random.default_rng(8), 5, kappa=0.5)
        s = Strategy(0, 4, np.array([0, 1, 1, 3, 3]))
        terms = [c.cost(s.serving(t), t) for t in range(5)]
        assert np.allclose(cumulative_cost_trace(s, c), np.cumsum(terms), atol=1e-12)
