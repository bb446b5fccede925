import csv
import math

import numpy as np
import pytest

import mgpredict as mg


def test_encode_history():
    assert mg.encode_history([0, 1, 0, 1], 3).index == 5
    assert mg.encode_history([1, 1], 2).index == 3
    with pytest.raises(ValueError, match="insufficient history"):
        mg.encode_history([1], 2)


def test_full_bank_sizes():
    assert [len(mg.generate_bank(m)) for m in (1, 2, 3)] == [4, 16, 256]
    assert len(mg.generate_bank(4, 10000, 1)) == 10000


def test_adaptive_state_initial_prediction():
    cfg = mg.EngineConfig()
    cfg.max_memory = 3
    state = mg.AdaptiveState(cfg)
    assert state.predict_next([1, 1, 1]) == 0
    sel = state.selection_log[0]
    assert (sel.memory, sel.strategy_index) == (1, 0)


def test_backtest_on_alternating_prices():
    prices = mg.synthetic_prices("periodic", 900, period=2)
    cfg = mg.BacktestConfig()
    cfg.strategy_cap = 2000
    cfg.learn_in = 300
    result = mg.run_backtest(prices, cfg)
    assert result.steps == len(prices) - 1 - cfg.max_memory
    assert mg.success_rate(result, 300) == 1.0
    usage = mg.memory_usage(result, 300)
    assert math.isclose(sum(usage), 1.0, abs_tol=1e-12)
    assert usage[0] == 1.0


def test_always_rising_ratio_is_one():
    prices = mg.synthetic_prices("trend", 400)
    cfg = mg.BacktestConfig()
    cfg.cost_rate = 0.0
    cfg.strategy_cap = 500
    cfg.learn_in = 100
    result = mg.run_backtest(prices, cfg)
    assert mg.return_ratio(result, True, 100)[-1] == 1.0


def test_two_asset_frontier_matches_closed_form():
    rng = np.random.default_rng(3)
    r = rng.normal([0.001, 0.002], [0.01, 0.02], size=(300, 2))
    mu = r.mean(axis=0)
    cov = np.cov(r, rowvar=False, ddof=1)
    targets = np.linspace(mu.min(), mu.max(), 20)
    for p in mg.efficient_frontier(r, list(targets)):
        w1 = (p.target_return - mu[1]) / (mu[0] - mu[1])
        w = np.array([w1, 1 - w1])
        assert abs(p.stdev - math.sqrt(w @ cov @ w)) < 1e-10
        assert abs(sum(p.weights) - 1) < 1e-10


def test_median_frontier_full_universe():
    rng = np.random.default_rng(4)
    r = rng.normal(0.001, 0.01, size=(200, 5)) + np.arange(5) * 1e-4
    grid = mg.default_target_grid(r, 10)
    single = mg.efficient_frontier(r, grid)
    med = mg.median_frontier(r, 5, 10, grid, seed=1)
    assert [p.median_stdev for p in med] == [p.stdev for p in single]


def test_rolling_helpers():
    assert mg.rolling_window_return([0.1, 0.1], 2)[0] == pytest.approx(0.21)
    assert mg.equal_weight_returns(np.array([[0.01, 0.02, 0.03]]))[0] == pytest.approx(0.02)


def test_cli_round_trip(tmp_path):
    prices = tmp_path / "p.csv"
    code, _, err = mg.run_cli(["synth", "--kind", "trend", "--length", "120", "--assets", "2", "-o", str(prices)])
    assert code == 0, err
    out = tmp_path / "run"
    code, _, err = mg.run_cli(
        ["simulate", str(prices), "--out", str(out), "--max-memory", "3", "--learn-in", "20", "--window", "10"]
    )
    assert code == 0, err
    with open(out / "simulate" / "summary.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [float(r["success_rate"]) for r in rows] == [1.0, 1.0]

    code, _, err = mg.run_cli(["simulate", str(tmp_path / "missing.csv"), "--out", str(out)])
    assert code != 0
    assert err
