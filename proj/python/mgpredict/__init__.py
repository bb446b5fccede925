"""Adaptive minority-game sign prediction with costed backtests and frontiers."""

from ._core import (
    AdaptiveState,
    BacktestConfig,
    BacktestResult,
    Direction,
    EngineConfig,
    __version__,
    default_target_grid,
    efficient_frontier,
    encode_history,
    equal_weight_returns,
    generate_bank,
    median_frontier,
    memory_usage,
    return_ratio,
    rolling_success,
    rolling_window_return,
    run_backtest,
    run_cli,
    success_rate,
    synthetic_prices,
)

__all__ = [
    "AdaptiveState",
    "BacktestConfig",
    "BacktestResult",
    "Direction",
    "EngineConfig",
    "__version__",
    "default_target_grid",
    "efficient_frontier",
    "encode_history",
    "equal_weight_returns",
    "generate_bank",
    "median_frontier",
    "memory_usage",
    "return_ratio",
    "rolling_success",
    "rolling_window_return",
    "run_backtest",
    "run_cli",
    "success_rate",
    "synthetic_prices",
]
