#pragma once

#include "mgpredict/data.h"
#include "mgpredict/engine.h"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mgpredict {

struct BacktestConfig {
    std::size_t strategy_cap = 10000;
    int max_memory = 10;
    double cost_rate = 0.001;
    /// Trading days excluded from reported metrics; divided by the horizon
    /// (rounding up) to get periods.
    std::size_t learn_in = 500;
    /// Rolling window in trading days; scaled by the horizon like learn_in.
    std::size_t window = 250;
    int horizon = 1;
    std::uint64_t seed = 0;
    std::optional<int> fixed_memory;

    /// Throws std::invalid_argument on out-of-range fields.
    void validate() const;

    std::size_t learn_in_periods() const;
    std::size_t window_periods() const;
    EngineConfig engine(std::uint64_t asset_seed) const;
};

/// Everything produced by one pass over an asset's return series. Per-step
/// vectors cover the scored steps only (the first max_memory returns feed
/// the initial history); equity vectors carry one extra leading 1.0.
struct BacktestResult {
    std::string asset_id;
    int horizon = 1;
    double cost_rate = 0.0;
    Date start{};
    std::vector<Date> dates;
    std::vector<double> returns;
    std::vector<Direction> predictions;
    std::vector<Direction> realized;
    std::vector<std::uint8_t> positions;
    std::vector<std::uint8_t> trades;
    std::size_t transaction_count = 0;
    std::vector<double> equity_gross;
    std::vector<double> equity_net;
    std::vector<double> bh_equity;
    std::vector<Selection> selection_log;

    /// Optional: for each memory length m (index m-1), what a run following
    /// only that memory's best strategy predicted and chose at each step.
    std::vector<std::vector<Direction>> fixed_predictions;
    std::vector<std::vector<std::uint32_t>> fixed_choices;

    std::size_t steps() const { return predictions.size(); }
};

/// Unit-long/flat trading on a fixed prediction stream. Position t is held
/// over returns[t]; every position change (flat start included) costs a
/// factor (1 - cost_rate) on net wealth.
struct TradingPath {
    std::vector<std::uint8_t> positions;
    std::vector<std::uint8_t> trades;
    std::size_t transaction_count = 0;
    std::vector<double> equity_gross;
    std::vector<double> equity_net;
    std::vector<double> bh_equity;
};

TradingPath simulate_trading(std::span<const double> returns, std::span<const Direction> predictions,
                             double cost_rate);

/// Runs the adaptive engine over `returns`: at each step the prediction is
/// issued from strictly earlier signs, then every bank is scored against the
/// realized sign. With `record_fixed`, per-memory predictions are kept too.
BacktestResult run_backtest(const ReturnSeries& returns, const BacktestConfig& config, bool record_fixed = false);

/// Wraps an externally supplied prediction stream aligned with
/// returns[first_step..] into a result (no selection log).
BacktestResult evaluate_predictions(const ReturnSeries& returns, std::span<const Direction> predictions,
                                    double cost_rate, std::size_t first_step = 0);

/// Correctness flag per scored step for the adaptive run, or for the fixed
/// memory run when `memory` is given.
std::vector<std::uint8_t> hits(const BacktestResult& result, std::optional<int> memory = std::nullopt);

/// Fraction of correct predictions over scored steps [from_step, to_step).
double success_rate(const BacktestResult& result, std::size_t from_step, std::size_t to_step,
                    std::optional<int> memory = std::nullopt);
double success_rate(const BacktestResult& result, std::size_t from_step = 0);

/// Success rate over each trailing window, for windows lying entirely in
/// [from_step, steps). Element i covers steps [from_step+i, from_step+i+window).
std::vector<double> rolling_success(std::span<const std::uint8_t> hit_flags, std::size_t window, std::size_t from_step = 0);
std::vector<double> rolling_success(const BacktestResult& result, std::size_t window, std::size_t from_step = 0,
                                    std::optional<int> memory = std::nullopt);

/// Wealth paths recompounded from 1 at equity point `from_step`; element i
/// corresponds to equity point from_step+i. Recompounding (rather than
/// dividing by the value at from_step) keeps identical paths bit-identical.
struct RebasedEquity {
    std::vector<double> gross;
    std::vector<double> net;
    std::vector<double> bh;
};

RebasedEquity rebase(const BacktestResult& result, std::size_t from_step);

/// Strategy wealth over buy-and-hold wealth, both rebased to 1 at equity
/// point `from_step`. Element i corresponds to equity point from_step+i.
std::vector<double> return_ratio(const BacktestResult& result, bool net, std::size_t from_step = 0);

struct StrategyUsage {
    int memory = 1;
    std::uint32_t strategy_index = 0;
    double fraction = 0.0;
};

struct UsageDistributions {
    /// memory_usage[m-1]: fraction of decisions that followed memory m.
    std::vector<double> memory_usage;
    /// Selection share of every strategy that was chosen, largest first.
    std::vector<StrategyUsage> strategy_usage;
};

UsageDistributions usage_distributions(std::span<const Selection> log, int max_memory);
UsageDistributions usage_distributions(const BacktestResult& result, std::size_t from_step = 0);
/// Same, for the fixed run of memory `memory` (needs record_fixed).
UsageDistributions fixed_usage_distributions(const BacktestResult& result, int memory, std::size_t from_step = 0);

/// Success of the best constant prediction per asset (its majority sign),
/// averaged with weights equal to each asset's observation count.
double oracle_success_rate(std::span<const ReturnSeries> returns);

/// Fraction of Up signs across all observations.
double up_fraction(std::span<const ReturnSeries> returns);

}  // namespace mgpredict
