#include "mgpredict/backtest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace mgpredict {

namespace {

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

}  // namespace

void BacktestConfig::validate() const {
    if (!(cost_rate >= 0.0 && cost_rate < 1.0)) {
        throw std::invalid_argument("cost rate must lie in [0, 1)");
    }
    if (window < 1) {
        throw std::invalid_argument("window must be at least 1");
    }
    if (max_memory < 1 || max_memory > kMaxSupportedMemory) {
        throw std::invalid_argument("max memory must lie in [1, " + std::to_string(kMaxSupportedMemory) + "]");
    }
    if (strategy_cap < 1) {
        throw std::invalid_argument("strategy cap must be at least 1");
    }
    if (horizon < 1) {
        throw std::invalid_argument("horizon must be positive");
    }
    if (fixed_memory && (*fixed_memory < 1 || *fixed_memory > max_memory)) {
        throw std::invalid_argument("fixed memory must lie in [1, max_memory]");
    }
}

std::size_t BacktestConfig::learn_in_periods() const {
    return ceil_div(learn_in, static_cast<std::size_t>(horizon));
}

std::size_t BacktestConfig::window_periods() const {
    return std::max<std::size_t>(1, ceil_div(window, static_cast<std::size_t>(horizon)));
}

EngineConfig BacktestConfig::engine(std::uint64_t asset_seed) const {
    EngineConfig e;
    e.max_memory = max_memory;
    e.strategy_cap = strategy_cap;
    e.seed = asset_seed;
    e.fixed_memory = fixed_memory;
    return e;
}

TradingPath simulate_trading(std::span<const double> returns, std::span<const Direction> predictions,
                             double cost_rate) {
    if (returns.size() != predictions.size()) {
        throw std::invalid_argument("returns and predictions differ in length");
    }
    const std::size_t n = returns.size();
    TradingPath path;
    path.positions.resize(n);
    path.trades.resize(n);
    path.equity_gross.resize(n + 1);
    path.equity_net.resize(n + 1);
    path.bh_equity.resize(n + 1);
    path.equity_gross[0] = path.equity_net[0] = path.bh_equity[0] = 1.0;

    // Net wealth is gross wealth times the accumulated cost factor; the
    // product is the same as charging each trade as it happens.
    double cost_factor = 1.0;
    std::uint8_t held = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const std::uint8_t position = predictions[t] == Direction::Up ? 1 : 0;
        path.positions[t] = position;
        if (position != held) {
            path.trades[t] = 1;
            ++path.transaction_count;
            cost_factor *= 1.0 - cost_rate;
            held = position;
        }
        const double growth = 1.0 + returns[t];
        path.equity_gross[t + 1] = position ? path.equity_gross[t] * growth : path.equity_gross[t];
        path.equity_net[t + 1] = path.equity_gross[t + 1] * cost_factor;
        path.bh_equity[t + 1] = path.bh_equity[t] * growth;
    }
    return path;
}

namespace {

BacktestResult assemble(const ReturnSeries& returns, std::size_t first_step, std::vector<Direction> predictions,
                        double cost_rate) {
    BacktestResult r;
    r.asset_id = returns.asset_id;
    r.horizon = returns.horizon;
    r.cost_rate = cost_rate;
    r.start = first_step == 0 ? returns.start : returns.dates[first_step - 1];
    r.dates.assign(returns.dates.begin() + static_cast<std::ptrdiff_t>(first_step), returns.dates.end());
    r.returns.assign(returns.simple_returns.begin() + static_cast<std::ptrdiff_t>(first_step),
                     returns.simple_returns.end());
    r.realized.assign(returns.signs.begin() + static_cast<std::ptrdiff_t>(first_step), returns.signs.end());
    r.predictions = std::move(predictions);

    TradingPath path = simulate_trading(r.returns, r.predictions, cost_rate);
    r.positions = std::move(path.positions);
    r.trades = std::move(path.trades);
    r.transaction_count = path.transaction_count;
    r.equity_gross = std::move(path.equity_gross);
    r.equity_net = std::move(path.equity_net);
    r.bh_equity = std::move(path.bh_equity);
    return r;
}

}  // namespace

BacktestResult run_backtest(const ReturnSeries& returns, const BacktestConfig& config, bool record_fixed) {
    config.validate();
    const std::size_t first = static_cast<std::size_t>(config.max_memory);
    const std::size_t n = returns.size();
    if (n <= first + 1) {
        throw std::invalid_argument("return series of length " + std::to_string(n) +
                                    " is too short for max memory " + std::to_string(config.max_memory));
    }

    AdaptiveState state(config.engine(config.seed));
    const std::span<const Direction> signs = returns.signs;
    const std::size_t steps = n - first;
    const std::size_t banks = state.banks().size();

    std::vector<Direction> predictions;
    predictions.reserve(steps);
    std::vector<std::vector<Direction>> fixed_predictions;
    std::vector<std::vector<std::uint32_t>> fixed_choices;
    if (record_fixed) {
        fixed_predictions.assign(banks, {});
        fixed_choices.assign(banks, {});
        for (std::size_t b = 0; b < banks; ++b) {
            fixed_predictions[b].reserve(steps);
            fixed_choices[b].reserve(steps);
        }
    }

    for (std::size_t t = first; t < n; ++t) {
        const auto history = signs.first(t);
        if (record_fixed) {
            const auto bank_preds = state.bank_predictions(history);
            for (std::size_t b = 0; b < banks; ++b) {
                fixed_predictions[b].push_back(bank_preds[b]);
                fixed_choices[b].push_back(state.banks()[b].best().index);
            }
        }
        predictions.push_back(state.predict_next(history));
        state.update_scores(history, signs[t]);
    }

    BacktestResult r = assemble(returns, first, std::move(predictions), config.cost_rate);
    r.selection_log.assign(state.selection_log().begin(), state.selection_log().end());
    if (record_fixed) {
        // Index by memory length - 1 whether or not every memory has a bank.
        r.fixed_predictions.assign(static_cast<std::size_t>(config.max_memory), {});
        r.fixed_choices.assign(static_cast<std::size_t>(config.max_memory), {});
        for (std::size_t b = 0; b < banks; ++b) {
            const auto m = static_cast<std::size_t>(state.banks()[b].memory());
            r.fixed_predictions[m - 1] = std::move(fixed_predictions[b]);
            r.fixed_choices[m - 1] = std::move(fixed_choices[b]);
        }
    }
    return r;
}

BacktestResult evaluate_predictions(const ReturnSeries& returns, std::span<const Direction> predictions,
                                    double cost_rate, std::size_t first_step) {
    if (first_step > returns.size() || returns.size() - first_step != predictions.size()) {
        throw std::invalid_argument("prediction stream does not line up with the return series");
    }
    return assemble(returns, first_step, std::vector<Direction>(predictions.begin(), predictions.end()), cost_rate);
}

// ---------------------------------------------------------------- metrics

std::vector<std::uint8_t> hits(const BacktestResult& result, std::optional<int> memory) {
    const std::vector<Direction>* predictions = &result.predictions;
    if (memory) {
        const auto m = static_cast<std::size_t>(*memory);
        if (*memory < 1 || m > result.fixed_predictions.size() || result.fixed_predictions[m - 1].empty()) {
            throw std::invalid_argument("no fixed-memory predictions recorded for memory " + std::to_string(*memory));
        }
        predictions = &result.fixed_predictions[m - 1];
    }
    std::vector<std::uint8_t> out(result.realized.size());
    for (std::size_t t = 0; t < out.size(); ++t) {
        out[t] = (*predictions)[t] == result.realized[t] ? 1 : 0;
    }
    return out;
}

double success_rate(const BacktestResult& result, std::size_t from_step, std::size_t to_step,
                    std::optional<int> memory) {
    if (from_step >= to_step) {
        throw std::invalid_argument("empty step range");
    }
    if (to_step > result.steps()) {
        throw std::out_of_range("step range exceeds the scored steps");
    }
    const auto flags = hits(result, memory);
    std::size_t correct = 0;
    for (std::size_t t = from_step; t < to_step; ++t) {
        correct += flags[t];
    }
    return static_cast<double>(correct) / static_cast<double>(to_step - from_step);
}

double success_rate(const BacktestResult& result, std::size_t from_step) {
    return success_rate(result, from_step, result.steps());
}

std::vector<double> rolling_success(std::span<const std::uint8_t> hit_flags, std::size_t window, std::size_t from_step) {
    if (window < 1) {
        throw std::invalid_argument("window must be at least 1");
    }
    if (from_step > hit_flags.size() || window > hit_flags.size() - from_step) {
        throw std::invalid_argument("window of " + std::to_string(window) + " steps is longer than the scored range");
    }
    const std::size_t count = hit_flags.size() - from_step - window + 1;
    std::vector<double> out(count);
    std::size_t correct = 0;
    for (std::size_t t = from_step; t < from_step + window; ++t) {
        correct += hit_flags[t];
    }
    const double denom = static_cast<double>(window);
    out[0] = static_cast<double>(correct) / denom;
    for (std::size_t i = 1; i < count; ++i) {
        correct += hit_flags[from_step + i + window - 1];
        correct -= hit_flags[from_step + i - 1];
        out[i] = static_cast<double>(correct) / denom;
    }
    return out;
}

std::vector<double> rolling_success(const BacktestResult& result, std::size_t window, std::size_t from_step,
                                    std::optional<int> memory) {
    return rolling_success(hits(result, memory), window, from_step);
}

RebasedEquity rebase(const BacktestResult& result, std::size_t from_step) {
    if (from_step > result.steps()) {
        throw std::out_of_range("ratio start lies beyond the equity curve");
    }
    RebasedEquity out;
    const std::size_t n = result.steps() - from_step + 1;
    out.gross.reserve(n);
    out.net.reserve(n);
    out.bh.reserve(n);
    double gross = 1.0;
    double bh = 1.0;
    double cost_factor = 1.0;
    out.gross.push_back(gross);
    out.net.push_back(gross);
    out.bh.push_back(bh);
    for (std::size_t k = from_step; k < result.steps(); ++k) {
        const double growth = 1.0 + result.returns[k];
        if (result.trades[k]) {
            cost_factor *= 1.0 - result.cost_rate;
        }
        if (result.positions[k]) {
            gross *= growth;
        }
        bh *= growth;
        out.gross.push_back(gross);
        out.net.push_back(gross * cost_factor);
        out.bh.push_back(bh);
    }
    return out;
}

std::vector<double> return_ratio(const BacktestResult& result, bool net, std::size_t from_step) {
    const RebasedEquity paths = rebase(result, from_step);
    const auto& equity = net ? paths.net : paths.gross;
    std::vector<double> out;
    out.reserve(equity.size());
    for (std::size_t i = 0; i < equity.size(); ++i) {
        if (!(paths.bh[i] > 0.0)) {
            throw std::domain_error("buy-and-hold wealth must stay positive");
        }
        out.push_back(equity[i] / paths.bh[i]);
    }
    return out;
}

UsageDistributions usage_distributions(std::span<const Selection> log, int max_memory) {
    if (log.empty()) {
        throw std::invalid_argument("empty selection log");
    }
    UsageDistributions out;
    out.memory_usage.assign(static_cast<std::size_t>(max_memory), 0.0);
    std::map<std::pair<int, std::uint32_t>, std::size_t> counts;
    for (const auto& s : log) {
        if (s.memory < 1 || s.memory > max_memory) {
            throw std::invalid_argument("selection references memory outside [1, max_memory]");
        }
        out.memory_usage[static_cast<std::size_t>(s.memory - 1)] += 1.0;
        ++counts[{s.memory, s.strategy_index}];
    }
    const double total = static_cast<double>(log.size());
    for (auto& f : out.memory_usage) {
        f /= total;
    }
    out.strategy_usage.reserve(counts.size());
    for (const auto& [key, count] : counts) {
        out.strategy_usage.push_back({key.first, key.second, static_cast<double>(count) / total});
    }
    // Stable on the (memory, index) order for equal shares.
    std::stable_sort(out.strategy_usage.begin(), out.strategy_usage.end(),
                     [](const StrategyUsage& a, const StrategyUsage& b) { return a.fraction > b.fraction; });
    return out;
}

UsageDistributions usage_distributions(const BacktestResult& result, std::size_t from_step) {
    if (from_step >= result.selection_log.size()) {
        throw std::invalid_argument("empty selection log");
    }
    int max_memory = 1;
    for (const auto& s : result.selection_log) {
        max_memory = std::max(max_memory, s.memory);
    }
    if (!result.fixed_predictions.empty()) {
        max_memory = std::max(max_memory, static_cast<int>(result.fixed_predictions.size()));
    }
    return usage_distributions(std::span<const Selection>(result.selection_log).subspan(from_step), max_memory);
}

UsageDistributions fixed_usage_distributions(const BacktestResult& result, int memory, std::size_t from_step) {
    const auto m = static_cast<std::size_t>(memory);
    if (memory < 1 || m > result.fixed_choices.size() || result.fixed_choices[m - 1].empty()) {
        throw std::invalid_argument("no fixed-memory choices recorded for memory " + std::to_string(memory));
    }
    const auto& choices = result.fixed_choices[m - 1];
    if (from_step >= choices.size()) {
        throw std::invalid_argument("empty selection log");
    }
    std::vector<Selection> log;
    log.reserve(choices.size() - from_step);
    for (std::size_t t = from_step; t < choices.size(); ++t) {
        log.push_back({memory, choices[t]});
    }
    return usage_distributions(log, memory);
}

double oracle_success_rate(std::span<const ReturnSeries> returns) {
    if (returns.empty()) {
        throw std::invalid_argument("no return series given");
    }
    std::size_t majority = 0;
    std::size_t total = 0;
    for (const auto& r : returns) {
        const auto up = static_cast<std::size_t>(std::count(r.signs.begin(), r.signs.end(), Direction::Up));
        majority += std::max(up, r.signs.size() - up);
        total += r.signs.size();
    }
    if (total == 0) {
        throw std::invalid_argument("no observations");
    }
    return static_cast<double>(majority) / static_cast<double>(total);
}

double up_fraction(std::span<const ReturnSeries> returns) {
    std::size_t up = 0;
    std::size_t total = 0;
    for (const auto& r : returns) {
        up += static_cast<std::size_t>(std::count(r.signs.begin(), r.signs.end(), Direction::Up));
        total += r.signs.size();
    }
    if (total == 0) {
        throw std::invalid_argument("no observations");
    }
    return static_cast<double>(up) / static_cast<double>(total);
}

}  // namespace mgpredict
