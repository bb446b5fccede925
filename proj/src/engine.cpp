#include "mgpredict/engine.h"

#include "mgpredict/random.h"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>

namespace mgpredict {

namespace {

void check_memory(int memory) {
    if (memory < 1 || memory > kMaxSupportedMemory) {
        throw std::invalid_argument("memory length must be in [1, " + std::to_string(kMaxSupportedMemory) +
                                    "], got " + std::to_string(memory));
    }
}

std::uint64_t tail_mask(int memory) {
    const std::size_t bits = std::size_t{1} << memory;
    return bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
}

}  // namespace

HistoryIndex encode_history(std::span<const Direction> signs, int memory) {
    check_memory(memory);
    if (signs.size() < static_cast<std::size_t>(memory)) {
        throw std::invalid_argument("insufficient history");
    }
    std::uint32_t index = 0;
    const std::size_t last = signs.size() - 1;
    for (int k = 0; k < memory; ++k) {
        if (signs[last - static_cast<std::size_t>(k)] == Direction::Up) {
            index |= std::uint32_t{1} << k;
        }
    }
    return {memory, index};
}

// ---------------------------------------------------------------- Strategy

Strategy::Strategy(int memory) : memory_(memory) {
    check_memory(memory);
    words_.assign(words_per_table(memory), 0);
}

Strategy::Strategy(int memory, std::vector<std::uint64_t> words) : memory_(memory), words_(std::move(words)) {
    check_memory(memory);
    if (words_.size() != words_per_table(memory)) {
        throw std::invalid_argument("strategy table has the wrong number of words");
    }
    words_.back() &= tail_mask(memory);
}

void Strategy::set_bit(std::size_t history, bool up) {
    const std::uint64_t mask = std::uint64_t{1} << (history & 63);
    if (up) {
        words_[history >> 6] |= mask;
    } else {
        words_[history >> 6] &= ~mask;
    }
}

Direction Strategy::predict(HistoryIndex h) const {
    if (h.memory != memory_) {
        throw std::invalid_argument("history memory " + std::to_string(h.memory) + " does not match strategy memory " +
                                    std::to_string(memory_));
    }
    return bit(h.index) ? Direction::Up : Direction::Down;
}

bool operator<(const Strategy& a, const Strategy& b) {
    if (a.memory_ != b.memory_) {
        return a.memory_ < b.memory_;
    }
    return std::lexicographical_compare(a.words_.rbegin(), a.words_.rend(), b.words_.rbegin(), b.words_.rend());
}

// ------------------------------------------------------------ StrategyBank

StrategyBank::StrategyBank(int memory, std::span<const Strategy> strategies)
    : memory_(memory),
      count_(strategies.size()),
      row_words_(words_per_table(memory)),
      column_words_((strategies.size() + 63) / 64) {
    check_memory(memory);
    const std::size_t histories = std::size_t{1} << memory;
    rows_.resize(count_ * row_words_);
    columns_.assign(histories * column_words_, 0);
    scores_.assign(count_, 0);
    for (std::size_t s = 0; s < count_; ++s) {
        const Strategy& strategy = strategies[s];
        if (strategy.memory() != memory) {
            throw std::invalid_argument("strategy memory does not match bank memory");
        }
        std::copy(strategy.words().begin(), strategy.words().end(), rows_.begin() + static_cast<std::ptrdiff_t>(s * row_words_));
        for (std::size_t h = 0; h < histories; ++h) {
            if (strategy.bit(h)) {
                columns_[h * column_words_ + (s >> 6)] |= std::uint64_t{1} << (s & 63);
            }
        }
    }
}

Strategy StrategyBank::strategy(std::size_t i) const {
    if (i >= count_) {
        throw std::out_of_range("strategy index out of range");
    }
    const auto first = rows_.begin() + static_cast<std::ptrdiff_t>(i * row_words_);
    return Strategy(memory_, std::vector<std::uint64_t>(first, first + static_cast<std::ptrdiff_t>(row_words_)));
}

Direction StrategyBank::predict(std::size_t i, HistoryIndex h) const {
    if (h.memory != memory_) {
        throw std::invalid_argument("history memory does not match bank memory");
    }
    if (i >= count_) {
        throw std::out_of_range("strategy index out of range");
    }
    const std::uint64_t word = rows_[i * row_words_ + (h.index >> 6)];
    return ((word >> (h.index & 63)) & 1u) ? Direction::Up : Direction::Down;
}

void StrategyBank::update(HistoryIndex h, Direction realized) {
    if (h.memory != memory_) {
        throw std::invalid_argument("history memory does not match bank memory");
    }
    const std::uint64_t flip = realized == Direction::Up ? 0 : ~std::uint64_t{0};
    const std::uint64_t* column = columns_.data() + static_cast<std::size_t>(h.index) * column_words_;
    std::int32_t* scores = scores_.data();
    for (std::size_t w = 0; w < column_words_; ++w) {
        const std::uint64_t correct = column[w] ^ flip;
        const std::size_t base = w * 64;
        const std::size_t n = std::min<std::size_t>(64, count_ - base);
        for (std::size_t j = 0; j < n; ++j) {
            scores[base + j] += static_cast<std::int32_t>(((correct >> j) & 1u) << 1) - 1;
        }
    }
    ++updates_;
    refresh_best();
}

void StrategyBank::shift_scores(std::int32_t delta) {
    for (auto& s : scores_) {
        s += delta;
    }
    refresh_best();
}

void StrategyBank::refresh_best() {
    if (scores_.empty()) {
        best_ = {};
        return;
    }
    const auto it = std::max_element(scores_.begin(), scores_.end());
    best_ = {static_cast<std::uint32_t>(it - scores_.begin()), *it};
}

// ---------------------------------------------------------- generate_bank

bool enumerable(int memory, std::size_t cap) {
    // 2^(2^6) already exceeds any size_t cap.
    if (memory > 5) {
        return false;
    }
    const std::uint64_t space = std::uint64_t{1} << (std::uint64_t{1} << memory);
    return space <= cap;
}

StrategyBank generate_bank(int memory, std::size_t cap, std::uint64_t seed) {
    check_memory(memory);
    if (cap < 1) {
        throw std::invalid_argument("strategy cap must be at least 1");
    }
    std::vector<Strategy> strategies;
    if (enumerable(memory, cap)) {
        const std::uint64_t space = std::uint64_t{1} << (std::uint64_t{1} << memory);
        strategies.reserve(space);
        for (std::uint64_t table = 0; table < space; ++table) {
            strategies.emplace_back(memory, std::vector<std::uint64_t>{table});
        }
        return StrategyBank(memory, strategies);
    }

    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(memory)));
    const std::size_t words = words_per_table(memory);
    const std::uint64_t mask = tail_mask(memory);
    std::set<std::vector<std::uint64_t>> seen;
    strategies.reserve(cap);
    while (strategies.size() < cap) {
        std::vector<std::uint64_t> table(words);
        for (auto& w : table) {
            w = rng.next();
        }
        table.back() &= mask;
        if (seen.insert(table).second) {
            strategies.emplace_back(memory, std::move(table));
        }
    }
    return StrategyBank(memory, strategies);
}

// ---------------------------------------------------------- AdaptiveState

AdaptiveState::AdaptiveState(const EngineConfig& config) : config_(config) {
    check_memory(config.max_memory);
    if (config.strategy_cap < 1) {
        throw std::invalid_argument("strategy cap must be at least 1");
    }
    if (config.fixed_memory) {
        const int fixed = *config.fixed_memory;
        if (fixed < 1 || fixed > config.max_memory) {
            throw std::invalid_argument("fixed memory must lie in [1, max_memory]");
        }
        banks_.push_back(generate_bank(fixed, config.strategy_cap, config.seed));
    } else {
        banks_.reserve(static_cast<std::size_t>(config.max_memory));
        for (int m = 1; m <= config.max_memory; ++m) {
            banks_.push_back(generate_bank(m, config.strategy_cap, config.seed));
        }
    }
}

const StrategyBank& AdaptiveState::bank(int memory) const {
    for (const auto& b : banks_) {
        if (b.memory() == memory) {
            return b;
        }
    }
    throw std::out_of_range("no bank for memory length " + std::to_string(memory));
}

void AdaptiveState::require_history(std::span<const Direction> signs) const {
    if (signs.size() < required_history()) {
        throw std::invalid_argument("insufficient history");
    }
}

void AdaptiveState::update_scores(std::span<const Direction> signs, Direction realized) {
    require_history(signs);
    for (auto& b : banks_) {
        b.update(encode_history(signs, b.memory()), realized);
    }
}

Selection select_best(std::span<const StrategyBank> banks) {
    if (banks.empty()) {
        throw std::invalid_argument("no strategy banks");
    }
    const StrategyBank* chosen = &banks.front();
    for (const auto& b : banks) {
        if (b.best().score > chosen->best().score) {
            chosen = &b;
        }
    }
    return {chosen->memory(), chosen->best().index};
}

Selection AdaptiveState::select_best() const { return mgpredict::select_best(banks_); }

Direction AdaptiveState::predict_next(std::span<const Direction> signs) {
    require_history(signs);
    const Selection choice = select_best();
    log_.push_back(choice);
    return bank(choice.memory).predict(choice.strategy_index, encode_history(signs, choice.memory));
}

std::vector<Direction> AdaptiveState::bank_predictions(std::span<const Direction> signs) const {
    require_history(signs);
    std::vector<Direction> out;
    out.reserve(banks_.size());
    for (const auto& b : banks_) {
        out.push_back(b.predict(b.best().index, encode_history(signs, b.memory())));
    }
    return out;
}

void AdaptiveState::shift_scores(std::int32_t delta) {
    for (auto& b : banks_) {
        b.shift_scores(delta);
    }
}

}  // namespace mgpredict
