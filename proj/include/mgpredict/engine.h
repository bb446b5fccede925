#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace mgpredict {

/// Sign of a price change. A zero change counts as Down.
enum class Direction : std::uint8_t { Down = 0, Up = 1 };

inline Direction direction_of(double change) { return change > 0.0 ? Direction::Up : Direction::Down; }

/// Largest memory length a strategy table may use (2^16 bits per table).
inline constexpr int kMaxSupportedMemory = 16;

/// Index of an m-step sign history. Bit k holds the sign k+1 steps back,
/// so the most recent change sits in the least-significant bit.
struct HistoryIndex {
    int memory = 1;
    std::uint32_t index = 0;

    friend bool operator==(const HistoryIndex&, const HistoryIndex&) = default;
};

/// Builds the history index from the last `memory` entries of `signs`.
/// Throws std::invalid_argument("insufficient history") when too few signs exist.
HistoryIndex encode_history(std::span<const Direction> signs, int memory);

/// A full lookup table from every m-bit history to a predicted direction.
class Strategy {
public:
    /// All-Down table for the given memory length.
    explicit Strategy(int memory);
    Strategy(int memory, std::vector<std::uint64_t> words);

    int memory() const { return memory_; }
    std::size_t table_bits() const { return std::size_t{1} << memory_; }
    std::span<const std::uint64_t> words() const { return words_; }

    bool bit(std::size_t history) const { return (words_[history >> 6] >> (history & 63)) & 1u; }
    void set_bit(std::size_t history, bool up);

    /// Throws std::invalid_argument on a memory-length mismatch.
    Direction predict(HistoryIndex h) const;

    friend bool operator==(const Strategy&, const Strategy&) = default;
    friend bool operator<(const Strategy& a, const Strategy& b);

private:
    int memory_;
    std::vector<std::uint64_t> words_;
};

inline std::size_t words_per_table(int memory) { return ((std::size_t{1} << memory) + 63) / 64; }

/// Best strategy of a bank: highest score, lowest index on ties.
struct BankBest {
    std::uint32_t index = 0;
    std::int32_t score = 0;
};

/// Every sampled (or enumerated) strategy of one memory length together with
/// its cumulative virtual score. Tables are held twice: row-major for
/// strategy access and column-major (one bitset over strategies per history)
/// so a scoring pass touches a single contiguous column.
class StrategyBank {
public:
    StrategyBank(int memory, std::span<const Strategy> strategies);

    int memory() const { return memory_; }
    std::size_t size() const { return count_; }
    bool empty() const { return count_ == 0; }

    Strategy strategy(std::size_t i) const;
    Direction predict(std::size_t i, HistoryIndex h) const;

    std::span<const std::int32_t> scores() const { return scores_; }
    BankBest best() const { return best_; }
    std::size_t updates() const { return updates_; }

    /// Virtual scoring: +1 to every strategy whose prediction for `h`
    /// equals `realized`, -1 to every other.
    void update(HistoryIndex h, Direction realized);

    /// Adds `delta` to every score (used to check argmax invariance).
    void shift_scores(std::int32_t delta);

private:
    void refresh_best();

    int memory_;
    std::size_t count_;
    std::size_t row_words_;
    std::size_t column_words_;
    std::vector<std::uint64_t> rows_;
    std::vector<std::uint64_t> columns_;
    std::vector<std::int32_t> scores_;
    BankBest best_;
    std::size_t updates_ = 0;
};

/// True when 2^(2^memory) <= cap, i.e. the whole strategy space fits.
bool enumerable(int memory, std::size_t cap);

/// Full enumeration in ascending table order when the space fits under `cap`,
/// otherwise `cap` distinct tables drawn uniformly from a generator seeded by
/// (seed, memory).
StrategyBank generate_bank(int memory, std::size_t cap, std::uint64_t seed);

struct Selection;

/// Best strategy of the bank whose best score is highest. Ties go to the
/// lowest strategy index, then to the earliest bank (smallest memory).
Selection select_best(std::span<const StrategyBank> banks);

struct EngineConfig {
    int max_memory = 10;
    std::size_t strategy_cap = 10000;
    std::uint64_t seed = 0;
    /// When set, only this memory length is built and followed; the history
    /// requirement stays at max_memory so runs line up with adaptive ones.
    std::optional<int> fixed_memory;
};

struct Selection {
    int memory = 1;
    std::uint32_t strategy_index = 0;

    friend bool operator==(const Selection&, const Selection&) = default;
};

/// Per-asset prediction state: one bank per memory length and the record of
/// which (memory, strategy) was followed at each decision.
class AdaptiveState {
public:
    explicit AdaptiveState(const EngineConfig& config);

    const EngineConfig& config() const { return config_; }
    std::size_t required_history() const { return static_cast<std::size_t>(config_.max_memory); }

    std::span<const StrategyBank> banks() const { return banks_; }
    const StrategyBank& bank(int memory) const;
    std::span<const Selection> selection_log() const { return log_; }

    /// Scores every strategy of every bank against `realized`, given the
    /// signs observed before it.
    void update_scores(std::span<const Direction> signs, Direction realized);

    /// Best strategy of the memory length whose best score is highest.
    /// Ties go to the lowest strategy index, then the smallest memory.
    Selection select_best() const;

    /// Prediction of the selected strategy on its own history; the choice is
    /// appended to the selection log.
    Direction predict_next(std::span<const Direction> signs);

    /// What each bank's own best strategy predicts, indexed like banks().
    /// Does not touch the selection log.
    std::vector<Direction> bank_predictions(std::span<const Direction> signs) const;

    void shift_scores(std::int32_t delta);

private:
    void require_history(std::span<const Direction> signs) const;

    EngineConfig config_;
    std::vector<StrategyBank> banks_;
    std::vector<Selection> log_;
};

}  // namespace mgpredict
