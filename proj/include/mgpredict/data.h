#pragma once

#include "mgpredict/engine.h"

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mgpredict {

using Date = std::chrono::sys_days;

/// Parses YYYY-MM-DD; throws std::invalid_argument otherwise.
Date parse_date(std::string_view text);
std::string format_date(Date date);

/// Malformed or inconsistent input data. `line` is 1-based, 0 when unknown.
class DataError : public std::runtime_error {
public:
    DataError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

struct PriceSeries {
    std::string asset_id;
    std::vector<Date> dates;
    std::vector<double> prices;

    std::size_t size() const { return prices.size(); }
    friend bool operator==(const PriceSeries&, const PriceSeries&) = default;
};

struct ReturnSeries {
    std::string asset_id;
    int horizon = 1;
    /// Date of the price the first return starts from.
    Date start{};
    /// dates[t] is the end date of period t.
    std::vector<Date> dates;
    std::vector<double> simple_returns;
    std::vector<Direction> signs;

    std::size_t size() const { return simple_returns.size(); }
};

struct PriceTable {
    std::vector<PriceSeries> series;  // sorted by asset_id, all on the same dates
    std::vector<std::string> warnings;
};

/// Reads long-format `date,ticker,close` text. Tickers that do not cover
/// every date present in the file are dropped with a warning.
PriceTable load_prices(std::istream& in);
PriceTable load_prices_file(const std::string& path);

/// Writes the same long format, rows ordered by date then ticker.
void write_prices(std::ostream& out, const std::vector<PriceSeries>& series);

/// Keeps every horizon-th observation starting at index 0.
PriceSeries resample(const PriceSeries& series, int horizon);

ReturnSeries to_returns(const PriceSeries& series, int horizon = 1);

struct SyntheticKind {
    enum class Shape { IidCoin, Trend, Periodic, Gbm };
    Shape shape = Shape::IidCoin;
    int period = 2;
    double mu = 0.0;
    double sigma = 0.01;

    static SyntheticKind iid_coin() { return {Shape::IidCoin}; }
    static SyntheticKind trend() { return {Shape::Trend}; }
    static SyntheticKind periodic(int p) { return {Shape::Periodic, p}; }
    static SyntheticKind gbm(double mu, double sigma) { return {Shape::Gbm, 2, mu, sigma}; }
};

/// The sign pattern repeated by periodic(p): ceil(p/2) Up then the rest Down.
std::vector<Direction> periodic_pattern(int period);

/// Deterministic synthetic prices on consecutive weekdays from 2000-01-03,
/// starting at 100. Moves are +-1% except for gbm.
PriceSeries synthetic_series(const SyntheticKind& kind, std::size_t length, std::uint64_t seed,
                             std::string asset_id = "SYN");

}  // namespace mgpredict
