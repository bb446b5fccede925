#include "mgpredict/data.h"

#include "mgpredict/random.h"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>

namespace mgpredict {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return fields;
}

template <typename T>
bool parse_number(std::string_view text, T& value) {
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    return ec == std::errc{} && ptr == end;
}

}  // namespace

Date parse_date(std::string_view text) {
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    if (text.size() != 10 || text[4] != '-' || text[7] != '-' || !parse_number(text.substr(0, 4), y) ||
        !parse_number(text.substr(5, 2), m) || !parse_number(text.substr(8, 2), d)) {
        throw std::invalid_argument("invalid date '" + std::string(text) + "', expected YYYY-MM-DD");
    }
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) {
        throw std::invalid_argument("invalid calendar date '" + std::string(text) + "'");
    }
    return Date{ymd};
}

std::string format_date(Date date) {
    const std::chrono::year_month_day ymd{date};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()));
    return buf;
}

PriceTable load_prices(std::istream& in) {
    std::map<std::string, std::map<Date, double>> by_ticker;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = line;
        if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) {
            view.remove_prefix(3);
        }
        if (trim(view).empty()) {
            continue;
        }
        const auto fields = split_commas(view);
        if (!header_seen) {
            if (fields.size() != 3 || fields[0] != "date" || fields[1] != "ticker" || fields[2] != "close") {
                throw DataError("expected header 'date,ticker,close'", line_no);
            }
            header_seen = true;
            continue;
        }
        if (fields.size() != 3) {
            throw DataError("expected 3 fields, got " + std::to_string(fields.size()), line_no);
        }
        if (fields[1].empty()) {
            throw DataError("empty ticker", line_no);
        }
        Date date;
        try {
            date = parse_date(fields[0]);
        } catch (const std::invalid_argument& e) {
            throw DataError(e.what(), line_no);
        }
        double price = 0.0;
        if (!parse_number(fields[2], price) || !std::isfinite(price)) {
            throw DataError("invalid price '" + std::string(fields[2]) + "'", line_no);
        }
        if (price <= 0.0) {
            throw DataError("non-positive price " + std::string(fields[2]), line_no);
        }
        auto& rows = by_ticker[std::string(fields[1])];
        if (!rows.emplace(date, price).second) {
            throw DataError("duplicate row for " + std::string(fields[1]) + " on " + std::string(fields[0]), line_no);
        }
    }

    PriceTable table;
    std::set<Date> all_dates;
    for (const auto& [ticker, rows] : by_ticker) {
        for (const auto& row : rows) {
            all_dates.insert(row.first);
        }
    }
    for (const auto& [ticker, rows] : by_ticker) {
        if (rows.size() != all_dates.size()) {
            table.warnings.push_back("dropping " + ticker + ": " + std::to_string(rows.size()) + " of " +
                                     std::to_string(all_dates.size()) + " dates present");
            continue;
        }
        PriceSeries s;
        s.asset_id = ticker;
        s.dates.reserve(rows.size());
        s.prices.reserve(rows.size());
        for (const auto& [date, price] : rows) {
            s.dates.push_back(date);
            s.prices.push_back(price);
        }
        table.series.push_back(std::move(s));
    }
    return table;
}

PriceTable load_prices_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + path);
    }
    return load_prices(in);
}

void write_prices(std::ostream& out, const std::vector<PriceSeries>& series) {
    out << "date,ticker,close\n";
    std::vector<std::size_t> by_name(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        by_name[i] = i;
    }
    std::sort(by_name.begin(), by_name.end(),
              [&](std::size_t a, std::size_t b) { return series[a].asset_id < series[b].asset_id; });
    std::map<Date, std::vector<std::pair<std::size_t, std::size_t>>> rows;
    for (std::size_t i : by_name) {
        for (std::size_t t = 0; t < series[i].size(); ++t) {
            rows[series[i].dates[t]].emplace_back(i, t);
        }
    }
    char buf[64];
    for (const auto& [date, entries] : rows) {
        const std::string day = format_date(date);
        for (const auto& [i, t] : entries) {
            const auto res = std::to_chars(buf, buf + sizeof buf, series[i].prices[t]);
            out << day << ',' << series[i].asset_id << ',' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf))
                << '\n';
        }
    }
}

PriceSeries resample(const PriceSeries& series, int horizon) {
    if (horizon < 1) {
        throw std::invalid_argument("horizon must be positive");
    }
    if (horizon == 1) {
        return series;
    }
    if (series.size() <= static_cast<std::size_t>(horizon)) {
        throw std::invalid_argument("series of length " + std::to_string(series.size()) +
                                    " is too short for horizon " + std::to_string(horizon));
    }
    PriceSeries out;
    out.asset_id = series.asset_id;
    for (std::size_t i = 0; i < series.size(); i += static_cast<std::size_t>(horizon)) {
        out.dates.push_back(series.dates[i]);
        out.prices.push_back(series.prices[i]);
    }
    return out;
}

ReturnSeries to_returns(const PriceSeries& series, int horizon) {
    if (series.size() < 2) {
        throw std::invalid_argument("need at least two prices to form a return");
    }
    ReturnSeries out;
    out.asset_id = series.asset_id;
    out.horizon = horizon;
    out.start = series.dates.empty() ? Date{} : series.dates.front();
    const std::size_t n = series.size() - 1;
    out.dates.assign(series.dates.begin() + 1, series.dates.end());
    out.simple_returns.resize(n);
    out.signs.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        out.simple_returns[t] = series.prices[t + 1] / series.prices[t] - 1.0;
        out.signs[t] = direction_of(out.simple_returns[t]);
    }
    return out;
}

std::vector<Direction> periodic_pattern(int period) {
    if (period < 1) {
        throw std::invalid_argument("period must be at least 1");
    }
    std::vector<Direction> pattern(static_cast<std::size_t>(period), Direction::Down);
    std::fill_n(pattern.begin(), (period + 1) / 2, Direction::Up);
    return pattern;
}

PriceSeries synthetic_series(const SyntheticKind& kind, std::size_t length, std::uint64_t seed, std::string asset_id) {
    if (length < 2) {
        throw std::invalid_argument("synthetic series needs length >= 2");
    }
    if (kind.shape == SyntheticKind::Shape::Gbm && !(kind.sigma >= 0.0 && std::isfinite(kind.mu))) {
        throw std::invalid_argument("gbm needs finite mu and sigma >= 0");
    }
    std::vector<Direction> pattern;
    if (kind.shape == SyntheticKind::Shape::Periodic) {
        pattern = periodic_pattern(kind.period);
    }

    PriceSeries s;
    s.asset_id = std::move(asset_id);
    s.dates.reserve(length);
    s.prices.reserve(length);

    Rng rng(derive_seed(seed, 0x5e7e5));
    Date day = Date{std::chrono::year{2000} / std::chrono::January / 3};
    double price = 100.0;
    for (std::size_t t = 0; t < length; ++t) {
        s.dates.push_back(day);
        s.prices.push_back(price);
        do {
            day += std::chrono::days{1};
        } while (std::chrono::weekday{day} == std::chrono::Saturday || std::chrono::weekday{day} == std::chrono::Sunday);

        switch (kind.shape) {
            case SyntheticKind::Shape::IidCoin:
                price *= rng.coin() ? 1.01 : 0.99;
                break;
            case SyntheticKind::Shape::Trend:
                price *= 1.01;
                break;
            case SyntheticKind::Shape::Periodic:
                price *= pattern[t % pattern.size()] == Direction::Up ? 1.01 : 0.99;
                break;
            case SyntheticKind::Shape::Gbm:
                price *= std::exp(kind.mu - 0.5 * kind.sigma * kind.sigma + kind.sigma * rng.normal());
                break;
        }
    }
    return s;
}

}  // namespace mgpredict
