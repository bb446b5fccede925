#include <doctest.h>

#include "test_support.h"

#include "mgpredict/data.h"

#include <algorithm>
#include <random>
#include <sstream>

using namespace mgpredict;

namespace {

PriceTable load(const std::string& text) {
    std::istringstream in(text);
    return load_prices(in);
}

PriceSeries make_series(std::vector<double> prices) {
    PriceSeries s;
    s.asset_id = "X";
    Date d = parse_date("2020-01-01");
    for (std::size_t i = 0; i < prices.size(); ++i) {
        s.dates.push_back(d + std::chrono::days(static_cast<int>(i)));
    }
    s.prices = std::move(prices);
    return s;
}

std::string error_of(const std::string& text) {
    try {
        load(text);
    } catch (const DataError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("dates round-trip and reject junk") {
    CHECK(format_date(parse_date("2004-02-29")) == "2004-02-29");
    CHECK_THROWS_AS(parse_date("2003-02-29"), std::invalid_argument);
    CHECK_THROWS_AS(parse_date("20040229"), std::invalid_argument);
    CHECK_THROWS_AS(parse_date("2004-2-9"), std::invalid_argument);
}

TEST_CASE("loader: one ticker, three rows") {
    const auto table = load("date,ticker,close\n2020-01-02,AAA,10\n2020-01-03,AAA,11\n2020-01-06,AAA,12.5\n");
    REQUIRE(table.series.size() == 1);
    CHECK(table.series[0].asset_id == "AAA");
    CHECK(table.series[0].prices == std::vector<double>{10, 11, 12.5});
    CHECK(format_date(table.series[0].dates[2]) == "2020-01-06");
    CHECK(table.warnings.empty());
}

TEST_CASE("loader: ticker missing a middle date is dropped with a warning") {
    const auto table = load(
        "date,ticker,close\n"
        "2020-01-02,AAA,10\n2020-01-02,BBB,20\n"
        "2020-01-03,AAA,11\n"
        "2020-01-06,AAA,12\n2020-01-06,BBB,21\n");
    REQUIRE(table.series.size() == 1);
    CHECK(table.series[0].asset_id == "AAA");
    REQUIRE(table.warnings.size() == 1);
    CHECK(table.warnings[0].find("BBB") != std::string::npos);
}

TEST_CASE("loader: empty input is an empty table") {
    CHECK(load("").series.empty());
    CHECK(load("date,ticker,close\n").series.empty());
}

TEST_CASE("loader: errors carry line numbers") {
    CHECK(error_of("date,ticker,close\n2020-01-02,AAA,10\n2020-01-03,AAA\n").rfind("line 3:", 0) == 0);
    CHECK(error_of("date,ticker,close\n2020-01-02,AAA,abc\n").rfind("line 2:", 0) == 0);
    CHECK(error_of("date,ticker,close\n2020-13-02,AAA,1\n").rfind("line 2:", 0) == 0);
    const auto nonpos = error_of("date,ticker,close\n2020-01-02,AAA,10\n2020-01-03,AAA,0\n");
    CHECK(nonpos.rfind("line 3:", 0) == 0);
    CHECK(nonpos.find("non-positive") != std::string::npos);
    CHECK(error_of("date,ticker,close\n2020-01-02,AAA,-1\n").find("non-positive") != std::string::npos);
    const auto dup = error_of("date,ticker,close\n2020-01-02,AAA,10\n2020-01-02,AAA,11\n");
    CHECK(dup.rfind("line 3:", 0) == 0);
    CHECK(dup.find("duplicate") != std::string::npos);
    CHECK(error_of("day,sym,px\n2020-01-02,AAA,10\n").rfind("line 1:", 0) == 0);
}

TEST_CASE("loader result does not depend on row order") {
    std::vector<std::string> rows;
    for (int d = 1; d <= 20; ++d) {
        const std::string date = "2021-03-" + std::string(d < 10 ? "0" : "") + std::to_string(d);
        for (const char* t : {"AAA", "BBB", "CCC"}) {
            rows.push_back(date + "," + t + "," + std::to_string(10 + d * 0.25 + t[0] - 'A'));
        }
    }
    auto join = [](const std::vector<std::string>& r) {
        std::string s = "date,ticker,close\n";
        for (const auto& x : r) {
            s += x + "\n";
        }
        return s;
    };
    const auto reference = load(join(rows));
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 5; ++trial) {
        std::shuffle(rows.begin(), rows.end(), gen);
        const auto shuffled = load(join(rows));
        CHECK(shuffled.series == reference.series);
    }
}

TEST_CASE("write_prices round-trips through the loader") {
    std::vector<PriceSeries> series{synthetic_series(SyntheticKind::gbm(0.0002, 0.02), 50, 1, "AAA"),
                                    synthetic_series(SyntheticKind::iid_coin(), 50, 2, "BBB")};
    std::ostringstream out;
    write_prices(out, series);
    const auto back = load(out.str());
    REQUIRE(back.series.size() == 2);
    CHECK(back.series[0].dates == series[0].dates);
    CHECK(back.series[1].prices == series[1].prices);
}

TEST_CASE("resample examples") {
    const auto s = make_series({1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11});
    const auto r = resample(s, 5);
    CHECK(r.prices == std::vector<double>{1, 6, 11});
    CHECK(r.dates == std::vector<Date>{s.dates[0], s.dates[5], s.dates[10]});
    CHECK(resample(s, 1) == s);
    CHECK_THROWS(resample(make_series({1, 2, 3, 4}), 5));
    CHECK_THROWS(resample(s, 0));
}

TEST_CASE("resample then to_returns has floor((n-1)/5) entries") {
    for (std::size_t n = 6; n < 80; ++n) {
        const auto s = synthetic_series(SyntheticKind::iid_coin(), n, n, "X");
        CHECK(to_returns(resample(s, 5), 5).size() == (n - 1) / 5);
        if (n > 20) {
            CHECK(to_returns(resample(s, 20), 20).size() == (n - 1) / 20);
        }
    }
}

TEST_CASE("to_returns examples") {
    auto r = to_returns(make_series({100, 110}));
    CHECK(r.simple_returns[0] == doctest::Approx(0.10).epsilon(1e-15));
    CHECK(r.signs[0] == Direction::Up);
    r = to_returns(make_series({100, 100}));
    CHECK(r.simple_returns[0] == 0.0);
    CHECK(r.signs[0] == Direction::Down);
    r = to_returns(make_series({100, 90, 99}));
    CHECK(r.simple_returns[0] == doctest::Approx(-0.10).epsilon(1e-15));
    CHECK(r.simple_returns[1] == doctest::Approx(0.10).epsilon(1e-15));
    CHECK(r.signs == mgtest::signs_from("DU"));
    CHECK_THROWS(to_returns(make_series({100})));
}

TEST_CASE("sign is Up exactly when the return is positive") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto r = to_returns(synthetic_series(SyntheticKind::gbm(0.0, 0.02), 500, seed));
        for (std::size_t t = 0; t < r.size(); ++t) {
            CHECK((r.signs[t] == Direction::Up) == (r.simple_returns[t] > 0.0));
        }
    }
}

TEST_CASE("synthetic examples") {
    const auto trend = to_returns(synthetic_series(SyntheticKind::trend(), 100, 0));
    CHECK(trend.size() == 99);
    CHECK(std::ranges::all_of(trend.signs, [](Direction d) { return d == Direction::Up; }));

    const auto alt = to_returns(synthetic_series(SyntheticKind::periodic(2), 50, 0));
    for (std::size_t t = 0; t < alt.size(); ++t) {
        CHECK(alt.signs[t] == (t % 2 == 0 ? Direction::Up : Direction::Down));
    }

    const auto coin = to_returns(synthetic_series(SyntheticKind::iid_coin(), 10001, 12345));
    const auto ups = std::ranges::count(coin.signs, Direction::Up);
    const double frac = static_cast<double>(ups) / 10000.0;
    CHECK(frac >= 0.47);
    CHECK(frac <= 0.53);

    CHECK(synthetic_series(SyntheticKind::iid_coin(), 300, 9).prices ==
          synthetic_series(SyntheticKind::iid_coin(), 300, 9).prices);
    CHECK_THROWS(synthetic_series(SyntheticKind::periodic(0), 10, 0));
    CHECK_THROWS(synthetic_series(SyntheticKind::trend(), 1, 0));
}

TEST_CASE("periodic(p) repeats with period p") {
    for (int p = 1; p <= 9; ++p) {
        const auto r = to_returns(synthetic_series(SyntheticKind::periodic(p), 200, 0));
        const auto pattern = periodic_pattern(p);
        for (std::size_t t = 0; t < r.size(); ++t) {
            CHECK(r.signs[t] == pattern[t % pattern.size()]);
        }
    }
}
