#include "mgpredict/app.h"

#include "mgpredict/csv.h"
#include "mgpredict/parallel.h"
#include "mgpredict/portfolio.h"
#include "mgpredict/random.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mgpredict {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<double, 5> kQuantiles{0.10, 0.25, 0.50, 0.75, 0.90};
const std::vector<std::string> kQuantileHeader{"date", "q10", "q25", "q50", "q75", "q90"};

std::string file_stem_for(const std::string& ticker) {
    std::string out = ticker;
    for (char& c : out) {
        const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' ||
                          c == '-' || c == '_';
        if (!keep) {
            c = '_';
        }
    }
    return out;
}

std::string horizon_dir(int horizon) { return "h" + std::to_string(horizon); }

void check_horizon(int horizon) {
    if (horizon != 1 && horizon != 5 && horizon != 20) {
        throw std::invalid_argument("horizon must be 1, 5 or 20");
    }
}

json config_json(const BacktestConfig& c) {
    return {
        {"strategy_cap", c.strategy_cap},
        {"max_memory", c.max_memory},
        {"cost_rate", c.cost_rate},
        {"learn_in", c.learn_in},
        {"learn_in_periods", c.learn_in_periods()},
        {"window", c.window},
        {"window_periods", c.window_periods()},
        {"horizon", c.horizon},
        {"seed", c.seed},
    };
}

/// Tracks the files one command writes, relative to the run directory.
class OutputSet {
public:
    explicit OutputSet(fs::path root) : root_(std::move(root)) {}

    fs::path add(const fs::path& relative) {
        files_.insert(relative.generic_string());
        return root_ / relative;
    }
    const std::set<std::string>& files() const { return files_; }

private:
    fs::path root_;
    std::set<std::string> files_;
};

fs::path manifest_path(const fs::path& out_dir) { return out_dir / "manifest.json"; }

json read_manifest(const fs::path& out_dir) {
    std::ifstream in(manifest_path(out_dir));
    if (!in) {
        return json::object();
    }
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw std::runtime_error("corrupt manifest " + manifest_path(out_dir).string() + ": " + e.what());
    }
}

void record_command(const fs::path& out_dir, const std::string& name, json entry, const OutputSet& outputs) {
    json manifest = read_manifest(out_dir);
    manifest["tool"] = "mgpredict";
    manifest["tool_version"] = kToolVersion;
    entry["files"] = json(std::vector<std::string>(outputs.files().begin(), outputs.files().end()));
    manifest["commands"][name] = std::move(entry);
    fs::create_directories(out_dir);
    std::ofstream out(manifest_path(out_dir), std::ios::binary | std::ios::trunc);
    out << manifest.dump(2) << '\n';
    if (!out) {
        throw std::runtime_error("cannot write " + manifest_path(out_dir).string());
    }
}

json command_entry(const RunOptions& o, const std::string& fingerprint) {
    return {{"config", config_json(o.config)}, {"seed", o.config.seed}, {"input_fingerprint", fingerprint}};
}

void reset_dir(const fs::path& dir) {
    fs::remove_all(dir);
    fs::create_directories(dir);
}

std::size_t reported_start(const BacktestResult& r, const BacktestConfig& c) {
    const std::size_t start = c.learn_in_periods();
    if (start >= r.steps()) {
        throw std::invalid_argument(r.asset_id + ": learn-in of " + std::to_string(start) + " periods leaves none of the " +
                                    std::to_string(r.steps()) + " scored steps to report");
    }
    return start;
}

struct LoadedRun {
    PriceTable table;
    std::string fingerprint;
};

LoadedRun load_run(const RunOptions& o, std::ostream& log) {
    o.config.validate();
    check_horizon(o.config.horizon);
    LoadedRun run{load_input(o.prices_path, log), fingerprint_file(o.prices_path)};
    if (run.table.series.empty()) {
        throw std::invalid_argument("no assets left after alignment in " + o.prices_path.string());
    }
    return run;
}

// ------------------------------------------------------------- writers

void write_simulate_body(const RunOptions& o, const std::vector<BacktestResult>& results, const std::string& fingerprint,
                    std::ostream& log) {
    const auto& c = o.config;
    const int K = c.max_memory;
    const std::size_t W = c.window_periods();
    OutputSet outputs(o.out_dir);
    reset_dir(o.out_dir / "simulate");

    std::vector<std::string> usage_header{"ticker"};
    std::vector<std::string> summary_header{"ticker", "scored_steps", "reported_steps", "success_rate"};
    std::vector<std::string> rolling_header{"date"};
    for (int m = 1; m <= K; ++m) {
        usage_header.push_back("m" + std::to_string(m));
        summary_header.push_back("success_m" + std::to_string(m));
        rolling_header.push_back("m" + std::to_string(m));
    }
    rolling_header.push_back("adaptive");
    summary_header.insert(summary_header.end(), {"up_fraction", "oracle_rate"});

    csv::Writer usage(outputs.add("simulate/memory_usage.csv"), usage_header);
    csv::Writer summary(outputs.add("simulate/summary.csv"), summary_header);

    std::size_t pooled_correct = 0;
    std::size_t pooled_steps = 0;
    std::vector<ReturnSeries> reported_signs;
    for (const auto& r : results) {
        const std::size_t L = reported_start(r, c);
        const std::string stem = file_stem_for(r.asset_id);

        csv::Writer pred(outputs.add("simulate/predictions/" + stem + ".csv"),
                         {"date", "prediction", "realized", "chosen_m", "chosen_strategy_index"});
        for (std::size_t t = 0; t < r.steps(); ++t) {
            pred.field(format_date(r.dates[t]))
                .field(r.predictions[t] == Direction::Up ? "up" : "down")
                .field(r.realized[t] == Direction::Up ? "up" : "down")
                .field(r.selection_log[t].memory)
                .field(r.selection_log[t].strategy_index);
            pred.end_row();
        }
        pred.close();

        if (W > r.steps() - L) {
            throw std::invalid_argument(r.asset_id + ": rolling window of " + std::to_string(W) +
                                        " periods is longer than the " + std::to_string(r.steps() - L) +
                                        " reported steps");
        }
        std::vector<std::vector<double>> rolling;
        for (int m = 1; m <= K; ++m) {
            rolling.push_back(rolling_success(r, W, L, m));
        }
        rolling.push_back(rolling_success(r, W, L));
        csv::Writer roll(outputs.add("simulate/rolling/" + stem + ".csv"), rolling_header);
        for (std::size_t i = 0; i < rolling.back().size(); ++i) {
            roll.field(format_date(r.dates[L + i + W - 1]));
            for (const auto& column : rolling) {
                roll.field(column[i]);
            }
            roll.end_row();
        }
        roll.close();

        const UsageDistributions fixed = fixed_usage_distributions(r, K, L);
        csv::Writer strat(outputs.add("simulate/strategy_usage/" + stem + ".csv"),
                          {"rank", "memory", "strategy_index", "fraction"});
        for (std::size_t i = 0; i < fixed.strategy_usage.size(); ++i) {
            const auto& u = fixed.strategy_usage[i];
            strat.field(i + 1).field(u.memory).field(u.strategy_index).field(u.fraction);
            strat.end_row();
        }
        strat.close();

        const UsageDistributions adaptive = usage_distributions(r, L);
        usage.field(r.asset_id);
        for (double f : adaptive.memory_usage) {
            usage.field(f);
        }
        usage.end_row();

        const auto flags = hits(r);
        const std::size_t reported = r.steps() - L;
        const auto correct = static_cast<std::size_t>(std::count(flags.begin() + static_cast<std::ptrdiff_t>(L), flags.end(), 1));
        pooled_correct += correct;
        pooled_steps += reported;

        ReturnSeries tail;
        tail.asset_id = r.asset_id;
        tail.signs.assign(r.realized.begin() + static_cast<std::ptrdiff_t>(L), r.realized.end());
        const double ups = up_fraction(std::span(&tail, 1));
        const double oracle = oracle_success_rate(std::span(&tail, 1));
        reported_signs.push_back(std::move(tail));

        summary.field(r.asset_id).field(r.steps()).field(reported).field(success_rate(r, L));
        for (int m = 1; m <= K; ++m) {
            summary.field(success_rate(r, L, r.steps(), m));
        }
        summary.field(ups).field(oracle);
        summary.end_row();
    }
    usage.close();
    summary.close();

    log << "simulate: " << results.size() << " assets, " << pooled_steps << " reported predictions\n"
        << "  success rate " << csv::number(static_cast<double>(pooled_correct) / static_cast<double>(pooled_steps))
        << ", up fraction " << csv::number(up_fraction(reported_signs)) << ", constant-direction oracle "
        << csv::number(oracle_success_rate(reported_signs)) << '\n';
    record_command(o.out_dir, "simulate", command_entry(o, fingerprint), outputs);
}

void write_quantile_rows(csv::Writer& w, const std::vector<Date>& dates, const std::vector<std::vector<double>>& series) {
    for (std::size_t i = 0; i < dates.size(); ++i) {
        std::vector<double> column;
        column.reserve(series.size());
        for (const auto& s : series) {
            column.push_back(s[i]);
        }
        w.field(format_date(dates[i]));
        for (double q : kQuantiles) {
            w.field(quantile(column, q));
        }
        w.end_row();
    }
}

/// Post-learn-in per-period returns of the costed strategy and of the asset.
struct ReportedReturns {
    std::vector<Date> dates;
    std::vector<std::string> assets;
    std::vector<std::vector<double>> strategy_net;
    std::vector<std::vector<double>> buy_and_hold;
};

ReportedReturns reported_returns(const std::vector<BacktestResult>& results, const BacktestConfig& c) {
    ReportedReturns out;
    for (const auto& r : results) {
        const std::size_t L = reported_start(r, c);
        if (out.dates.empty()) {
            out.dates.assign(r.dates.begin() + static_cast<std::ptrdiff_t>(L), r.dates.end());
        }
        std::vector<double> strategy;
        std::vector<double> bh;
        for (std::size_t k = L; k < r.steps(); ++k) {
            // Held return, less this step's trade cost when a trade occurs.
            const double held = r.positions[k] ? r.returns[k] : 0.0;
            strategy.push_back(r.trades[k] ? (1.0 + held) * (1.0 - r.cost_rate) - 1.0 : held);
            bh.push_back(r.returns[k]);
        }
        out.assets.push_back(r.asset_id);
        out.strategy_net.push_back(std::move(strategy));
        out.buy_and_hold.push_back(std::move(bh));
    }
    return out;
}

void write_return_matrix(const fs::path& path, const ReportedReturns& rr, const std::vector<std::vector<double>>& columns) {
    std::vector<std::string> header{"date"};
    header.insert(header.end(), rr.assets.begin(), rr.assets.end());
    csv::Writer w(path, header);
    for (std::size_t i = 0; i < rr.dates.size(); ++i) {
        w.field(format_date(rr.dates[i]));
        for (const auto& col : columns) {
            w.field(col[i]);
        }
        w.end_row();
    }
    w.close();
}

void write_backtest_body(const RunOptions& o, const std::vector<BacktestResult>& results, const std::string& fingerprint,
                    std::ostream& log) {
    const auto& c = o.config;
    const std::string hdir = "backtest/" + horizon_dir(c.horizon);
    OutputSet outputs(o.out_dir);
    reset_dir(o.out_dir / hdir);

    csv::Writer summary(outputs.add(hdir + "/summary.csv"), {"ticker", "reported_steps", "success_rate", "transactions",
                                                              "final_ratio_gross", "final_ratio_net"});
    std::vector<std::vector<double>> gross_ratios;
    std::vector<std::vector<double>> net_ratios;
    std::vector<Date> dates;
    std::vector<double> finals_net;
    for (const auto& r : results) {
        const std::size_t L = reported_start(r, c);
        const auto paths = rebase(r, L);
        const auto gross = return_ratio(r, false, L);
        const auto net = return_ratio(r, true, L);
        csv::Writer eq(outputs.add(hdir + "/equity/" + file_stem_for(r.asset_id) + ".csv"),
                       {"date", "position", "trade", "asset_return", "equity_gross", "equity_net", "bh_equity",
                        "ratio_gross", "ratio_net"});
        std::size_t trades = 0;
        for (std::size_t k = L; k < r.steps(); ++k) {
            trades += r.trades[k];
            eq.field(format_date(r.dates[k]))
                .field(static_cast<int>(r.positions[k]))
                .field(static_cast<int>(r.trades[k]))
                .field(r.returns[k])
                .field(paths.gross[k + 1 - L])
                .field(paths.net[k + 1 - L])
                .field(paths.bh[k + 1 - L])
                .field(gross[k + 1 - L])
                .field(net[k + 1 - L]);
            eq.end_row();
        }
        eq.close();
        if (dates.empty()) {
            dates.assign(r.dates.begin() + static_cast<std::ptrdiff_t>(L), r.dates.end());
        }
        gross_ratios.emplace_back(gross.begin() + 1, gross.end());
        net_ratios.emplace_back(net.begin() + 1, net.end());
        finals_net.push_back(net.back());
        summary.field(r.asset_id)
            .field(r.steps() - L)
            .field(success_rate(r, L))
            .field(trades)
            .field(gross.back())
            .field(net.back());
        summary.end_row();
    }
    summary.close();

    csv::Writer qg(outputs.add(hdir + "/ratio_quantiles_gross.csv"), kQuantileHeader);
    write_quantile_rows(qg, dates, gross_ratios);
    qg.close();
    csv::Writer qn(outputs.add(hdir + "/ratio_quantiles_net.csv"), kQuantileHeader);
    write_quantile_rows(qn, dates, net_ratios);
    qn.close();

    const ReportedReturns rr = reported_returns(results, c);
    write_return_matrix(outputs.add(hdir + "/returns_strategy_net.csv"), rr, rr.strategy_net);
    write_return_matrix(outputs.add(hdir + "/returns_bh.csv"), rr, rr.buy_and_hold);

    const auto beating = std::count_if(finals_net.begin(), finals_net.end(), [](double v) { return v > 1.0; });
    log << "backtest (horizon " << c.horizon << "): " << results.size() << " assets, median final net ratio "
        << csv::number(median(finals_net)) << ", " << beating << " beat buy-and-hold after costs\n";
    record_command(o.out_dir, "backtest_" + horizon_dir(c.horizon), command_entry(o, fingerprint), outputs);
}

void write_frontier_body(const RunOptions& o, const std::vector<BacktestResult>& results, const std::string& fingerprint,
                    std::ostream& log) {
    const auto& c = o.config;
    if (results.size() < o.subset_size) {
        throw std::invalid_argument("frontier needs at least " + std::to_string(o.subset_size) + " assets, only " +
                                    std::to_string(results.size()) + " survived alignment");
    }
    const std::string hdir = "frontier/" + horizon_dir(c.horizon);
    OutputSet outputs(o.out_dir);

    const ReportedReturns rr = reported_returns(results, c);
    const ReturnMatrix strategy = ReturnMatrix::from_columns(rr.assets, rr.strategy_net);
    const ReturnMatrix bh = ReturnMatrix::from_columns(rr.assets, rr.buy_and_hold);

    const FrontierSolver full_strategy(strategy);
    const FrontierSolver full_bh(bh);
    const double lo = std::min(full_strategy.min_variance().target_return, full_bh.min_variance().target_return);
    const double hi = std::max(full_strategy.max_asset_mean(), full_bh.max_asset_mean());
    const auto grid = linear_grid(lo, hi, o.grid_points);

    const auto ms = median_frontier(strategy, o.subset_size, o.subsets, grid, c.seed);
    const auto mb = median_frontier(bh, o.subset_size, o.subsets, grid, c.seed);

    reset_dir(o.out_dir / hdir);
    for (const auto& [name, points] : {std::pair{"strategy", &ms}, std::pair{"bh", &mb}}) {
        csv::Writer w(outputs.add(hdir + "/frontier_" + name + ".csv"), {"target_return", "median_stdev", "subsets"});
        for (const auto& p : *points) {
            w.field(p.target_return).field(p.median_stdev).field(p.subsets);
            w.end_row();
        }
        w.close();
    }
    log << "frontier (horizon " << c.horizon << "): " << o.subsets << " subsets of " << o.subset_size << " from "
        << results.size() << " assets, " << grid.size() << " targets\n";
    json entry = command_entry(o, fingerprint);
    entry["subset_size"] = o.subset_size;
    entry["subsets"] = o.subsets;
    entry["grid_points"] = o.grid_points;
    record_command(o.out_dir, "frontier_" + horizon_dir(c.horizon), std::move(entry), outputs);
}

/// Runs a stage writer; a failed stage leaves no directory behind.
template <typename Fn>
void guarded(const fs::path& stage_dir, Fn&& fn) {
    try {
        fn();
    } catch (...) {
        std::error_code ignored;
        fs::remove_all(stage_dir, ignored);
        throw;
    }
}

void write_simulate(const RunOptions& o, const std::vector<BacktestResult>& results, const std::string& fingerprint,
                    std::ostream& log) {
    guarded(o.out_dir / "simulate", [&] { write_simulate_body(o, results, fingerprint, log); });
}

void write_backtest(const RunOptions& o, const std::vector<BacktestResult>& results, const std::string& fingerprint,
                    std::ostream& log) {
    guarded(o.out_dir / "backtest" / horizon_dir(o.config.horizon),
            [&] { write_backtest_body(o, results, fingerprint, log); });
}

void write_frontier(const RunOptions& o, const std::vector<BacktestResult>& results, const std::string& fingerprint,
                    std::ostream& log) {
    guarded(o.out_dir / "frontier" / horizon_dir(o.config.horizon),
            [&] { write_frontier_body(o, results, fingerprint, log); });
}

// -------------------------------------------------------------- report

fs::path require(const fs::path& out_dir, const fs::path& relative, const std::string& stage) {
    const fs::path p = out_dir / relative;
    if (!fs::exists(p)) {
        throw std::runtime_error("missing stage '" + stage + "': " + p.string() + " not found");
    }
    return p;
}

std::vector<fs::path> sorted_csvs(const fs::path& dir) {
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".csv") {
            out.push_back(e.path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<double> column_values(const csv::Table& t, std::size_t col) {
    std::vector<double> out;
    out.reserve(t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        out.push_back(t.number_at(i, col));
    }
    return out;
}

/// rank-wise median share and median cumulative share of per-asset usage
/// profiles (each sorted descending; missing ranks count as zero).
void write_rank_profile(const fs::path& path, const std::vector<std::vector<double>>& profiles) {
    std::size_t ranks = 0;
    for (const auto& p : profiles) {
        ranks = std::max(ranks, p.size());
    }
    csv::Writer w(path, {"rank", "median_fraction", "median_cumulative"});
    for (std::size_t k = 0; k < ranks; ++k) {
        std::vector<double> share;
        std::vector<double> cumulative;
        for (const auto& p : profiles) {
            share.push_back(k < p.size() ? p[k] : 0.0);
            double sum = 0.0;
            for (std::size_t j = 0; j <= k && j < p.size(); ++j) {
                sum += p[j];
            }
            cumulative.push_back(sum);
        }
        w.field(k + 1).field(median(share)).field(median(cumulative));
        w.end_row();
    }
    w.close();
}

void copy_quantiles(const fs::path& from, const fs::path& to) {
    const csv::Table t = csv::read(from);
    csv::Writer w(to, t.header);
    for (const auto& row : t.rows) {
        for (const auto& f : row) {
            w.field(std::string_view(f));
        }
        w.end_row();
    }
    w.close();
}

void merge_frontiers(const fs::path& strategy_path, const fs::path& bh_path, const fs::path& to) {
    const csv::Table s = csv::read(strategy_path);
    const csv::Table b = csv::read(bh_path);
    std::map<std::string, std::string> bh_by_target;
    for (const auto& row : b.rows) {
        bh_by_target[row.at(0)] = row.at(1);
    }
    csv::Writer w(to, {"target_return", "strategy_median_stdev", "bh_median_stdev"});
    for (const auto& row : s.rows) {
        const auto it = bh_by_target.find(row.at(0));
        if (it == bh_by_target.end()) {
            continue;
        }
        w.field(std::string_view(row.at(0))).field(std::string_view(row.at(1))).field(std::string_view(it->second));
        w.end_row();
    }
    w.close();
}

void write_report(const fs::path& out_dir, std::size_t window, const fs::path& rolling_dir,
                  const fs::path& usage_path, const fs::path& strategy_dir, std::map<int, fs::path>& backtest,
                  std::map<int, fs::path>& frontier, std::ostream& log) {
    OutputSet outputs(out_dir);
    reset_dir(out_dir / "report");

    // fig1 / fig2: rolling success averaged across assets, and its quantiles.
    const auto rolling_files = sorted_csvs(rolling_dir);
    if (rolling_files.empty()) {
        throw std::runtime_error("missing stage 'simulate': no rolling success tables");
    }
    std::vector<csv::Table> rolling;
    for (const auto& f : rolling_files) {
        rolling.push_back(csv::read(f));
    }
    const auto& header = rolling.front().header;
    const std::size_t rows = rolling.front().rows.size();
    {
        csv::Writer fig1(outputs.add("report/fig1.csv"), header);
        csv::Writer fig2(outputs.add("report/fig2.csv"), kQuantileHeader);
        const std::size_t adaptive_col = rolling.front().column("adaptive");
        for (std::size_t i = 0; i < rows; ++i) {
            fig1.field(std::string_view(rolling.front().rows[i][0]));
            for (std::size_t col = 1; col < header.size(); ++col) {
                double sum = 0.0;
                for (const auto& t : rolling) {
                    sum += t.number_at(i, col);
                }
                fig1.field(sum / static_cast<double>(rolling.size()));
            }
            fig1.end_row();
            std::vector<double> adaptive;
            for (const auto& t : rolling) {
                adaptive.push_back(t.number_at(i, adaptive_col));
            }
            fig2.field(std::string_view(rolling.front().rows[i][0]));
            for (double q : kQuantiles) {
                fig2.field(quantile(adaptive, q));
            }
            fig2.end_row();
        }
        fig1.close();
        fig2.close();
    }

    // fig5 / fig7: memory usage pooled, and rank profile per asset.
    {
        const csv::Table usage = csv::read(usage_path);
        const std::size_t memories = usage.header.size() - 1;
        std::vector<double> pooled(memories, 0.0);
        std::vector<std::vector<double>> profiles;
        for (std::size_t i = 0; i < usage.rows.size(); ++i) {
            std::vector<double> p;
            for (std::size_t m = 0; m < memories; ++m) {
                const double f = usage.number_at(i, m + 1);
                pooled[m] += f / static_cast<double>(usage.rows.size());
                p.push_back(f);
            }
            std::sort(p.begin(), p.end(), std::greater<>());
            profiles.push_back(std::move(p));
        }
        csv::Writer fig5(outputs.add("report/fig5.csv"), {"memory", "fraction"});
        for (std::size_t m = 0; m < memories; ++m) {
            fig5.field(m + 1).field(pooled[m]);
            fig5.end_row();
        }
        fig5.close();
        write_rank_profile(outputs.add("report/fig7.csv"), profiles);
    }

    // fig6: strategy usage of the fixed longest-memory run.
    {
        std::vector<std::vector<double>> profiles;
        for (const auto& f : sorted_csvs(strategy_dir)) {
            const csv::Table t = csv::read(f);
            profiles.push_back(column_values(t, t.column("fraction")));
        }
        write_rank_profile(outputs.add("report/fig6.csv"), profiles);
    }

    copy_quantiles(backtest[1] / "ratio_quantiles_gross.csv", outputs.add("report/fig8.csv"));
    copy_quantiles(backtest[1] / "ratio_quantiles_net.csv", outputs.add("report/fig9.csv"));
    copy_quantiles(backtest[5] / "ratio_quantiles_net.csv", outputs.add("report/fig12_weekly.csv"));
    copy_quantiles(backtest[20] / "ratio_quantiles_net.csv", outputs.add("report/fig12_monthly.csv"));

    // fig10: rolling compounded return of the equal-weight portfolios.
    {
        auto equal_weight = [](const csv::Table& t) {
            std::vector<std::string> ids(t.header.begin() + 1, t.header.end());
            std::vector<std::vector<double>> cols;
            for (std::size_t col = 1; col < t.header.size(); ++col) {
                cols.push_back(column_values(t, col));
            }
            return equal_weight_returns(ReturnMatrix::from_columns(std::move(ids), cols));
        };
        const csv::Table strat = csv::read(backtest[1] / "returns_strategy_net.csv");
        const csv::Table bh = csv::read(backtest[1] / "returns_bh.csv");
        const auto rs = rolling_window_return(equal_weight(strat), window);
        const auto rb = rolling_window_return(equal_weight(bh), window);
        csv::Writer fig10(outputs.add("report/fig10.csv"), {"date", "strategy_net", "buy_and_hold"});
        for (std::size_t i = 0; i < rs.size(); ++i) {
            fig10.field(std::string_view(strat.rows[i + window - 1][0])).field(rs[i]).field(rb[i]);
            fig10.end_row();
        }
        fig10.close();
    }

    merge_frontiers(frontier[1] / "frontier_strategy.csv", frontier[1] / "frontier_bh.csv",
                    outputs.add("report/fig11.csv"));
    merge_frontiers(frontier[5] / "frontier_strategy.csv", frontier[5] / "frontier_bh.csv",
                    outputs.add("report/fig13_weekly.csv"));
    merge_frontiers(frontier[20] / "frontier_strategy.csv", frontier[20] / "frontier_bh.csv",
                    outputs.add("report/fig13_monthly.csv"));

    log << "report: " << outputs.files().size() << " figure tables in " << (out_dir / "report").string() << '\n';
    record_command(out_dir, "report", json::object(), outputs);
}

}  // namespace

// -------------------------------------------------------------- public

std::string fingerprint_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    std::uint64_t h = 0xcbf29ce484222325ULL;
    std::array<char, 1 << 16> buf{};
    while (in.read(buf.data(), buf.size()) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[static_cast<std::size_t>(i)]);
            h *= 0x100000001b3ULL;
        }
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

PriceTable load_input(const fs::path& path, std::ostream& log) {
    PriceTable table = load_prices_file(path.string());
    for (const auto& w : table.warnings) {
        log << "warning: " << w << '\n';
    }
    return table;
}

std::vector<BacktestResult> run_batch(const std::vector<PriceSeries>& prices, const BacktestConfig& config,
                                      bool record_fixed) {
    config.validate();
    std::vector<BacktestResult> results(prices.size());
    parallel_for(prices.size(), [&](std::size_t i) {
        BacktestConfig asset_config = config;
        asset_config.seed = asset_seed(config.seed, i);
        const ReturnSeries returns = to_returns(resample(prices[i], config.horizon), config.horizon);
        results[i] = run_backtest(returns, asset_config, record_fixed);
    });
    return results;
}

void cmd_simulate(const RunOptions& o, std::ostream& log) {
    const LoadedRun run = load_run(o, log);
    write_simulate(o, run_batch(run.table.series, o.config, true), run.fingerprint, log);
}

void cmd_backtest(const RunOptions& o, std::ostream& log) {
    const LoadedRun run = load_run(o, log);
    write_backtest(o, run_batch(run.table.series, o.config, false), run.fingerprint, log);
}

void cmd_frontier(const RunOptions& o, std::ostream& log) {
    const LoadedRun run = load_run(o, log);
    if (run.table.series.size() < o.subset_size) {
        throw std::invalid_argument("frontier needs at least " + std::to_string(o.subset_size) + " assets, only " +
                                    std::to_string(run.table.series.size()) + " survived alignment");
    }
    write_frontier(o, run_batch(run.table.series, o.config, false), run.fingerprint, log);
}

void cmd_run_all(const RunOptions& o, std::ostream& log) {
    const LoadedRun run = load_run(o, log);
    if (run.table.series.size() < o.subset_size) {
        throw std::invalid_argument("frontier needs at least " + std::to_string(o.subset_size) + " assets, only " +
                                    std::to_string(run.table.series.size()) + " survived alignment");
    }
    for (int horizon : {1, 5, 20}) {
        RunOptions step = o;
        step.config.horizon = horizon;
        const auto results = run_batch(run.table.series, step.config, horizon == 1);
        if (horizon == 1) {
            write_simulate(step, results, run.fingerprint, log);
        }
        write_backtest(step, results, run.fingerprint, log);
        write_frontier(step, results, run.fingerprint, log);
    }
    cmd_report(o.out_dir, log);
}

void cmd_report(const fs::path& out_dir, std::ostream& log) {
    require(out_dir, "simulate/summary.csv", "simulate");
    const fs::path rolling_dir = require(out_dir, "simulate/rolling", "simulate");
    const fs::path usage_path = require(out_dir, "simulate/memory_usage.csv", "simulate");
    const fs::path strategy_dir = require(out_dir, "simulate/strategy_usage", "simulate");
    std::map<int, fs::path> backtest;
    std::map<int, fs::path> frontier;
    for (int h : {1, 5, 20}) {
        const std::string stage_b = "backtest --horizon " + std::to_string(h);
        const std::string stage_f = "frontier --horizon " + std::to_string(h);
        backtest[h] = require(out_dir, "backtest/" + horizon_dir(h), stage_b);
        for (const char* f : {"ratio_quantiles_gross.csv", "ratio_quantiles_net.csv", "returns_strategy_net.csv",
                              "returns_bh.csv"}) {
            require(out_dir, fs::path("backtest") / horizon_dir(h) / f, stage_b);
        }
        frontier[h] = require(out_dir, "frontier/" + horizon_dir(h), stage_f);
        for (const char* f : {"frontier_strategy.csv", "frontier_bh.csv"}) {
            require(out_dir, fs::path("frontier") / horizon_dir(h) / f, stage_f);
        }
    }
    const json manifest = read_manifest(out_dir);
    const json* bt1 = nullptr;
    if (manifest.contains("commands") && manifest["commands"].contains("backtest_h1")) {
        bt1 = &manifest["commands"]["backtest_h1"];
    } else {
        throw std::runtime_error("missing stage 'backtest --horizon 1': no manifest entry in " +
                                 manifest_path(out_dir).string());
    }
    const auto window = (*bt1)["config"]["window_periods"].get<std::size_t>();

    guarded(out_dir / "report", [&] { write_report(out_dir, window, rolling_dir, usage_path, strategy_dir,
                                                   backtest, frontier, log); });
}

void cmd_synth(const SynthOptions& o, std::ostream& log) {
    if (o.assets < 1) {
        throw std::invalid_argument("need at least one asset");
    }
    std::vector<PriceSeries> series;
    for (std::size_t i = 0; i < o.assets; ++i) {
        char id[16];
        std::snprintf(id, sizeof id, "SYN%03zu", i);
        series.push_back(synthetic_series(o.kind, o.length, derive_seed(o.seed, i), id));
    }
    if (o.output.has_parent_path()) {
        fs::create_directories(o.output.parent_path());
    }
    std::ofstream out(o.output, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write " + o.output.string());
    }
    write_prices(out, series);
    out.close();
    if (!out) {
        throw std::runtime_error("failed writing " + o.output.string());
    }
    log << "synth: " << o.assets << " assets x " << o.length << " prices -> " << o.output.string() << '\n';
}

// ----------------------------------------------------------------- CLI

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Adaptive minority-game sign prediction and trading evaluation"};
    app.name("mgpredict");
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    RunOptions run;
    double cost_bps = 10.0;
    auto add_run_flags = [&](CLI::App* sub, bool frontier_flags) {
        sub->add_option("prices", run.prices_path, "Price file (date,ticker,close)")->required();
        sub->add_option("--out", run.out_dir, "Output run directory")->capture_default_str();
        sub->add_option("--max-memory", run.config.max_memory, "Longest memory length")
            ->capture_default_str()
            ->check(CLI::Range(1, kMaxSupportedMemory));
        sub->add_option("--strategy-cap", run.config.strategy_cap, "Strategies per memory length")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
        sub->add_option("--cost-bps", cost_bps, "Cost per transaction in basis points")
            ->capture_default_str()
            ->check(CLI::Range(0.0, 9999.0));
        sub->add_option("--learn-in", run.config.learn_in, "Trading days excluded from reported metrics")
            ->capture_default_str();
        sub->add_option("--window", run.config.window, "Rolling window in trading days")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
        sub->add_option("--horizon", run.config.horizon, "Return horizon in trading days")
            ->capture_default_str()
            ->check(CLI::IsMember({1, 5, 20}));
        sub->add_option("--seed", run.config.seed, "Random seed")->capture_default_str();
        if (frontier_flags) {
            sub->add_option("--subset-size", run.subset_size, "Assets per random portfolio subset")
                ->capture_default_str()
                ->check(CLI::PositiveNumber);
            sub->add_option("--subsets", run.subsets, "Number of random subsets")
                ->capture_default_str()
                ->check(CLI::PositiveNumber);
            sub->add_option("--grid-points", run.grid_points, "Frontier target grid size")
                ->capture_default_str()
                ->check(CLI::PositiveNumber);
        }
    };

    auto* simulate = app.add_subcommand("simulate", "Per-step predictions, rolling success and usage tables");
    add_run_flags(simulate, false);
    auto* backtest = app.add_subcommand("backtest", "Equity curves and return ratios against buy-and-hold");
    add_run_flags(backtest, false);
    auto* frontier = app.add_subcommand("frontier", "Median efficient frontiers over random asset subsets");
    add_run_flags(frontier, true);
    auto* all = app.add_subcommand("run", "simulate, backtest and frontier at horizons 1, 5, 20, then report");
    add_run_flags(all, true);

    fs::path report_dir = "mg_out";
    auto* report = app.add_subcommand("report", "Figure tables from a completed run directory");
    report->add_option("--out", report_dir, "Run directory")->capture_default_str();

    SynthOptions synth;
    std::string kind = "iid";
    auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic price file");
    synth_cmd->add_option("--kind", kind, "iid, trend, periodic or gbm")
        ->capture_default_str()
        ->check(CLI::IsMember({"iid", "trend", "periodic", "gbm"}));
    synth_cmd->add_option("--period", synth.kind.period, "Pattern period for periodic")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    synth_cmd->add_option("--mu", synth.kind.mu, "Drift per step for gbm")->capture_default_str();
    synth_cmd->add_option("--sigma", synth.kind.sigma, "Volatility per step for gbm")->capture_default_str();
    synth_cmd->add_option("--length", synth.length, "Prices per asset")->capture_default_str();
    synth_cmd->add_option("--assets", synth.assets, "Number of assets")->capture_default_str();
    synth_cmd->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
    synth_cmd->add_option("--output,-o", synth.output, "Output price file")->required();

    std::vector<const char*> argv{"mgpredict"};
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        run.config.cost_rate = cost_bps / 10000.0;
        if (simulate->parsed()) {
            cmd_simulate(run, out);
        } else if (backtest->parsed()) {
            cmd_backtest(run, out);
        } else if (frontier->parsed()) {
            cmd_frontier(run, out);
        } else if (all->parsed()) {
            cmd_run_all(run, out);
        } else if (report->parsed()) {
            cmd_report(report_dir, out);
        } else if (synth_cmd->parsed()) {
            static const std::map<std::string, SyntheticKind::Shape> shapes{
                {"iid", SyntheticKind::Shape::IidCoin},
                {"trend", SyntheticKind::Shape::Trend},
                {"periodic", SyntheticKind::Shape::Periodic},
                {"gbm", SyntheticKind::Shape::Gbm}};
            synth.kind.shape = shapes.at(kind);
            cmd_synth(synth, out);
        }
    } catch (const std::exception& e) {
        err << "mgpredict: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace mgpredict
