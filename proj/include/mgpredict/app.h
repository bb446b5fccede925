#pragma once

#include "mgpredict/backtest.h"
#include "mgpredict/data.h"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace mgpredict {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunOptions {
    std::filesystem::path prices_path;
    std::filesystem::path out_dir = "mg_out";
    BacktestConfig config;
    std::size_t subset_size = 50;
    std::size_t subsets = 100;
    std::size_t grid_points = 50;
};

struct SynthOptions {
    SyntheticKind kind;
    std::size_t length = 4000;
    std::size_t assets = 1;
    std::uint64_t seed = 0;
    std::filesystem::path output;
};

/// Per-asset seed: the run seed XOR the asset's position in ticker order.
inline std::uint64_t asset_seed(std::uint64_t seed, std::size_t asset_index) { return seed ^ asset_index; }

/// Resamples every series to config.horizon, converts to returns and runs
/// the backtest for each asset (in parallel, results in input order).
std::vector<BacktestResult> run_batch(const std::vector<PriceSeries>& prices, const BacktestConfig& config,
                                      bool record_fixed);

/// Loads the price file, printing alignment warnings to `log`.
PriceTable load_input(const std::filesystem::path& path, std::ostream& log);

// Each command writes its tables under out_dir and records them in
// out_dir/manifest.json. Layout:
//   simulate/                       prediction records, rolling success, usage
//   backtest/h<horizon>/            equity paths, ratio quantiles, return matrices
//   frontier/h<horizon>/            median frontiers for strategy and buy-and-hold
//   report/                         one CSV per figure
// All throw on failure.
void cmd_simulate(const RunOptions& options, std::ostream& log);
void cmd_backtest(const RunOptions& options, std::ostream& log);
void cmd_frontier(const RunOptions& options, std::ostream& log);
void cmd_report(const std::filesystem::path& out_dir, std::ostream& log);
void cmd_synth(const SynthOptions& options, std::ostream& log);
/// simulate, then backtest and frontier at horizons 1, 5 and 20, then report.
void cmd_run_all(const RunOptions& options, std::ostream& log);

/// Content fingerprint of a file: FNV-1a 64 as 16 hex digits.
std::string fingerprint_file(const std::filesystem::path& path);

/// Parses a command line (args exclude the program name) and runs it.
/// Returns the process exit code; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mgpredict
