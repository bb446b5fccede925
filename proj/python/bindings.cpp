#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mgpredict/app.h"
#include "mgpredict/backtest.h"
#include "mgpredict/data.h"
#include "mgpredict/engine.h"
#include "mgpredict/portfolio.h"

#include <sstream>

namespace py = pybind11;
using namespace mgpredict;

namespace {

std::vector<Direction> to_directions(const std::vector<int>& signs) {
    std::vector<Direction> out;
    out.reserve(signs.size());
    for (int s : signs) {
        out.push_back(s > 0 ? Direction::Up : Direction::Down);
    }
    return out;
}

std::vector<int> to_ints(const std::vector<Direction>& signs) {
    std::vector<int> out;
    out.reserve(signs.size());
    for (auto s : signs) {
        out.push_back(s == Direction::Up ? 1 : 0);
    }
    return out;
}

std::vector<std::string> iso_dates(const std::vector<Date>& dates) {
    std::vector<std::string> out;
    out.reserve(dates.size());
    for (auto d : dates) {
        out.push_back(format_date(d));
    }
    return out;
}

ReturnSeries returns_from_prices(const std::vector<double>& prices, const std::string& asset_id, int horizon) {
    PriceSeries s;
    s.asset_id = asset_id;
    s.prices = prices;
    Date day = parse_date("2000-01-03");
    for (std::size_t i = 0; i < prices.size(); ++i) {
        s.dates.push_back(day);
        day += std::chrono::days{1};
    }
    return to_returns(resample(s, horizon), horizon);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Adaptive minority-game sign prediction, backtesting and frontier tools";
    m.attr("__version__") = kToolVersion;

    py::enum_<Direction>(m, "Direction").value("Down", Direction::Down).value("Up", Direction::Up);

    py::class_<HistoryIndex>(m, "HistoryIndex")
        .def_readonly("memory", &HistoryIndex::memory)
        .def_readonly("index", &HistoryIndex::index)
        .def("__repr__", [](const HistoryIndex& h) {
            return "HistoryIndex(memory=" + std::to_string(h.memory) + ", index=" + std::to_string(h.index) + ")";
        });

    m.def(
        "encode_history",
        [](const std::vector<int>& signs, int memory) { return encode_history(to_directions(signs), memory); },
        py::arg("signs"), py::arg("memory"), "History index of the last `memory` signs (1 = up, 0 = down).");

    py::class_<StrategyBank>(m, "StrategyBank")
        .def_property_readonly("memory", &StrategyBank::memory)
        .def("__len__", &StrategyBank::size)
        .def_property_readonly("scores",
                               [](const StrategyBank& b) { return std::vector<int>(b.scores().begin(), b.scores().end()); })
        .def("table", [](const StrategyBank& b, std::size_t i) {
            const Strategy s = b.strategy(i);
            std::vector<int> bits(s.table_bits());
            for (std::size_t h = 0; h < bits.size(); ++h) {
                bits[h] = s.bit(h) ? 1 : 0;
            }
            return bits;
        });

    m.def("generate_bank", &generate_bank, py::arg("memory"), py::arg("cap") = 10000, py::arg("seed") = 0);

    py::class_<Selection>(m, "Selection")
        .def_readonly("memory", &Selection::memory)
        .def_readonly("strategy_index", &Selection::strategy_index);

    py::class_<EngineConfig>(m, "EngineConfig")
        .def(py::init<>())
        .def_readwrite("max_memory", &EngineConfig::max_memory)
        .def_readwrite("strategy_cap", &EngineConfig::strategy_cap)
        .def_readwrite("seed", &EngineConfig::seed)
        .def_readwrite("fixed_memory", &EngineConfig::fixed_memory);

    py::class_<AdaptiveState>(m, "AdaptiveState")
        .def(py::init<const EngineConfig&>())
        .def("update_scores",
             [](AdaptiveState& s, const std::vector<int>& signs, int realized) {
                 s.update_scores(to_directions(signs), realized > 0 ? Direction::Up : Direction::Down);
             })
        .def("select_best", &AdaptiveState::select_best)
        .def("predict_next",
             [](AdaptiveState& s, const std::vector<int>& signs) {
                 return s.predict_next(to_directions(signs)) == Direction::Up ? 1 : 0;
             })
        .def("bank", &AdaptiveState::bank, py::return_value_policy::reference_internal)
        .def_property_readonly("selection_log", [](const AdaptiveState& s) {
            return std::vector<Selection>(s.selection_log().begin(), s.selection_log().end());
        });

    py::class_<BacktestConfig>(m, "BacktestConfig")
        .def(py::init<>())
        .def_readwrite("strategy_cap", &BacktestConfig::strategy_cap)
        .def_readwrite("max_memory", &BacktestConfig::max_memory)
        .def_readwrite("cost_rate", &BacktestConfig::cost_rate)
        .def_readwrite("learn_in", &BacktestConfig::learn_in)
        .def_readwrite("window", &BacktestConfig::window)
        .def_readwrite("horizon", &BacktestConfig::horizon)
        .def_readwrite("seed", &BacktestConfig::seed)
        .def_readwrite("fixed_memory", &BacktestConfig::fixed_memory);

    py::class_<BacktestResult>(m, "BacktestResult")
        .def_readonly("asset_id", &BacktestResult::asset_id)
        .def_property_readonly("dates", [](const BacktestResult& r) { return iso_dates(r.dates); })
        .def_readonly("returns", &BacktestResult::returns)
        .def_property_readonly("predictions", [](const BacktestResult& r) { return to_ints(r.predictions); })
        .def_property_readonly("realized", [](const BacktestResult& r) { return to_ints(r.realized); })
        .def_readonly("positions", &BacktestResult::positions)
        .def_readonly("transaction_count", &BacktestResult::transaction_count)
        .def_readonly("equity_gross", &BacktestResult::equity_gross)
        .def_readonly("equity_net", &BacktestResult::equity_net)
        .def_readonly("bh_equity", &BacktestResult::bh_equity)
        .def_readonly("selection_log", &BacktestResult::selection_log)
        .def_property_readonly("steps", &BacktestResult::steps);

    m.def(
        "synthetic_prices",
        [](const std::string& kind, std::size_t length, std::uint64_t seed, int period, double mu, double sigma) {
            SyntheticKind k;
            if (kind == "iid") {
                k = SyntheticKind::iid_coin();
            } else if (kind == "trend") {
                k = SyntheticKind::trend();
            } else if (kind == "periodic") {
                k = SyntheticKind::periodic(period);
            } else if (kind == "gbm") {
                k = SyntheticKind::gbm(mu, sigma);
            } else {
                throw py::value_error("kind must be iid, trend, periodic or gbm");
            }
            return synthetic_series(k, length, seed).prices;
        },
        py::arg("kind"), py::arg("length"), py::arg("seed") = 0, py::arg("period") = 2, py::arg("mu") = 0.0,
        py::arg("sigma") = 0.01);

    m.def(
        "run_backtest",
        [](const std::vector<double>& prices, const BacktestConfig& config, const std::string& asset_id) {
            return run_backtest(returns_from_prices(prices, asset_id, config.horizon), config);
        },
        py::arg("prices"), py::arg("config") = BacktestConfig{}, py::arg("asset_id") = "ASSET",
        py::call_guard<py::gil_scoped_release>());

    m.def(
        "success_rate", [](const BacktestResult& r, std::size_t from_step) { return success_rate(r, from_step); },
        py::arg("result"), py::arg("from_step") = 0);
    m.def(
        "rolling_success",
        [](const BacktestResult& r, std::size_t window, std::size_t from_step) {
            return rolling_success(r, window, from_step);
        },
        py::arg("result"), py::arg("window"), py::arg("from_step") = 0);
    m.def("return_ratio", &return_ratio, py::arg("result"), py::arg("net"), py::arg("from_step") = 0);
    m.def(
        "memory_usage",
        [](const BacktestResult& r, std::size_t from_step) { return usage_distributions(r, from_step).memory_usage; },
        py::arg("result"), py::arg("from_step") = 0);

    py::class_<FrontierPoint>(m, "FrontierPoint")
        .def_readonly("target_return", &FrontierPoint::target_return)
        .def_readonly("stdev", &FrontierPoint::stdev)
        .def_readonly("weights", &FrontierPoint::weights);

    py::class_<MedianFrontierPoint>(m, "MedianFrontierPoint")
        .def_readonly("target_return", &MedianFrontierPoint::target_return)
        .def_readonly("median_stdev", &MedianFrontierPoint::median_stdev)
        .def_readonly("subsets", &MedianFrontierPoint::subsets);

    auto matrix_of = [](const Eigen::MatrixXd& values) {
        std::vector<std::string> ids;
        for (Eigen::Index j = 0; j < values.cols(); ++j) {
            ids.push_back("A" + std::to_string(j));
        }
        return ReturnMatrix(std::move(ids), values);
    };

    m.def(
        "equal_weight_returns",
        [matrix_of](const Eigen::MatrixXd& values) { return equal_weight_returns(matrix_of(values)); },
        py::arg("returns"), "Row means of a periods x assets return matrix.");
    m.def(
        "rolling_window_return",
        [](const std::vector<double>& returns, std::size_t window) { return rolling_window_return(returns, window); },
        py::arg("returns"), py::arg("window"));
    m.def(
        "efficient_frontier",
        [matrix_of](const Eigen::MatrixXd& values, const std::vector<double>& targets, double ridge) {
            return efficient_frontier(matrix_of(values), targets, ridge);
        },
        py::arg("returns"), py::arg("targets"), py::arg("ridge") = kDefaultRidge);
    m.def(
        "default_target_grid",
        [matrix_of](const Eigen::MatrixXd& values, std::size_t points) {
            return default_target_grid(matrix_of(values), points);
        },
        py::arg("returns"), py::arg("points") = 50);
    m.def(
        "median_frontier",
        [matrix_of](const Eigen::MatrixXd& values, std::size_t subset_size, std::size_t n_subsets,
                    const std::vector<double>& targets, std::uint64_t seed) {
            return median_frontier(matrix_of(values), subset_size, n_subsets, targets, seed);
        },
        py::arg("returns"), py::arg("subset_size"), py::arg("n_subsets"), py::arg("targets"), py::arg("seed") = 0);

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out;
            std::ostringstream err;
            int code = 0;
            {
                py::gil_scoped_release release;
                code = run_cli(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command-line tool in-process; returns (exit_code, stdout, stderr).");
}
