#include "mgpredict/portfolio.h"

#include "mgpredict/parallel.h"
#include "mgpredict/random.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mgpredict {

ReturnMatrix::ReturnMatrix(std::vector<std::string> asset_ids, Eigen::MatrixXd data)
    : assets(std::move(asset_ids)), values(std::move(data)) {
    if (static_cast<Eigen::Index>(assets.size()) != values.cols()) {
        throw std::invalid_argument("asset list and return matrix width differ");
    }
}

ReturnMatrix ReturnMatrix::from_columns(std::vector<std::string> asset_ids,
                                        const std::vector<std::vector<double>>& columns) {
    if (asset_ids.size() != columns.size()) {
        throw std::invalid_argument("asset list and column count differ");
    }
    const std::size_t periods = columns.empty() ? 0 : columns.front().size();
    Eigen::MatrixXd data(static_cast<Eigen::Index>(periods), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (columns[j].size() != periods) {
            throw std::invalid_argument("return matrix is not rectangular: asset " + asset_ids[j] + " has " +
                                        std::to_string(columns[j].size()) + " periods, expected " +
                                        std::to_string(periods));
        }
        for (std::size_t t = 0; t < periods; ++t) {
            data(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = columns[j][t];
        }
    }
    return ReturnMatrix(std::move(asset_ids), std::move(data));
}

ReturnMatrix ReturnMatrix::select(std::span<const std::size_t> columns) const {
    std::vector<std::string> ids;
    Eigen::MatrixXd data(values.rows(), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (columns[j] >= asset_count()) {
            throw std::out_of_range("asset column out of range");
        }
        ids.push_back(assets[columns[j]]);
        data.col(static_cast<Eigen::Index>(j)) = values.col(static_cast<Eigen::Index>(columns[j]));
    }
    return ReturnMatrix(std::move(ids), std::move(data));
}

std::vector<double> equal_weight_returns(const ReturnMatrix& matrix) {
    if (matrix.asset_count() == 0 || matrix.periods() == 0) {
        throw std::invalid_argument("empty return matrix");
    }
    const Eigen::VectorXd mean = matrix.values.rowwise().mean();
    return {mean.data(), mean.data() + mean.size()};
}

std::vector<double> rolling_window_return(std::span<const double> returns, std::size_t window) {
    if (window < 1) {
        throw std::invalid_argument("window must be at least 1");
    }
    if (window > returns.size()) {
        throw std::invalid_argument("window of " + std::to_string(window) + " exceeds series length " +
                                    std::to_string(returns.size()));
    }
    // Direct products per window: a running quotient would drift.
    std::vector<double> out(returns.size() - window + 1);
    for (std::size_t i = 0; i < out.size(); ++i) {
        double growth = 1.0;
        for (std::size_t k = i; k < i + window; ++k) {
            growth *= 1.0 + returns[k];
        }
        out[i] = growth - 1.0;
    }
    return out;
}

// ---------------------------------------------------------- FrontierSolver

FrontierSolver::FrontierSolver(const ReturnMatrix& matrix, double ridge) {
    const Eigen::Index n = matrix.values.cols();
    const Eigen::Index periods = matrix.values.rows();
    if (n == 0) {
        throw std::invalid_argument("empty return matrix");
    }
    if (periods < 2) {
        throw std::invalid_argument("need at least two periods to estimate a covariance");
    }
    mean_ = matrix.values.colwise().mean().transpose();
    const Eigen::MatrixXd centered = matrix.values.rowwise() - mean_.transpose();
    covariance_ = (centered.transpose() * centered) / static_cast<double>(periods - 1);
    factorize(ridge);
}

FrontierSolver::FrontierSolver(Eigen::VectorXd mean, Eigen::MatrixXd covariance, double ridge)
    : mean_(std::move(mean)), covariance_(std::move(covariance)) {
    if (mean_.size() == 0 || covariance_.rows() != mean_.size() || covariance_.cols() != mean_.size()) {
        throw std::invalid_argument("mean and covariance dimensions disagree");
    }
    factorize(ridge);
}

void FrontierSolver::factorize(double ridge) {
    const Eigen::Index n = mean_.size();
    Eigen::LLT<Eigen::MatrixXd> llt(covariance_);
    if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-12)) {
        if (!(ridge > 0.0)) {
            throw std::domain_error("covariance matrix is singular and no ridge was given");
        }
        covariance_.diagonal().array() += ridge;
        ridge_applied_ = true;
        llt.compute(covariance_);
        if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-15)) {
            throw std::domain_error("covariance matrix is singular even after adding the ridge");
        }
    }
    inv_ones_ = llt.solve(Eigen::VectorXd::Ones(n));
    inv_mean_ = llt.solve(mean_);
    a_ = inv_ones_.sum();
    b_ = inv_mean_.sum();
    c_ = mean_.dot(inv_mean_);
    d_ = a_ * c_ - b_ * b_;
    degenerate_ = d_ <= 1e-10 * std::abs(a_ * c_);
}

FrontierPoint FrontierSolver::min_variance() const {
    FrontierPoint p;
    p.target_return = b_ / a_;
    p.stdev = std::sqrt(1.0 / a_);
    const Eigen::VectorXd w = inv_ones_ / a_;
    p.weights.assign(w.data(), w.data() + w.size());
    return p;
}

std::optional<FrontierPoint> FrontierSolver::solve(double target) const {
    if (!std::isfinite(target)) {
        return std::nullopt;
    }
    if (degenerate_) {
        const double common = b_ / a_;
        if (std::abs(target - common) > 1e-12 + 1e-9 * std::abs(common)) {
            return std::nullopt;
        }
        FrontierPoint p = min_variance();
        p.target_return = target;
        return p;
    }
    FrontierPoint p;
    p.target_return = target;
    const Eigen::VectorXd w = (inv_ones_ * (c_ - b_ * target) + inv_mean_ * (a_ * target - b_)) / d_;
    p.weights.assign(w.data(), w.data() + w.size());
    const double variance = (a_ * target * target - 2.0 * b_ * target + c_) / d_;
    p.stdev = std::sqrt(std::max(variance, 0.0));
    return p;
}

std::vector<FrontierPoint> efficient_frontier(const ReturnMatrix& matrix, std::span<const double> targets, double ridge) {
    if (targets.empty()) {
        throw std::invalid_argument("empty target grid");
    }
    const FrontierSolver solver(matrix, ridge);
    std::vector<FrontierPoint> out;
    out.reserve(targets.size());
    for (double r : targets) {
        if (auto p = solver.solve(r)) {
            out.push_back(std::move(*p));
        }
    }
    return out;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t points) {
    if (points == 0) {
        throw std::invalid_argument("grid needs at least one point");
    }
    if (points == 1) {
        return {lo};
    }
    std::vector<double> grid(points);
    const double step = (hi - lo) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) {
        grid[i] = lo + step * static_cast<double>(i);
    }
    grid.back() = hi;
    return grid;
}

std::vector<double> default_target_grid(const ReturnMatrix& matrix, std::size_t points, double ridge) {
    const FrontierSolver solver(matrix, ridge);
    if (solver.degenerate()) {
        return {solver.min_variance().target_return};
    }
    return linear_grid(solver.min_variance().target_return, solver.max_asset_mean(), points);
}

std::vector<std::vector<std::size_t>> draw_subsets(std::size_t universe, std::size_t subset_size,
                                                   std::size_t n_subsets, std::uint64_t seed) {
    if (subset_size > universe) {
        throw std::invalid_argument("subset size " + std::to_string(subset_size) + " exceeds the " +
                                    std::to_string(universe) + " available assets");
    }
    if (subset_size == 0) {
        throw std::invalid_argument("subset size must be at least 1");
    }
    std::vector<std::vector<std::size_t>> subsets(n_subsets);
    for (std::size_t j = 0; j < n_subsets; ++j) {
        Rng rng(derive_seed(seed, j));
        std::vector<std::size_t> pool(universe);
        std::iota(pool.begin(), pool.end(), std::size_t{0});
        for (std::size_t i = 0; i < subset_size; ++i) {
            const std::size_t pick = i + static_cast<std::size_t>(rng.below(universe - i));
            std::swap(pool[i], pool[pick]);
        }
        pool.resize(subset_size);
        std::sort(pool.begin(), pool.end());
        subsets[j] = std::move(pool);
    }
    return subsets;
}

double median(std::vector<double> values) {
    if (values.empty()) {
        throw std::invalid_argument("median of an empty set");
    }
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) {
        throw std::invalid_argument("quantile of an empty set");
    }
    if (!(q >= 0.0 && q <= 1.0)) {
        throw std::invalid_argument("quantile level must lie in [0, 1]");
    }
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<MedianFrontierPoint> median_frontier(const ReturnMatrix& matrix, std::size_t subset_size,
                                                 std::size_t n_subsets, std::span<const double> targets,
                                                 std::uint64_t seed, double ridge) {
    if (targets.empty()) {
        throw std::invalid_argument("empty target grid");
    }
    if (n_subsets < 1) {
        throw std::invalid_argument("need at least one subset");
    }
    const auto subsets = draw_subsets(matrix.asset_count(), subset_size, n_subsets, seed);

    // stdevs[j][i]: subset j at target i, NaN when unattainable.
    std::vector<std::vector<double>> stdevs(n_subsets);
    parallel_for(n_subsets, [&](std::size_t j) {
        const FrontierSolver solver(matrix.select(subsets[j]), ridge);
        auto& row = stdevs[j];
        row.assign(targets.size(), std::numeric_limits<double>::quiet_NaN());
        for (std::size_t i = 0; i < targets.size(); ++i) {
            if (auto p = solver.solve(targets[i])) {
                row[i] = p->stdev;
            }
        }
    });

    std::vector<MedianFrontierPoint> out;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        std::vector<double> column;
        for (const auto& row : stdevs) {
            if (!std::isnan(row[i])) {
                column.push_back(row[i]);
            }
        }
        if (!column.empty()) {
            out.push_back({targets[i], median(column), column.size()});
        }
    }
    return out;
}

}  // namespace mgpredict
