#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mgpredict {

/// Per-period simple returns, one column per asset, rows aligned by date.
struct ReturnMatrix {
    std::vector<std::string> assets;
    Eigen::MatrixXd values;  // periods x assets

    ReturnMatrix() = default;
    ReturnMatrix(std::vector<std::string> asset_ids, Eigen::MatrixXd data);
    /// Builds from one return column per asset; all columns must be equally long.
    static ReturnMatrix from_columns(std::vector<std::string> asset_ids, const std::vector<std::vector<double>>& columns);

    std::size_t asset_count() const { return static_cast<std::size_t>(values.cols()); }
    std::size_t periods() const { return static_cast<std::size_t>(values.rows()); }
    ReturnMatrix select(std::span<const std::size_t> columns) const;
};

/// Arithmetic mean across assets, per period.
std::vector<double> equal_weight_returns(const ReturnMatrix& matrix);

/// Compounded return over each trailing window: prod(1 + r) - 1.
std::vector<double> rolling_window_return(std::span<const double> returns, std::size_t window);

struct FrontierPoint {
    double target_return = 0.0;
    double stdev = 0.0;
    std::vector<double> weights;
};

inline constexpr double kDefaultRidge = 1e-8;

/// Closed-form minimum-variance portfolios with full investment and a target
/// mean (short sales allowed). Moments are the sample mean and the sample
/// covariance (n - 1 denominator); `ridge` is added to the covariance
/// diagonal only when it is numerically singular.
class FrontierSolver {
public:
    explicit FrontierSolver(const ReturnMatrix& matrix, double ridge = kDefaultRidge);
    /// From known moments instead of sample estimates.
    FrontierSolver(Eigen::VectorXd mean, Eigen::MatrixXd covariance, double ridge = kDefaultRidge);

    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::MatrixXd& covariance() const { return covariance_; }
    bool ridge_applied() const { return ridge_applied_; }

    /// Global minimum-variance portfolio.
    FrontierPoint min_variance() const;
    double max_asset_mean() const { return mean_.maxCoeff(); }

    /// True when every asset has (numerically) the same mean, so the only
    /// attainable target is that common mean.
    bool degenerate() const { return degenerate_; }

    /// Frontier portfolio for `target`, or nullopt when unattainable.
    std::optional<FrontierPoint> solve(double target) const;

private:
    void factorize(double ridge);

    Eigen::VectorXd mean_;
    Eigen::MatrixXd covariance_;
    Eigen::VectorXd inv_ones_;  // covariance^-1 * 1
    Eigen::VectorXd inv_mean_;  // covariance^-1 * mean
    double a_ = 0.0;            // 1' S^-1 1
    double b_ = 0.0;            // 1' S^-1 mu
    double c_ = 0.0;            // mu' S^-1 mu
    double d_ = 0.0;            // a c - b^2
    bool degenerate_ = false;
    bool ridge_applied_ = false;
};

/// Frontier points for every attainable target, in grid order.
std::vector<FrontierPoint> efficient_frontier(const ReturnMatrix& matrix, std::span<const double> targets,
                                              double ridge = kDefaultRidge);

/// `points` evenly spaced targets from the minimum-variance mean to the
/// largest single-asset mean.
std::vector<double> default_target_grid(const ReturnMatrix& matrix, std::size_t points = 50,
                                        double ridge = kDefaultRidge);
std::vector<double> linear_grid(double lo, double hi, std::size_t points);

/// Seeded uniform subsets without replacement, each sorted ascending.
std::vector<std::vector<std::size_t>> draw_subsets(std::size_t universe, std::size_t subset_size,
                                                   std::size_t n_subsets, std::uint64_t seed);

struct MedianFrontierPoint {
    double target_return = 0.0;
    double median_stdev = 0.0;
    std::size_t subsets = 0;  // subsets attaining this target
};

/// Per target, the median frontier stdev across random asset subsets.
/// Targets no subset attains are left out.
std::vector<MedianFrontierPoint> median_frontier(const ReturnMatrix& matrix, std::size_t subset_size,
                                                 std::size_t n_subsets, std::span<const double> targets,
                                                 std::uint64_t seed, double ridge = kDefaultRidge);

/// Median with the mean of the two middle values for even counts.
double median(std::vector<double> values);

/// Linear-interpolation quantile (q in [0, 1]) of unsorted values.
double quantile(std::vector<double> values, double q);

}  // namespace mgpredict
