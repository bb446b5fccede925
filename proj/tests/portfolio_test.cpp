#include <doctest.h>

#include "mgpredict/portfolio.h"
#include "mgpredict/random.h"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace mgpredict;

namespace {

ReturnMatrix random_matrix(std::size_t periods, std::size_t assets, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd v(static_cast<Eigen::Index>(periods), static_cast<Eigen::Index>(assets));
    // A common factor keeps the assets correlated, as equities are.
    for (Eigen::Index t = 0; t < v.rows(); ++t) {
        const double market = 0.01 * rng.normal();
        for (Eigen::Index j = 0; j < v.cols(); ++j) {
            v(t, j) = 0.0002 * static_cast<double>(j + 1) + 0.5 * market + 0.01 * rng.normal();
        }
    }
    std::vector<std::string> ids;
    for (std::size_t j = 0; j < assets; ++j) {
        ids.push_back("A" + std::to_string(j));
    }
    return ReturnMatrix(ids, v);
}

// Minimum-variance weights from the bordered KKT system, solved directly.
Eigen::VectorXd kkt_weights(const Eigen::VectorXd& mu, const Eigen::MatrixXd& cov, double target) {
    const Eigen::Index n = mu.size();
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n + 2, n + 2);
    k.topLeftCorner(n, n) = 2.0 * cov;
    k.block(0, n, n, 1) = mu;
    k.block(0, n + 1, n, 1) = Eigen::VectorXd::Ones(n);
    k.block(n, 0, 1, n) = mu.transpose();
    k.block(n + 1, 0, 1, n) = Eigen::RowVectorXd::Ones(n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 2);
    rhs(n) = target;
    rhs(n + 1) = 1.0;
    return k.fullPivLu().solve(rhs).head(n);
}

double sample_stdev(const Eigen::VectorXd& x) {
    const double m = x.mean();
    return std::sqrt((x.array() - m).square().sum() / static_cast<double>(x.size() - 1));
}

}  // namespace

TEST_CASE("equal_weight_returns examples") {
    const auto one = ReturnMatrix::from_columns({"A"}, {{0.01, -0.02, 0.03}});
    CHECK(equal_weight_returns(one) == std::vector<double>{0.01, -0.02, 0.03});
    const auto two = ReturnMatrix::from_columns({"A", "B"}, {{0.10}, {-0.10}});
    CHECK(equal_weight_returns(two)[0] == 0.0);
    const auto three = ReturnMatrix::from_columns({"A", "B", "C"}, {{0.01}, {0.02}, {0.03}});
    CHECK(equal_weight_returns(three)[0] == doctest::Approx(0.02).epsilon(1e-15));
    CHECK_THROWS(equal_weight_returns(ReturnMatrix{}));
    CHECK_THROWS(ReturnMatrix::from_columns({"A", "B"}, {{0.1, 0.2}, {0.1}}));
}

TEST_CASE("rolling_window_return examples") {
    const std::vector<double> zeros(10, 0.0);
    CHECK(std::ranges::all_of(rolling_window_return(zeros, 4), [](double x) { return x == 0.0; }));
    const std::vector<double> r{0.01, -0.02, 0.05};
    const auto r1 = rolling_window_return(r, 1);
    for (std::size_t i = 0; i < r.size(); ++i) {
        CHECK(r1[i] == doctest::Approx(r[i]).epsilon(1e-14));
    }
    const std::vector<double> tens{0.10, 0.10};
    const auto two = rolling_window_return(tens, 2);
    REQUIRE(two.size() == 1);
    CHECK(two[0] == doctest::Approx(0.21).epsilon(1e-14));
    CHECK_THROWS(rolling_window_return(tens, 3));
}

TEST_CASE("two uncorrelated assets: minimum variance at (0.8, 0.2)") {
    Eigen::Vector2d mu(0.01, 0.02);
    Eigen::Matrix2d cov;
    cov << 0.02 * 0.02, 0.0, 0.0, 0.04 * 0.04;
    const FrontierSolver solver(mu, cov);
    const auto gmv = solver.min_variance();
    CHECK(gmv.weights[0] == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(gmv.weights[1] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(gmv.target_return == doctest::Approx(0.012).epsilon(1e-12));
    CHECK_FALSE(solver.ridge_applied());
}

TEST_CASE("two-asset frontier matches the explicit two-asset solution") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto m = random_matrix(300, 2, seed);
        const FrontierSolver solver(m);
        const Eigen::VectorXd mu = solver.mean();
        const Eigen::MatrixXd cov = solver.covariance();
        const auto grid = linear_grid(mu.minCoeff() - 0.001, mu.maxCoeff() + 0.001, 50);
        const auto frontier = efficient_frontier(m, grid);
        REQUIRE(frontier.size() == 50);
        for (const auto& p : frontier) {
            // Two constraints pin both weights: w1 mu1 + (1 - w1) mu2 = r.
            const double w1 = (p.target_return - mu(1)) / (mu(0) - mu(1));
            const Eigen::Vector2d w(w1, 1.0 - w1);
            const double sd = std::sqrt(w.dot(cov * w));
            CHECK(std::abs(p.stdev - sd) <= 1e-10);
            CHECK(std::abs(p.weights[0] - w1) <= 1e-8);
        }
    }
}

TEST_CASE("frontier weights agree with a bordered KKT solve") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto m = random_matrix(200, 6, 40 + seed);
        const FrontierSolver solver(m);
        for (double r : linear_grid(0.0, 0.002, 7)) {
            const auto p = solver.solve(r);
            REQUIRE(p);
            const Eigen::VectorXd w = kkt_weights(solver.mean(), solver.covariance(), r);
            for (Eigen::Index j = 0; j < w.size(); ++j) {
                CHECK(p->weights[static_cast<std::size_t>(j)] == doctest::Approx(w(j)).epsilon(1e-8));
            }
        }
    }
}

TEST_CASE("frontier invariants on random matrices") {
    Rng rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t assets = 2 + rng.below(9);
        const std::size_t periods = 50 + rng.below(451);
        const auto m = random_matrix(periods, assets, 100 + static_cast<std::uint64_t>(trial));
        const FrontierSolver solver(m);
        const auto gmv = solver.min_variance();
        const auto grid = default_target_grid(m, 50);
        CHECK(grid.front() == doctest::Approx(gmv.target_return));
        CHECK(grid.back() == doctest::Approx(solver.max_asset_mean()));
        const auto frontier = efficient_frontier(m, grid);
        REQUIRE(frontier.size() == grid.size());
        for (std::size_t i = 0; i < frontier.size(); ++i) {
            const auto& p = frontier[i];
            const Eigen::Map<const Eigen::VectorXd> w(p.weights.data(), static_cast<Eigen::Index>(p.weights.size()));
            CHECK(std::abs(w.sum() - 1.0) <= 1e-8);
            CHECK(std::abs(w.dot(solver.mean()) - p.target_return) <= 1e-8);
            CHECK(p.stdev >= gmv.stdev - 1e-10);
            CHECK(p.stdev == doctest::Approx(std::sqrt(w.dot(solver.covariance() * w))).epsilon(1e-8));
            if (i >= 2) {
                CHECK(frontier[i].stdev - 2.0 * frontier[i - 1].stdev + frontier[i - 2].stdev >= -1e-9);
            }
        }
    }
}

TEST_CASE("one-asset and duplicated-asset frontiers") {
    const auto one = random_matrix(120, 1, 5);
    const FrontierSolver single(one);
    CHECK(single.degenerate());
    const double mean = one.values.col(0).mean();
    const std::vector<double> at_mean{mean};
    const auto f = efficient_frontier(one, at_mean);
    REQUIRE(f.size() == 1);
    CHECK(f[0].weights[0] == doctest::Approx(1.0));
    CHECK(f[0].stdev == doctest::Approx(sample_stdev(one.values.col(0))).epsilon(1e-12));
    const std::vector<double> off{mean + 0.01};
    CHECK(efficient_frontier(one, off).empty());

    Eigen::MatrixXd dup(120, 2);
    dup.col(0) = one.values.col(0);
    dup.col(1) = one.values.col(0);
    const ReturnMatrix twin({"A", "B"}, dup);
    const FrontierSolver twin_solver(twin);
    CHECK(twin_solver.ridge_applied());
    const auto tf = efficient_frontier(twin, at_mean);
    REQUIRE(tf.size() == 1);
    CHECK(tf[0].weights[0] + tf[0].weights[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(tf[0].weights[0] * mean + tf[0].weights[1] * mean == doctest::Approx(mean).epsilon(1e-12));
    CHECK_THROWS_AS(FrontierSolver(twin, 0.0), std::domain_error);
    CHECK_THROWS(efficient_frontier(twin, std::vector<double>{}));
}

TEST_CASE("subset draws are seeded, sorted and without replacement") {
    const auto a = draw_subsets(40, 10, 25, 9);
    const auto b = draw_subsets(40, 10, 25, 9);
    CHECK(a == b);
    CHECK(a != draw_subsets(40, 10, 25, 10));
    for (const auto& s : a) {
        REQUIRE(s.size() == 10);
        CHECK(std::ranges::is_sorted(s));
        CHECK(std::adjacent_find(s.begin(), s.end()) == s.end());
        CHECK(s.back() < 40);
    }
    CHECK_THROWS(draw_subsets(5, 6, 1, 0));
}

TEST_CASE("median frontier examples") {
    const auto m = random_matrix(250, 8, 77);
    const auto grid = default_target_grid(m, 20);

    const auto single = median_frontier(m, 5, 1, grid, 3);
    const auto subset = draw_subsets(8, 5, 1, 3)[0];
    const auto direct = efficient_frontier(m.select(subset), grid);
    REQUIRE(single.size() == direct.size());
    for (std::size_t i = 0; i < single.size(); ++i) {
        CHECK(single[i].median_stdev == direct[i].stdev);
        CHECK(single[i].subsets == 1);
    }

    const auto full = median_frontier(m, 8, 100, grid, 3);
    const auto whole = efficient_frontier(m, grid);
    REQUIRE(full.size() == whole.size());
    for (std::size_t i = 0; i < full.size(); ++i) {
        CHECK(full[i].median_stdev == whole[i].stdev);
        CHECK(full[i].subsets == 100);
    }

    Eigen::MatrixXd same(250, 4);
    for (Eigen::Index j = 0; j < 4; ++j) {
        same.col(j) = m.values.col(0);
    }
    const ReturnMatrix clones({"A", "B", "C", "D"}, same);
    const double mean = m.values.col(0).mean();
    const auto cf = median_frontier(clones, 2, 10, std::vector<double>{mean}, 1);
    REQUIRE(cf.size() == 1);
    CHECK(cf[0].median_stdev == doctest::Approx(sample_stdev(m.values.col(0))).epsilon(1e-6));

    CHECK_THROWS(median_frontier(m, 9, 10, grid, 0));
}

TEST_CASE("median and quantile helpers") {
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
    CHECK(quantile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.25) == 2.0);
    CHECK(quantile({0.0, 10.0}, 0.1) == doctest::Approx(1.0));
    CHECK(quantile({7.0}, 0.9) == 7.0);
    CHECK_THROWS(quantile({}, 0.5));
    CHECK_THROWS(quantile({1.0}, 1.5));
}
