#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "alime/error.hpp"
#include "alime/ridge.hpp"

using namespace alime;

namespace {

struct Problem {
    Matrix X;
    std::vector<double> y, w;
};

Problem random_problem(int n, int d, std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(0.05, 2.0);
    Problem p{Matrix(n, d), std::vector<double>(n), std::vector<double>(n)};
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) p.X(i, j) = g(rng);
        p.y[i] = g(rng);
        p.w[i] = u(rng);
    }
    return p;
}

// Solves the full (d+1)-dimensional normal equations with an unpenalized
// intercept column, without centering.
std::pair<Eigen::VectorXd, double> augmented_solution(const Problem& p, double alpha) {
    const auto n = p.X.rows(), d = p.X.cols();
    Eigen::MatrixXd A(n, d + 1);
    A.leftCols(d) = p.X;
    A.col(d).setOnes();
    const Eigen::Map<const Eigen::VectorXd> y(p.y.data(), n), w(p.w.data(), n);
    Eigen::MatrixXd lhs = A.transpose() * w.asDiagonal() * A;
    for (Eigen::Index j = 0; j < d; ++j) lhs(j, j) += alpha;
    const Eigen::VectorXd sol = lhs.colPivHouseholderQr().solve(A.transpose() * w.asDiagonal() * y);
    return {sol.head(d), sol(d)};
}

}  // namespace

TEST(Ridge, OneFeatureNoInterceptClosedForm) {
    Matrix X(3, 1);
    X << 1, 2, 3;
    const std::vector<double> y{2, 4, 7}, w{1, 0.5, 2};
    const auto fit = fit_weighted_ridge(X, y, w, {0.5, false});
    const double num = 1 * 1 * 2 + 0.5 * 2 * 4 + 2 * 3 * 7, den = 1 + 0.5 * 4 + 2 * 9 + 0.5;
    EXPECT_NEAR(fit.coefficients(0), num / den, 1e-14);
    EXPECT_EQ(fit.intercept, 0.0);
}

TEST(Ridge, ConstantTargetGivesZeroCoefficients) {
    const auto p = random_problem(15, 4, 3);
    const std::vector<double> y(15, 0.37);
    const auto fit = fit_weighted_ridge(p.X, y, p.w, {1.0, true});
    EXPECT_LT(fit.coefficients.lpNorm<Eigen::Infinity>(), 1e-14);
    EXPECT_NEAR(fit.intercept, 0.37, 1e-14);
}

TEST(Ridge, MatchesAugmentedNormalEquations) {
    for (std::uint32_t s = 0; s < 20; ++s) {
        const auto p = random_problem(12 + static_cast<int>(s), 1 + static_cast<int>(s % 6), s);
        const double alpha = 0.01 + 0.3 * s;
        const auto fit = fit_weighted_ridge(p.X, p.y, p.w, {alpha, true});
        const auto [beta, b] = augmented_solution(p, alpha);
        EXPECT_LT((fit.coefficients - beta).lpNorm<Eigen::Infinity>(), 1e-9);
        EXPECT_NEAR(fit.intercept, b, 1e-9);
    }
}

TEST(Ridge, InterceptIsNotPenalized) {
    // A pure offset costs nothing however large alpha is.
    auto p = random_problem(10, 2, 4);
    p.X.setZero();
    for (auto& v : p.y) v = 5.0;
    const auto fit = fit_weighted_ridge(p.X, p.y, p.w, {1e6, true});
    EXPECT_NEAR(fit.intercept, 5.0, 1e-12);
}

TEST(Ridge, DuplicatedRowEqualsDoubledWeight) {
    auto p = random_problem(9, 3, 5);
    auto q = p;
    q.X.conservativeResize(10, 3);
    q.X.row(9) = p.X.row(2);
    q.y.push_back(p.y[2]);
    q.w.push_back(p.w[2]);
    p.w[2] *= 2.0;
    const auto a = fit_weighted_ridge(p.X, p.y, p.w, {0.7, true});
    const auto b = fit_weighted_ridge(q.X, q.y, q.w, {0.7, true});
    EXPECT_LT((a.coefficients - b.coefficients).norm(), 1e-12);
    EXPECT_NEAR(a.intercept, b.intercept, 1e-12);
}

TEST(Ridge, ZeroWeightRowIsIgnored) {
    auto p = random_problem(8, 2, 6);
    auto q = p;
    q.X.conservativeResize(9, 2);
    q.X.row(8) << 100, -100;
    q.y.push_back(1e3);
    q.w.push_back(0.0);
    const auto a = fit_weighted_ridge(p.X, p.y, p.w, {0.2, true});
    const auto b = fit_weighted_ridge(q.X, q.y, q.w, {0.2, true});
    EXPECT_LT((a.coefficients - b.coefficients).norm(), 1e-12);
    EXPECT_NEAR(a.intercept, b.intercept, 1e-12);
}

TEST(Ridge, ShrinksAsAlphaGrows) {
    const auto p = random_problem(30, 5, 7);
    double prev = std::numeric_limits<double>::infinity();
    for (double alpha : {0.0, 0.1, 1.0, 10.0, 100.0, 1e4}) {
        const double norm = fit_weighted_ridge(p.X, p.y, p.w, {alpha, true}).coefficients.norm();
        EXPECT_LT(norm, prev);
        prev = norm;
    }
    EXPECT_LT(prev, 1e-2);
}

TEST(Ridge, WeightScaleActsLikeInverseAlpha) {
    const auto p = random_problem(20, 3, 8);
    auto q = p;
    for (auto& v : q.w) v *= 4.0;
    const auto a = fit_weighted_ridge(p.X, p.y, p.w, {0.5, true});
    const auto b = fit_weighted_ridge(q.X, q.y, q.w, {2.0, true});
    EXPECT_LT((a.coefficients - b.coefficients).norm(), 1e-12);
}

TEST(Ridge, ObjectiveIsMinimal) {
    const auto p = random_problem(25, 4, 9);
    const auto fit = fit_weighted_ridge(p.X, p.y, p.w, {0.3, true});
    const double best = ridge_objective(p.X, p.y, p.w, 0.3, fit.coefficients, fit.intercept);
    std::mt19937 rng(10);
    std::normal_distribution<double> g(0.0, 1e-3);
    for (int t = 0; t < 50; ++t) {
        Vector beta = fit.coefficients;
        for (Eigen::Index j = 0; j < beta.size(); ++j) beta(j) += g(rng);
        EXPECT_GE(ridge_objective(p.X, p.y, p.w, 0.3, beta, fit.intercept + g(rng)), best);
    }
}

TEST(Ridge, Errors) {
    auto p = random_problem(6, 2, 11);
    EXPECT_THROW(fit_weighted_ridge(p.X, p.y, std::vector<double>(6, 0.0), {}), DegenerateWeightsError);
    EXPECT_THROW(fit_weighted_ridge(p.X, std::vector<double>(5, 0.0), p.w, {}), DimensionError);
    EXPECT_THROW(fit_weighted_ridge(p.X, p.y, p.w, {-1.0, true}), ParameterError);
    auto w = p.w;
    w[0] = -0.1;
    EXPECT_THROW(fit_weighted_ridge(p.X, p.y, w, {}), ParameterError);
    auto y = p.y;
    y[1] = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(fit_weighted_ridge(p.X, y, p.w, {}), NumericError);
    Matrix dup(6, 2);
    dup.col(0) = p.X.col(0);
    dup.col(1) = p.X.col(0);
    EXPECT_THROW(fit_weighted_ridge(dup, p.y, p.w, {0.0, true}), NumericError);
    EXPECT_NO_THROW(fit_weighted_ridge(dup, p.y, p.w, {0.1, true}));
}
