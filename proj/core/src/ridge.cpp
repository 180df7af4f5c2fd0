#include "alime/ridge.hpp"

#include <cmath>

#include "alime/error.hpp"

namespace alime {
namespace {

void check_inputs(const Matrix& X, std::span<const double> y, std::span<const double> w) {
    const auto n = static_cast<std::size_t>(X.rows());
    if (n == 0) throw DimensionError("ridge fit needs at least one row");
    if (y.size() != n || w.size() != n) throw DimensionError("X, y and w must have the same number of rows");
    if (!X.allFinite()) throw NumericError("design matrix contains non-finite values");
    bool any_positive = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(y[i]) || !std::isfinite(w[i])) throw NumericError("non-finite target or weight");
        if (w[i] < 0.0) throw ParameterError("weights must be non-negative");
        any_positive = any_positive || w[i] > 0.0;
    }
    if (!any_positive) throw DegenerateWeightsError("all sample weights are zero");
}

}  // namespace

RidgeFit fit_weighted_ridge(const Matrix& X, std::span<const double> y, std::span<const double> w,
                            const RidgeConfig& cfg) {
    if (!(cfg.alpha >= 0.0) || !std::isfinite(cfg.alpha)) throw ParameterError("ridge alpha must be >= 0");
    check_inputs(X, y, w);
    const auto n = X.rows();
    const Eigen::Map<const Vector> yv(y.data(), n), wv(w.data(), n);

    Eigen::RowVectorXd x_mean = Eigen::RowVectorXd::Zero(X.cols());
    double y_mean = 0.0;
    if (cfg.fit_intercept) {
        const double wsum = wv.sum();
        x_mean = (wv.transpose() * X) / wsum;
        y_mean = wv.dot(yv) / wsum;
    }
    const Matrix Xc = X.rowwise() - x_mean;
    const Vector yc = yv.array() - y_mean;

    const Matrix XtW = Xc.transpose() * wv.asDiagonal();
    Eigen::MatrixXd gram = XtW * Xc;
    gram.diagonal().array() += cfg.alpha;
    const Vector rhs = XtW * yc;

    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) throw NumericError("ridge normal equations are singular; increase alpha");
    RidgeFit fit;
    fit.coefficients = llt.solve(rhs);
    if (!fit.coefficients.allFinite()) throw NumericError("ridge solve produced non-finite coefficients");
    fit.intercept = cfg.fit_intercept ? y_mean - x_mean.dot(fit.coefficients) : 0.0;
    return fit;
}

double ridge_objective(const Matrix& X, std::span<const double> y, std::span<const double> w, double alpha,
                       const Vector& beta, double intercept) {
    double loss = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const double r = y[static_cast<std::size_t>(i)] - X.row(i).dot(beta) - intercept;
        loss += w[static_cast<std::size_t>(i)] * r * r;
    }
    return loss + alpha * beta.squaredNorm();
}

}  // namespace alime
