#pragma once

#include <span>

#include "alime/types.hpp"

namespace alime {

struct RidgeConfig {
    double alpha = 1.0;
    bool fit_intercept = true;
};

struct RidgeFit {
    Vector coefficients;
    double intercept = 0.0;

    double predict(const Eigen::Ref<const Vector>& x) const { return coefficients.dot(x) + intercept; }
};

/// Minimizes sum_i w_i (y_i - beta.x_i - b)^2 + alpha ||beta||^2 with an
/// unpenalized intercept b. The intercept is handled by weighted centering;
/// beta then solves (Xc^T W Xc + alpha I) beta = Xc^T W yc.
///
/// Throws DegenerateWeightsError when no weight is positive, NumericError on
/// non-finite input or a singular system, DimensionError on length mismatch.
RidgeFit fit_weighted_ridge(const Matrix& X, std::span<const double> y, std::span<const double> w,
                            const RidgeConfig& cfg);

/// Value of the weighted ridge objective at (beta, b).
double ridge_objective(const Matrix& X, std::span<const double> y, std::span<const double> w,
                       double alpha, const Vector& beta, double intercept);

}  // namespace alime
