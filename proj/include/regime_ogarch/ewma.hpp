#pragma once

#include "regime_ogarch/pca.hpp"

#include <Eigen/Dense>

namespace ogarch {

/// Default weight on the newest squared innovation; 0.06 here equals the
/// RiskMetrics 0.94 decay on the lagged matrix.
inline constexpr double kDefaultEwmaLambda = 0.06;

/**
 * Exponentially weighted covariance, parameterized with lambda on the innovation:
 *
 *     Sigma_t = (1 - lambda) Sigma_{t-1} + lambda (r - mu)(r - mu)^T
 */
struct EwmaState {
    Eigen::MatrixXd sigma;
    double lambda = kDefaultEwmaLambda;
    Eigen::VectorXd mu;
};

/// Sigma_0 = sample covariance of `window` rows, mu = their mean.
[[nodiscard]] EwmaState ewma_init(const Eigen::MatrixXd& window, double lambda = kDefaultEwmaLambda);

[[nodiscard]] EwmaState ewma_update(const EwmaState& state, const Eigen::VectorXd& r);

/// Feed every row of `window` through ewma_update, starting from ewma_init(window).
[[nodiscard]] EwmaState ewma_run(const Eigen::MatrixXd& window, double lambda = kDefaultEwmaLambda);

/// Flat term structure: tau copies of state.sigma (the state must already include r_T).
[[nodiscard]] CovarianceForecast ewma_forecast(const EwmaState& state, int tau);

}  // namespace ogarch
