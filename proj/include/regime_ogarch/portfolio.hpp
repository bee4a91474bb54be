#pragma once

#include "regime_ogarch/pca.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>

namespace ogarch {

struct PortfolioWeights {
    Eigen::VectorXd weights;
    std::size_t as_of = 0;  ///< forecast origin (row index)
    int horizon = 1;
    bool ridged = false;     ///< a singular support block needed the 1e-10 ridge
};

/// Largest asset count accepted by the exhaustive support search.
inline constexpr int kMaxGmvpAssets = 15;

/**
 * Long-only global minimum-variance weights by exhaustive active-set search:
 * every nonempty support S gets w_S = inv(Sigma_S) 1 / (1' inv(Sigma_S) 1), the
 * nonnegative candidates are kept, and the one with least variance wins.
 */
[[nodiscard]] PortfolioWeights gmvp(const Eigen::MatrixXd& sigma);

/// Largest violation of the KKT conditions for min w'Sw s.t. w >= 0, sum w = 1.
[[nodiscard]] double gmvp_kkt_violation(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& w);

/// Sum of the daily matrices.
[[nodiscard]] Eigen::MatrixXd horizon_covariance(const CovarianceForecast& forecast);

struct PerformanceReport {
    double mean_pa = 0.0;
    double std_pa = 0.0;
    double q05 = 0.0;
    double worst = 0.0;
    double max_drawdown = 0.0;
    std::optional<double> sharpe;
};

/// Linear-interpolation quantile (order statistics at (n-1) p).
[[nodiscard]] double empirical_quantile(std::span<const double> x, double prob);

/**
 * Annualized summary of period log returns. The drawdown runs on the running
 * sum of returns, starting from a peak of zero. Sharpe uses a zero risk-free
 * rate and is absent when the standard deviation is zero.
 */
[[nodiscard]] PerformanceReport performance_stats(std::span<const double> period_returns, double periods_per_year);

/// 252 trading days a year; 52 for weekly (5-day) periods.
[[nodiscard]] double periods_per_year_for(int horizon);

/// Aligned text table, one row per (label, report).
[[nodiscard]] std::string performance_table(const std::vector<std::pair<std::string, PerformanceReport>>& rows);

}  // namespace ogarch
