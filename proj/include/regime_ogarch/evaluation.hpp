#pragma once

#include <Eigen/Dense>

#include <array>
#include <span>
#include <string>
#include <vector>

namespace ogarch {

/// Floor applied to x^2 inside the log-ratio loss.
inline constexpr double kR2LogFloor = 1e-12;

enum class Loss { Mse1, Mse2, Mad1, Mad2, R2Log };

inline constexpr std::array<Loss, 5> kAllLosses{Loss::Mse1, Loss::Mse2, Loss::Mad1, Loss::Mad2, Loss::R2Log};

[[nodiscard]] const char* loss_name(Loss loss);

struct LossReport {
    double mse1 = 0.0;
    double mse2 = 0.0;
    double mad1 = 0.0;
    double mad2 = 0.0;
    double r2log = 0.0;

    [[nodiscard]] double get(Loss loss) const;
};

/// Per-period loss values; their mean is the corresponding LossReport entry.
[[nodiscard]] std::vector<double> loss_series(std::span<const double> x, std::span<const double> h, Loss loss);

/// x is the realized volatility proxy (|return|), h the variance forecast.
[[nodiscard]] LossReport loss_functions(std::span<const double> x, std::span<const double> h);

struct DmTestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    double mean_d = 0.0;
    int horizon = 1;
    bool variance_fallback = false;  ///< long-run variance was negative; gamma(0)/n used instead
};

/// Diebold-Mariano test on d = loss_a - loss_b with tau - 1 autocovariance lags.
/// Positive statistics mean model a has the larger loss.
[[nodiscard]] DmTestResult dm_test(std::span<const double> loss_a, std::span<const double> loss_b, int tau);

/// Biased (1/n) autocovariance of d at lag k.
[[nodiscard]] double autocovariance(std::span<const double> d, std::size_t lag);

/// |w' r| per non-overlapping block of `period` rows, where r is the block's summed log return.
[[nodiscard]] std::vector<double> realized_proxy(const Eigen::MatrixXd& returns, const Eigen::VectorXd& weights,
                                                 int period = 1);

/// Standard normal CDF.
[[nodiscard]] double normal_cdf(double z);

/// Rows in the order MSE1, MSE2, MAD1, MAD2, R2LOG; one column per model.
[[nodiscard]] std::string loss_table(const std::vector<std::pair<std::string, LossReport>>& models);

}  // namespace ogarch
