#pragma once

#include "regime_ogarch/errors.hpp"
#include "regime_ogarch/estimation.hpp"

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace ogarch {

/// GARCH(1,1) with a fixed mean: h_t = omega + alpha (y_{t-1} - mu)^2 + beta h_{t-1}.
struct GarchParams {
    double omega = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double mu = 0.0;

    [[nodiscard]] double persistence() const noexcept { return alpha + beta; }
    /// omega / (1 - alpha - beta); throws NonstationaryError when alpha + beta >= 1.
    [[nodiscard]] double unconditional_variance() const;
    /// omega > 0, alpha >= 0, beta >= 0, alpha + beta < 1.
    void validate() const;
};

/// Multi-step variance forecast convention.
enum class HorizonConvention {
    /// h_{T+s} = h + (alpha+beta)^{s-1} (h_{T+1} - h): iterated expectations of the one-step recursion.
    AnchoredAtNext,
    /// h_{T+s} = h + (alpha+beta)^s (h_T - h) for s >= 2, as printed in the original OGARCH write-up.
    PaperLiteral,
};

struct GarchFilterResult {
    std::vector<double> h;  ///< conditional variance of each y_t; h[0] is the initial value
    double loglike = 0.0;   ///< Gaussian log-likelihood of y_2..y_R given y_1
};

/// Run the variance recursion. h_1 defaults to the unbiased sample variance of y.
[[nodiscard]] GarchFilterResult garch_filter(std::span<const double> y, const GarchParams& params,
                                             std::optional<double> h1 = std::nullopt);

struct GarchFit {
    GarchParams params;
    double loglike = 0.0;
    std::vector<double> h_path;
    /// omega, alpha, beta, mu; nullopt where the Hessian gives no usable value.
    std::array<std::optional<double>, 4> std_errors{};
    double last_eps_sq = 0.0;  ///< (y_T - mu)^2
    double last_h = 0.0;       ///< h_T
    bool converged = false;
    int evaluations = 0;
};

class GarchFitError : public FitError {
public:
    GarchFitError(const std::string& what, GarchFit best) : FitError(what), best_(std::move(best)) {}
    [[nodiscard]] const GarchFit& best_so_far() const noexcept { return best_; }

private:
    GarchFit best_;
};

[[nodiscard]] OptimizerConfig default_garch_optimizer();

/**
 * Two-step QMLE: mu is the sample mean, (omega, alpha, beta) maximize the
 * Gaussian likelihood. The search runs on the standardized series under
 * omega = exp(t1), alpha = c*logistic(t2), beta = (c - alpha)*logistic(t3),
 * c = 1 - 1e-6, so every iterate is stationary. Throws GarchFitError (with
 * the best point found) if the simplex never meets its tolerances.
 */
[[nodiscard]] GarchFit garch_fit(std::span<const double> y, const OptimizerConfig& config = default_garch_optimizer());

/// Re-run the filter for fixed parameters on a new series and package the result as a fit.
[[nodiscard]] GarchFit garch_refilter(std::span<const double> y, const GarchParams& params);

[[nodiscard]] std::vector<double> garch_forecast(const GarchParams& params, double last_eps_sq, double last_h, int tau,
                                                 HorizonConvention convention = HorizonConvention::AnchoredAtNext);

[[nodiscard]] inline std::vector<double> garch_forecast(const GarchFit& fit, int tau,
                                                        HorizonConvention convention = HorizonConvention::AnchoredAtNext) {
    return garch_forecast(fit.params, fit.last_eps_sq, fit.last_h, tau, convention);
}

/// Unbiased sample variance.
[[nodiscard]] double sample_variance(std::span<const double> y);
[[nodiscard]] double sample_mean(std::span<const double> y);

}  // namespace ogarch
