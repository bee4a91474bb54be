#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ogarch {

struct OptimizerConfig {
    int max_evals = 4000;
    double tol_f = 1e-12;
    double tol_x = 1e-8;
    /// Carried into fit reports. The simplex itself is fully determined by
    /// the start point, so no randomness is consumed.
    std::uint64_t seed = 0;

    void validate() const;
};

struct OptimizerResult {
    Eigen::VectorXd argmin;
    double min_value = 0.0;
    int evaluations = 0;
    bool converged = false;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

/**
 * Nelder-Mead simplex minimizer (reflection 1, expansion 2, contraction 0.5,
 * shrink 0.5). The initial simplex offsets coordinate i by 0.05 * (1 + |x_i|).
 * Non-finite objective values are treated as +inf, which lets callers encode
 * hard constraints. Stops when the vertex f-spread drops below tol_f, the
 * simplex diameter (max-norm) drops below tol_x, or max_evals is reached.
 */
[[nodiscard]] OptimizerResult nelder_mead(const Objective& objective, const Eigen::VectorXd& start,
                                          const OptimizerConfig& config = {});

/// Repeated Nelder-Mead restarts from the incumbent until a restart gains less than tol_f.
/// `evaluations` sums over all runs; `converged` reports the final run.
[[nodiscard]] OptimizerResult nelder_mead_restarts(const Objective& objective, const Eigen::VectorXd& start,
                                                   const OptimizerConfig& config, int max_restarts = 3);

/**
 * Standard errors from a central-difference Hessian of a negative log-likelihood,
 * step 1e-4 * (1 + |theta_i|). Parameters whose stencil leaves the objective's
 * domain (non-finite values, e.g. at a boundary) get std::nullopt; the rest are
 * read from the inverse of the remaining sub-Hessian. A sub-Hessian that is not
 * positive definite yields nullopt everywhere.
 */
[[nodiscard]] std::vector<std::optional<double>> numerical_std_errors(const Objective& negloglike,
                                                                      const Eigen::VectorXd& theta_hat);

/// Regularized upper incomplete gamma Q(a, x).
[[nodiscard]] double regularized_gamma_q(double a, double x);

/// P(X > x) for X ~ chi-squared with df degrees of freedom.
[[nodiscard]] double chi2_upper_tail(double x, int df);

struct LrTestResult {
    double statistic = 0.0;
    int df = 1;
    double p_value = 1.0;
    std::optional<std::string> warning;
};

[[nodiscard]] LrTestResult lr_test(double loglike_restricted, double loglike_full, int df);

}  // namespace ogarch
