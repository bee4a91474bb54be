#pragma once

#include "regime_ogarch/errors.hpp"
#include "regime_ogarch/estimation.hpp"
#include "regime_ogarch/garch.hpp"

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace ogarch {

/// Per-regime values, index 0 = regime 1 (calm), index 1 = regime 2 (volatile).
using RegimePair = std::array<double, 2>;

/**
 * Two-state Markov-switching GARCH(1,1) in Klaassen's form.
 *
 * The chain has P(S_t=2 | S_{t-1}=1) = p and P(S_t=1 | S_{t-1}=2) = q, so the
 * transition matrix is [[1-p, p], [q, 1-q]]. Per regime,
 *
 *     h_t(i) = omega_i + alpha_i eps_{t-1}(i)^2 + beta_i E_{t-1}[ V_{t-1} | S_t = i ]
 *
 * where the lagged variance is collapsed over S_{t-1} with the backward
 * probabilities P(S_{t-1}=j | S_t=i, info_{t-1}), including the dispersion of
 * regime means, and eps_{t-1}(i) = y_{t-1} minus the same mixture of regime means.
 */
struct MrsGarchParams {
    RegimePair omega{};
    RegimePair alpha{};
    RegimePair beta{};
    RegimePair mu{};
    double p = 0.05;
    double q = 0.05;

    /// Transition probability from regime `from` to regime `to` (0-based).
    [[nodiscard]] double transition(int from, int to) const noexcept {
        if (from == 0) {
            return to == 0 ? 1.0 - p : p;
        }
        return to == 0 ? q : 1.0 - q;
    }

    /// omega_i/(1-alpha_i-beta_i), or nullopt when regime i is not covariance stationary.
    [[nodiscard]] std::optional<double> unconditional_variance(int regime) const;

    /// Same model with regime labels exchanged (p and q swap too).
    [[nodiscard]] MrsGarchParams swapped() const;

    /// Both regimes carry the single-regime parameters.
    [[nodiscard]] static MrsGarchParams degenerate(const GarchParams& g, double p = 0.05, double q = 0.05);

    void validate() const;
};

struct RegimeFilterState {
    RegimePair prob_filtered{};  ///< P_t(S_t = i): updated with y_t
    RegimePair prob_exante{};    ///< P_{t-1}(S_t = i)
    RegimePair h_regime{};       ///< V_{t-1}{eps_t | S_t = i}
    std::size_t t = 0;           ///< 0-based index of the last observation absorbed
};

/// Fixed point of the transition matrix: (q, p) / (p + q).
[[nodiscard]] RegimePair stationary_distribution(double p, double q);

/// Collapsed lagged variance E_{t-1}[V | S_t = target] built from a state valid at t-1.
[[nodiscard]] double aggregate_lagged_variance(const RegimeFilterState& state, const MrsGarchParams& params,
                                               int target);

struct FilterStepResult {
    RegimeFilterState state;
    double loglike_increment = 0.0;
};

/// Absorb y_t given the state after y_{t-1}. Densities are combined in log space.
[[nodiscard]] FilterStepResult filter_step(const RegimeFilterState& state, double y_prev, double y_t,
                                           const MrsGarchParams& params);

/// State at the first observation: stationary probabilities, both variances at the sample variance.
[[nodiscard]] RegimeFilterState initial_filter_state(std::span<const double> y, const MrsGarchParams& params);

struct MrsFilterResult {
    std::vector<RegimeFilterState> path;  ///< one state per observation
    double loglike = 0.0;                 ///< sum of increments for t = 2..R
};

[[nodiscard]] MrsFilterResult mrs_filter(std::span<const double> y, const MrsGarchParams& params);
[[nodiscard]] double mrs_loglike(std::span<const double> y, const MrsGarchParams& params);

/// Parameter order used for std_errors.
inline constexpr std::array<const char*, 10> kMrsParamNames{"omega1", "omega2", "alpha1", "alpha2", "beta1",
                                                            "beta2",  "mu1",    "mu2",    "p",      "q"};

struct MrsFitOptions {
    bool zero_means = false;  ///< fix mu_1 = mu_2 = 0 (8 free parameters)
    OptimizerConfig optimizer = default_mrs_optimizer();
    int max_restarts = 2;

    [[nodiscard]] static OptimizerConfig default_mrs_optimizer();
};

struct MrsGarchFit {
    MrsGarchParams params;
    double loglike = 0.0;
    std::vector<RegimeFilterState> filter_path;
    std::array<std::optional<double>, 10> std_errors{};
    double y_last = 0.0;
    GarchFit garch;  ///< nested single-regime fit on the same series
    int free_parameters = 10;
    bool converged = false;
    int evaluations = 0;
};

class MrsFitError : public FitError {
public:
    MrsFitError(const std::string& what, MrsGarchFit best) : FitError(what), best_(std::move(best)) {}
    [[nodiscard]] const MrsGarchFit& best_so_far() const noexcept { return best_; }

private:
    MrsGarchFit best_;
};

/**
 * Maximum likelihood over all regime parameters from five starts: the
 * regime-degenerate point at the single-regime GARCH estimate, and four
 * splits of omega by 1/4 or 4 combined with staying probabilities 0.9 or 0.98.
 * The result is relabeled so regime 2 has the larger variance level.
 * Throws MrsFitError (with the best point) only if no start converges.
 */
[[nodiscard]] MrsGarchFit mrs_fit(std::span<const double> y, const MrsFitOptions& options = {});
[[nodiscard]] MrsGarchFit mrs_fit(std::span<const double> y, const GarchFit& garch, const MrsFitOptions& options);

/// Filter a series with fixed parameters and package it as a fit (no optimization).
[[nodiscard]] MrsGarchFit mrs_refilter(std::span<const double> y, const MrsGarchParams& params);

struct MrsForecast {
    std::vector<double> variance;              ///< aggregated variance for horizons 1..tau
    std::vector<RegimePair> regime_prob;       ///< P_T(S_{T+s} = i)
    std::vector<RegimePair> regime_variance;   ///< per-regime variance at each horizon
};

[[nodiscard]] MrsForecast mrs_forecast(const MrsGarchParams& params, const RegimeFilterState& last, double y_last,
                                       int tau);
[[nodiscard]] MrsForecast mrs_forecast(const MrsGarchFit& fit, int tau);

}  // namespace ogarch
