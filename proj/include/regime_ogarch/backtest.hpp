#pragma once

#include "regime_ogarch/data_io.hpp"
#include "regime_ogarch/evaluation.hpp"
#include "regime_ogarch/ewma.hpp"
#include "regime_ogarch/garch.hpp"
#include "regime_ogarch/mrs_garch.hpp"
#include "regime_ogarch/pca.hpp"
#include "regime_ogarch/portfolio.hpp"
#include "regime_ogarch/simulation.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace ogarch {

enum class ModelKind { Ewma, Ogarch, Mrsogarch };

[[nodiscard]] const char* model_name(ModelKind model);
/// Throws ContractError for anything but "ewma", "ogarch", "mrsogarch".
[[nodiscard]] ModelKind parse_model(const std::string& name);

/// Origins whose date lies in [first, last] (inclusive, compared with date_less).
struct SubPeriod {
    std::string name;
    std::string first;
    std::string last;
};

struct BacktestConfig {
    ModelKind model = ModelKind::Mrsogarch;
    int n_components = 0;  ///< modeled components k; 0 means all
    WindowSpec window;
    ExcludedComponents excluded = ExcludedComponents::Unconditional;
    /// Normalize with statistics of the whole panel instead of the window (uses future data).
    bool full_sample_normalization = false;
    double ewma_lambda = kDefaultEwmaLambda;
    OptimizerConfig garch_optimizer = default_garch_optimizer();
    MrsFitOptions mrs;
    /// Full refit on the first origin of every block of this many origins; the filter
    /// is re-run with the block's parameters at the others.
    int refit_every = 10;
    HorizonConvention convention = HorizonConvention::AnchoredAtNext;
    /// Pin every regime to the single-regime GARCH estimate (reproduces ogarch forecasts).
    bool lock_degenerate = false;
    std::vector<SubPeriod> sub_periods;
    /// Worker cap; 0 uses REGIME_OGARCH_THREADS or the hardware concurrency.
    int threads = 0;

    [[nodiscard]] int components_for(std::size_t assets) const;
    void validate(std::size_t assets) const;
};

/// Parameters estimated at a refit origin for one component.
struct FitRecord {
    std::size_t origin = 0;
    int component = 0;
    GarchFit garch;
    std::optional<MrsGarchFit> mrs;
};

struct OriginRecord {
    std::size_t origin = 0;
    std::string date;
    Eigen::VectorXd weights;
    CovarianceForecast forecast;
    double portfolio_return = 0.0;  ///< w' (sum of returns over rows [origin, origin + tau))
    double proxy_abs_return = 0.0;  ///< |w_eq' (same sum)|
    double eq_variance_forecast = 0.0;  ///< w_eq' Sigma_horizon w_eq
    bool refit = false;
    std::string status = "ok";
    std::string message;
    std::vector<double> component_variance;  ///< one-day variance per modeled component
    std::vector<double> p_volatile;          ///< P_T(S_{T+1} = 2) per component (regime model only)
};

struct BacktestResult {
    BacktestConfig config;
    std::vector<std::string> asset_names;
    std::vector<OriginRecord> rows;
    std::vector<FitRecord> fits;
    std::vector<std::string> warnings;
};

/// Fit and forecast on rows [begin, end) only; the forecast covers rows end .. end + tau - 1.
struct WindowForecast {
    CovarianceForecast forecast;
    PcaBasis basis;  ///< empty for the EWMA model
    std::vector<FitRecord> fits;
    std::vector<double> p_volatile;
    bool fit_failed = false;
    std::string message;
};

[[nodiscard]] WindowForecast forecast_window(const ReturnPanel& panel, std::size_t begin, std::size_t end,
                                             const BacktestConfig& config);

[[nodiscard]] BacktestResult run_backtest(const ReturnPanel& panel, const BacktestConfig& config);

struct PeriodSummary {
    std::string name;
    std::size_t origins = 0;
    std::optional<PerformanceReport> performance;  ///< absent with fewer than two periods
    std::optional<LossReport> losses;
};

/**
 * Performance and loss summaries for the whole run and each configured
 * sub-period. With tau > 1 the performance figures use every tau-th origin so
 * holding periods do not overlap; the losses use all origins.
 */
[[nodiscard]] std::vector<PeriodSummary> summarize(const BacktestResult& result);

struct SweepRow {
    int k = 0;
    double d_total = 0.0;
    double d_normal = 0.0;
    double d_crisis = 0.0;
};

/**
 * Mean covariance distance between the one-day forecast and the true block
 * covariance of the forecast row, for each k in `k_values`, split by block
 * label ("normal" and anything else counts as crisis). All components are fitted
 * once per origin; each k truncates the remaining components to zero.
 */
[[nodiscard]] std::vector<SweepRow> component_sweep(const ReturnPanel& panel, const RegimeBlockSpec& truth,
                                                    const BacktestConfig& config, const std::vector<int>& k_values);

/// Worker count from the config, REGIME_OGARCH_THREADS, or the hardware.
[[nodiscard]] int worker_count(int requested);

}  // namespace ogarch
