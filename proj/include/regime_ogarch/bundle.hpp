#pragma once

#include "regime_ogarch/backtest.hpp"
#include "regime_ogarch/estimation.hpp"
#include "regime_ogarch/evaluation.hpp"
#include "regime_ogarch/garch.hpp"
#include "regime_ogarch/mrs_garch.hpp"
#include "regime_ogarch/portfolio.hpp"
#include "regime_ogarch/simulation.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace ogarch {

using Json = nlohmann::ordered_json;

[[nodiscard]] Json to_json(const GarchFit& fit);
[[nodiscard]] Json to_json(const MrsGarchFit& fit);
[[nodiscard]] Json to_json(const PerformanceReport& report);
[[nodiscard]] Json to_json(const LossReport& report);
[[nodiscard]] Json to_json(const DmTestResult& result);
[[nodiscard]] Json to_json(const LrTestResult& result);
[[nodiscard]] Json to_json(const OptimizerConfig& config);
[[nodiscard]] Json to_json(const BacktestConfig& config);
[[nodiscard]] Json to_json(const CovarianceForecast& forecast);

/// Fields missing from `j` keep their value in `base`. Unknown keys are rejected.
[[nodiscard]] BacktestConfig config_from_json(const Json& j, BacktestConfig base = {});

[[nodiscard]] Json sidecar_json(const SquareWaveSpec& spec);
[[nodiscard]] Json sidecar_json(const RegimeBlockSpec& spec);
/// Block truth recorded by sidecar_json(RegimeBlockSpec); throws ContractError for other sidecars.
[[nodiscard]] RegimeBlockSpec regime_blocks_from_sidecar(const Json& j);

/**
 * Result bundle directory:
 *   config.json      the resolved configuration
 *   weights.csv      one row per origin
 *   forecasts/       one JSON file per origin with the daily covariance matrices
 *   report.json      performance and loss summaries, fitted parameters, warnings
 */
void write_bundle(const std::filesystem::path& dir, const BacktestResult& result);

/// The per-origin columns of weights.csv that evaluation needs.
struct BundleRows {
    Json config;
    std::vector<std::string> asset_names;
    std::vector<std::string> dates;
    std::vector<double> portfolio_return;
    std::vector<double> proxy_abs_return;
    std::vector<double> eq_variance_forecast;
    Json report;
};

[[nodiscard]] BundleRows read_bundle(const std::filesystem::path& dir);

[[nodiscard]] Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace ogarch
