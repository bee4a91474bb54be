#include "regime_ogarch/backtest.hpp"

#include "regime_ogarch/errors.hpp"
#include "regime_ogarch/ewma.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <map>
#include <thread>

namespace ogarch {

namespace {

struct ComponentState {
    std::optional<GarchParams> garch;
    std::optional<MrsGarchParams> mrs;
};

struct ComponentOutcome {
    Eigen::MatrixXd variances;  // tau x k
    std::vector<double> p_volatile;
    std::vector<FitRecord> fits;
    bool fit_failed = false;
    std::string message;
};

struct OriginWork {
    OriginRecord record;
    std::vector<FitRecord> fits;
    bool usable = false;  // forecast and weights were produced
};

void estimate(std::span<const double> y, int j, std::size_t origin, const BacktestConfig& config,
              ComponentState& state, ComponentOutcome& out) {
    FitRecord rec;
    rec.origin = origin;
    rec.component = j;
    try {
        rec.garch = garch_fit(y, config.garch_optimizer);
    } catch (const GarchFitError& e) {
        rec.garch = e.best_so_far();
        out.fit_failed = true;
        out.message = "component " + std::to_string(j + 1) + ": " + e.what();
    }
    state.garch = rec.garch.params;
    state.mrs.reset();
    if (config.model == ModelKind::Mrsogarch) {
        if (config.lock_degenerate) {
            MrsGarchFit m = mrs_refilter(y, MrsGarchParams::degenerate(rec.garch.params));
            m.garch = rec.garch;
            rec.mrs = std::move(m);
        } else {
            try {
                rec.mrs = mrs_fit(y, rec.garch, config.mrs);
            } catch (const MrsFitError& e) {
                out.fit_failed = true;
                out.message = "component " + std::to_string(j + 1) + ": " + e.what();
                if (e.best_so_far().filter_path.empty()) {
                    throw;
                }
                rec.mrs = e.best_so_far();
            }
        }
        state.mrs = rec.mrs->params;
    }
    out.fits.push_back(std::move(rec));
}

ComponentOutcome forecast_components(const Eigen::MatrixXd& y, int k, int tau, bool refit, std::size_t origin,
                                     const BacktestConfig& config, std::vector<ComponentState>& states) {
    ComponentOutcome out;
    out.variances.resize(tau, k);
    std::vector<double> col(static_cast<std::size_t>(y.rows()));
    for (int j = 0; j < k; ++j) {
        for (Eigen::Index t = 0; t < y.rows(); ++t) {
            col[static_cast<std::size_t>(t)] = y(t, j);
        }
        auto& state = states[static_cast<std::size_t>(j)];
        const bool needs_params =
            !state.garch || (config.model == ModelKind::Mrsogarch && !state.mrs);
        if (refit || needs_params) {
            estimate(col, j, origin, config, state, out);
        }
        if (config.model == ModelKind::Ogarch) {
            const auto f = garch_forecast(garch_refilter(col, *state.garch), tau, config.convention);
            for (int s = 0; s < tau; ++s) {
                out.variances(s, j) = f[static_cast<std::size_t>(s)];
            }
        } else {
            const auto f = mrs_forecast(mrs_refilter(col, *state.mrs), tau);
            for (int s = 0; s < tau; ++s) {
                out.variances(s, j) = f.variance[static_cast<std::size_t>(s)];
            }
            out.p_volatile.push_back(f.regime_prob.front()[1]);
        }
    }
    return out;
}

struct Prepared {
    PcaBasis basis;
    Eigen::MatrixXd components;  // window rows x I
};

Prepared prepare(const ReturnPanel& panel, const Window& w, const BacktestConfig& config, int k) {
    const NormalizedReturns norm = config.full_sample_normalization ? normalize(panel, 0, panel.rows())
                                                                    : normalize(panel, w.begin, w.end);
    const Eigen::MatrixXd x = norm.x.middleRows(static_cast<Eigen::Index>(w.begin),
                                                static_cast<Eigen::Index>(w.length()));
    Prepared p;
    p.basis = spectral_decompose(correlation_matrix(x));
    p.basis.stats = norm.stats;
    p.basis.k = k;
    p.components = to_components(x, p.basis);
    return p;
}

Eigen::VectorXd period_return(const ReturnPanel& panel, std::size_t origin, int tau) {
    const Eigen::MatrixXd rows = panel.returns().middleRows(static_cast<Eigen::Index>(origin), tau);
    return rows.colwise().sum().transpose();
}

void fill_realized(const ReturnPanel& panel, int tau, OriginRecord& rec) {
    const auto n = static_cast<Eigen::Index>(panel.assets());
    const Eigen::VectorXd eq = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    const Eigen::VectorXd r = period_return(panel, rec.origin, tau);
    const Eigen::MatrixXd h = horizon_covariance(rec.forecast);
    rec.portfolio_return = rec.weights.dot(r);
    rec.proxy_abs_return = std::abs(eq.dot(r));
    rec.eq_variance_forecast = eq.dot(h * eq);
}

OriginWork run_origin(const ReturnPanel& panel, const Window& w, bool refit, const BacktestConfig& config,
                      std::vector<ComponentState>& states) {
    OriginWork work;
    auto& rec = work.record;
    rec.origin = w.origin();
    rec.date = panel.dates()[w.origin()];
    rec.refit = refit;
    const int tau = config.window.horizon;
    try {
        if (config.model == ModelKind::Ewma) {
            const Eigen::MatrixXd window = panel.returns().middleRows(static_cast<Eigen::Index>(w.begin),
                                                                      static_cast<Eigen::Index>(w.length()));
            rec.forecast = ewma_forecast(ewma_run(window, config.ewma_lambda), tau);
        } else {
            const int k = config.components_for(panel.assets());
            const Prepared prep = prepare(panel, w, config, k);
            auto out = forecast_components(prep.components, k, tau, refit, rec.origin, config, states);
            work.fits = std::move(out.fits);
            rec.forecast = reconstruct(prep.basis, fill_excluded(prep.basis, out.variances, config.excluded));
            rec.component_variance.resize(static_cast<std::size_t>(k));
            for (int j = 0; j < k; ++j) {
                rec.component_variance[static_cast<std::size_t>(j)] = out.variances(0, j);
            }
            rec.p_volatile = std::move(out.p_volatile);
            if (out.fit_failed) {
                rec.status = "fit_failed";
                rec.message = out.message;
            }
        }
        rec.weights = gmvp(horizon_covariance(rec.forecast)).weights;
        fill_realized(panel, tau, rec);
        work.usable = true;
    } catch (const std::exception& e) {
        rec.status = "error";
        rec.message = e.what();
        states.assign(states.size(), ComponentState{});
    }
    return work;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
    const auto workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                body(i);
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
}

bool in_period(const std::string& date, const SubPeriod& p) {
    return !date_less(date, p.first) && !date_less(p.last, date);
}

}  // namespace

const char* model_name(ModelKind model) {
    switch (model) {
        case ModelKind::Ewma:
            return "ewma";
        case ModelKind::Ogarch:
            return "ogarch";
        case ModelKind::Mrsogarch:
            return "mrsogarch";
    }
    return "?";
}

ModelKind parse_model(const std::string& name) {
    if (name == "ewma") {
        return ModelKind::Ewma;
    }
    if (name == "ogarch") {
        return ModelKind::Ogarch;
    }
    if (name == "mrsogarch") {
        return ModelKind::Mrsogarch;
    }
    throw ContractError("unknown model '" + name + "' (expected ewma, ogarch or mrsogarch)");
}

int BacktestConfig::components_for(std::size_t assets) const {
    return n_components == 0 ? static_cast<int>(assets) : n_components;
}

void BacktestConfig::validate(std::size_t assets) const {
    window.validate();
    if (n_components < 0 || static_cast<std::size_t>(n_components) > assets) {
        throw ContractError("number of components must lie in [1, " + std::to_string(assets) + "]");
    }
    if (refit_every < 1) {
        throw ContractError("refit_every must be at least 1");
    }
    if (!(ewma_lambda > 0.0 && ewma_lambda < 1.0)) {
        throw ContractError("EWMA lambda must lie in (0, 1)");
    }
    garch_optimizer.validate();
    mrs.optimizer.validate();
    for (const auto& p : sub_periods) {
        if (date_less(p.last, p.first)) {
            throw ContractError("sub-period '" + p.name + "' ends before it starts");
        }
    }
}

int worker_count(int requested) {
    int n = requested;
    if (n <= 0) {
        if (const char* env = std::getenv("REGIME_OGARCH_THREADS")) {
            n = std::atoi(env);
        }
    }
    if (n <= 0) {
        n = static_cast<int>(std::thread::hardware_concurrency());
    }
    return std::max(n, 1);
}

WindowForecast forecast_window(const ReturnPanel& panel, std::size_t begin, std::size_t end,
                               const BacktestConfig& config) {
    config.validate(panel.assets());
    if (end > panel.rows() || begin + 2 > end) {
        throw ContractError("forecast window must hold at least two rows of the panel");
    }
    const Window w{begin, end};
    const int tau = config.window.horizon;
    WindowForecast out;
    if (config.model == ModelKind::Ewma) {
        const Eigen::MatrixXd window = panel.returns().middleRows(static_cast<Eigen::Index>(begin),
                                                                  static_cast<Eigen::Index>(w.length()));
        out.forecast = ewma_forecast(ewma_run(window, config.ewma_lambda), tau);
        return out;
    }
    const int k = config.components_for(panel.assets());
    Prepared prep = prepare(panel, w, config, k);
    std::vector<ComponentState> states(static_cast<std::size_t>(k));
    auto comp = forecast_components(prep.components, k, tau, true, end, config, states);
    out.forecast = reconstruct(prep.basis, fill_excluded(prep.basis, comp.variances, config.excluded));
    out.basis = std::move(prep.basis);
    out.fits = std::move(comp.fits);
    out.p_volatile = std::move(comp.p_volatile);
    out.fit_failed = comp.fit_failed;
    out.message = std::move(comp.message);
    return out;
}

BacktestResult run_backtest(const ReturnPanel& panel, const BacktestConfig& config) {
    config.validate(panel.assets());
    const auto windows = rolling_windows(panel, config.window);
    const auto block = static_cast<std::size_t>(config.refit_every);
    const std::size_t blocks = (windows.size() + block - 1) / block;
    const int k = config.components_for(panel.assets());

    std::vector<OriginWork> work(windows.size());
    parallel_for(blocks, worker_count(config.threads), [&](std::size_t b) {
        std::vector<ComponentState> states(static_cast<std::size_t>(k));
        const std::size_t end = std::min(windows.size(), (b + 1) * block);
        for (std::size_t i = b * block; i < end; ++i) {
            work[i] = run_origin(panel, windows[i], i == b * block, config, states);
        }
    });

    BacktestResult result;
    result.config = config;
    result.asset_names = panel.asset_names();
    result.rows.reserve(work.size());
    const OriginRecord* previous = nullptr;
    for (auto& w : work) {
        auto& rec = w.record;
        for (auto& f : w.fits) {
            result.fits.push_back(std::move(f));
        }
        if (rec.status != "ok") {
            result.warnings.push_back("origin " + rec.date + ": " + rec.status + ": " + rec.message);
            if (previous != nullptr) {
                rec.weights = previous->weights;
                rec.forecast = previous->forecast;
                fill_realized(panel, config.window.horizon, rec);
                rec.message += " (previous weights carried forward)";
            } else if (!w.usable) {
                // Nothing to carry: fall back to the window's sample covariance.
                const auto& win = windows[static_cast<std::size_t>(&w - work.data())];
                const Eigen::MatrixXd s = sample_covariance(panel.returns().middleRows(
                    static_cast<Eigen::Index>(win.begin), static_cast<Eigen::Index>(win.length())));
                rec.forecast.matrices.assign(static_cast<std::size_t>(config.window.horizon), s);
                rec.weights = gmvp(horizon_covariance(rec.forecast)).weights;
                fill_realized(panel, config.window.horizon, rec);
                rec.message += " (sample covariance used)";
            }
        }
        result.rows.push_back(std::move(rec));
        previous = &result.rows.back();
    }
    return result;
}

std::vector<PeriodSummary> summarize(const BacktestResult& result) {
    std::vector<SubPeriod> periods{{"entire", "", ""}};
    for (const auto& p : result.config.sub_periods) {
        periods.push_back(p);
    }
    const int tau = result.config.window.horizon;
    const double ppy = periods_per_year_for(tau);
    const std::size_t stride = static_cast<std::size_t>(std::max(1, tau / std::max(1, result.config.window.step)));

    std::vector<PeriodSummary> out;
    for (std::size_t p = 0; p < periods.size(); ++p) {
        PeriodSummary s;
        s.name = periods[p].name;
        std::vector<double> returns;
        std::vector<double> x;
        std::vector<double> h;
        std::size_t seen = 0;
        for (const auto& row : result.rows) {
            if (p > 0 && !in_period(row.date, periods[p])) {
                continue;
            }
            if (seen % stride == 0) {
                returns.push_back(row.portfolio_return);
            }
            ++seen;
            x.push_back(row.proxy_abs_return);
            h.push_back(row.eq_variance_forecast);
        }
        s.origins = seen;
        if (returns.size() >= 2) {
            s.performance = performance_stats(returns, ppy);
        }
        if (!x.empty()) {
            s.losses = loss_functions(x, h);
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<SweepRow> component_sweep(const ReturnPanel& panel, const RegimeBlockSpec& truth,
                                      const BacktestConfig& config, const std::vector<int>& k_values) {
    truth.validate();
    if (truth.length() != panel.rows() || static_cast<std::size_t>(truth.dims) != panel.assets()) {
        throw ContractError("block truth does not match the panel");
    }
    if (k_values.empty()) {
        throw ContractError("component sweep needs at least one k");
    }
    for (int k : k_values) {
        if (k < 1 || static_cast<std::size_t>(k) > panel.assets()) {
            throw ContractError("sweep k out of range");
        }
    }
    if (config.model == ModelKind::Ewma) {
        throw ContractError("component sweep needs a component model");
    }
    BacktestConfig c = config;
    c.window.horizon = 1;
    c.validate(panel.assets());
    const int k_max = *std::max_element(k_values.begin(), k_values.end());
    c.n_components = k_max;
    const auto windows = rolling_windows(panel, c.window);
    const auto block = static_cast<std::size_t>(c.refit_every);
    const std::size_t blocks = (windows.size() + block - 1) / block;

    // distances[i][m] for origin i and k_values[m]; empty when the origin failed.
    std::vector<std::vector<double>> distances(windows.size());
    parallel_for(blocks, worker_count(c.threads), [&](std::size_t b) {
        std::vector<ComponentState> states(static_cast<std::size_t>(k_max));
        const std::size_t end = std::min(windows.size(), (b + 1) * block);
        for (std::size_t i = b * block; i < end; ++i) {
            try {
                Prepared prep = prepare(panel, windows[i], c, k_max);
                auto out = forecast_components(prep.components, k_max, 1, i == b * block, windows[i].origin(), c,
                                               states);
                const Eigen::MatrixXd& target = truth.covariances[truth.block_of(windows[i].origin())];
                for (int k : k_values) {
                    prep.basis.k = k;
                    const Eigen::MatrixXd v = out.variances.leftCols(k);
                    const auto f = reconstruct(prep.basis, fill_excluded(prep.basis, v, ExcludedComponents::TruncateToZero));
                    distances[i].push_back(covariance_distance(f.matrices.front(), target));
                }
            } catch (const std::exception&) {
                distances[i].clear();
                states.assign(states.size(), ComponentState{});
            }
        }
    });

    std::vector<SweepRow> rows;
    for (std::size_t m = 0; m < k_values.size(); ++m) {
        SweepRow r;
        r.k = k_values[m];
        double total = 0.0;
        double normal = 0.0;
        double crisis = 0.0;
        std::size_t n_total = 0;
        std::size_t n_normal = 0;
        std::size_t n_crisis = 0;
        for (std::size_t i = 0; i < windows.size(); ++i) {
            if (distances[i].empty()) {
                continue;
            }
            const double d = distances[i][m];
            total += d;
            ++n_total;
            const std::size_t blk = truth.block_of(windows[i].origin());
            const bool is_normal = truth.labels.empty() || truth.labels[blk] == "normal";
            if (is_normal) {
                normal += d;
                ++n_normal;
            } else {
                crisis += d;
                ++n_crisis;
            }
        }
        if (n_total == 0) {
            throw FitError("component sweep produced no usable origin");
        }
        r.d_total = total / static_cast<double>(n_total);
        r.d_normal = n_normal > 0 ? normal / static_cast<double>(n_normal) : 0.0;
        r.d_crisis = n_crisis > 0 ? crisis / static_cast<double>(n_crisis) : 0.0;
        rows.push_back(r);
    }
    return rows;
}

}  // namespace ogarch
