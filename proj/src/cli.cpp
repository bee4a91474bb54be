#include "regime_ogarch/cli.hpp"

#include "regime_ogarch/backtest.hpp"
#include "regime_ogarch/bundle.hpp"
#include "regime_ogarch/data_io.hpp"
#include "regime_ogarch/errors.hpp"
#include "regime_ogarch/estimation.hpp"
#include "regime_ogarch/evaluation.hpp"
#include "regime_ogarch/garch.hpp"
#include "regime_ogarch/mrs_garch.hpp"
#include "regime_ogarch/portfolio.hpp"
#include "regime_ogarch/simulation.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace ogarch {

namespace fs = std::filesystem;

namespace {

constexpr std::array<int, 3> kLrDegreesOfFreedom{5, 6, 7};

struct ModelOptions {
    std::string config_path;
    std::string model;
    int components = -1;
    int horizon = -1;
    int window = -1;
    int step = -1;
    int refit_every = -1;
    int threads = -1;
    bool expanding = false;
    bool zero_means = false;
    bool lock_degenerate = false;
    bool truncate = false;
    bool paper_literal = false;
    bool full_sample = false;
    std::vector<std::string> periods;  // name:first:last
};

void add_model_options(CLI::App* cmd, ModelOptions& o, bool with_window_flags) {
    cmd->add_option("--config", o.config_path, "JSON configuration file; flags override its values");
    cmd->add_option("--model", o.model, "ewma, ogarch or mrsogarch");
    cmd->add_option("--components", o.components, "number of modeled principal components (default: all)");
    cmd->add_option("--horizon", o.horizon, "forecast horizon in days");
    cmd->add_option("--window", o.window, "in-sample window length");
    cmd->add_flag("--zero-means", o.zero_means, "fix both regime means at zero");
    cmd->add_flag("--lock-degenerate", o.lock_degenerate, "pin both regimes to the single-regime GARCH fit");
    cmd->add_flag("--truncate", o.truncate, "drop unmodeled components instead of keeping their eigenvalues");
    cmd->add_flag("--paper-literal", o.paper_literal,
                  "multi-step GARCH forecasts anchored at h_T instead of h_{T+1}");
    cmd->add_flag("--full-sample-normalization", o.full_sample,
                  "normalize with whole-panel statistics (uses future data)");
    cmd->add_option("--threads", o.threads, "worker threads (default: REGIME_OGARCH_THREADS or all cores)");
    if (with_window_flags) {
        cmd->add_option("--step", o.step, "rows between forecast origins");
        cmd->add_option("--refit-every", o.refit_every, "origins per parameter refit");
        cmd->add_flag("--expanding", o.expanding, "pin the window start at the first row");
        cmd->add_option("--period", o.periods, "reporting sub-period as name:first_date:last_date (repeatable)");
    }
}

BacktestConfig resolve_config(const ModelOptions& o, BacktestConfig base = {}) {
    BacktestConfig c = base;
    if (!o.config_path.empty()) {
        c = config_from_json(read_json_file(o.config_path), c);
    }
    if (!o.model.empty()) {
        c.model = parse_model(o.model);
    }
    if (o.components >= 0) {
        c.n_components = o.components;
    }
    if (o.horizon >= 0) {
        c.window.horizon = o.horizon;
    }
    if (o.window >= 0) {
        c.window.in_sample_len = o.window;
    }
    if (o.step >= 0) {
        c.window.step = o.step;
    }
    if (o.refit_every >= 0) {
        c.refit_every = o.refit_every;
    }
    if (o.threads >= 0) {
        c.threads = o.threads;
    }
    c.window.expanding = c.window.expanding || o.expanding;
    c.mrs.zero_means = c.mrs.zero_means || o.zero_means;
    c.lock_degenerate = c.lock_degenerate || o.lock_degenerate;
    c.full_sample_normalization = c.full_sample_normalization || o.full_sample;
    if (o.truncate) {
        c.excluded = ExcludedComponents::TruncateToZero;
    }
    if (o.paper_literal) {
        c.convention = HorizonConvention::PaperLiteral;
    }
    for (const auto& p : o.periods) {
        const auto a = p.find(':');
        const auto b = a == std::string::npos ? std::string::npos : p.find(':', a + 1);
        if (b == std::string::npos) {
            throw ContractError("--period expects name:first_date:last_date, got '" + p + "'");
        }
        c.sub_periods.push_back({p.substr(0, a), p.substr(a + 1, b - a - 1), p.substr(b + 1)});
    }
    return c;
}

CsvValues parse_mode(const std::string& s) {
    if (s == "returns") {
        return CsvValues::Returns;
    }
    if (s == "prices") {
        return CsvValues::Prices;
    }
    throw ContractError("--input-mode must be 'prices' or 'returns'");
}

void emit(const Json& j, const std::string& path, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << j.dump(2) << '\n';
    } else {
        write_json_file(path, j);
    }
}

Json lr_json(double ll_garch, double ll_mrs) {
    Json tests = Json::array();
    for (int df : kLrDegreesOfFreedom) {
        tests.push_back(to_json(lr_test(ll_garch, ll_mrs, df)));
    }
    return {{"loglike_garch", ll_garch},
            {"loglike_mrsgarch", ll_mrs},
            {"improvement", ll_mrs - ll_garch},
            {"df_assumption", "degrees of freedom are not pinned down; p-values are given for df 5, 6 and 7"},
            {"tests", std::move(tests)}};
}

Json fit_record_json(const FitRecord& f) {
    Json j{{"component", f.component + 1}, {"garch", to_json(f.garch)}};
    if (f.mrs) {
        j["mrsgarch"] = to_json(*f.mrs);
        j["lr_test"] = lr_json(f.garch.loglike, f.mrs->loglike);
    }
    return j;
}

Json basis_json(const PcaBasis& b) {
    Json values = Json::array();
    for (Eigen::Index i = 0; i < b.eigenvalues.size(); ++i) {
        values.push_back(b.eigenvalues(i));
    }
    Json vectors = Json::array();
    for (Eigen::Index j = 0; j < b.eigenvectors.cols(); ++j) {
        Json col = Json::array();
        for (Eigen::Index i = 0; i < b.eigenvectors.rows(); ++i) {
            col.push_back(b.eigenvectors(i, j));
        }
        vectors.push_back(std::move(col));
    }
    return {{"eigenvalues", std::move(values)}, {"eigenvectors_by_column", std::move(vectors)}};
}

std::size_t window_begin(const ReturnPanel& panel, int window) {
    if (window <= 0 || static_cast<std::size_t>(window) >= panel.rows()) {
        return 0;
    }
    return panel.rows() - static_cast<std::size_t>(window);
}

int cmd_simulate(const std::string& preset, std::uint64_t seed, bool seed_given, const std::string& dir,
                 int length, int period, double correlation, int dims, double c_normal, double c_volatile,
                 std::ostream& out) {
    fs::create_directories(dir);
    if (preset == "square-wave") {
        SquareWaveSpec spec;
        if (seed_given) {
            spec.seed = seed;
        }
        if (length > 0) {
            spec.length = length;
        }
        if (period > 0) {
            spec.period = period;
        }
        if (!std::isnan(correlation)) {
            spec.correlation = correlation;
        }
        const auto data = gen_square_wave(spec);
        write_panel_csv((fs::path(dir) / "square-wave.csv").string(), data.panel);
        write_json_file(fs::path(dir) / "square-wave.json", sidecar_json(spec));
        std::ofstream truth(fs::path(dir) / "square-wave_truth.csv");
        truth << "date";
        for (const auto& a : data.panel.asset_names()) {
            truth << ",vol_" << a;
        }
        truth << ",volatile\n";
        for (Eigen::Index t = 0; t < data.true_vol.rows(); ++t) {
            truth << data.panel.dates()[static_cast<std::size_t>(t)];
            for (Eigen::Index i = 0; i < data.true_vol.cols(); ++i) {
                truth << ',' << data.true_vol(t, i);
            }
            truth << ',' << data.regime[static_cast<std::size_t>(t)] << '\n';
        }
        out << "wrote " << (fs::path(dir) / "square-wave.csv").string() << '\n';
        return kExitOk;
    }
    if (preset == "regime-blocks") {
        RegimePresetOptions opt;
        if (seed_given) {
            opt.seed = seed;
        }
        if (dims > 0) {
            opt.dims = dims;
        }
        if (!std::isnan(c_normal)) {
            opt.c_normal = c_normal;
        }
        if (!std::isnan(c_volatile)) {
            opt.c_volatile = c_volatile;
        }
        const RegimeBlockSpec spec = regime_block_preset(opt);
        const auto data = gen_regime_blocks(spec);
        write_panel_csv((fs::path(dir) / "regime-blocks.csv").string(), data.panel);
        write_json_file(fs::path(dir) / "regime-blocks.json", sidecar_json(spec));
        out << "wrote " << (fs::path(dir) / "regime-blocks.csv").string() << '\n';
        return kExitOk;
    }
    throw ContractError("unknown preset '" + preset + "' (expected square-wave or regime-blocks)");
}

int cmd_fit(const std::string& data, CsvValues mode, const ModelOptions& o, const std::string& column,
            const std::string& output, std::ostream& out, std::ostream& err) {
    const ReturnPanel panel = read_panel_csv(data, mode);
    const std::string model = o.model.empty() ? "mrsogarch" : o.model;
    if (model == "garch" || model == "mrsgarch") {
        std::size_t col = 0;
        if (!column.empty()) {
            const auto& names = panel.asset_names();
            const auto it = std::find(names.begin(), names.end(), column);
            if (it == names.end()) {
                throw ContractError("no column named '" + column + "'");
            }
            col = static_cast<std::size_t>(it - names.begin());
        }
        const std::size_t begin = window_begin(panel, o.window);
        std::vector<double> y;
        for (std::size_t t = begin; t < panel.rows(); ++t) {
            y.push_back(panel.returns()(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(col)));
        }
        ModelOptions uni = o;
        uni.model.clear();
        const BacktestConfig c = resolve_config(uni);
        Json j{{"series", panel.asset_names()[col]}, {"observations", y.size()}};
        const GarchFit g = garch_fit(y, c.garch_optimizer);
        j["garch"] = to_json(g);
        if (model == "mrsgarch") {
            const MrsGarchFit m = mrs_fit(y, g, c.mrs);
            j["mrsgarch"] = to_json(m);
            j["lr_test"] = lr_json(g.loglike, m.loglike);
        }
        emit(j, output, out);
        return kExitOk;
    }
    BacktestConfig c = resolve_config(o);
    const std::size_t begin = window_begin(panel, o.window);
    const auto wf = forecast_window(panel, begin, panel.rows(), c);
    Json j{{"model", model_name(c.model)},
           {"window", {{"first", panel.dates()[begin]}, {"last", panel.dates().back()}}},
           {"assets", panel.asset_names()}};
    if (c.model != ModelKind::Ewma) {
        j["basis"] = basis_json(wf.basis);
        Json comps = Json::array();
        for (const auto& f : wf.fits) {
            comps.push_back(fit_record_json(f));
        }
        j["components"] = std::move(comps);
    }
    emit(j, output, out);
    if (wf.fit_failed) {
        err << "fit failed: " << wf.message << '\n';
        return kExitFit;
    }
    return kExitOk;
}

int cmd_forecast(const std::string& data, CsvValues mode, const ModelOptions& o, const std::string& output,
                 std::ostream& out, std::ostream& err) {
    const ReturnPanel panel = read_panel_csv(data, mode);
    const BacktestConfig c = resolve_config(o);
    const std::size_t begin = window_begin(panel, o.window);
    const auto wf = forecast_window(panel, begin, panel.rows(), c);
    const Eigen::MatrixXd h = horizon_covariance(wf.forecast);
    const auto w = gmvp(h);
    Json weights = Json::array();
    for (Eigen::Index i = 0; i < w.weights.size(); ++i) {
        weights.push_back(w.weights(i));
    }
    Json j{{"model", model_name(c.model)},
           {"after_date", panel.dates().back()},
           {"horizon", c.window.horizon},
           {"assets", panel.asset_names()},
           {"daily", to_json(wf.forecast)},
           {"horizon_covariance", to_json(CovarianceForecast{{h}}).front()},
           {"gmvp_weights", std::move(weights)}};
    if (!wf.p_volatile.empty()) {
        j["p_volatile_next"] = wf.p_volatile;
    }
    emit(j, output, out);
    if (wf.fit_failed) {
        err << "fit failed: " << wf.message << '\n';
        return kExitFit;
    }
    return kExitOk;
}

int cmd_backtest(const std::string& data, CsvValues mode, const ModelOptions& o, const std::string& output,
                 std::ostream& out, std::ostream& err) {
    const ReturnPanel panel = read_panel_csv(data, mode);
    const BacktestConfig c = resolve_config(o);
    const auto result = run_backtest(panel, c);
    write_bundle(output, result);
    std::vector<std::pair<std::string, PerformanceReport>> rows;
    for (const auto& s : summarize(result)) {
        if (s.performance) {
            rows.emplace_back(s.name, *s.performance);
        }
    }
    out << model_name(c.model) << ": " << result.rows.size() << " origins, bundle written to " << output << '\n';
    out << performance_table(rows);
    for (const auto& w : result.warnings) {
        err << "warning: " << w << '\n';
    }
    return kExitOk;
}

int cmd_evaluate(const std::vector<std::string>& bundles, int horizon, const std::string& output, std::ostream& out,
                 std::ostream& err) {
    if (bundles.size() != 2) {
        throw ContractError("--dm expects exactly two bundle directories");
    }
    const BundleRows a = read_bundle(bundles[0]);
    const BundleRows b = read_bundle(bundles[1]);
    if (a.dates != b.dates) {
        throw DataError("bundles cover different forecast origins");
    }
    if (a.dates.empty()) {
        throw DataError("bundles contain no forecast origins");
    }
    const int tau = horizon > 0 ? horizon : a.config.at("window").at("horizon").get<int>();
    const std::string name_a = a.config.value("model", "a");
    const std::string name_b = b.config.value("model", "b");
    const std::string label_a = name_a == name_b ? name_a + "(1)" : name_a;
    const std::string label_b = name_a == name_b ? name_b + "(2)" : name_b;

    const LossReport la = loss_functions(a.proxy_abs_return, a.eq_variance_forecast);
    const LossReport lb = loss_functions(b.proxy_abs_return, b.eq_variance_forecast);
    out << "Losses (realized proxy |equal-weight return|, " << a.dates.size() << " origins)\n";
    out << loss_table({{label_a, la}, {label_b, lb}});

    Json dm = Json::object();
    out << "\nDiebold-Mariano, d = loss(" << label_a << ") - loss(" << label_b << "), horizon " << tau << '\n';
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-6s %12s %14s\n", "Loss", "statistic", "p (2-sided)");
    out << buf;
    for (Loss loss : kAllLosses) {
        const auto sa = loss_series(a.proxy_abs_return, a.eq_variance_forecast, loss);
        const auto sb = loss_series(b.proxy_abs_return, b.eq_variance_forecast, loss);
        try {
            const auto r = dm_test(sa, sb, tau);
            dm[loss_name(loss)] = to_json(r);
            std::snprintf(buf, sizeof buf, "%-6s %12.4f %14.6g%s\n", loss_name(loss), r.statistic, r.p_value,
                          r.variance_fallback ? "  (lag-0 variance used)" : "");
        } catch (const DegenerateSeriesError& e) {
            dm[loss_name(loss)] = {{"error", e.what()}};
            std::snprintf(buf, sizeof buf, "%-6s %12s %14s\n", loss_name(loss), "n/a", "n/a");
        }
        out << buf;
    }

    Json lr = Json::array();
    for (const auto* bundle : {&a, &b}) {
        if (!bundle->report.contains("fits")) {
            continue;
        }
        const auto& fits = bundle->report.at("fits");
        if (fits.empty() || !fits.front().contains("mrsgarch")) {
            continue;
        }
        const auto first_origin = fits.front().at("origin").get<std::size_t>();
        out << "\nLikelihood-ratio tests, " << bundle->config.value("model", "") << ", first estimation window\n";
        for (const auto& f : fits) {
            if (f.at("origin").get<std::size_t>() != first_origin || !f.contains("mrsgarch")) {
                continue;
            }
            const double lg = f.at("garch").at("loglike").get<double>();
            const double lm = f.at("mrsgarch").at("loglike").get<double>();
            Json entry = lr_json(lg, lm);
            entry["component"] = f.at("component");
            std::snprintf(buf, sizeof buf, "  PC%d: logLike GARCH %.4f, MRS-GARCH %.4f, LR %.4f", f.at("component").get<int>(),
                          lg, lm, entry.at("tests").front().at("statistic").get<double>());
            out << buf;
            for (const auto& t : entry.at("tests")) {
                std::snprintf(buf, sizeof buf, ", p(df=%d) %.4g", t.at("df").get<int>(), t.at("p_value").get<double>());
                out << buf;
            }
            out << '\n';
            lr.push_back(std::move(entry));
        }
    }

    if (!output.empty()) {
        write_json_file(output, {{"models", {label_a, label_b}},
                                 {"losses", {{label_a, to_json(la)}, {label_b, to_json(lb)}}},
                                 {"dm", std::move(dm)},
                                 {"lr", std::move(lr)}});
    }
    (void)err;
    return kExitOk;
}

int cmd_sweep(const std::string& data, CsvValues mode, const ModelOptions& o, const std::string& truth_path,
              std::vector<int> k_values, const std::string& output, std::ostream& out) {
    const ReturnPanel panel = read_panel_csv(data, mode);
    const RegimeBlockSpec truth = regime_blocks_from_sidecar(read_json_file(truth_path));
    BacktestConfig base;
    base.window.in_sample_len = 500;
    base.window.step = 25;
    const BacktestConfig c = resolve_config(o, base);
    if (k_values.empty()) {
        for (int k = 1; k <= static_cast<int>(panel.assets()); ++k) {
            k_values.push_back(k);
        }
    }
    const auto rows = component_sweep(panel, truth, c, k_values);
    std::ostringstream csv;
    csv << "k,d_total,d_normal,d_crisis\n";
    char buf[160];
    std::snprintf(buf, sizeof buf, "%4s %12s %12s %12s\n", "k", "D_total", "D_normal", "D_crisis");
    out << buf;
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%4d %12.4f %12.4f %12.4f\n", r.k, r.d_total, r.d_normal, r.d_crisis);
        out << buf;
        csv << r.k << ',' << r.d_total << ',' << r.d_normal << ',' << r.d_crisis << '\n';
    }
    if (!output.empty()) {
        std::ofstream f(output);
        if (!f) {
            throw DataError("cannot write " + output);
        }
        f << csv.str();
    }
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Regime-switching orthogonal GARCH covariance forecasting and minimum-variance backtests",
                 "regime-ogarch"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "write a synthetic return panel and its JSON sidecar");
    std::string preset;
    std::uint64_t seed = 0;
    std::string sim_dir;
    int length = 0;
    int period = 0;
    double correlation = std::nan("");
    int dims = 0;
    double c_normal = std::nan("");
    double c_volatile = std::nan("");
    sim->add_option("--preset", preset, "square-wave or regime-blocks")->required();
    auto* seed_opt = sim->add_option("--seed", seed, "generator seed");
    sim->add_option("-o,--output", sim_dir, "output directory")->required();
    sim->add_option("--length", length, "square-wave: number of rows");
    sim->add_option("--segment", period, "square-wave: rows per tranquil or volatile segment");
    sim->add_option("--correlation", correlation, "square-wave: correlation between assets");
    sim->add_option("--dims", dims, "regime-blocks: number of assets");
    sim->add_option("--c-normal", c_normal, "regime-blocks: entry range of the normal-block factor");
    sim->add_option("--c-volatile", c_volatile, "regime-blocks: entry range of the crisis-block factor");

    std::string input_mode = "returns";
    std::string data;
    std::string output;

    // fit
    auto* fit = app.add_subcommand("fit", "fit one model and print the parameters as JSON");
    ModelOptions fit_opts;
    std::string column;
    add_model_options(fit, fit_opts, false);
    fit->add_option("--column", column, "series to fit with --model garch or mrsgarch (default: first)");
    fit->add_option("--input-mode", input_mode, "CSV values: returns or prices");
    fit->add_option("-o,--output", output, "write JSON here instead of stdout");
    fit->add_option("data", data, "input CSV")->required();

    // forecast
    auto* fc = app.add_subcommand("forecast", "fit on the last window and print tau daily covariance forecasts");
    ModelOptions fc_opts;
    add_model_options(fc, fc_opts, false);
    fc->add_option("--input-mode", input_mode, "CSV values: returns or prices");
    fc->add_option("-o,--output", output, "write JSON here instead of stdout");
    fc->add_option("data", data, "input CSV")->required();

    // backtest
    auto* bt = app.add_subcommand("backtest", "rolling-window GMVP backtest; writes a result bundle");
    ModelOptions bt_opts;
    std::string bundle_dir = "bundle";
    add_model_options(bt, bt_opts, true);
    bt->add_option("--input-mode", input_mode, "CSV values: returns or prices");
    bt->add_option("-o,--output", bundle_dir, "bundle directory");
    bt->add_option("data", data, "input CSV")->required();

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "loss tables, Diebold-Mariano and likelihood-ratio tests");
    std::vector<std::string> dm_bundles;
    int ev_horizon = 0;
    ev->add_option("--dm", dm_bundles, "two bundle directories")->required()->expected(2);
    ev->add_option("--horizon", ev_horizon, "autocovariance lags + 1 (default: bundle horizon)");
    ev->add_option("-o,--output", output, "also write the results as JSON");

    // sweep
    auto* sw = app.add_subcommand("sweep", "covariance distance to block truth for several component counts");
    ModelOptions sw_opts;
    std::string truth;
    std::vector<int> k_values;
    add_model_options(sw, sw_opts, true);
    sw->add_option("--truth", truth, "sidecar JSON written by simulate --preset regime-blocks")->required();
    sw->add_option("--k", k_values, "component counts (default: 1..I)")->delimiter(',');
    sw->add_option("--input-mode", input_mode, "CSV values: returns or prices");
    sw->add_option("-o,--output", output, "also write the table as CSV");
    sw->add_option("data", data, "input CSV")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        if (*sim) {
            return cmd_simulate(preset, seed, seed_opt->count() > 0, sim_dir, length, period, correlation, dims,
                                c_normal, c_volatile, out);
        }
        if (*fit) {
            return cmd_fit(data, parse_mode(input_mode), fit_opts, column, output, out, err);
        }
        if (*fc) {
            return cmd_forecast(data, parse_mode(input_mode), fc_opts, output, out, err);
        }
        if (*bt) {
            return cmd_backtest(data, parse_mode(input_mode), bt_opts, bundle_dir, out, err);
        }
        if (*ev) {
            return cmd_evaluate(dm_bundles, ev_horizon, output, out, err);
        }
        if (*sw) {
            return cmd_sweep(data, parse_mode(input_mode), sw_opts, truth, k_values, output, out);
        }
    } catch (const FitError& e) {
        err << "fit failure: " << e.what() << '\n';
        return kExitFit;
    } catch (const ContractError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Json::exception& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const fs::filesystem_error& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}

int cli_main(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) {
        args.emplace_back(argv[i]);
    }
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace ogarch
