#include "regime_ogarch/bundle.hpp"

#include "regime_ogarch/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace ogarch {

namespace fs = std::filesystem;

namespace {

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json pair_json(const RegimePair& p) { return Json::array({p[0], p[1]}); }

Json matrix_json(const Eigen::MatrixXd& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row.push_back(m(i, j));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
    if (!j.is_array() || j.empty()) {
        throw ContractError("expected a non-empty matrix");
    }
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j.front().size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& row = j.at(static_cast<std::size_t>(i));
        if (static_cast<Eigen::Index>(row.size()) != cols) {
            throw ContractError("ragged matrix in JSON");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
        }
    }
    return m;
}

const char* excluded_name(ExcludedComponents e) {
    return e == ExcludedComponents::Unconditional ? "unconditional" : "truncate_to_zero";
}

const char* convention_name(HorizonConvention c) {
    return c == HorizonConvention::AnchoredAtNext ? "anchored" : "paper_literal";
}

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) {
        throw ContractError(where + " must be a JSON object");
    }
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j.items()) {
        if (!ok.contains(key)) {
            throw ContractError("unknown key '" + key + "' in " + where);
        }
    }
}

template <typename T>
void read_if(const Json& j, const char* key, T& out) {
    if (j.contains(key)) {
        out = j.at(key).get<T>();
    }
}

OptimizerConfig optimizer_from_json(const Json& j, OptimizerConfig base) {
    check_keys(j, {"max_evals", "tol_f", "tol_x", "seed"}, "optimizer config");
    read_if(j, "max_evals", base.max_evals);
    read_if(j, "tol_f", base.tol_f);
    read_if(j, "tol_x", base.tol_x);
    read_if(j, "seed", base.seed);
    return base;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        if (!field.empty() && field.back() == '\r') {
            field.pop_back();
        }
        out.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

double parse_double(const std::string& s, const std::string& what) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw DataError("cannot parse " + what + " value '" + s + "'");
    }
    return v;
}

}  // namespace

Json to_json(const GarchFit& fit) {
    Json j;
    j["omega"] = fit.params.omega;
    j["alpha"] = fit.params.alpha;
    j["beta"] = fit.params.beta;
    j["mu"] = fit.params.mu;
    j["loglike"] = fit.loglike;
    j["std_errors"] = {{"omega", optional_number(fit.std_errors[0])},
                       {"alpha", optional_number(fit.std_errors[1])},
                       {"beta", optional_number(fit.std_errors[2])},
                       {"mu", optional_number(fit.std_errors[3])}};
    j["converged"] = fit.converged;
    j["evaluations"] = fit.evaluations;
    return j;
}

Json to_json(const MrsGarchFit& fit) {
    const auto& p = fit.params;
    Json j;
    j["omega"] = pair_json(p.omega);
    j["alpha"] = pair_json(p.alpha);
    j["beta"] = pair_json(p.beta);
    j["mu"] = pair_json(p.mu);
    j["p"] = p.p;
    j["q"] = p.q;
    j["transition_labels"] = {{"p", "P(S_t=2 | S_t-1=1), switching out of the calm regime"},
                              {"q", "P(S_t=1 | S_t-1=2), switching out of the volatile regime"}};
    j["loglike"] = fit.loglike;
    Json se;
    for (std::size_t i = 0; i < kMrsParamNames.size(); ++i) {
        se[kMrsParamNames[i]] = optional_number(fit.std_errors[i]);
    }
    j["std_errors"] = std::move(se);
    j["free_parameters"] = fit.free_parameters;
    j["converged"] = fit.converged;
    j["evaluations"] = fit.evaluations;
    if (!fit.filter_path.empty()) {
        const auto& last = fit.filter_path.back();
        j["last_state"] = {{"prob_filtered", pair_json(last.prob_filtered)},
                           {"prob_exante", pair_json(last.prob_exante)},
                           {"h_regime", pair_json(last.h_regime)}};
    }
    return j;
}

Json to_json(const PerformanceReport& r) {
    return {{"mean_pa", r.mean_pa}, {"std_pa", r.std_pa},           {"q05", r.q05},
            {"worst", r.worst},     {"max_drawdown", r.max_drawdown}, {"sharpe", optional_number(r.sharpe)}};
}

Json to_json(const LossReport& r) {
    return {{"MSE1", r.mse1}, {"MSE2", r.mse2}, {"MAD1", r.mad1}, {"MAD2", r.mad2}, {"R2LOG", r.r2log},
            {"r2log_floor", kR2LogFloor}};
}

Json to_json(const DmTestResult& r) {
    return {{"statistic", r.statistic},
            {"p_value_two_sided", r.p_value},
            {"mean_d", r.mean_d},
            {"horizon", r.horizon},
            {"variance_fallback", r.variance_fallback}};
}

Json to_json(const LrTestResult& r) {
    Json j{{"statistic", r.statistic}, {"df", r.df}, {"p_value", r.p_value}};
    if (r.warning) {
        j["warning"] = *r.warning;
    }
    return j;
}

Json to_json(const OptimizerConfig& c) {
    return {{"max_evals", c.max_evals}, {"tol_f", c.tol_f}, {"tol_x", c.tol_x}, {"seed", c.seed}};
}

Json to_json(const BacktestConfig& c) {
    Json periods = Json::array();
    for (const auto& p : c.sub_periods) {
        periods.push_back({{"name", p.name}, {"first", p.first}, {"last", p.last}});
    }
    return {{"model", model_name(c.model)},
            {"n_components", c.n_components},
            {"window",
             {{"in_sample_len", c.window.in_sample_len},
              {"horizon", c.window.horizon},
              {"step", c.window.step},
              {"expanding", c.window.expanding}}},
            {"excluded", excluded_name(c.excluded)},
            {"full_sample_normalization", c.full_sample_normalization},
            {"ewma_lambda", c.ewma_lambda},
            {"garch_optimizer", to_json(c.garch_optimizer)},
            {"mrs", {{"zero_means", c.mrs.zero_means}, {"optimizer", to_json(c.mrs.optimizer)}, {"max_restarts", c.mrs.max_restarts}}},
            {"refit_every", c.refit_every},
            {"convention", convention_name(c.convention)},
            {"lock_degenerate", c.lock_degenerate},
            {"sub_periods", std::move(periods)},
            {"threads", c.threads}};
}

Json to_json(const CovarianceForecast& f) {
    Json m = Json::array();
    for (const auto& s : f.matrices) {
        m.push_back(matrix_json(s));
    }
    return m;
}

BacktestConfig config_from_json(const Json& j, BacktestConfig base) {
    check_keys(j,
               {"model", "n_components", "window", "excluded", "full_sample_normalization", "ewma_lambda",
                "garch_optimizer", "mrs", "refit_every", "convention", "lock_degenerate", "sub_periods", "threads"},
               "backtest config");
    if (j.contains("model")) {
        base.model = parse_model(j.at("model").get<std::string>());
    }
    read_if(j, "n_components", base.n_components);
    if (j.contains("window")) {
        const auto& w = j.at("window");
        check_keys(w, {"in_sample_len", "horizon", "step", "expanding"}, "window");
        read_if(w, "in_sample_len", base.window.in_sample_len);
        read_if(w, "horizon", base.window.horizon);
        read_if(w, "step", base.window.step);
        read_if(w, "expanding", base.window.expanding);
    }
    if (j.contains("excluded")) {
        const auto s = j.at("excluded").get<std::string>();
        if (s == "unconditional") {
            base.excluded = ExcludedComponents::Unconditional;
        } else if (s == "truncate_to_zero") {
            base.excluded = ExcludedComponents::TruncateToZero;
        } else {
            throw ContractError("excluded must be 'unconditional' or 'truncate_to_zero'");
        }
    }
    read_if(j, "full_sample_normalization", base.full_sample_normalization);
    read_if(j, "ewma_lambda", base.ewma_lambda);
    if (j.contains("garch_optimizer")) {
        base.garch_optimizer = optimizer_from_json(j.at("garch_optimizer"), base.garch_optimizer);
    }
    if (j.contains("mrs")) {
        const auto& m = j.at("mrs");
        check_keys(m, {"zero_means", "optimizer", "max_restarts"}, "mrs");
        read_if(m, "zero_means", base.mrs.zero_means);
        read_if(m, "max_restarts", base.mrs.max_restarts);
        if (m.contains("optimizer")) {
            base.mrs.optimizer = optimizer_from_json(m.at("optimizer"), base.mrs.optimizer);
        }
    }
    read_if(j, "refit_every", base.refit_every);
    if (j.contains("convention")) {
        const auto s = j.at("convention").get<std::string>();
        if (s == "anchored") {
            base.convention = HorizonConvention::AnchoredAtNext;
        } else if (s == "paper_literal") {
            base.convention = HorizonConvention::PaperLiteral;
        } else {
            throw ContractError("convention must be 'anchored' or 'paper_literal'");
        }
    }
    read_if(j, "lock_degenerate", base.lock_degenerate);
    if (j.contains("sub_periods")) {
        base.sub_periods.clear();
        for (const auto& p : j.at("sub_periods")) {
            check_keys(p, {"name", "first", "last"}, "sub_period");
            base.sub_periods.push_back(
                {p.at("name").get<std::string>(), p.at("first").get<std::string>(), p.at("last").get<std::string>()});
        }
    }
    read_if(j, "threads", base.threads);
    return base;
}

Json sidecar_json(const SquareWaveSpec& spec) {
    return {{"generator", "square-wave"},
            {"rng", kRngName},
            {"seed", spec.seed},
            {"period", spec.period},
            {"vol_low", spec.vol_low},
            {"vol_high", spec.vol_high},
            {"correlation", spec.correlation},
            {"length", spec.length}};
}

Json sidecar_json(const RegimeBlockSpec& spec) {
    Json covs = Json::array();
    for (const auto& c : spec.covariances) {
        covs.push_back(matrix_json(c));
    }
    return {{"generator", "regime-blocks"},
            {"rng", kRngName},
            {"seed", spec.seed},
            {"dims", spec.dims},
            {"bounds", spec.bounds},
            {"labels", spec.labels},
            {"covariances", std::move(covs)}};
}

RegimeBlockSpec regime_blocks_from_sidecar(const Json& j) {
    if (!j.is_object() || j.value("generator", "") != "regime-blocks") {
        throw ContractError("sidecar does not describe a regime-block panel");
    }
    RegimeBlockSpec spec;
    spec.dims = j.at("dims").get<int>();
    spec.bounds = j.at("bounds").get<std::vector<std::size_t>>();
    spec.labels = j.at("labels").get<std::vector<std::string>>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    spec.covariances.clear();
    for (const auto& c : j.at("covariances")) {
        spec.covariances.push_back(matrix_from_json(c));
    }
    spec.validate();
    return spec;
}

Json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw DataError("invalid JSON in " + path.string() + ": " + e.what());
    }
}

void write_json_file(const fs::path& path, const Json& j) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << j.dump(2) << '\n';
}

void write_bundle(const fs::path& dir, const BacktestResult& result) {
    fs::create_directories(dir / "forecasts");
    write_json_file(dir / "config.json", to_json(result.config));

    std::ofstream csv(dir / "weights.csv");
    if (!csv) {
        throw DataError("cannot write " + (dir / "weights.csv").string());
    }
    const std::size_t n_comp = result.rows.empty() ? 0 : result.rows.front().component_variance.size();
    const std::size_t n_prob = result.rows.empty() ? 0 : result.rows.front().p_volatile.size();
    csv << "origin,date";
    for (const auto& a : result.asset_names) {
        csv << ",w_" << a;
    }
    csv << ",portfolio_return,proxy_abs_return,eq_variance_forecast";
    for (const auto& a : result.asset_names) {
        csv << ",vol_" << a;
    }
    for (std::size_t j = 0; j < n_comp; ++j) {
        csv << ",var_pc" << j + 1;
    }
    for (std::size_t j = 0; j < n_prob; ++j) {
        csv << ",p2_pc" << j + 1;
    }
    csv << ",refit,status\n";

    for (const auto& row : result.rows) {
        csv << row.origin << ',' << row.date;
        for (Eigen::Index i = 0; i < row.weights.size(); ++i) {
            csv << ',' << format_double(row.weights(i));
        }
        csv << ',' << format_double(row.portfolio_return) << ',' << format_double(row.proxy_abs_return) << ','
            << format_double(row.eq_variance_forecast);
        const Eigen::MatrixXd& first = row.forecast.matrices.front();
        for (Eigen::Index i = 0; i < first.rows(); ++i) {
            csv << ',' << format_double(std::sqrt(std::max(first(i, i), 0.0)));
        }
        for (std::size_t j = 0; j < n_comp; ++j) {
            csv << ',' << (j < row.component_variance.size() ? format_double(row.component_variance[j]) : "");
        }
        for (std::size_t j = 0; j < n_prob; ++j) {
            csv << ',' << (j < row.p_volatile.size() ? format_double(row.p_volatile[j]) : "");
        }
        csv << ',' << (row.refit ? 1 : 0) << ',' << row.status << '\n';

        char name[32];
        std::snprintf(name, sizeof name, "%08zu.json", row.origin);
        Json f{{"origin", row.origin},
               {"date", row.date},
               {"horizon", row.forecast.horizon()},
               {"assets", result.asset_names},
               {"daily", to_json(row.forecast)},
               {"horizon_covariance", matrix_json(horizon_covariance(row.forecast))}};
        write_json_file(dir / "forecasts" / name, f);
    }

    Json report;
    report["model"] = model_name(result.config.model);
    Json periods = Json::array();
    for (const auto& s : summarize(result)) {
        Json p{{"name", s.name}, {"origins", s.origins}};
        p["performance"] = s.performance ? to_json(*s.performance) : Json(nullptr);
        p["losses"] = s.losses ? to_json(*s.losses) : Json(nullptr);
        periods.push_back(std::move(p));
    }
    report["periods"] = std::move(periods);
    std::map<std::size_t, std::string> dates;
    for (const auto& row : result.rows) {
        dates[row.origin] = row.date;
    }
    Json fits = Json::array();
    for (const auto& f : result.fits) {
        Json e{{"origin", f.origin}, {"date", dates[f.origin]}, {"component", f.component + 1}};
        e["garch"] = to_json(f.garch);
        if (f.mrs) {
            e["mrsgarch"] = to_json(*f.mrs);
        }
        fits.push_back(std::move(e));
    }
    report["fits"] = std::move(fits);
    report["warnings"] = result.warnings;
    write_json_file(dir / "report.json", report);
}

BundleRows read_bundle(const fs::path& dir) {
    BundleRows b;
    b.config = read_json_file(dir / "config.json");
    b.report = read_json_file(dir / "report.json");
    std::ifstream in(dir / "weights.csv");
    if (!in) {
        throw DataError("cannot open " + (dir / "weights.csv").string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("empty weights.csv in " + dir.string());
    }
    const auto header = split_csv(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) {
        col[header[i]] = i;
        if (header[i].rfind("w_", 0) == 0) {
            b.asset_names.push_back(header[i].substr(2));
        }
    }
    for (const char* need : {"date", "portfolio_return", "proxy_abs_return", "eq_variance_forecast"}) {
        if (!col.contains(need)) {
            throw DataError("weights.csv lacks column '" + std::string(need) + "'");
        }
    }
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto f = split_csv(line);
        if (f.size() != header.size()) {
            throw DataError("weights.csv row has " + std::to_string(f.size()) + " fields, expected " +
                            std::to_string(header.size()));
        }
        b.dates.push_back(f[col["date"]]);
        b.portfolio_return.push_back(parse_double(f[col["portfolio_return"]], "portfolio_return"));
        b.proxy_abs_return.push_back(parse_double(f[col["proxy_abs_return"]], "proxy_abs_return"));
        b.eq_variance_forecast.push_back(parse_double(f[col["eq_variance_forecast"]], "eq_variance_forecast"));
    }
    return b;
}

}  // namespace ogarch
