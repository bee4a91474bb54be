#include "regime_ogarch/mrs_garch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ogarch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kFloor = 1e-12;
constexpr double kProbClip = 1e-8;
// Box on the standardized scale. A regime the chain never visits leaves its
// GARCH parameters unidentified and free to run off without these; beta above
// one compounds through the collapse.
constexpr double kOmegaCap = 1e2;
constexpr double kAlphaCap = 10.0;
constexpr double kBetaCap = 1.0;

double softplus(double t) { return t > 30.0 ? t : std::log1p(std::exp(t)); }
double softplus_inv(double x) { return x > 30.0 ? x : std::log(std::expm1(std::max(x, kFloor))); }
double logistic(double t) { return 1.0 / (1.0 + std::exp(-t)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

struct Collapsed {
    double exante = 0.0;
    double mean = 0.0;      // sum_j ptilde_j mu_j
    double variance = 0.0;  // sum_j ptilde_j (mu_j^2 + V_j) - mean^2
};

// Backward collapse onto target regime i from probabilities and variances one step earlier.
Collapsed collapse(const RegimePair& prob, const RegimePair& var, const MrsGarchParams& params, int i) {
    Collapsed c;
    c.exante = prob[0] * params.transition(0, i) + prob[1] * params.transition(1, i);
    if (!(c.exante > 0.0)) {
        throw FilterDegeneracyError("ex-ante regime probability is zero");
    }
    RegimePair pt{};
    for (int j = 0; j < 2; ++j) {
        pt[j] = params.transition(j, i) * prob[j] / c.exante;
    }
    c.mean = pt[0] * params.mu[0] + pt[1] * params.mu[1];
    // Same quantity as sum p(mu^2 + V) - mean^2, written so it cannot go negative.
    for (int j = 0; j < 2; ++j) {
        const double d = params.mu[j] - c.mean;
        c.variance += pt[j] * (var[j] + d * d);
    }
    return c;
}

std::vector<double> standardize(std::span<const double> y, double mean, double scale) {
    std::vector<double> z(y.size());
    for (std::size_t t = 0; t < y.size(); ++t) {
        z[t] = (y[t] - mean) / scale;
    }
    return z;
}

// Likelihood without throwing: -inf on degeneracy.
double safe_loglike(std::span<const double> y, const MrsGarchParams& params, double h1) {
    RegimeFilterState s;
    s.prob_filtered = stationary_distribution(params.p, params.q);
    s.prob_exante = s.prob_filtered;
    s.h_regime = {h1, h1};
    double ll = 0.0;
    try {
        for (std::size_t t = 1; t < y.size(); ++t) {
            auto step = filter_step(s, y[t - 1], y[t], params);
            s = step.state;
            ll += step.loglike_increment;
        }
    } catch (const FilterDegeneracyError&) {
        return -kInf;
    }
    return std::isfinite(ll) ? ll : -kInf;
}

class Layout {
public:
    explicit Layout(bool zero_means, double fixed_mu) : zero_means_(zero_means), fixed_mu_(fixed_mu) {}

    [[nodiscard]] Eigen::Index size() const { return zero_means_ ? 8 : 10; }

    [[nodiscard]] MrsGarchParams decode(const Eigen::VectorXd& th) const {
        MrsGarchParams p;
        for (int i = 0; i < 2; ++i) {
            p.omega[i] = std::clamp(softplus(th(i)), kFloor, kOmegaCap);
            p.alpha[i] = std::clamp(softplus(th(2 + i)), kFloor, kAlphaCap);
            p.beta[i] = std::clamp(softplus(th(4 + i)), kFloor, kBetaCap);
        }
        Eigen::Index k = 6;
        if (zero_means_) {
            p.mu = {fixed_mu_, fixed_mu_};
        } else {
            p.mu = {th(6), th(7)};
            k = 8;
        }
        p.p = std::clamp(logistic(th(k)), kProbClip, 1.0 - kProbClip);
        p.q = std::clamp(logistic(th(k + 1)), kProbClip, 1.0 - kProbClip);
        return p;
    }

    [[nodiscard]] Eigen::VectorXd encode(const MrsGarchParams& p) const {
        Eigen::VectorXd th(size());
        for (int i = 0; i < 2; ++i) {
            th(i) = softplus_inv(p.omega[i]);
            th(2 + i) = softplus_inv(p.alpha[i]);
            th(4 + i) = softplus_inv(p.beta[i]);
        }
        Eigen::Index k = 6;
        if (!zero_means_) {
            th(6) = p.mu[0];
            th(7) = p.mu[1];
            k = 8;
        }
        th(k) = logit(p.p);
        th(k + 1) = logit(p.q);
        return th;
    }

    // Natural parameters in kMrsParamNames order, mu omitted under zero_means.
    [[nodiscard]] Eigen::VectorXd natural(const MrsGarchParams& p) const {
        Eigen::VectorXd v(size());
        v << p.omega[0], p.omega[1], p.alpha[0], p.alpha[1], p.beta[0], p.beta[1],
            Eigen::VectorXd::Zero(size() - 6);
        Eigen::Index k = 6;
        if (!zero_means_) {
            v(6) = p.mu[0];
            v(7) = p.mu[1];
            k = 8;
        }
        v(k) = p.p;
        v(k + 1) = p.q;
        return v;
    }

    [[nodiscard]] std::optional<MrsGarchParams> from_natural(const Eigen::VectorXd& v) const {
        MrsGarchParams p;
        p.omega = {v(0), v(1)};
        p.alpha = {v(2), v(3)};
        p.beta = {v(4), v(5)};
        Eigen::Index k = 6;
        if (zero_means_) {
            p.mu = {fixed_mu_, fixed_mu_};
        } else {
            p.mu = {v(6), v(7)};
            k = 8;
        }
        p.p = v(k);
        p.q = v(k + 1);
        for (int i = 0; i < 2; ++i) {
            if (p.omega[i] < 0.0 || p.alpha[i] < 0.0 || p.beta[i] < 0.0 || p.omega[i] + p.alpha[i] + p.beta[i] <= 0.0) {
                return std::nullopt;
            }
        }
        if (!(p.p > 0.0 && p.p < 1.0 && p.q > 0.0 && p.q < 1.0)) {
            return std::nullopt;
        }
        return p;
    }

    // Index into kMrsParamNames for natural-vector position a.
    [[nodiscard]] std::size_t name_index(Eigen::Index a) const {
        if (zero_means_ && a >= 6) {
            return static_cast<std::size_t>(a + 2);
        }
        return static_cast<std::size_t>(a);
    }

private:
    bool zero_means_;
    double fixed_mu_;
};

// Regime 2 must carry the higher variance level.
bool needs_swap(const MrsGarchParams& p, std::span<const double> y) {
    const auto v1 = p.unconditional_variance(0);
    const auto v2 = p.unconditional_variance(1);
    if (v1 && v2) {
        return *v1 > *v2;
    }
    try {
        const auto path = mrs_filter(y, p).path;
        double m1 = 0.0;
        double m2 = 0.0;
        for (const auto& s : path) {
            m1 += s.h_regime[0];
            m2 += s.h_regime[1];
        }
        return m1 > m2;
    } catch (const FilterDegeneracyError&) {
        return false;
    }
}

}  // namespace

std::optional<double> MrsGarchParams::unconditional_variance(int regime) const {
    const auto i = static_cast<std::size_t>(regime);
    const double persistence = alpha[i] + beta[i];
    if (persistence >= 1.0) {
        return std::nullopt;
    }
    return omega[i] / (1.0 - persistence);
}

MrsGarchParams MrsGarchParams::swapped() const {
    MrsGarchParams s;
    s.omega = {omega[1], omega[0]};
    s.alpha = {alpha[1], alpha[0]};
    s.beta = {beta[1], beta[0]};
    s.mu = {mu[1], mu[0]};
    s.p = q;
    s.q = p;
    return s;
}

MrsGarchParams MrsGarchParams::degenerate(const GarchParams& g, double p, double q) {
    MrsGarchParams m;
    m.omega = {g.omega, g.omega};
    m.alpha = {g.alpha, g.alpha};
    m.beta = {g.beta, g.beta};
    m.mu = {g.mu, g.mu};
    m.p = p;
    m.q = q;
    return m;
}

void MrsGarchParams::validate() const {
    for (std::size_t i = 0; i < 2; ++i) {
        if (!(omega[i] >= 0.0) || !(alpha[i] >= 0.0) || !(beta[i] >= 0.0) || !std::isfinite(mu[i]) ||
            !std::isfinite(omega[i] + alpha[i] + beta[i])) {
            throw ContractError("regime parameters need omega, alpha, beta >= 0 and finite means");
        }
        if (omega[i] + alpha[i] + beta[i] <= 0.0) {
            throw ContractError("a regime with omega = alpha = beta = 0 has no variance");
        }
    }
    if (!(p > 0.0 && p < 1.0 && q > 0.0 && q < 1.0)) {
        throw ContractError("transition probabilities must lie in (0, 1)");
    }
}

RegimePair stationary_distribution(double p, double q) {
    if (!(p >= 0.0 && p <= 1.0 && q >= 0.0 && q <= 1.0)) {
        throw ContractError("transition probabilities must lie in [0, 1]");
    }
    const double s = p + q;
    if (!(s > 0.0)) {
        throw ContractError("p + q = 0: stationary distribution is not unique");
    }
    return {q / s, p / s};
}

double aggregate_lagged_variance(const RegimeFilterState& state, const MrsGarchParams& params, int target) {
    if (target != 0 && target != 1) {
        throw ContractError("regime index must be 0 or 1");
    }
    return collapse(state.prob_filtered, state.h_regime, params, target).variance;
}

FilterStepResult filter_step(const RegimeFilterState& state, double y_prev, double y_t, const MrsGarchParams& params) {
    FilterStepResult out;
    RegimePair log_joint{};
    for (int i = 0; i < 2; ++i) {
        const auto c = collapse(state.prob_filtered, state.h_regime, params, i);
        const double e = y_prev - c.mean;
        const auto k = static_cast<std::size_t>(i);
        const double h = std::max(params.omega[k] + params.alpha[k] * e * e + params.beta[k] * c.variance, kFloor);
        out.state.prob_exante[k] = c.exante;
        out.state.h_regime[k] = h;
        const double d = y_t - params.mu[k];
        log_joint[k] = -0.5 * (kLog2Pi + std::log(h) + d * d / h) + std::log(c.exante);
    }
    const double m = std::max(log_joint[0], log_joint[1]);
    if (!std::isfinite(m)) {
        throw FilterDegeneracyError("all regime densities vanished");
    }
    const double ll = m + std::log(std::exp(log_joint[0] - m) + std::exp(log_joint[1] - m));
    RegimePair upd{std::exp(log_joint[0] - ll), std::exp(log_joint[1] - ll)};
    const double total = upd[0] + upd[1];
    out.state.prob_filtered = {upd[0] / total, upd[1] / total};
    // Normalizing both entries separately can leave the pair one ulp off.
    out.state.prob_exante[1] = 1.0 - out.state.prob_exante[0];
    out.state.prob_filtered[1] = 1.0 - out.state.prob_filtered[0];
    out.state.t = state.t + 1;
    out.loglike_increment = ll;
    return out;
}

RegimeFilterState initial_filter_state(std::span<const double> y, const MrsGarchParams& params) {
    RegimeFilterState s;
    s.prob_filtered = stationary_distribution(params.p, params.q);
    s.prob_exante = s.prob_filtered;
    const double v = sample_variance(y);
    if (!(v > 0.0)) {
        throw ContractError("cannot filter a constant series");
    }
    s.h_regime = {v, v};
    s.t = 0;
    return s;
}

MrsFilterResult mrs_filter(std::span<const double> y, const MrsGarchParams& params) {
    params.validate();
    if (y.size() < 2) {
        throw ContractError("regime-switching filter needs at least two observations");
    }
    for (double v : y) {
        if (!std::isfinite(v)) {
            throw ContractError("filter input contains non-finite values");
        }
    }
    MrsFilterResult out;
    out.path.reserve(y.size());
    out.path.push_back(initial_filter_state(y, params));
    for (std::size_t t = 1; t < y.size(); ++t) {
        auto step = filter_step(out.path.back(), y[t - 1], y[t], params);
        out.loglike += step.loglike_increment;
        out.path.push_back(step.state);
    }
    return out;
}

double mrs_loglike(std::span<const double> y, const MrsGarchParams& params) { return mrs_filter(y, params).loglike; }

OptimizerConfig MrsFitOptions::default_mrs_optimizer() {
    OptimizerConfig c;
    c.max_evals = 3000;
    c.tol_f = 1e-8;
    c.tol_x = 1e-6;
    return c;
}

MrsGarchFit mrs_refilter(std::span<const double> y, const MrsGarchParams& params) {
    auto filtered = mrs_filter(y, params);
    MrsGarchFit fit;
    fit.params = params;
    fit.loglike = filtered.loglike;
    fit.filter_path = std::move(filtered.path);
    fit.y_last = y.back();
    fit.converged = true;
    return fit;
}

MrsGarchFit mrs_fit(std::span<const double> y, const MrsFitOptions& options) {
    return mrs_fit(y, garch_fit(y), options);
}

MrsGarchFit mrs_fit(std::span<const double> y, const GarchFit& garch, const MrsFitOptions& options) {
    if (y.size() < 3) {
        throw ContractError("regime-switching fit needs at least three observations");
    }
    const double mean = sample_mean(y);
    const double var = sample_variance(y);
    if (!(var > 0.0)) {
        throw ContractError("cannot fit a constant series");
    }
    const double scale = std::sqrt(var);
    const std::vector<double> z = standardize(y, mean, scale);
    const double z_var = sample_variance(z);
    const double fixed_mu = options.zero_means ? -mean / scale : 0.0;
    const Layout layout(options.zero_means, fixed_mu);

    const Objective nll = [&](const Eigen::VectorXd& th) { return -safe_loglike(z, layout.decode(th), z_var); };

    // Starting points on the standardized scale.
    GarchParams gz{garch.params.omega / var, garch.params.alpha, garch.params.beta, (garch.params.mu - mean) / scale};
    if (options.zero_means) {
        gz.mu = fixed_mu;
    }
    std::vector<MrsGarchParams> starts;
    starts.push_back(MrsGarchParams::degenerate(gz, 0.05, 0.05));
    for (double factor : {0.25, 4.0}) {
        for (double stay : {0.9, 0.98}) {
            MrsGarchParams s = MrsGarchParams::degenerate(gz, 1.0 - stay, 1.0 - stay);
            s.omega[1] = std::max(gz.omega * factor, 1e-6);
            s.omega[0] = std::max(gz.omega, 1e-6);
            // Keep both regimes stationary so the start is a proper model.
            for (std::size_t i = 0; i < 2; ++i) {
                if (s.alpha[i] + s.beta[i] > 0.995) {
                    s.beta[i] = std::max(0.995 - s.alpha[i], 0.0);
                }
            }
            starts.push_back(s);
        }
    }

    OptimizerResult best;
    best.min_value = kInf;
    bool any_converged = false;
    int evaluations = 0;
    for (const auto& s : starts) {
        const Eigen::VectorXd th0 = layout.encode(s);
        if (!std::isfinite(nll(th0))) {
            continue;
        }
        OptimizerResult r = nelder_mead_restarts(nll, th0, options.optimizer, options.max_restarts);
        evaluations += r.evaluations;
        any_converged = any_converged || r.converged;
        if (r.min_value < best.min_value) {
            best = r;
        }
    }
    if (!std::isfinite(best.min_value)) {
        throw MrsFitError("no regime-switching start point has a finite likelihood", MrsGarchFit{});
    }

    MrsGarchParams pz = layout.decode(best.argmin);
    if (needs_swap(pz, z)) {
        pz = pz.swapped();
    }

    MrsGarchParams p = pz;
    for (std::size_t i = 0; i < 2; ++i) {
        p.omega[i] = pz.omega[i] * var;
        p.mu[i] = pz.mu[i] * scale + mean;
    }
    if (options.zero_means) {
        p.mu = {0.0, 0.0};
    }
    MrsGarchFit fit = mrs_refilter(y, p);
    fit.garch = garch;
    fit.free_parameters = static_cast<int>(layout.size());
    fit.converged = any_converged;
    fit.evaluations = evaluations;

    const Objective natural_nll = [&](const Eigen::VectorXd& v) {
        const auto q = layout.from_natural(v);
        return q ? -safe_loglike(z, *q, z_var) : kInf;
    };
    const auto se = numerical_std_errors(natural_nll, layout.natural(pz));
    for (Eigen::Index a = 0; a < layout.size(); ++a) {
        const auto& v = se[static_cast<std::size_t>(a)];
        if (!v) {
            continue;
        }
        const std::size_t name = layout.name_index(a);
        double factor = 1.0;
        if (name < 2) {
            factor = var;
        } else if (name == 6 || name == 7) {
            factor = scale;
        }
        fit.std_errors[name] = *v * factor;
    }

    if (!any_converged) {
        throw MrsFitError("no regime-switching start converged within " + std::to_string(options.optimizer.max_evals) +
                              " evaluations",
                          std::move(fit));
    }
    return fit;
}

MrsForecast mrs_forecast(const MrsGarchParams& params, const RegimeFilterState& last, double y_last, int tau) {
    if (tau < 1) {
        throw ContractError("forecast horizon must be at least 1");
    }
    params.validate();
    MrsForecast out;
    RegimePair prob = last.prob_filtered;
    RegimePair var = last.h_regime;
    for (int s = 1; s <= tau; ++s) {
        RegimePair next_prob{};
        RegimePair next_var{};
        for (int i = 0; i < 2; ++i) {
            const auto c = collapse(prob, var, params, i);
            const auto k = static_cast<std::size_t>(i);
            next_prob[k] = c.exante;
            if (s == 1) {
                const double e = y_last - c.mean;
                next_var[k] = params.omega[k] + params.alpha[k] * e * e + params.beta[k] * c.variance;
            } else {
                next_var[k] = params.omega[k] + (params.alpha[k] + params.beta[k]) * c.variance;
            }
            next_var[k] = std::max(next_var[k], kFloor);
        }
        prob = next_prob;
        var = next_var;
        const double m = prob[0] * params.mu[0] + prob[1] * params.mu[1];
        double total = 0.0;
        for (std::size_t i = 0; i < 2; ++i) {
            const double d = params.mu[i] - m;
            total += prob[i] * (var[i] + d * d);
        }
        out.variance.push_back(total);
        out.regime_prob.push_back(prob);
        out.regime_variance.push_back(var);
    }
    return out;
}

MrsForecast mrs_forecast(const MrsGarchFit& fit, int tau) {
    if (fit.filter_path.empty()) {
        throw ContractError("fit has no filter path");
    }
    return mrs_forecast(fit.params, fit.filter_path.back(), fit.y_last, tau);
}

}  // namespace ogarch
