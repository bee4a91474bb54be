#include "regime_ogarch/garch.hpp"

#include <cmath>
#include <limits>

namespace ogarch {

namespace {

constexpr double kStationaryCap = 1.0 - 1e-6;
constexpr double kLog2Pi = 1.8378770664093454836;  // ln(2 pi)

double logistic(double t) { return 1.0 / (1.0 + std::exp(-t)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

GarchParams from_unconstrained(const Eigen::VectorXd& theta, double mu) {
    GarchParams p;
    p.omega = std::exp(theta(0));
    p.alpha = kStationaryCap * logistic(theta(1));
    p.beta = (kStationaryCap - p.alpha) * logistic(theta(2));
    p.mu = mu;
    return p;
}

Eigen::VectorXd to_unconstrained(const GarchParams& p) {
    Eigen::VectorXd theta(3);
    theta(0) = std::log(p.omega);
    theta(1) = logit(p.alpha / kStationaryCap);
    theta(2) = logit(p.beta / (kStationaryCap - p.alpha));
    return theta;
}

// Gaussian loglike without any validation; +/-inf or NaN propagate to the caller.
double raw_loglike(std::span<const double> y, const GarchParams& p, double h1) {
    double h = h1;
    double ll = 0.0;
    for (std::size_t t = 1; t < y.size(); ++t) {
        const double prev = y[t - 1] - p.mu;
        h = p.omega + p.alpha * prev * prev + p.beta * h;
        const double e = y[t] - p.mu;
        ll -= 0.5 * (kLog2Pi + std::log(h) + e * e / h);
    }
    return ll;
}

bool admissible(const GarchParams& p) {
    return p.omega > 0.0 && p.alpha >= 0.0 && p.beta >= 0.0 && p.alpha + p.beta < 1.0 && std::isfinite(p.mu);
}

void check_series(std::span<const double> y) {
    if (y.size() < 2) {
        throw ContractError("GARCH filter needs at least two observations");
    }
    for (double v : y) {
        if (!std::isfinite(v)) {
            throw ContractError("GARCH filter input contains non-finite values");
        }
    }
}

}  // namespace

double sample_mean(std::span<const double> y) {
    if (y.empty()) {
        throw ContractError("mean of an empty series");
    }
    double s = 0.0;
    for (double v : y) {
        s += v;
    }
    return s / static_cast<double>(y.size());
}

double sample_variance(std::span<const double> y) {
    if (y.size() < 2) {
        throw ContractError("variance needs at least two observations");
    }
    const double m = sample_mean(y);
    double ss = 0.0;
    for (double v : y) {
        ss += (v - m) * (v - m);
    }
    return ss / static_cast<double>(y.size() - 1);
}

double GarchParams::unconditional_variance() const {
    if (persistence() >= 1.0) {
        throw NonstationaryError("alpha + beta >= 1: unconditional variance undefined");
    }
    return omega / (1.0 - persistence());
}

void GarchParams::validate() const {
    if (!(omega > 0.0) || !(alpha >= 0.0) || !(beta >= 0.0) || !std::isfinite(mu)) {
        throw ContractError("GARCH parameters need omega > 0, alpha >= 0, beta >= 0");
    }
    if (persistence() >= 1.0) {
        throw ContractError("GARCH parameters need alpha + beta < 1");
    }
}

GarchFilterResult garch_filter(std::span<const double> y, const GarchParams& params, std::optional<double> h1) {
    check_series(y);
    params.validate();
    GarchFilterResult out;
    out.h.resize(y.size());
    out.h[0] = h1.value_or(sample_variance(y));
    if (!(out.h[0] > 0.0)) {
        throw ContractError("initial GARCH variance must be positive");
    }
    for (std::size_t t = 1; t < y.size(); ++t) {
        const double prev = y[t - 1] - params.mu;
        const double h = params.omega + params.alpha * prev * prev + params.beta * out.h[t - 1];
        out.h[t] = h;
        const double e = y[t] - params.mu;
        out.loglike -= 0.5 * (kLog2Pi + std::log(h) + e * e / h);
    }
    return out;
}

OptimizerConfig default_garch_optimizer() {
    OptimizerConfig c;
    c.max_evals = 2000;
    c.tol_f = 1e-9;
    c.tol_x = 1e-7;
    return c;
}

GarchFit garch_refilter(std::span<const double> y, const GarchParams& params) {
    const auto filtered = garch_filter(y, params);
    GarchFit fit;
    fit.params = params;
    fit.loglike = filtered.loglike;
    fit.h_path = filtered.h;
    const double e = y.back() - params.mu;
    fit.last_eps_sq = e * e;
    fit.last_h = filtered.h.back();
    fit.converged = true;
    return fit;
}

GarchFit garch_fit(std::span<const double> y, const OptimizerConfig& config) {
    check_series(y);
    const double mean = sample_mean(y);
    const double var = sample_variance(y);
    if (!(var > 0.0)) {
        throw ContractError("cannot fit GARCH to a constant series");
    }
    const double scale = std::sqrt(var);
    std::vector<double> z(y.size());
    for (std::size_t t = 0; t < y.size(); ++t) {
        z[t] = (y[t] - mean) / scale;
    }
    const double z_var = sample_variance(z);

    const Objective negloglike = [&](const Eigen::VectorXd& theta) {
        const GarchParams p = from_unconstrained(theta, 0.0);
        if (!admissible(p)) {
            return std::numeric_limits<double>::infinity();
        }
        return -raw_loglike(z, p, z_var);
    };

    const GarchParams start{0.05, 0.05, 0.90, 0.0};
    const OptimizerResult opt = nelder_mead_restarts(negloglike, to_unconstrained(start), config);

    const GarchParams pz = from_unconstrained(opt.argmin, 0.0);
    GarchParams p{pz.omega * var, pz.alpha, pz.beta, mean};
    GarchFit fit = garch_refilter(y, p);
    fit.converged = opt.converged;
    fit.evaluations = opt.evaluations;

    // Hessian in natural parameters on the standardized scale, mapped back.
    const Objective natural_nll = [&](const Eigen::VectorXd& v) {
        const GarchParams q{v(0), v(1), v(2), v(3)};
        if (!admissible(q)) {
            return std::numeric_limits<double>::infinity();
        }
        return -raw_loglike(z, q, z_var);
    };
    Eigen::VectorXd theta_hat(4);
    theta_hat << pz.omega, pz.alpha, pz.beta, 0.0;
    const auto se = numerical_std_errors(natural_nll, theta_hat);
    const std::array<double, 4> to_original{var, 1.0, 1.0, scale};
    for (std::size_t i = 0; i < 4; ++i) {
        if (se[i]) {
            fit.std_errors[i] = *se[i] * to_original[i];
        }
    }

    if (!opt.converged) {
        throw GarchFitError("GARCH fit did not converge within " + std::to_string(config.max_evals) + " evaluations",
                            std::move(fit));
    }
    return fit;
}

std::vector<double> garch_forecast(const GarchParams& params, double last_eps_sq, double last_h, int tau,
                                   HorizonConvention convention) {
    if (tau < 1) {
        throw ContractError("forecast horizon must be at least 1");
    }
    if (params.persistence() >= 1.0) {
        throw NonstationaryError("alpha + beta >= 1: multi-step GARCH forecast undefined");
    }
    const double hbar = params.unconditional_variance();
    const double ab = params.persistence();
    std::vector<double> out(static_cast<std::size_t>(tau));
    out[0] = params.omega + params.alpha * last_eps_sq + params.beta * last_h;
    for (int s = 2; s <= tau; ++s) {
        out[static_cast<std::size_t>(s - 1)] =
            convention == HorizonConvention::AnchoredAtNext ? hbar + std::pow(ab, s - 1) * (out[0] - hbar)
                                                            : hbar + std::pow(ab, s) * (last_h - hbar);
    }
    return out;
}

}  // namespace ogarch
