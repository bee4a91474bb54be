#include "regime_ogarch/estimation.hpp"

#include "regime_ogarch/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ogarch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_eval(const Objective& f, const Eigen::VectorXd& x) {
    const double v = f(x);
    return std::isfinite(v) ? v : kInf;
}

}  // namespace

void OptimizerConfig::validate() const {
    if (max_evals < 100) {
        throw ContractError("optimizer needs max_evals >= 100");
    }
    if (!(tol_f > 0.0) || !(tol_x > 0.0)) {
        throw ContractError("optimizer tolerances must be positive");
    }
}

OptimizerResult nelder_mead(const Objective& objective, const Eigen::VectorXd& start, const OptimizerConfig& config) {
    config.validate();
    const Eigen::Index n = start.size();
    if (n == 0) {
        throw ContractError("nelder_mead needs at least one parameter");
    }
    const double f_start = objective(start);
    if (!std::isfinite(f_start)) {
        throw ContractError("objective is not finite at the start point");
    }

    std::vector<Eigen::VectorXd> x(static_cast<std::size_t>(n + 1), start);
    std::vector<double> f(static_cast<std::size_t>(n + 1), f_start);
    int evals = 1;
    for (Eigen::Index i = 0; i < n; ++i) {
        auto& v = x[static_cast<std::size_t>(i + 1)];
        v(i) += 0.05 * (1.0 + std::abs(start(i)));
        f[static_cast<std::size_t>(i + 1)] = safe_eval(objective, v);
        ++evals;
    }

    std::vector<std::size_t> idx(x.size());
    bool converged = false;
    Eigen::VectorXd centroid(n);
    while (true) {
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::stable_sort(idx.begin(), idx.end(), [&f](std::size_t a, std::size_t b) { return f[a] < f[b]; });
        {
            std::vector<Eigen::VectorXd> xs;
            std::vector<double> fs;
            xs.reserve(x.size());
            fs.reserve(x.size());
            for (auto i : idx) {
                xs.push_back(std::move(x[i]));
                fs.push_back(f[i]);
            }
            x = std::move(xs);
            f = std::move(fs);
        }

        const double spread = f.back() - f.front();
        double diameter = 0.0;
        for (std::size_t i = 1; i < x.size(); ++i) {
            diameter = std::max(diameter, (x[i] - x[0]).cwiseAbs().maxCoeff());
        }
        if ((std::isfinite(spread) && spread < config.tol_f) || diameter < config.tol_x) {
            converged = true;
            break;
        }
        if (evals >= config.max_evals) {
            break;
        }

        centroid.setZero();
        for (std::size_t i = 0; i + 1 < x.size(); ++i) {
            centroid += x[i];
        }
        centroid /= static_cast<double>(n);

        const auto worst = x.size() - 1;
        const Eigen::VectorXd xr = centroid + (centroid - x[worst]);
        const double fr = safe_eval(objective, xr);
        ++evals;

        if (fr < f[0]) {
            const Eigen::VectorXd xe = centroid + 2.0 * (centroid - x[worst]);
            const double fe = safe_eval(objective, xe);
            ++evals;
            if (fe < fr) {
                x[worst] = xe;
                f[worst] = fe;
            } else {
                x[worst] = xr;
                f[worst] = fr;
            }
            continue;
        }
        if (fr < f[worst - 1]) {
            x[worst] = xr;
            f[worst] = fr;
            continue;
        }

        bool shrink = false;
        if (fr < f[worst]) {
            const Eigen::VectorXd xc = centroid + 0.5 * (xr - centroid);
            const double fc = safe_eval(objective, xc);
            ++evals;
            if (fc <= fr) {
                x[worst] = xc;
                f[worst] = fc;
            } else {
                shrink = true;
            }
        } else {
            const Eigen::VectorXd xc = centroid + 0.5 * (x[worst] - centroid);
            const double fc = safe_eval(objective, xc);
            ++evals;
            if (fc < f[worst]) {
                x[worst] = xc;
                f[worst] = fc;
            } else {
                shrink = true;
            }
        }
        if (shrink) {
            for (std::size_t i = 1; i < x.size(); ++i) {
                x[i] = x[0] + 0.5 * (x[i] - x[0]);
                f[i] = safe_eval(objective, x[i]);
                ++evals;
            }
        }
    }

    return {x[0], f[0], evals, converged};
}

OptimizerResult nelder_mead_restarts(const Objective& objective, const Eigen::VectorXd& start,
                                     const OptimizerConfig& config, int max_restarts) {
    OptimizerResult best = nelder_mead(objective, start, config);
    int total = best.evaluations;
    for (int r = 0; r < max_restarts; ++r) {
        OptimizerResult next = nelder_mead(objective, best.argmin, config);
        total += next.evaluations;
        const double gain = best.min_value - next.min_value;
        const bool improved = next.min_value < best.min_value;
        if (improved) {
            best.argmin = next.argmin;
            best.min_value = next.min_value;
        }
        best.converged = next.converged;
        if (!improved || gain < config.tol_f) {
            break;
        }
    }
    best.evaluations = total;
    return best;
}

std::vector<std::optional<double>> numerical_std_errors(const Objective& negloglike, const Eigen::VectorXd& theta_hat) {
    const Eigen::Index n = theta_hat.size();
    std::vector<std::optional<double>> out(static_cast<std::size_t>(n));
    const double f0 = negloglike(theta_hat);
    if (!std::isfinite(f0)) {
        return out;
    }

    Eigen::VectorXd step(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        step(i) = 1e-4 * (1.0 + std::abs(theta_hat(i)));
    }
    auto eval_at = [&](Eigen::Index i, double si, Eigen::Index j, double sj) {
        Eigen::VectorXd t = theta_hat;
        t(i) += si * step(i);
        if (j >= 0) {
            t(j) += sj * step(j);
        }
        return negloglike(t);
    };

    std::vector<bool> valid(static_cast<std::size_t>(n), true);
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double fp = eval_at(i, 1.0, -1, 0.0);
        const double fm = eval_at(i, -1.0, -1, 0.0);
        if (!std::isfinite(fp) || !std::isfinite(fm)) {
            valid[static_cast<std::size_t>(i)] = false;
            continue;
        }
        hess(i, i) = (fp - 2.0 * f0 + fm) / (step(i) * step(i));
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            if (!valid[static_cast<std::size_t>(i)] || !valid[static_cast<std::size_t>(j)]) {
                continue;
            }
            const double fpp = eval_at(i, 1.0, j, 1.0);
            const double fpm = eval_at(i, 1.0, j, -1.0);
            const double fmp = eval_at(i, -1.0, j, 1.0);
            const double fmm = eval_at(i, -1.0, j, -1.0);
            if (!std::isfinite(fpp) || !std::isfinite(fpm) || !std::isfinite(fmp) || !std::isfinite(fmm)) {
                valid[static_cast<std::size_t>(j)] = false;
                continue;
            }
            hess(i, j) = hess(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * step(i) * step(j));
        }
    }

    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (valid[static_cast<std::size_t>(i)]) {
            keep.push_back(i);
        }
    }
    if (keep.empty()) {
        return out;
    }
    const auto m = static_cast<Eigen::Index>(keep.size());
    Eigen::MatrixXd sub(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
        for (Eigen::Index b = 0; b < m; ++b) {
            sub(a, b) = hess(keep[static_cast<std::size_t>(a)], keep[static_cast<std::size_t>(b)]);
        }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(sub);
    if (llt.info() != Eigen::Success) {
        return out;
    }
    const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(m, m));
    for (Eigen::Index a = 0; a < m; ++a) {
        const double v = cov(a, a);
        if (v > 0.0 && std::isfinite(v)) {
            out[static_cast<std::size_t>(keep[static_cast<std::size_t>(a)])] = std::sqrt(v);
        }
    }
    return out;
}

double regularized_gamma_q(double a, double x) {
    if (!(a > 0.0) || x < 0.0 || std::isnan(x)) {
        throw ContractError("regularized_gamma_q needs a > 0 and x >= 0");
    }
    if (x == 0.0) {
        return 1.0;
    }
    if (std::isinf(x)) {
        return 0.0;
    }
    constexpr double eps = 1e-16;
    constexpr double tiny = 1e-300;
    constexpr int max_iter = 100000;
    const double log_prefix = -x + a * std::log(x) - std::lgamma(a);

    if (x < a + 1.0) {
        // series for P(a, x)
        double ap = a;
        double del = 1.0 / a;
        double sum = del;
        for (int i = 0; i < max_iter; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * eps) {
                break;
            }
        }
        return std::clamp(1.0 - sum * std::exp(log_prefix), 0.0, 1.0);
    }

    // continued fraction for Q(a, x), modified Lentz
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < max_iter; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) {
            d = tiny;
        }
        c = b + an / c;
        if (std::abs(c) < tiny) {
            c = tiny;
        }
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) {
            break;
        }
    }
    return std::clamp(std::exp(log_prefix) * h, 0.0, 1.0);
}

double chi2_upper_tail(double x, int df) {
    if (df < 1) {
        throw ContractError("chi-squared needs df >= 1");
    }
    if (x <= 0.0) {
        return 1.0;
    }
    return regularized_gamma_q(0.5 * df, 0.5 * x);
}

LrTestResult lr_test(double loglike_restricted, double loglike_full, int df) {
    if (df < 1) {
        throw ContractError("likelihood-ratio test needs df >= 1");
    }
    LrTestResult out;
    out.df = df;
    const double diff = loglike_full - loglike_restricted;
    if (diff < -1e-6) {
        out.warning = "nesting violation: unrestricted log-likelihood is below the restricted one";
    }
    out.statistic = std::max(0.0, 2.0 * diff);
    out.p_value = chi2_upper_tail(out.statistic, df);
    return out;
}

}  // namespace ogarch
