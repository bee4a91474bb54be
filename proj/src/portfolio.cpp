#include "regime_ogarch/portfolio.hpp"

#include "regime_ogarch/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <vector>

namespace ogarch {

namespace {

constexpr double kPsdTol = 1e-10;
constexpr double kRidge = 1e-10;

}  // namespace

PortfolioWeights gmvp(const Eigen::MatrixXd& sigma) {
    const Eigen::Index n = sigma.rows();
    if (n < 1 || sigma.cols() != n) {
        throw ContractError("gmvp needs a non-empty square matrix");
    }
    if (n > kMaxGmvpAssets) {
        throw ContractError("gmvp support enumeration is limited to " + std::to_string(kMaxGmvpAssets) + " assets");
    }
    if (!sigma.allFinite()) {
        throw ContractError("gmvp input has non-finite entries");
    }
    const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
    if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > kPsdTol * scale) {
        throw ContractError("gmvp input is not symmetric");
    }
    const Eigen::MatrixXd s = 0.5 * (sigma + sigma.transpose());
    if (min_eigenvalue(s) < -kPsdTol * scale) {
        throw ContractError("gmvp input is not positive semidefinite");
    }

    PortfolioWeights best;
    double best_var = std::numeric_limits<double>::infinity();
    const std::uint32_t subsets = 1u << static_cast<unsigned>(n);
    std::vector<Eigen::Index> idx;
    for (std::uint32_t mask = 1; mask < subsets; ++mask) {
        idx.clear();
        for (Eigen::Index i = 0; i < n; ++i) {
            if (mask & (1u << static_cast<unsigned>(i))) {
                idx.push_back(i);
            }
        }
        const auto m = static_cast<Eigen::Index>(idx.size());
        Eigen::MatrixXd sub(m, m);
        for (Eigen::Index a = 0; a < m; ++a) {
            for (Eigen::Index b = 0; b < m; ++b) {
                sub(a, b) = s(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
            }
        }
        bool ridged = false;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
        if (!lu.isInvertible()) {
            sub += kRidge * Eigen::MatrixXd::Identity(m, m);
            lu.compute(sub);
            ridged = true;
        }
        const Eigen::VectorXd x = lu.solve(Eigen::VectorXd::Ones(m));
        const double denom = x.sum();
        if (!std::isfinite(denom) || denom == 0.0) {
            continue;
        }
        const Eigen::VectorXd ws = x / denom;
        if (ws.minCoeff() < -1e-12) {
            continue;
        }
        Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
        for (Eigen::Index a = 0; a < m; ++a) {
            w(idx[static_cast<std::size_t>(a)]) = std::max(ws(a), 0.0);
        }
        w /= w.sum();
        const double var = w.dot(s * w);
        // Strict improvement keeps the smallest support among ties.
        if (best.weights.size() == 0 || var < best_var - 1e-15 * std::max(1.0, std::abs(best_var))) {
            best_var = var;
            best.weights = w;
            best.ridged = ridged;
        }
    }
    if (best.weights.size() == 0) {
        throw ContractError("gmvp found no feasible support");
    }
    return best;
}

double gmvp_kkt_violation(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& w) {
    const Eigen::VectorXd g = sigma * w;
    double lambda = 0.0;
    int active = 0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (w(i) > 1e-12) {
            lambda += g(i);
            ++active;
        }
    }
    if (active == 0) {
        return std::numeric_limits<double>::infinity();
    }
    lambda /= active;
    double worst = std::abs(w.sum() - 1.0);
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        worst = std::max(worst, std::max(0.0, -w(i)));
        if (w(i) > 1e-12) {
            worst = std::max(worst, std::abs(g(i) - lambda));
        } else {
            worst = std::max(worst, std::max(0.0, lambda - g(i)));
        }
    }
    return worst;
}

Eigen::MatrixXd horizon_covariance(const CovarianceForecast& forecast) {
    if (forecast.matrices.empty()) {
        throw ContractError("horizon covariance of an empty forecast");
    }
    Eigen::MatrixXd sum = forecast.matrices.front();
    for (std::size_t s = 1; s < forecast.matrices.size(); ++s) {
        sum += forecast.matrices[s];
    }
    return sum;
}

double empirical_quantile(std::span<const double> x, double prob) {
    if (x.empty() || !(prob >= 0.0 && prob <= 1.0)) {
        throw ContractError("quantile needs data and a probability in [0, 1]");
    }
    std::vector<double> v(x.begin(), x.end());
    std::sort(v.begin(), v.end());
    const double pos = prob * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] + frac * (v[hi] - v[lo]);
}

PerformanceReport performance_stats(std::span<const double> r, double periods_per_year) {
    if (r.size() < 2) {
        throw ContractError("performance statistics need at least two periods");
    }
    if (!(periods_per_year > 0.0)) {
        throw ContractError("periods_per_year must be positive");
    }
    const auto n = static_cast<double>(r.size());
    double mean = 0.0;
    for (double v : r) {
        mean += v;
    }
    mean /= n;
    double ss = 0.0;
    for (double v : r) {
        ss += (v - mean) * (v - mean);
    }
    const double sd = std::sqrt(ss / (n - 1.0));

    PerformanceReport out;
    out.mean_pa = mean * periods_per_year;
    out.std_pa = sd * std::sqrt(periods_per_year);
    out.q05 = empirical_quantile(r, 0.05);
    out.worst = *std::min_element(r.begin(), r.end());
    double cum = 0.0;
    double peak = 0.0;
    for (double v : r) {
        cum += v;
        peak = std::max(peak, cum);
        out.max_drawdown = std::min(out.max_drawdown, cum - peak);
    }
    if (out.std_pa > 0.0) {
        out.sharpe = out.mean_pa / out.std_pa;
    }
    return out;
}

double periods_per_year_for(int horizon) {
    if (horizon < 1) {
        throw ContractError("horizon must be at least 1");
    }
    if (horizon == 1) {
        return 252.0;
    }
    if (horizon == 5) {
        return 52.0;
    }
    return 252.0 / horizon;
}

std::string performance_table(const std::vector<std::pair<std::string, PerformanceReport>>& rows) {
    std::size_t label_width = 5;
    for (const auto& [label, _] : rows) {
        label_width = std::max(label_width, label.size());
    }
    std::ostringstream out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-*s %14s %14s %14s %14s %14s %10s\n", static_cast<int>(label_width), "Model",
                  "Mean Ret. P.a.", "Std. P.a.", "5% Quantile", "Worst Case", "Max Draw Down", "Sharpe");
    out << buf;
    for (const auto& [label, r] : rows) {
        char sharpe[32];
        if (r.sharpe) {
            std::snprintf(sharpe, sizeof sharpe, "%10.4f", *r.sharpe);
        } else {
            std::snprintf(sharpe, sizeof sharpe, "%10s", "n/a");
        }
        std::snprintf(buf, sizeof buf, "%-*s %14.6f %14.6f %14.6f %14.6f %14.6f %s\n", static_cast<int>(label_width),
                      label.c_str(), r.mean_pa, r.std_pa, r.q05, r.worst, r.max_drawdown, sharpe);
        out << buf;
    }
    return out.str();
}

}  // namespace ogarch
