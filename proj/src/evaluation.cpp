#include "regime_ogarch/evaluation.hpp"

#include "regime_ogarch/errors.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace ogarch {

namespace {

void check_inputs(std::span<const double> x, std::span<const double> h) {
    if (x.size() != h.size() || x.empty()) {
        throw ContractError("loss inputs must be non-empty and of equal length");
    }
    for (std::size_t t = 0; t < x.size(); ++t) {
        if (!(h[t] > 0.0) || !std::isfinite(h[t])) {
            throw ContractError("variance forecasts must be positive and finite");
        }
        if (!(x[t] >= 0.0) || !std::isfinite(x[t])) {
            throw ContractError("realized proxy must be nonnegative and finite");
        }
    }
}

double loss_at(double x, double h, Loss loss) {
    switch (loss) {
        case Loss::Mse1: {
            const double e = x - std::sqrt(h);
            return e * e;
        }
        case Loss::Mse2: {
            const double e = x * x - h;
            return e * e;
        }
        case Loss::Mad1:
            return std::abs(x - std::sqrt(h));
        case Loss::Mad2:
            return std::abs(x * x - h);
        case Loss::R2Log: {
            const double l = std::log(std::max(x * x, kR2LogFloor) / h);
            return l * l;
        }
    }
    return 0.0;
}

}  // namespace

const char* loss_name(Loss loss) {
    switch (loss) {
        case Loss::Mse1:
            return "MSE1";
        case Loss::Mse2:
            return "MSE2";
        case Loss::Mad1:
            return "MAD1";
        case Loss::Mad2:
            return "MAD2";
        case Loss::R2Log:
            return "R2LOG";
    }
    return "?";
}

double LossReport::get(Loss loss) const {
    switch (loss) {
        case Loss::Mse1:
            return mse1;
        case Loss::Mse2:
            return mse2;
        case Loss::Mad1:
            return mad1;
        case Loss::Mad2:
            return mad2;
        case Loss::R2Log:
            return r2log;
    }
    return 0.0;
}

std::vector<double> loss_series(std::span<const double> x, std::span<const double> h, Loss loss) {
    check_inputs(x, h);
    std::vector<double> out(x.size());
    for (std::size_t t = 0; t < x.size(); ++t) {
        out[t] = loss_at(x[t], h[t], loss);
    }
    return out;
}

LossReport loss_functions(std::span<const double> x, std::span<const double> h) {
    check_inputs(x, h);
    const auto n = static_cast<double>(x.size());
    LossReport r;
    for (std::size_t t = 0; t < x.size(); ++t) {
        r.mse1 += loss_at(x[t], h[t], Loss::Mse1);
        r.mse2 += loss_at(x[t], h[t], Loss::Mse2);
        r.mad1 += loss_at(x[t], h[t], Loss::Mad1);
        r.mad2 += loss_at(x[t], h[t], Loss::Mad2);
        r.r2log += loss_at(x[t], h[t], Loss::R2Log);
    }
    r.mse1 /= n;
    r.mse2 /= n;
    r.mad1 /= n;
    r.mad2 /= n;
    r.r2log /= n;
    return r;
}

double autocovariance(std::span<const double> d, std::size_t lag) {
    if (d.empty() || lag >= d.size()) {
        throw ContractError("autocovariance lag out of range");
    }
    const auto n = static_cast<double>(d.size());
    double mean = 0.0;
    for (double v : d) {
        mean += v;
    }
    mean /= n;
    double s = 0.0;
    for (std::size_t t = lag; t < d.size(); ++t) {
        s += (d[t] - mean) * (d[t - lag] - mean);
    }
    return s / n;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

DmTestResult dm_test(std::span<const double> loss_a, std::span<const double> loss_b, int tau) {
    if (loss_a.size() != loss_b.size()) {
        throw ContractError("loss series must have equal length");
    }
    if (loss_a.size() < 10) {
        throw ContractError("Diebold-Mariano test needs at least 10 periods");
    }
    if (tau < 1 || static_cast<std::size_t>(tau) > loss_a.size()) {
        throw ContractError("horizon must be between 1 and the series length");
    }
    std::vector<double> d(loss_a.size());
    for (std::size_t t = 0; t < d.size(); ++t) {
        d[t] = loss_a[t] - loss_b[t];
    }
    const auto n = static_cast<double>(d.size());
    double mean = 0.0;
    for (double v : d) {
        mean += v;
    }
    mean /= n;

    DmTestResult out;
    out.horizon = tau;
    out.mean_d = mean;
    const double g0 = autocovariance(d, 0);
    double bracket = g0;
    for (int k = 1; k < tau; ++k) {
        bracket += 2.0 * autocovariance(d, static_cast<std::size_t>(k));
    }
    if (bracket < 0.0) {
        bracket = g0;
        out.variance_fallback = true;
    }
    if (!(bracket > 0.0)) {
        throw DegenerateSeriesError("loss differential has zero variance");
    }
    out.statistic = mean / std::sqrt(bracket / n);
    out.p_value = std::erfc(std::abs(out.statistic) / std::numbers::sqrt2);
    return out;
}

std::vector<double> realized_proxy(const Eigen::MatrixXd& returns, const Eigen::VectorXd& weights, int period) {
    if (returns.cols() != weights.size()) {
        throw ContractError("weights do not match the number of assets");
    }
    if (period < 1) {
        throw ContractError("holding period must be at least 1");
    }
    if (std::abs(weights.sum() - 1.0) > 1e-8) {
        throw ContractError("weights must sum to 1");
    }
    std::vector<double> out;
    const auto p = static_cast<Eigen::Index>(period);
    for (Eigen::Index start = 0; start + p <= returns.rows(); start += p) {
        const Eigen::MatrixXd rows = returns.middleRows(start, p);
        const Eigen::VectorXd block = rows.colwise().sum().transpose();
        out.push_back(std::abs(weights.dot(block)));
    }
    return out;
}

std::string loss_table(const std::vector<std::pair<std::string, LossReport>>& models) {
    std::ostringstream out;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-6s", "Loss");
    out << buf;
    for (const auto& [name, _] : models) {
        std::snprintf(buf, sizeof buf, " %14s", name.c_str());
        out << buf;
    }
    out << '\n';
    for (Loss loss : kAllLosses) {
        std::snprintf(buf, sizeof buf, "%-6s", loss_name(loss));
        out << buf;
        for (const auto& [_, report] : models) {
            std::snprintf(buf, sizeof buf, " %14.6e", report.get(loss));
            out << buf;
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace ogarch
