#include "regime_ogarch/simulation.hpp"

#include "regime_ogarch/errors.hpp"

#include <cmath>
#include <numbers>

namespace ogarch {

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    double u1 = uniform();
    while (u1 == 0.0) {
        u1 = uniform();
    }
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
}

Eigen::MatrixXd sampling_factor(const Eigen::MatrixXd& cov) {
    if (cov.rows() != cov.cols() || cov.rows() == 0) {
        throw ContractError("covariance must be a non-empty square matrix");
    }
    const Eigen::MatrixXd s = 0.5 * (cov + cov.transpose());
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() == Eigen::Success) {
        return llt.matrixL();
    }
    // Semidefinite or slightly indefinite: factor via the clipped eigen-decomposition.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
    const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Eigen::MatrixXd b = eig.eigenvectors() * root.asDiagonal();
    // B B' reproduces the repaired matrix; a QR of B' gives a triangular factor with the same product.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(b.transpose());
    Eigen::MatrixXd l = qr.matrixQR().triangularView<Eigen::Upper>().transpose();
    for (Eigen::Index j = 0; j < l.cols(); ++j) {
        if (l(j, j) < 0.0) {
            l.col(j) = -l.col(j);
        }
    }
    return l;
}

void SquareWaveSpec::validate() const {
    if (period < 1) {
        throw ContractError("square-wave period must be at least 1");
    }
    if (vol_low.empty() || vol_low.size() != vol_high.size()) {
        throw ContractError("vol_low and vol_high need one entry per asset");
    }
    for (std::size_t i = 0; i < vol_low.size(); ++i) {
        if (!(vol_low[i] > 0.0) || !(vol_low[i] <= vol_high[i])) {
            throw ContractError("need 0 < vol_low <= vol_high for every asset");
        }
    }
    if (!(correlation > -1.0 && correlation < 1.0)) {
        throw ContractError("correlation must lie in (-1, 1)");
    }
    if (length < 2) {
        throw ContractError("square-wave length must be at least 2");
    }
}

SquareWaveData gen_square_wave(const SquareWaveSpec& spec) {
    spec.validate();
    const auto n = static_cast<Eigen::Index>(spec.vol_low.size());
    const auto T = static_cast<Eigen::Index>(spec.length);
    Eigen::MatrixXd corr = Eigen::MatrixXd::Constant(n, n, spec.correlation);
    corr.diagonal().setOnes();
    const Eigen::MatrixXd l = sampling_factor(corr);

    Rng rng(spec.seed);
    Eigen::MatrixXd returns(T, n);
    Eigen::MatrixXd vol(T, n);
    std::vector<int> regime(static_cast<std::size_t>(T));

    Eigen::VectorXd z(n);
    for (Eigen::Index t = 0; t < T; ++t) {
        const int high = (static_cast<int>(t) / spec.period) % 2;
        regime[static_cast<std::size_t>(t)] = high;
        for (Eigen::Index i = 0; i < n; ++i) {
            vol(t, i) = high ? spec.vol_high[static_cast<std::size_t>(i)] : spec.vol_low[static_cast<std::size_t>(i)];
            z(i) = rng.normal();
        }
        returns.row(t) = (vol.row(t).transpose().array() * (l * z).array()).transpose();
    }
    std::vector<std::string> names;
    for (Eigen::Index i = 0; i < n; ++i) {
        names.push_back("asset" + std::to_string(i + 1));
    }
    return {ReturnPanel(index_dates(static_cast<std::size_t>(T)), std::move(returns), std::move(names)),
            std::move(vol), std::move(regime)};
}

std::size_t RegimeBlockSpec::block_of(std::size_t row) const {
    for (std::size_t b = 0; b + 1 < bounds.size(); ++b) {
        if (row < bounds[b + 1]) {
            return b;
        }
    }
    throw ContractError("row beyond the last block");
}

void RegimeBlockSpec::validate() const {
    if (dims < 1) {
        throw ContractError("regime blocks need at least one dimension");
    }
    if (bounds.size() < 2 || bounds.front() != 0) {
        throw ContractError("block bounds must start at 0 and contain at least one block");
    }
    for (std::size_t b = 0; b + 1 < bounds.size(); ++b) {
        if (bounds[b + 1] <= bounds[b]) {
            throw ContractError("block bounds must be strictly increasing");
        }
    }
    if (covariances.size() + 1 != bounds.size()) {
        throw ContractError("need one covariance per block");
    }
    if (!labels.empty() && labels.size() != covariances.size()) {
        throw ContractError("need one label per block");
    }
    for (const auto& c : covariances) {
        if (c.rows() != dims || c.cols() != dims) {
            throw ContractError("block covariance has the wrong dimension");
        }
        if ((c - c.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, c.cwiseAbs().maxCoeff())) {
            throw ContractError("block covariance is not symmetric");
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c, Eigen::EigenvaluesOnly);
        if (eig.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, c.cwiseAbs().maxCoeff())) {
            throw ContractError("block covariance is not positive semidefinite");
        }
    }
}

RegimeBlockData gen_regime_blocks(const RegimeBlockSpec& spec) {
    spec.validate();
    const auto n = static_cast<Eigen::Index>(spec.dims);
    const auto T = static_cast<Eigen::Index>(spec.length());
    Rng rng(spec.seed);
    Eigen::MatrixXd returns(T, n);
    Eigen::VectorXd z(n);
    for (std::size_t b = 0; b < spec.blocks(); ++b) {
        const Eigen::MatrixXd l = sampling_factor(spec.covariances[b]);
        for (auto t = static_cast<Eigen::Index>(spec.bounds[b]); t < static_cast<Eigen::Index>(spec.bounds[b + 1]);
             ++t) {
            for (Eigen::Index i = 0; i < n; ++i) {
                z(i) = rng.normal();
            }
            returns.row(t) = (l * z).transpose();
        }
    }
    std::vector<std::string> names;
    for (Eigen::Index i = 0; i < n; ++i) {
        names.push_back("x" + std::to_string(i + 1));
    }
    return {ReturnPanel(index_dates(static_cast<std::size_t>(T)), std::move(returns), std::move(names)),
            spec.covariances};
}

Eigen::MatrixXd random_covariance(Rng& rng, int dims, double c, double ridge) {
    if (dims < 1 || !(c > 0.0) || !(ridge >= 0.0)) {
        throw ContractError("random covariance needs dims >= 1, c > 0, ridge >= 0");
    }
    Eigen::MatrixXd a(dims, dims);
    for (int i = 0; i < dims; ++i) {
        for (int j = 0; j < dims; ++j) {
            a(i, j) = rng.uniform(-c, c);
        }
    }
    Eigen::MatrixXd s = a.transpose() * a;
    s.diagonal().array() += ridge;
    return 0.5 * (s + s.transpose());
}

RegimeBlockSpec regime_block_preset(const RegimePresetOptions& options) {
    Rng rng(options.seed ^ 0x9e3779b97f4a7c15ULL);
    const Eigen::MatrixXd normal = random_covariance(rng, options.dims, options.c_normal, options.ridge);
    const Eigen::MatrixXd crisis = random_covariance(rng, options.dims, options.c_volatile, options.ridge);
    RegimeBlockSpec spec;
    spec.dims = options.dims;
    spec.bounds = {0, 500, 3000, 5000};
    spec.covariances = {normal, crisis, normal};
    spec.labels = {"normal", "crisis", "normal"};
    spec.seed = options.seed;
    return spec;
}

double covariance_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ContractError("covariance_distance needs matrices of equal shape");
    }
    return (a - b).norm();
}

std::vector<std::string> index_dates(std::size_t n) {
    std::vector<std::string> d(n);
    for (std::size_t t = 0; t < n; ++t) {
        d[t] = std::to_string(t);
    }
    return d;
}

}  // namespace ogarch
