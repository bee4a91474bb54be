#include "regime_ogarch/pca.hpp"

#include "regime_ogarch/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ogarch {

namespace {

double off_diagonal_norm(const Eigen::MatrixXd& a) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            if (i != j) {
                sum += a(i, j) * a(i, j);
            }
        }
    }
    return std::sqrt(sum);
}

// One Jacobi rotation zeroing a(p, q); accumulates the rotation into v.
void rotate(Eigen::MatrixXd& a, Eigen::MatrixXd& v, Eigen::Index p, Eigen::Index q) {
    const double apq = a(p, q);
    if (apq == 0.0) {
        return;
    }
    const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
    const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
    const double c = 1.0 / std::sqrt(t * t + 1.0);
    const double s = t * c;

    const Eigen::Index n = a.rows();
    for (Eigen::Index r = 0; r < n; ++r) {
        if (r == p || r == q) {
            continue;
        }
        const double arp = a(r, p);
        const double arq = a(r, q);
        a(r, p) = a(p, r) = c * arp - s * arq;
        a(r, q) = a(q, r) = c * arq + s * arp;
    }
    a(p, p) -= t * apq;
    a(q, q) += t * apq;
    a(p, q) = a(q, p) = 0.0;

    for (Eigen::Index r = 0; r < n; ++r) {
        const double vrp = v(r, p);
        const double vrq = v(r, q);
        v(r, p) = c * vrp - s * vrq;
        v(r, q) = c * vrq + s * vrp;
    }
}

}  // namespace

PcaBasis spectral_decompose(const Eigen::MatrixXd& corr, const JacobiOptions& options) {
    if (corr.rows() != corr.cols() || corr.rows() == 0) {
        throw ContractError("spectral_decompose needs a non-empty square matrix");
    }
    if (!corr.allFinite()) {
        throw ContractError("spectral_decompose input is not finite");
    }
    if ((corr - corr.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
        throw ContractError("spectral_decompose input is not symmetric");
    }
    if ((corr.diagonal().array() - 1.0).abs().maxCoeff() > 1e-8) {
        throw ContractError("spectral_decompose expects a correlation matrix (unit diagonal)");
    }

    const Eigen::Index n = corr.rows();
    Eigen::MatrixXd a = 0.5 * (corr + corr.transpose());
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
    for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
        if (off_diagonal_norm(a) < options.off_diagonal_tol) {
            break;
        }
        for (Eigen::Index p = 0; p + 1 < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                rotate(a, v, p, q);
            }
        }
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&a](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });

    PcaBasis basis;
    basis.eigenvalues.resize(n);
    basis.eigenvectors.resize(n, n);
    basis.k = static_cast<int>(n);
    for (Eigen::Index c = 0; c < n; ++c) {
        const Eigen::Index src = order[static_cast<std::size_t>(c)];
        basis.eigenvalues(c) = a(src, src);
        Eigen::VectorXd col = v.col(src);
        Eigen::Index arg = 0;
        for (Eigen::Index r = 1; r < n; ++r) {
            if (std::abs(col(r)) > std::abs(col(arg))) {
                arg = r;
            }
        }
        if (col(arg) < 0.0) {
            col = -col;
        }
        basis.eigenvectors.col(c) = col;
    }
    return basis;
}

Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& x) {
    if (x.rows() < 2) {
        throw ContractError("correlation needs at least two rows");
    }
    const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
    Eigen::MatrixXd cov = centered.transpose() * centered;
    const Eigen::VectorXd sd = cov.diagonal().array().sqrt();
    for (Eigen::Index i = 0; i < sd.size(); ++i) {
        if (!(sd(i) > 0.0)) {
            throw ContractError("correlation undefined for a constant column");
        }
    }
    Eigen::MatrixXd corr(cov.rows(), cov.cols());
    for (Eigen::Index j = 0; j < cov.cols(); ++j) {
        for (Eigen::Index i = 0; i <= j; ++i) {
            const double r = i == j ? 1.0 : cov(i, j) / (sd(i) * sd(j));
            corr(i, j) = corr(j, i) = r;
        }
    }
    return corr;
}

Eigen::MatrixXd to_components(const Eigen::MatrixXd& x, const PcaBasis& basis) {
    if (x.cols() != basis.eigenvectors.rows()) {
        throw ContractError("component projection: column count does not match the basis dimension");
    }
    return x * basis.eigenvectors;
}

Eigen::MatrixXd fill_excluded(const PcaBasis& basis, const Eigen::MatrixXd& modeled_variances,
                              ExcludedComponents policy) {
    const Eigen::Index dims = basis.eigenvalues.size();
    const Eigen::Index k = basis.k;
    if (modeled_variances.cols() != k) {
        throw ContractError("modeled component variances must have k columns");
    }
    Eigen::MatrixXd full(modeled_variances.rows(), dims);
    full.leftCols(k) = modeled_variances;
    for (Eigen::Index j = k; j < dims; ++j) {
        const double fill = policy == ExcludedComponents::Unconditional ? std::max(basis.eigenvalues(j), 0.0) : 0.0;
        full.col(j).setConstant(fill);
    }
    return full;
}

CovarianceForecast reconstruct(const PcaBasis& basis, const Eigen::MatrixXd& component_variances) {
    const Eigen::Index dims = basis.eigenvalues.size();
    if (component_variances.cols() != dims) {
        throw ContractError("component variance matrix must have one column per component");
    }
    if (basis.stats.vols.size() != dims) {
        throw ContractError("basis carries no normalization scalings");
    }
    if (!component_variances.allFinite() || (component_variances.array() < 0.0).any()) {
        throw ContractError("component variances must be finite and nonnegative");
    }
    const auto& u = basis.eigenvectors;
    const Eigen::VectorXd& w = basis.stats.vols;

    CovarianceForecast out;
    out.matrices.reserve(static_cast<std::size_t>(component_variances.rows()));
    for (Eigen::Index s = 0; s < component_variances.rows(); ++s) {
        const Eigen::MatrixXd h = u * component_variances.row(s).asDiagonal() * u.transpose();
        Eigen::MatrixXd sigma = w.asDiagonal() * h * w.asDiagonal();
        sigma = (0.5 * (sigma + sigma.transpose())).eval();
        out.matrices.push_back(std::move(sigma));
    }
    return out;
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
    const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

}  // namespace ogarch
