#pragma once

#include "regime_ogarch/data_io.hpp"

#include <Eigen/Dense>

#include <vector>

namespace ogarch {

/**
 * Orthogonal transform of normalized returns.
 *
 * Columns of `eigenvectors` are sorted by nonincreasing eigenvalue and each
 * column is signed so that its largest-magnitude entry is positive. The first
 * `k` columns are the modeled components.
 */
struct PcaBasis {
    Eigen::MatrixXd eigenvectors;
    Eigen::VectorXd eigenvalues;
    NormalizationStats stats;
    int k = 0;

    [[nodiscard]] int dims() const noexcept { return static_cast<int>(eigenvalues.size()); }
};

/// tau daily covariance forecasts Sigma_{T+1..T+tau} in asset return units squared.
struct CovarianceForecast {
    std::vector<Eigen::MatrixXd> matrices;

    [[nodiscard]] int horizon() const noexcept { return static_cast<int>(matrices.size()); }
};

/// How components beyond k enter the reconstructed covariance.
enum class ExcludedComponents {
    Unconditional,   ///< keep their in-sample eigenvalue
    TruncateToZero,  ///< drop them (rank-k covariance)
};

struct JacobiOptions {
    double off_diagonal_tol = 1e-12;
    int max_sweeps = 100;
};

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// The returned basis has k = dimension and empty normalization stats.
[[nodiscard]] PcaBasis spectral_decompose(const Eigen::MatrixXd& corr, const JacobiOptions& options = {});

/// Pearson correlation of the columns of x.
[[nodiscard]] Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& x);

/// Y = X U.
[[nodiscard]] Eigen::MatrixXd to_components(const Eigen::MatrixXd& x, const PcaBasis& basis);

/// Widen a tau x k matrix of modeled component variances to tau x I.
[[nodiscard]] Eigen::MatrixXd fill_excluded(const PcaBasis& basis, const Eigen::MatrixXd& modeled_variances,
                                            ExcludedComponents policy);

/// Sigma = W U D U^T W per row of `component_variances` (tau x I), W = diag(vols).
[[nodiscard]] CovarianceForecast reconstruct(const PcaBasis& basis, const Eigen::MatrixXd& component_variances);

/// Symmetric-part eigen check: smallest eigenvalue of (m + m^T)/2.
[[nodiscard]] double min_eigenvalue(const Eigen::MatrixXd& m);

}  // namespace ogarch
