#include "regime_ogarch/ewma.hpp"

#include "regime_ogarch/errors.hpp"

namespace ogarch {

namespace {

void check_lambda(double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0)) {
        throw ContractError("EWMA decay must lie in (0, 1)");
    }
}

}  // namespace

EwmaState ewma_init(const Eigen::MatrixXd& window, double lambda) {
    check_lambda(lambda);
    EwmaState state;
    state.lambda = lambda;
    state.mu = window.colwise().mean().transpose();
    state.sigma = sample_covariance(window);
    return state;
}

EwmaState ewma_update(const EwmaState& state, const Eigen::VectorXd& r) {
    check_lambda(state.lambda);
    const Eigen::Index n = state.sigma.rows();
    if (state.sigma.cols() != n || state.mu.size() != n || r.size() != n) {
        throw ContractError("EWMA update: dimension mismatch");
    }
    const Eigen::VectorXd d = r - state.mu;
    EwmaState next{Eigen::MatrixXd(n, n), state.lambda, state.mu};
    const double keep = 1.0 - state.lambda;
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i <= j; ++i) {
            const double v = keep * state.sigma(i, j) + state.lambda * (d(i) * d(j));
            next.sigma(i, j) = next.sigma(j, i) = v;
        }
    }
    return next;
}

EwmaState ewma_run(const Eigen::MatrixXd& window, double lambda) {
    EwmaState state = ewma_init(window, lambda);
    for (Eigen::Index t = 0; t < window.rows(); ++t) {
        state = ewma_update(state, window.row(t).transpose());
    }
    return state;
}

CovarianceForecast ewma_forecast(const EwmaState& state, int tau) {
    if (tau < 1) {
        throw ContractError("forecast horizon must be at least 1");
    }
    CovarianceForecast out;
    out.matrices.assign(static_cast<std::size_t>(tau), state.sigma);
    return out;
}

}  // namespace ogarch
