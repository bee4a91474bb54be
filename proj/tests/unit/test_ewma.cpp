#include "regime_ogarch/ewma.hpp"
#include "regime_ogarch/simulation.hpp"

#include <doctest.h>

#include <cmath>

using namespace ogarch;

TEST_CASE("single update") {
    EwmaState s;
    s.lambda = 0.5;
    s.sigma = Eigen::MatrixXd::Identity(2, 2);
    s.mu = Eigen::VectorXd::Zero(2);
    const auto next = ewma_update(s, Eigen::Vector2d(1.0, 1.0));
    Eigen::Matrix2d want;
    want << 1.0, 0.5, 0.5, 1.0;
    CHECK((next.sigma - want).cwiseAbs().maxCoeff() < 1e-15);

    const auto still = ewma_update(s, Eigen::Vector2d::Zero());
    CHECK((still.sigma - 0.5 * Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("repeated updates equal the closed-form weighted sum") {
    Rng rng(31);
    const double lambda = 0.06;
    Eigen::MatrixXd window(40, 3);
    for (Eigen::Index t = 0; t < window.rows(); ++t) {
        for (int i = 0; i < 3; ++i) {
            window(t, i) = rng.normal();
        }
    }
    EwmaState s = ewma_init(window, lambda);
    const Eigen::MatrixXd sigma0 = s.sigma;
    const Eigen::VectorXd mu = s.mu;
    std::vector<Eigen::VectorXd> seen;
    for (int n = 0; n < 50; ++n) {
        Eigen::VectorXd r(3);
        for (int i = 0; i < 3; ++i) {
            r(i) = rng.normal();
        }
        s = ewma_update(s, r);
        seen.push_back(r);
    }
    // Sigma_n = (1-l)^n Sigma_0 + l * sum_j (1-l)^(n-1-j) e_j e_j'
    const auto n = static_cast<int>(seen.size());
    Eigen::MatrixXd want = std::pow(1.0 - lambda, n) * sigma0;
    for (int j = 0; j < n; ++j) {
        const Eigen::VectorXd e = seen[static_cast<std::size_t>(j)] - mu;
        want += lambda * std::pow(1.0 - lambda, n - 1 - j) * e * e.transpose();
    }
    CHECK((s.sigma - want).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("forecast is flat and includes the last observation") {
    Rng rng(32);
    Eigen::MatrixXd window(60, 2);
    for (Eigen::Index t = 0; t < window.rows(); ++t) {
        window(t, 0) = rng.normal();
        window(t, 1) = 0.5 * window(t, 0) + rng.normal();
    }
    const auto run = ewma_run(window);
    const auto f = ewma_forecast(run, 5);
    REQUIRE(f.horizon() == 5);
    for (const auto& m : f.matrices) {
        CHECK((m - f.matrices[0]).norm() == 0.0);
    }

    EwmaState before = ewma_init(window);
    for (Eigen::Index t = 0; t + 1 < window.rows(); ++t) {
        before = ewma_update(before, window.row(t).transpose());
    }
    const auto last = ewma_update(before, window.row(window.rows() - 1).transpose());
    CHECK((f.matrices[0] - last.sigma).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("updates preserve symmetry and positive definiteness") {
    Rng rng(33);
    Eigen::MatrixXd window(30, 4);
    for (Eigen::Index t = 0; t < window.rows(); ++t) {
        for (int i = 0; i < 4; ++i) {
            window(t, i) = rng.normal();
        }
    }
    EwmaState s = ewma_init(window, 0.2);
    for (int n = 0; n < 200; ++n) {
        Eigen::VectorXd r(4);
        for (int i = 0; i < 4; ++i) {
            r(i) = 3.0 * rng.normal();
        }
        s = ewma_update(s, r);
        CHECK((s.sigma - s.sigma.transpose()).norm() == 0.0);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.sigma);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
}
