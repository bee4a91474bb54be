#include "regime_ogarch/errors.hpp"
#include "regime_ogarch/estimation.hpp"
#include "regime_ogarch/simulation.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <doctest.h>

#include <cmath>
#include <cstring>

using namespace ogarch;

namespace {

double chi2_tail_by_quadrature(double x, int df) {
    const double k = df / 2.0;
    const double log_norm = k * std::log(2.0) + std::lgamma(k);
    auto pdf = [&](double u) {
        if (u <= 0.0) {
            return 0.0;
        }
        return std::exp((k - 1.0) * std::log(u) - 0.5 * u - log_norm);
    };
    boost::math::quadrature::exp_sinh<double> integrator;
    return integrator.integrate(pdf, x, std::numeric_limits<double>::infinity());
}

}  // namespace

TEST_CASE("quadratic bowl") {
    auto f = [](const Eigen::VectorXd& x) { return (x.array() - 1.0).square().sum(); };
    const auto r = nelder_mead(f, Eigen::VectorXd::Zero(3));
    CHECK(r.converged);
    CHECK((r.argmin.array() - 1.0).abs().maxCoeff() < 1e-5);

    const auto again = nelder_mead(f, r.argmin);
    CHECK(std::abs(again.min_value - r.min_value) < OptimizerConfig{}.tol_f);
}

TEST_CASE("rosenbrock") {
    auto f = [](const Eigen::VectorXd& x) {
        return 100.0 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1.0 - x(0), 2);
    };
    OptimizerConfig cfg;
    cfg.max_evals = 5000;
    const auto r = nelder_mead(f, Eigen::Vector2d(-1.2, 1.0), cfg);
    CHECK(r.min_value < 1e-6);
    CHECK(r.evaluations <= 5000);
}

TEST_CASE("optimizer is bitwise deterministic") {
    auto f = [](const Eigen::VectorXd& x) { return std::cosh(x(0) - 0.3) + x(1) * x(1) * (1.0 + x(0) * x(0)); };
    const auto a = nelder_mead(f, Eigen::Vector2d(2.0, -1.0));
    const auto b = nelder_mead(f, Eigen::Vector2d(2.0, -1.0));
    CHECK(std::memcmp(a.argmin.data(), b.argmin.data(), 2 * sizeof(double)) == 0);
    CHECK(a.evaluations == b.evaluations);
}

TEST_CASE("non-finite start is a contract error") {
    auto f = [](const Eigen::VectorXd& x) { return x(0) < 1.0 ? std::nan("") : x(0); };
    CHECK_THROWS_AS((void)nelder_mead(f, Eigen::VectorXd::Zero(1)), ContractError);
}

TEST_CASE("config validation") {
    OptimizerConfig cfg;
    cfg.max_evals = 50;
    CHECK_THROWS_AS(cfg.validate(), ContractError);
    cfg.max_evals = 100;
    cfg.tol_f = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ContractError);
}

TEST_CASE("gaussian mean standard error") {
    Rng rng(41);
    const int n = 400;
    const double sigma = 2.0;
    std::vector<double> x(n);
    for (auto& v : x) {
        v = 1.0 + sigma * rng.normal();
    }
    auto nll = [&](const Eigen::VectorXd& th) {
        double s = 0.0;
        for (double v : x) {
            s += 0.5 * (v - th(0)) * (v - th(0)) / (sigma * sigma);
        }
        return s;
    };
    double mean = 0.0;
    for (double v : x) {
        mean += v / n;
    }
    const auto se = numerical_std_errors(nll, Eigen::VectorXd::Constant(1, mean));
    REQUIRE(se[0].has_value());
    CHECK(std::abs(*se[0] / (sigma / std::sqrt(n)) - 1.0) < 0.02);
}

TEST_CASE("quadratic objective standard errors") {
    Eigen::Matrix3d a;
    a << 4, 1, 0.5, 1, 3, 0.2, 0.5, 0.2, 2;
    auto f = [&](const Eigen::VectorXd& th) { return 0.5 * th.dot(a * th); };
    const auto se = numerical_std_errors(f, Eigen::Vector3d(0.3, -0.2, 0.1));
    const Eigen::Matrix3d inv = a.inverse();
    for (int i = 0; i < 3; ++i) {
        REQUIRE(se[static_cast<std::size_t>(i)].has_value());
        CHECK(std::abs(*se[static_cast<std::size_t>(i)] - std::sqrt(inv(i, i))) < 1e-6);
    }
}

TEST_CASE("boundary parameter gets a marker") {
    // alpha must stay >= 0; the stencil at alpha = 0 leaves the domain
    auto f = [](const Eigen::VectorXd& th) {
        if (th(1) < 0.0) {
            return std::numeric_limits<double>::infinity();
        }
        return th(0) * th(0) + th(1);
    };
    const auto se = numerical_std_errors(f, Eigen::Vector2d(0.0, 0.0));
    CHECK(se[0].has_value());
    CHECK_FALSE(se[1].has_value());
}

TEST_CASE("likelihood ratio test") {
    const auto null = lr_test(-100.0, -100.0, 3);
    CHECK(null.statistic == 0.0);
    CHECK(null.p_value == 1.0);
    CHECK_FALSE(null.warning.has_value());

    CHECK(std::abs(chi2_upper_tail(3.841, 1) - 0.05) < 1e-3);

    const auto r = lr_test(-1529.0, -1512.7, 5);
    CHECK(r.statistic == doctest::Approx(32.6));
    CHECK(r.p_value < 1e-4);

    const auto bad = lr_test(-10.0, -12.0, 2);
    CHECK(bad.statistic == 0.0);
    CHECK(bad.warning.has_value());
    CHECK_THROWS_AS((void)lr_test(0.0, 1.0, 0), ContractError);
}

TEST_CASE("reported LR p-value for a statistic of 32.6") {
    // The reference p-value 1.6318e-05 lies between the df = 5 and df = 7 tails.
    const double p5 = chi2_upper_tail(32.6, 5);
    const double p6 = chi2_upper_tail(32.6, 6);
    const double p7 = chi2_upper_tail(32.6, 7);
    CHECK(p5 < p6);
    CHECK(p6 < p7);
    CHECK(p5 < 1.6318e-05);
    CHECK(1.6318e-05 < p7);
}

TEST_CASE("chi-squared tail matches numeric integration") {
    for (int df = 1; df <= 10; ++df) {
        double prev = 1.0 + 1e-12;
        for (double x : {0.25, 0.5, 1.0, 2.0, 3.841, 5.0, 8.0, 12.0, 20.0, 35.0, 50.0, 75.0, 100.0}) {
            const double tail = chi2_upper_tail(x, df);
            CHECK(std::abs(tail - chi2_tail_by_quadrature(x, df)) < 1e-8);
            CHECK(tail <= prev);
            prev = tail;
        }
        CHECK(chi2_upper_tail(0.0, df) == 1.0);
    }
}
