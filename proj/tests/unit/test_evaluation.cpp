#include "regime_ogarch/errors.hpp"
#include "regime_ogarch/evaluation.hpp"
#include "regime_ogarch/simulation.hpp"

#include <doctest.h>

#include <cmath>

using namespace ogarch;

namespace {

std::vector<double> positive_series(Rng& rng, std::size_t n, double scale) {
    std::vector<double> v(n);
    for (auto& x : v) {
        x = scale * (0.05 + rng.uniform());
    }
    return v;
}

}  // namespace

TEST_CASE("perfect forecast has zero loss") {
    const std::vector<double> x{0.5, 0.25, 0.125};
    const std::vector<double> h{0.25, 0.0625, 0.015625};
    const auto r = loss_functions(x, h);
    for (Loss l : kAllLosses) {
        CHECK(r.get(l) == 0.0);
    }
}

TEST_CASE("single-point losses by hand") {
    const std::vector<double> x{0.01};
    const std::vector<double> h{0.0004};
    const auto r = loss_functions(x, h);
    CHECK(r.mse1 == doctest::Approx(1e-4).epsilon(1e-12));
    CHECK(r.mad1 == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(r.mse2 == doctest::Approx(std::pow(1e-4 - 4e-4, 2)).epsilon(1e-12));
    CHECK(r.mad2 == doctest::Approx(3e-4).epsilon(1e-12));
    CHECK(r.r2log == doctest::Approx(std::pow(std::log(0.25), 2)).epsilon(1e-12));
}

TEST_CASE("losses match elementwise recomputation") {
    Rng rng(91);
    const auto x = positive_series(rng, 300, 0.02);
    auto h = positive_series(rng, 300, 0.0004);
    std::vector<double> xz = x;
    xz[5] = 0.0;
    const auto r = loss_functions(xz, h);
    double m1 = 0;
    double m2 = 0;
    double a1 = 0;
    double a2 = 0;
    double rl = 0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        const double s = std::sqrt(h[t]);
        m1 += (xz[t] - s) * (xz[t] - s);
        m2 += (xz[t] * xz[t] - h[t]) * (xz[t] * xz[t] - h[t]);
        a1 += std::abs(xz[t] - s);
        a2 += std::abs(xz[t] * xz[t] - h[t]);
        const double lg = std::log(std::max(xz[t] * xz[t], 1e-12) / h[t]);
        rl += lg * lg;
    }
    const double n = 300.0;
    CHECK(std::abs(r.mse1 - m1 / n) < 1e-14);
    CHECK(std::abs(r.mse2 - m2 / n) < 1e-14);
    CHECK(std::abs(r.mad1 - a1 / n) < 1e-14);
    CHECK(std::abs(r.mad2 - a2 / n) < 1e-14);
    CHECK(std::abs(r.r2log - rl / n) < 1e-12 * rl / n);
    for (Loss l : kAllLosses) {
        CHECK(r.get(l) > 0.0);
        for (double v : loss_series(xz, h, l)) {
            CHECK(v >= 0.0);
        }
    }
    h[3] = 0.0;
    CHECK_THROWS_AS((void)loss_functions(x, h), ContractError);
}

TEST_CASE("identical losses are degenerate") {
    Rng rng(92);
    const auto a = positive_series(rng, 50, 1.0);
    CHECK_THROWS_AS((void)dm_test(a, a, 1), DegenerateSeriesError);
}

TEST_CASE("one-step DM statistic is a z-statistic") {
    Rng rng(93);
    const auto a = positive_series(rng, 200, 1.0);
    const auto b = positive_series(rng, 200, 1.0);
    double mean = 0;
    for (std::size_t t = 0; t < a.size(); ++t) {
        mean += (a[t] - b[t]) / 200.0;
    }
    double var = 0;
    for (std::size_t t = 0; t < a.size(); ++t) {
        var += std::pow(a[t] - b[t] - mean, 2) / 200.0;
    }
    const auto r = dm_test(a, b, 1);
    CHECK(std::abs(r.statistic - mean / std::sqrt(var / 200.0)) < 1e-12);
    CHECK(r.p_value == doctest::Approx(2.0 * (1.0 - normal_cdf(std::abs(r.statistic)))).epsilon(1e-12));

    std::vector<double> d(a.size());
    for (std::size_t t = 0; t < d.size(); ++t) {
        d[t] = a[t] - b[t];
    }
    CHECK(std::abs(autocovariance(d, 0) - var) < 1e-14);
}

TEST_CASE("DM test is antisymmetric") {
    Rng rng(94);
    const auto a = positive_series(rng, 120, 1.0);
    const auto b = positive_series(rng, 120, 1.2);
    for (int tau : {1, 5, 10}) {
        const auto ab = dm_test(a, b, tau);
        const auto ba = dm_test(b, a, tau);
        CHECK(ab.statistic == -ba.statistic);
        CHECK(ab.p_value == ba.p_value);
        CHECK(ab.p_value >= 0.0);
        CHECK(ab.p_value <= 1.0);
    }
}

TEST_CASE("multi-step bracket and fallback") {
    // strongly alternating differential: negative lag-1 autocovariance
    std::vector<double> a(40);
    std::vector<double> b(40, 0.0);
    for (std::size_t t = 0; t < a.size(); ++t) {
        a[t] = (t % 2 == 0 ? 1.0 : -1.0) + 0.01 * static_cast<double>(t % 3);
    }
    const auto r = dm_test(a, b, 2);
    CHECK(r.variance_fallback);
    const auto one = dm_test(a, b, 1);
    CHECK(r.statistic == one.statistic);

    Rng rng(95);
    const auto x = positive_series(rng, 100, 1.0);
    const auto y = positive_series(rng, 100, 1.0);
    std::vector<double> d(100);
    double mean = 0;
    for (std::size_t t = 0; t < 100; ++t) {
        d[t] = x[t] - y[t];
        mean += d[t] / 100.0;
    }
    const double bracket = autocovariance(d, 0) + 2.0 * (autocovariance(d, 1) + autocovariance(d, 2));
    const auto r3 = dm_test(x, y, 3);
    if (!r3.variance_fallback) {
        CHECK(r3.statistic == doctest::Approx(mean / std::sqrt(bracket / 100.0)).epsilon(1e-12));
    }
}

TEST_CASE("realized proxy") {
    const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(10, 3);
    for (double v : realized_proxy(zero, Eigen::Vector3d::Constant(1.0 / 3.0), 1)) {
        CHECK(v == 0.0);
    }

    Rng rng(96);
    Eigen::MatrixXd single(20, 1);
    for (int t = 0; t < 20; ++t) {
        single(t, 0) = rng.normal();
    }
    const auto p1 = realized_proxy(single, Eigen::VectorXd::Ones(1), 1);
    for (int t = 0; t < 20; ++t) {
        CHECK(p1[static_cast<std::size_t>(t)] == std::abs(single(t, 0)));
    }

    Eigen::MatrixXd r(30, 3);
    for (int t = 0; t < 30; ++t) {
        for (int i = 0; i < 3; ++i) {
            r(t, i) = rng.normal();
        }
    }
    const Eigen::Vector3d w = Eigen::Vector3d::Constant(1.0 / 3.0);
    const auto daily = realized_proxy(r, w, 1);
    const auto weekly = realized_proxy(r, w, 5);
    REQUIRE(weekly.size() == 6);
    for (int t = 0; t < 30; ++t) {
        CHECK(std::abs(daily[static_cast<std::size_t>(t)] - std::abs(r.row(t).dot(w))) < 1e-15);
    }
    for (int k = 0; k < 6; ++k) {
        const double want = std::abs((r.middleRows(5 * k, 5).colwise().sum()).dot(w.transpose()));
        CHECK(std::abs(weekly[static_cast<std::size_t>(k)] - want) < 1e-14);
    }
    CHECK_THROWS_AS((void)realized_proxy(r, Eigen::Vector3d(0.5, 0.5, 0.5), 1), ContractError);
}
