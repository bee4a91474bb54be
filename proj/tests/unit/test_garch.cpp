#include "regime_ogarch/garch.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"

using namespace ogarch;

TEST_CASE("one recursion step") {
    const std::vector<double> y{1.0, 0.0};
    const auto r = garch_filter(y, GarchParams{0.1, 0.1, 0.8, 0.0}, 1.0);
    CHECK(r.h[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("zero alpha and beta gives constant variance") {
    Rng rng(51);
    const auto y = oracle::normal_series(50, rng);
    const auto r = garch_filter(y, GarchParams{0.7, 0.0, 0.0, 0.0});
    for (std::size_t t = 1; t < y.size(); ++t) {
        CHECK(r.h[t] == 0.7);
    }
}

TEST_CASE("loglike equals direct density summation") {
    Rng rng(52);
    for (int rep = 0; rep < 20; ++rep) {
        const GarchParams p{rng.uniform(0.05, 1.0), rng.uniform(0.0, 0.3), rng.uniform(0.0, 0.65),
                            rng.uniform(-0.5, 0.5)};
        const auto y = oracle::normal_series(120, rng, 1.3);
        const auto r = garch_filter(y, p);
        double h = oracle::variance_of(y);
        double ll = 0.0;
        for (std::size_t t = 1; t < y.size(); ++t) {
            const double e = y[t - 1] - p.mu;
            h = p.omega + p.alpha * e * e + p.beta * h;
            ll += std::log(oracle::normal_pdf(y[t], p.mu, h));
            CHECK(r.h[t] > 0.0);
        }
        CHECK(std::abs(r.loglike - ll) < 1e-10);
    }
}

TEST_CASE("loglike is invariant to demeaning") {
    Rng rng(53);
    const auto y = oracle::normal_series(200, rng);
    const double m = sample_mean(y);
    std::vector<double> centered = y;
    for (auto& v : centered) {
        v -= m;
    }
    const GarchParams with_mean{0.2, 0.1, 0.7, m};
    const GarchParams zero_mean{0.2, 0.1, 0.7, 0.0};
    const double a = garch_filter(y, with_mean).loglike;
    const double b = garch_filter(centered, zero_mean).loglike;
    CHECK(std::abs(a - b) < 1e-12 * std::abs(a));
}

TEST_CASE("non-finite input and bad parameters") {
    std::vector<double> y{0.1, std::nan(""), 0.3};
    CHECK_THROWS_AS((void)garch_filter(y, GarchParams{0.1, 0.1, 0.8, 0.0}), ContractError);
    const std::vector<double> ok{0.1, 0.2, 0.3};
    CHECK_THROWS((void)garch_filter(ok, GarchParams{0.1, 0.5, 0.6, 0.0}));
    CHECK_THROWS((void)garch_filter(ok, GarchParams{0.0, 0.1, 0.1, 0.0}));
    CHECK_THROWS_AS((void)GarchParams({0.1, 0.5, 0.5, 0.0}).unconditional_variance(), NonstationaryError);
}

TEST_CASE("forecast fixed point and decay") {
    const GarchParams p{0.1, 0.1, 0.8, 0.0};
    // h_{T+1} = 0.1 + 0.1 e^2 + 0.8 h_T = 2 with e^2 = 3, h_T = 2
    const auto f = garch_forecast(p, 3.0, 2.0, 30);
    CHECK(f[0] == doctest::Approx(2.0));
    CHECK(f[1] == doctest::Approx(1.9));
    for (std::size_t s = 1; s < f.size(); ++s) {
        CHECK(std::abs((f[s] - 1.0) - 0.9 * (f[s - 1] - 1.0)) < 1e-14);
        CHECK(f[s] < f[s - 1]);
        CHECK(f[s] > 1.0);
    }

    const auto flat = garch_forecast(p, 1.0, 1.0, 10);
    for (double v : flat) {
        CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
    }
    CHECK_THROWS_AS((void)garch_forecast(GarchParams{0.1, 0.3, 0.7, 0.0}, 1.0, 1.0, 3), NonstationaryError);
}

TEST_CASE("printed horizon convention lags the anchored one by one decay factor") {
    const GarchParams p{0.1, 0.1, 0.8, 0.0};
    const auto anchored = garch_forecast(p, 3.0, 2.0, 6);
    const auto literal = garch_forecast(p, 3.0, 2.0, 6, HorizonConvention::PaperLiteral);
    CHECK(literal[0] == anchored[0]);
    for (std::size_t s = 1; s < 6; ++s) {
        const double want = 1.0 + std::pow(0.9, static_cast<double>(s + 1)) * (2.0 - 1.0);
        CHECK(literal[s] == doctest::Approx(want).epsilon(1e-14));
    }
}

TEST_CASE("fit recovers persistence") {
    Rng rng(54);
    const auto y = oracle::simulate_garch(GarchParams{0.05, 0.10, 0.85, 0.0}, 5000, rng);
    const auto fit = garch_fit(y);
    CHECK(fit.converged);
    CHECK(std::abs(fit.params.persistence() - 0.95) < 0.05);
    for (double h : fit.h_path) {
        CHECK(h > 0.0);
    }
    // the optimum is at least as good as the starting point
    const GarchParams start{0.05 * sample_variance(y), 0.05, 0.90, sample_mean(y)};
    CHECK(fit.loglike >= garch_filter(y, start).loglike);
    for (const auto& se : fit.std_errors) {
        if (se) {
            CHECK(*se > 0.0);
        }
    }
}

TEST_CASE("fit on white noise") {
    Rng rng(55);
    const auto y = oracle::normal_series(5000, rng);
    const auto fit = garch_fit(y);
    CHECK(fit.params.alpha <= 0.05);
    CHECK(std::abs(fit.params.unconditional_variance() - 1.0) < 0.1);
}

TEST_CASE("fit is scale equivariant") {
    Rng rng(56);
    const auto y = oracle::simulate_garch(GarchParams{0.1, 0.08, 0.85, 0.0}, 1500, rng);
    std::vector<double> scaled = y;
    for (auto& v : scaled) {
        v *= 10.0;
    }
    const auto a = garch_fit(y);
    const auto b = garch_fit(scaled);
    CHECK(b.params.alpha == doctest::Approx(a.params.alpha).epsilon(1e-8));
    CHECK(b.params.beta == doctest::Approx(a.params.beta).epsilon(1e-8));
    CHECK(b.params.omega == doctest::Approx(100.0 * a.params.omega).epsilon(1e-8));
    CHECK(b.loglike == doctest::Approx(a.loglike - (y.size() - 1) * std::log(10.0)).epsilon(1e-10));
}

TEST_CASE("refilter reproduces the fit on the same data") {
    Rng rng(57);
    const auto y = oracle::simulate_garch(GarchParams{0.1, 0.1, 0.8, 0.0}, 800, rng);
    const auto fit = garch_fit(y);
    const auto again = garch_refilter(y, fit.params);
    CHECK(again.loglike == doctest::Approx(fit.loglike).epsilon(1e-12));
    CHECK(again.last_h == doctest::Approx(fit.last_h).epsilon(1e-12));
}
