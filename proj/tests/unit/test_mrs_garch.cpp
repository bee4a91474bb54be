#include "regime_ogarch/estimation.hpp"
#include "regime_ogarch/garch.hpp"
#include "regime_ogarch/mrs_garch.hpp"

#include <doctest.h>

#include <cmath>

#include "oracles.hpp"

using namespace ogarch;

namespace {

MrsGarchParams hand_params() {
    MrsGarchParams p;
    p.omega = {0.2, 0.9};
    p.alpha = {0.1, 0.2};
    p.beta = {0.6, 0.5};
    p.mu = {0.3, -0.4};
    p.p = 0.1;
    p.q = 0.1;
    return p;
}

RegimeFilterState state_with(RegimePair filtered, RegimePair h) {
    RegimeFilterState s;
    s.prob_filtered = filtered;
    s.prob_exante = filtered;
    s.h_regime = h;
    return s;
}

}  // namespace

TEST_CASE("stationary distribution") {
    const auto half = stationary_distribution(0.5, 0.5);
    CHECK(half[0] == 0.5);
    CHECK(half[1] == 0.5);
    const auto pi = stationary_distribution(0.2, 0.1);
    CHECK(pi[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(pi[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

    MrsGarchParams m;
    Rng rng(61);
    for (int rep = 0; rep < 50; ++rep) {
        m.p = rng.uniform(0.001, 0.999);
        m.q = rng.uniform(0.001, 0.999);
        const auto s = stationary_distribution(m.p, m.q);
        for (int j = 0; j < 2; ++j) {
            const double next = s[0] * m.transition(0, j) + s[1] * m.transition(1, j);
            CHECK(std::abs(next - s[static_cast<std::size_t>(j)]) < 1e-14);
        }
    }
    CHECK_THROWS_AS((void)stationary_distribution(0.0, 0.0), ContractError);
}

TEST_CASE("aggregate lagged variance") {
    MrsGarchParams m = hand_params();
    m.p = 0.5;
    m.q = 0.5;
    m.mu = {0.0, 0.0};
    CHECK(aggregate_lagged_variance(state_with({0.5, 0.5}, {1.0, 3.0}), m, 0) == doctest::Approx(2.0));

    m.mu = {1.0, -1.0};
    CHECK(aggregate_lagged_variance(state_with({0.5, 0.5}, {1.0, 1.0}), m, 1) == doctest::Approx(2.0));

    m = hand_params();
    CHECK(aggregate_lagged_variance(state_with({1.0, 0.0}, {1.7, 5.0}), m, 0) == doctest::Approx(1.7));
    CHECK(aggregate_lagged_variance(state_with({1.0, 0.0}, {1.7, 5.0}), m, 1) == doctest::Approx(1.7));
}

TEST_CASE("degenerate parameters reduce to single-regime GARCH") {
    Rng rng(62);
    for (int rep = 0; rep < 10; ++rep) {
        const GarchParams g{rng.uniform(0.05, 1.0), rng.uniform(0.0, 0.3), rng.uniform(0.0, 0.65),
                            rng.uniform(-0.3, 0.3)};
        const auto m = MrsGarchParams::degenerate(g, rng.uniform(0.01, 0.5), rng.uniform(0.01, 0.5));
        const auto y = oracle::normal_series(300, rng, 1.2);
        const auto single = garch_filter(y, g);
        const auto mix = mrs_filter(y, m);
        CHECK(std::abs(single.loglike - mix.loglike) < 1e-8);
        for (std::size_t t = 1; t < y.size(); ++t) {
            const auto& h = mix.path[t].h_regime;
            CHECK(std::abs(h[0] - h[1]) < 1e-10 * h[0]);
            CHECK(std::abs(h[0] - single.h[t]) < 1e-10 * h[0]);
        }

        const auto fg = garch_forecast(g, std::pow(y.back() - g.mu, 2), single.h.back(), 12);
        const auto fm = mrs_forecast(m, mix.path.back(), y.back(), 12);
        for (std::size_t s = 0; s < fg.size(); ++s) {
            CHECK(std::abs(fg[s] - fm.variance[s]) < 1e-10 * fg[s]);
        }
    }
}

TEST_CASE("equal densities keep symmetric probabilities") {
    MrsGarchParams m = hand_params();
    m.omega = {0.5, 0.5};
    m.alpha = {0.1, 0.1};
    m.beta = {0.5, 0.5};
    m.mu = {0.0, 0.0};
    m.p = 0.3;
    m.q = 0.3;
    const auto step = filter_step(state_with({0.5, 0.5}, {1.0, 1.0}), 0.4, -0.2, m);
    CHECK(step.state.prob_filtered[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(step.state.prob_filtered[1] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("filter matches exhaustive regime-path enumeration") {
    Rng rng(63);
    const std::vector<double> fixed{0.3, -1.1, 0.4, 2.2, -0.7, 0.1, -1.9, 0.8, 0.05, -0.4};
    std::vector<std::pair<MrsGarchParams, std::vector<double>>> cases{{hand_params(), fixed}};
    for (int rep = 0; rep < 10; ++rep) {
        cases.emplace_back(oracle::random_mrs_params(rng), oracle::normal_series(12, rng, 1.5));
    }
    for (const auto& [params, y] : cases) {
        const auto want = oracle::enumerate_filter(y, params);
        const auto got = mrs_filter(y, params);
        CHECK(std::abs(got.loglike - want.loglike) < 1e-10);
        for (std::size_t t = 0; t < y.size(); ++t) {
            for (std::size_t i = 0; i < 2; ++i) {
                CHECK(std::abs(got.path[t].prob_filtered[i] - want.filtered[t][i]) < 1e-10);
                CHECK(std::abs(got.path[t].h_regime[i] - want.h[t][i]) < 1e-10);
            }
        }
    }
}

TEST_CASE("filter probabilities and variances stay valid") {
    Rng rng(64);
    for (int rep = 0; rep < 10; ++rep) {
        const auto m = oracle::random_mrs_params(rng);
        auto y = oracle::normal_series(400, rng, 2.0);
        y[100] = 40.0;  // a large outlier must not break the filter
        const auto r = mrs_filter(y, m);
        CHECK(std::isfinite(r.loglike));
        for (const auto& s : r.path) {
            CHECK(std::abs(s.prob_filtered[0] + s.prob_filtered[1] - 1.0) < 1e-12);
            CHECK(std::abs(s.prob_exante[0] + s.prob_exante[1] - 1.0) < 1e-12);
            CHECK(s.h_regime[0] > 0.0);
            CHECK(s.h_regime[1] > 0.0);
        }
    }
}

TEST_CASE("label swap leaves the likelihood unchanged") {
    Rng rng(65);
    for (int rep = 0; rep < 10; ++rep) {
        const auto m = oracle::random_mrs_params(rng);
        const auto y = oracle::normal_series(250, rng);
        CHECK(mrs_loglike(y, m) == doctest::Approx(mrs_loglike(y, m.swapped())).epsilon(1e-12));
        const auto back = m.swapped().swapped();
        CHECK(back.p == m.p);
        CHECK(back.omega == m.omega);
    }
}

TEST_CASE("likelihood is continuous in every parameter") {
    Rng rng(66);
    const auto m = oracle::random_mrs_params(rng);
    const auto y = oracle::normal_series(500, rng);
    const double base = mrs_loglike(y, m);
    for (int k = 0; k < 10; ++k) {
        MrsGarchParams bumped = m;
        double* fields[10] = {&bumped.omega[0], &bumped.omega[1], &bumped.alpha[0], &bumped.alpha[1],
                              &bumped.beta[0],  &bumped.beta[1],  &bumped.mu[0],    &bumped.mu[1],
                              &bumped.p,        &bumped.q};
        *fields[k] += 1e-8;
        CHECK(std::abs(mrs_loglike(y, bumped) - base) < 1e-4);
    }
}

TEST_CASE("forecast matches future-path enumeration") {
    Rng rng(67);
    std::vector<MrsGarchParams> cases{hand_params()};
    for (int rep = 0; rep < 10; ++rep) {
        cases.push_back(oracle::random_mrs_params(rng));
    }
    for (const auto& m : cases) {
        const auto y = oracle::normal_series(60, rng);
        const auto last = mrs_filter(y, m).path.back();
        for (int tau : {1, 3, 6}) {
            const auto want = oracle::enumerate_forecast(m, last.prob_filtered, last.h_regime, y.back(), tau);
            const auto got = mrs_forecast(m, last, y.back(), tau);
            REQUIRE(got.variance.size() == static_cast<std::size_t>(tau));
            for (int s = 0; s < tau; ++s) {
                const auto k = static_cast<std::size_t>(s);
                CHECK(std::abs(got.variance[k] - want[k]) < 1e-10 * want[k]);
                CHECK(got.variance[k] > 0.0);
                CHECK(got.regime_prob[k][0] + got.regime_prob[k][1] == doctest::Approx(1.0));
            }
        }
    }
}

TEST_CASE("absorbing regimes follow their own recursion") {
    MrsGarchParams m = hand_params();
    m.mu = {0.0, 0.0};
    m.p = 1e-12;
    m.q = 1e-12;
    for (int regime = 0; regime < 2; ++regime) {
        const auto r = static_cast<std::size_t>(regime);
        RegimeFilterState s = state_with({regime == 0 ? 1.0 : 0.0, regime == 0 ? 0.0 : 1.0}, {1.3, 2.4});
        const auto got = mrs_forecast(m, s, 0.8, 8);
        const GarchParams g{m.omega[r], m.alpha[r], m.beta[r], 0.0};
        const auto want = garch_forecast(g, 0.64, s.h_regime[r], 8);
        for (std::size_t k = 0; k < 8; ++k) {
            CHECK(std::abs(got.variance[k] - want[k]) < 1e-8);
        }
    }
}

TEST_CASE("fit recovers a persistent two-regime process") {
    MrsGarchParams truth;
    truth.omega = {0.45, 4.05};
    truth.alpha = {0.05, 0.05};
    truth.beta = {0.5, 0.5};
    truth.mu = {0.0, 0.0};
    truth.p = 0.02;
    truth.q = 0.02;
    Rng rng(68);
    const auto sim = oracle::simulate_regime_garch(truth, 5000, rng);
    const auto fit = mrs_fit(sim.y);
    const auto v1 = fit.params.unconditional_variance(0);
    const auto v2 = fit.params.unconditional_variance(1);
    REQUIRE(v1.has_value());
    REQUIRE(v2.has_value());
    CHECK(*v2 >= *v1);
    CHECK(std::abs(*v2 / *v1 / 9.0 - 1.0) < 0.3);
    CHECK(std::abs(fit.params.p - 0.02) < 0.02);
    CHECK(std::abs(fit.params.q - 0.02) < 0.02);

    CHECK(fit.loglike >= fit.garch.loglike - 1e-6);
    CHECK(fit.free_parameters == 10);
    CHECK(fit.filter_path.size() == sim.y.size());
    const auto refit = mrs_refilter(sim.y, fit.params);
    CHECK(refit.loglike == doctest::Approx(fit.loglike).epsilon(1e-10));
}

TEST_CASE("fit on single-regime data stays within LR insignificance") {
    // 10 vs 4 free parameters
    const double critical = 12.5916;
    int insignificant = 0;
    const int seeds = 10;
    for (int seed = 0; seed < seeds; ++seed) {
        Rng rng(700 + static_cast<std::uint64_t>(seed));
        const auto y = oracle::simulate_garch(GarchParams{0.1, 0.08, 0.85, 0.0}, 1000, rng);
        const auto fit = mrs_fit(y);
        CHECK(fit.loglike >= fit.garch.loglike - 1e-6);
        if (lr_test(fit.garch.loglike, fit.loglike, 6).statistic < critical) {
            ++insignificant;
        }
    }
    CHECK(insignificant >= 8);
}

TEST_CASE("zero-means fit") {
    Rng rng(69);
    const auto y = oracle::simulate_garch(GarchParams{0.1, 0.1, 0.8, 0.5}, 800, rng);
    MrsFitOptions opt;
    opt.zero_means = true;
    const auto fit = mrs_fit(y, opt);
    CHECK(fit.free_parameters == 8);
    CHECK(fit.params.mu[0] == 0.0);
    CHECK(fit.params.mu[1] == 0.0);
    CHECK(std::isfinite(fit.loglike));
}

TEST_CASE("fit is scale equivariant") {
    Rng rng(70);
    MrsGarchParams truth;
    truth.omega = {0.2, 1.5};
    truth.alpha = {0.05, 0.1};
    truth.beta = {0.6, 0.5};
    truth.p = 0.03;
    truth.q = 0.05;
    const auto sim = oracle::simulate_regime_garch(truth, 800, rng);
    std::vector<double> scaled = sim.y;
    for (auto& v : scaled) {
        v *= 0.01;
    }
    const auto a = mrs_fit(sim.y);
    const auto b = mrs_fit(scaled);
    CHECK(b.params.p == doctest::Approx(a.params.p).epsilon(1e-6));
    CHECK(b.params.omega[1] == doctest::Approx(1e-4 * a.params.omega[1]).epsilon(1e-6));
}
