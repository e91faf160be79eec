#include "railco2/error.hpp"
#include "railco2/stats.hpp"

#include "../support/common.hpp"
#include "../support/gen.hpp"
#include "../support/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace railco2;
using namespace railco2::stats;

namespace {

template <typename F> ErrorCode code_of(F &&f) {
    try {
        f();
    } catch (const Error &e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::Io;
}

} // namespace

TEST_CASE("mean and sample sd") {
    const std::vector<double> xs{2, 4, 4, 4, 5, 5, 7, 9};
    const auto m = mean_sd(xs);
    CHECK(m.mean == 5.0);
    CHECK(*m.sd == doctest::Approx(std::sqrt(32.0 / 7.0)).epsilon(1e-14));
    CHECK(m.n == 8);
    const std::vector<double> one{3.0};
    CHECK_FALSE(mean_sd(one).sd.has_value());
    CHECK(code_of([] { mean_sd(std::vector<double>{}); }) == ErrorCode::EmptyInput);
}

TEST_CASE("incomplete beta closed forms") {
    // I_x(1, b) = 1 - (1 - x)^b and I_x(a, 1) = x^a.
    for (double x : {0.0, 0.1, 0.37, 0.5, 0.9, 1.0}) {
        CHECK(incomplete_beta(1.0, 3.5, x) == doctest::Approx(1.0 - std::pow(1.0 - x, 3.5)).epsilon(1e-12));
        CHECK(incomplete_beta(2.5, 1.0, x) == doctest::Approx(std::pow(x, 2.5)).epsilon(1e-12));
    }
    CHECK(code_of([] { incomplete_beta(1.0, 1.0, 1.5); }) == ErrorCode::NegativeInput);
}

TEST_CASE("t tail against closed forms and quadrature") {
    // df = 1 is Cauchy: 1 - 2 atan(t) / pi.
    for (double t : {0.0, 0.5, 1.0, 3.0, 40.0}) {
        CHECK(t_tail_two_sided(t, 1.0) == doctest::Approx(1.0 - 2.0 * std::atan(t) / std::numbers::pi).epsilon(1e-12));
        CHECK(t_tail_two_sided(-t, 1.0) == t_tail_two_sided(t, 1.0));
    }
    // df = 2: 1 - t / sqrt(2 + t^2).
    for (double t : {0.3, 1.7, 5.0}) {
        CHECK(t_tail_two_sided(t, 2.0) == doctest::Approx(1.0 - t / std::sqrt(2.0 + t * t)).epsilon(1e-12));
    }
    for (double df : {1.0, 3.0, 4.0, 10.0, 30.0, 120.0, 1e5}) {
        for (double t = 0.0; t <= 6.0; t += 0.25) {
            CHECK(std::fabs(t_tail_two_sided(t, df) - oracle::t_two_sided_by_quadrature(t, df)) < 1e-6);
        }
    }
    CHECK(code_of([] { t_tail_two_sided(1.0, 0.0); }) == ErrorCode::NonPositiveDf);
}

TEST_CASE("t critical values") {
    CHECK(t_critical_two_sided(0.05, 1.0) == doctest::Approx(12.706204736).epsilon(1e-8));
    CHECK(t_critical_two_sided(0.05, 10.0) == doctest::Approx(2.228138852).epsilon(1e-8));
    CHECK(t_critical_two_sided(0.05, 1e7) == doctest::Approx(1.959964).epsilon(1e-5));
    for (double df : {2.0, 7.5, 316.0}) {
        for (double a : {0.01, 0.05, 0.2}) {
            CHECK(t_tail_two_sided(t_critical_two_sided(a, df), df) == doctest::Approx(a).epsilon(1e-9));
        }
    }
    CHECK(code_of([] { t_critical_two_sided(0.0, 5.0); }) == ErrorCode::NegativeInput);
}

TEST_CASE("two-sample t tests") {
    const std::vector<double> a{1, 2, 3}, b{2, 3, 4};
    const auto pooled = two_sample_t(a, b, TTestVariant::Pooled);
    CHECK(pooled.statistic == doctest::Approx(-1.224744871).epsilon(1e-9));
    CHECK(pooled.df == 4.0);
    CHECK(pooled.p_two_sided == doctest::Approx(0.2878641).epsilon(1e-6));
    const auto welch_equal = two_sample_t(a, b, TTestVariant::Welch);
    CHECK(welch_equal.df == 4.0);
    CHECK(welch_equal.statistic == pooled.statistic);

    const std::vector<double> c{1, 2, 3, 4}, d{2, 4, 6};
    const auto w = two_sample_t(c, d, TTestVariant::Welch);
    const double v1 = (5.0 / 3.0) / 4.0, v2 = 4.0 / 3.0;
    CHECK(w.statistic == doctest::Approx(-1.5 / std::sqrt(v1 + v2)).epsilon(1e-12));
    CHECK(w.df == doctest::Approx((v1 + v2) * (v1 + v2) / (v1 * v1 / 3.0 + v2 * v2 / 2.0)).epsilon(1e-12));
    CHECK(w.p_two_sided == doctest::Approx(oracle::t_two_sided_by_quadrature(w.statistic, w.df)).epsilon(1e-6));
    const auto p = two_sample_t(c, d, TTestVariant::Pooled);
    const double sp2 = (3.0 * (5.0 / 3.0) + 2.0 * 4.0) / 5.0;
    CHECK(p.statistic == doctest::Approx(-1.5 / std::sqrt(sp2 / 4.0 + sp2 / 3.0)).epsilon(1e-12));
    CHECK(p.df == 5.0);

    const std::vector<double> k1{5, 5}, k2{5, 5}, k3{6, 6}, one{1};
    CHECK(code_of([&] { two_sample_t(k1, k2, TTestVariant::Welch); }) == ErrorCode::DegenerateVariance);
    const auto inf = two_sample_t(k1, k3, TTestVariant::Welch);
    CHECK(std::isinf(inf.statistic));
    CHECK(inf.statistic < 0.0);
    CHECK(inf.p_two_sided == 0.0);
    CHECK(code_of([&] { two_sample_t(one, a, TTestVariant::Welch); }) == ErrorCode::InsufficientSample);
}

TEST_CASE("paired t test") {
    const std::vector<double> diffs{1, -1, 0, 2};
    const auto r = paired_t(diffs);
    CHECK(r.statistic == doctest::Approx(0.7745966692).epsilon(1e-9));
    CHECK(r.df == 3.0);
    CHECK(r.p_two_sided == doctest::Approx(oracle::t_two_sided_by_quadrature(r.statistic, 3.0)).epsilon(1e-6));
    CHECK(r.p_two_sided == doctest::Approx(0.4950).epsilon(1e-3));
    CHECK(code_of([] { paired_t(std::vector<double>{2, 2, 2}); }) == ErrorCode::DegenerateVariance);
    CHECK(code_of([] { paired_t(std::vector<double>{2}); }) == ErrorCode::InsufficientSample);
}

TEST_CASE("OLS matches the normal equations") {
    gen::Gen g(31);
    for (int c = 0; c < 200; ++c) {
        const auto k = static_cast<std::size_t>(g.integer(1, 12));
        const auto n = static_cast<std::size_t>(g.integer(static_cast<int>(k) + 5, 200));
        const auto x = gen::design(g, n, k);
        std::vector<double> beta(k);
        for (auto &b : beta) b = g.uniform(1.0, 10.0) * (g.coin() ? 1 : -1);
        const auto y = gen::response(g, x, beta, g.uniform(0.1, 5.0));
        const auto fit = ols_fit(support::to_matrix(x), support::to_vector(y));
        const auto want = oracle::normal_equations(x, y);
        for (std::size_t j = 0; j < k; ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            CHECK(oracle::rel_err(fit.coefficients(jj), want.beta[j]) < 1e-8);
            CHECK(oracle::rel_err(fit.standard_errors(jj), want.se[j]) < 1e-8);
        }
        CHECK(oracle::rel_err(fit.rss, want.rss) < 1e-8);
    }
}

TEST_CASE("OLS summary statistics") {
    Eigen::MatrixXd x(5, 2);
    x << 1, 0, 1, 1, 1, 2, 1, 3, 1, 4;
    Eigen::VectorXd y(5);
    y << 1.0, 3.5, 5.0, 6.5, 9.0;
    const auto fit = ols_fit(x, y);
    CHECK(fit.coefficients(0) == doctest::Approx(1.2));
    CHECK(fit.coefficients(1) == doctest::Approx(1.9));
    CHECK(fit.rss == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(fit.sigma2 == doctest::Approx(0.4 / 3.0).epsilon(1e-12));
    CHECK(fit.r_squared == doctest::Approx(1.0 - 0.4 / 36.5).epsilon(1e-12));
    CHECK(fit.adj_r_squared == doctest::Approx(1.0 - (0.4 / 3.0) / (36.5 / 4.0)).epsilon(1e-12));
    CHECK(fit.df_resid() == 3.0);
    CHECK(fit.residuals.sum() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("OLS errors") {
    Eigen::MatrixXd x(4, 3);
    x << 1, 1, 2, 1, 2, 4, 1, 3, 6, 1, 4, 8;
    Eigen::VectorXd y(4);
    y << 1, 2, 3, 5;
    try {
        ols_fit(x, y);
        FAIL("expected RankDeficient");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::RankDeficient);
        CHECK(std::string(e.what()).find("column 2") != std::string::npos);
    }
    CHECK(code_of([&] { ols_fit(x.topRows(3), y.head(3)); }) == ErrorCode::TooFewRows);
    CHECK(code_of([&] { ols_fit(x, y.head(3)); }) == ErrorCode::TooFewRows);
}

TEST_CASE("property: OLS shift and scale equivariance") {
    gen::Gen g(47);
    for (int c = 0; c < 1000; ++c) {
        const auto k = static_cast<std::size_t>(g.integer(1, 6));
        const auto n = static_cast<std::size_t>(g.integer(static_cast<int>(k) + 3, 40));
        const auto xr = gen::design(g, n, k);
        std::vector<double> beta(k);
        for (auto &b : beta) b = g.uniform(-5.0, 5.0);
        const auto x = support::to_matrix(xr);
        const auto y = support::to_vector(gen::response(g, xr, beta, 1.0));
        const double a = g.uniform(0.1, 50.0) * (g.coin() ? 1 : -1);
        Eigen::VectorXd shift(static_cast<Eigen::Index>(k));
        for (auto &s : shift) s = g.uniform(-10.0, 10.0);

        const auto base = ols_fit(x, y);
        const auto moved = ols_fit(x, a * y + x * shift);
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(k); ++j) {
            const double want = a * base.coefficients(j) + shift(j);
            const double tol = 1e-7 * (std::fabs(a * base.coefficients(j)) + std::fabs(shift(j)) + 1.0);
            CHECK(std::fabs(moved.coefficients(j) - want) <= tol);
            CHECK(moved.standard_errors(j) ==
                  doctest::Approx(std::fabs(a) * base.standard_errors(j)).epsilon(1e-6));
        }
    }
}
