#include "railco2/stats.hpp"

#include "railco2/error.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

namespace railco2::stats {

namespace {

constexpr double kCfTolerance = 1e-12;
constexpr int kCfMaxIterations = 100000;
constexpr double kTiny = 1e-300;
constexpr double kRankTolerance = 1e-10;

// Continued fraction for I_x(a, b); converges fast for x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double a, double b, double x) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kCfMaxIterations; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kCfTolerance) return h;
    }
    return h;
}

// I_x(a, b) given both x and 1 - x, so callers can pass a complement that was
// computed without cancellation.
double incomplete_beta_split(double a, double b, double x, double one_minus_x) {
    if (x <= 0.0) return 0.0;
    if (one_minus_x <= 0.0) return 1.0;
    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                             b * std::log(one_minus_x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, one_minus_x) / b;
}

} // namespace

MeanSd mean_sd(std::span<const double> xs) {
    if (xs.empty()) throw Error(ErrorCode::EmptyInput, "mean of an empty sample");
    MeanSd out;
    out.n = xs.size();
    double sum = 0.0;
    for (double x : xs) sum += x;
    out.mean = sum / static_cast<double>(xs.size());
    if (xs.size() >= 2) {
        double ss = 0.0;
        for (double x : xs) ss += (x - out.mean) * (x - out.mean);
        out.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return out;
}

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0) || x < 0.0 || x > 1.0) {
        throw Error(ErrorCode::NegativeInput, fmt::format("incomplete beta outside domain (a={}, b={}, x={})", a, b, x));
    }
    return incomplete_beta_split(a, b, x, 1.0 - x);
}

double t_tail_two_sided(double t, double df) {
    if (!(df > 0.0)) throw Error(ErrorCode::NonPositiveDf, fmt::format("degrees of freedom {} must be positive", df));
    if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(t)) return 0.0;
    if (t == 0.0) return 1.0;
    const double t2 = t * t;
    const double x = df / (df + t2);
    const double complement = t2 / (df + t2);
    const double p = incomplete_beta_split(df / 2.0, 0.5, x, complement);
    return std::clamp(p, 0.0, 1.0);
}

double t_critical_two_sided(double alpha, double df) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw Error(ErrorCode::NegativeInput, fmt::format("alpha {} outside (0, 1)", alpha));
    }
    double lo = 0.0;
    double hi = 1.0;
    while (t_tail_two_sided(hi, df) > alpha) hi *= 2.0;
    for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (t_tail_two_sided(mid, df) > alpha ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

TestResult two_sample_t(std::span<const double> xs, std::span<const double> ys, TTestVariant variant) {
    if (xs.size() < 2 || ys.size() < 2) {
        throw Error(ErrorCode::InsufficientSample,
                    fmt::format("two-sample t-test needs at least 2 per group (got {} and {})", xs.size(), ys.size()));
    }
    const auto a = mean_sd(xs);
    const auto b = mean_sd(ys);
    const double n1 = static_cast<double>(xs.size());
    const double n2 = static_cast<double>(ys.size());
    const double var1 = *a.sd * *a.sd;
    const double var2 = *b.sd * *b.sd;

    TestResult out;
    out.n1 = xs.size();
    out.n2 = ys.size();
    out.mean_diff = a.mean - b.mean;
    const double pooled_df = n1 + n2 - 2.0;

    if (var1 == 0.0 && var2 == 0.0) {
        if (out.mean_diff == 0.0) {
            throw Error(ErrorCode::DegenerateVariance, "both samples are constant and equal; t is undefined");
        }
        out.statistic = std::copysign(std::numeric_limits<double>::infinity(), out.mean_diff);
        out.df = pooled_df;
        out.p_two_sided = 0.0;
        return out;
    }

    double se2 = 0.0;
    if (variant == TTestVariant::Pooled) {
        const double sp2 = xs.size() == ys.size() ? 0.5 * (var1 + var2)
                                                  : ((n1 - 1.0) * var1 + (n2 - 1.0) * var2) / pooled_df;
        se2 = sp2 / n1 + sp2 / n2;
        out.df = pooled_df;
    } else {
        const double v1 = var1 / n1;
        const double v2 = var2 / n2;
        se2 = v1 + v2;
        if (xs.size() == ys.size() && var1 == var2) {
            out.df = pooled_df; // Welch-Satterthwaite reduces to n1 + n2 - 2 here
        } else {
            out.df = se2 * se2 / (v1 * v1 / (n1 - 1.0) + v2 * v2 / (n2 - 1.0));
        }
    }
    out.statistic = out.mean_diff / std::sqrt(se2);
    out.p_two_sided = t_tail_two_sided(out.statistic, out.df);
    return out;
}

TestResult paired_t(std::span<const double> diffs) {
    if (diffs.size() < 2) {
        throw Error(ErrorCode::InsufficientSample, fmt::format("paired t-test needs at least 2 pairs (got {})", diffs.size()));
    }
    const auto m = mean_sd(diffs);
    if (*m.sd == 0.0) throw Error(ErrorCode::DegenerateVariance, "paired differences have zero variance");
    TestResult out;
    out.n1 = diffs.size();
    out.mean_diff = m.mean;
    out.df = static_cast<double>(diffs.size() - 1);
    out.statistic = m.mean / (*m.sd / std::sqrt(static_cast<double>(diffs.size())));
    out.p_two_sided = t_tail_two_sided(out.statistic, out.df);
    return out;
}

OlsFit ols_fit(const Eigen::MatrixXd &x, const Eigen::VectorXd &y) {
    const auto n = static_cast<std::size_t>(x.rows());
    const auto k = static_cast<std::size_t>(x.cols());
    if (static_cast<std::size_t>(y.size()) != n) {
        throw Error(ErrorCode::TooFewRows, fmt::format("design has {} rows but outcome has {}", n, y.size()));
    }
    if (k == 0 || n <= k) {
        throw Error(ErrorCode::TooFewRows, fmt::format("{} observations for {} regressors", n, k));
    }

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
    const Eigen::MatrixXd r = qr.matrixQR().topRows(static_cast<Eigen::Index>(k)).triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(k); ++j) {
        const double scale = x.col(j).norm();
        if (scale == 0.0 || std::fabs(r(j, j)) <= kRankTolerance * scale) {
            throw Error(ErrorCode::RankDeficient,
                        fmt::format("design column {} is linearly dependent on earlier columns", j));
        }
    }

    OlsFit fit;
    fit.n = n;
    fit.k = k;
    fit.coefficients = qr.solve(y);
    fit.residuals = y - x * fit.coefficients;
    fit.rss = fit.residuals.squaredNorm();
    fit.sigma2 = fit.rss / fit.df_resid();

    const Eigen::MatrixXd r_inv = r.triangularView<Eigen::Upper>().solve(
        Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)));
    fit.standard_errors = (fit.sigma2 * r_inv.rowwise().squaredNorm()).cwiseSqrt();
    fit.t_values = fit.coefficients.cwiseQuotient(fit.standard_errors);
    fit.p_values.resize(static_cast<Eigen::Index>(k));
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(k); ++j) {
        fit.p_values(j) = t_tail_two_sided(fit.t_values(j), fit.df_resid());
    }

    const double ybar = y.mean();
    const double tss = (y.array() - ybar).square().sum();
    fit.r_squared = tss > 0.0 ? 1.0 - fit.rss / tss : 0.0;
    fit.adj_r_squared =
        1.0 - (1.0 - fit.r_squared) * static_cast<double>(n - 1) / fit.df_resid();
    return fit;
}

} // namespace railco2::stats
