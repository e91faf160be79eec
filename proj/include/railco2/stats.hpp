#pragma once

#include "railco2/config.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>

namespace railco2::stats {

struct MeanSd {
    double mean = 0.0;
    std::optional<double> sd; // sample sd (n - 1); empty when n == 1
    std::size_t n = 0;
};

MeanSd mean_sd(std::span<const double> xs);

// Regularized incomplete beta I_x(a, b) by Lentz continued fraction.
double incomplete_beta(double a, double b, double x);

// P(|T_df| >= |t|).
double t_tail_two_sided(double t, double df);

// Positive t with P(|T_df| >= t) = alpha.
double t_critical_two_sided(double alpha, double df);

struct TestResult {
    double statistic = 0.0;
    double df = 0.0;
    double p_two_sided = 1.0;
    double mean_diff = 0.0;
    std::size_t n1 = 0;
    std::size_t n2 = 0; // 0 for the paired test
};

TestResult two_sample_t(std::span<const double> xs, std::span<const double> ys, TTestVariant variant);

TestResult paired_t(std::span<const double> diffs);

struct OlsFit {
    Eigen::VectorXd coefficients;
    Eigen::VectorXd standard_errors;
    Eigen::VectorXd t_values;
    Eigen::VectorXd p_values;
    Eigen::VectorXd residuals;
    double rss = 0.0;
    double sigma2 = 0.0;
    double r_squared = 0.0;      // centred; 0 when y is constant
    double adj_r_squared = 0.0;
    std::size_t n = 0;
    std::size_t k = 0;

    double df_resid() const { return static_cast<double>(n - k); }
};

// Least squares via Householder QR with classical standard errors
// sigma^2 (X'X)^-1, sigma^2 = RSS / (n - k). The design is expected to carry
// an intercept column. Throws TooFewRows or RankDeficient (naming the first
// column that is numerically dependent on the ones before it).
OlsFit ols_fit(const Eigen::MatrixXd &x, const Eigen::VectorXd &y);

} // namespace railco2::stats
