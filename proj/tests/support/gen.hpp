#pragma once

// Seeded value generators for the property tests.

#include "railco2/panel.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace gen {

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
    bool coin(double p = 0.5) { return uniform(0.0, 1.0) < p; }
    double normal(double mean, double sd) { return std::normal_distribution<double>(mean, sd)(rng_); }
    std::mt19937_64 &engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

// Full-rank design: intercept plus continuous and dummy columns.
inline std::vector<std::vector<double>> design(Gen &g, std::size_t n, std::size_t k) {
    std::vector<std::vector<double>> x(n, std::vector<double>(k, 0.0));
    std::vector<double> scale(k);
    for (std::size_t j = 1; j < k; ++j) scale[j] = std::pow(10.0, g.uniform(-2.0, 3.0));
    for (std::size_t r = 0; r < n; ++r) {
        x[r][0] = 1.0;
        for (std::size_t j = 1; j < k; ++j) {
            x[r][j] = j % 3 == 0 ? (g.coin() ? 1.0 : 0.0) : g.normal(0.0, scale[j]);
        }
    }
    // Keep dummies non-constant and distinct: row j switches on dummy j only.
    for (std::size_t j = 3; j < k; j += 3) {
        for (std::size_t d = 3; d < k; d += 3) x[j][d] = d == j ? 1.0 : 0.0;
        x[j + 1][j] = 0.0;
    }
    return x;
}

// X beta plus normal noise.
inline std::vector<double> response(Gen &g, const std::vector<std::vector<double>> &x, const std::vector<double> &beta,
                                    double noise_sd) {
    std::vector<double> y(x.size());
    for (std::size_t r = 0; r < x.size(); ++r) {
        double v = 0.0;
        for (std::size_t c = 0; c < beta.size(); ++c) v += x[r][c] * beta[c];
        y[r] = v + g.normal(0.0, noise_sd);
    }
    return y;
}

// Balanced panel with random group sizes, distances, covariates and outcomes.
inline railco2::BalancedPanel panel(Gen &g, std::size_t min_households = 8, std::size_t max_households = 60) {
    railco2::BalancedPanel p;
    p.radius = {0.5, railco2::LengthUnit::Mile};
    const auto n = static_cast<std::size_t>(g.integer(static_cast<int>(min_households), static_cast<int>(max_households)));
    for (std::size_t i = 0; i < n; ++i) {
        // Alternate groups so both are always present.
        const bool experimental = i % 2 == 1;
        const double distance = experimental ? g.uniform(0.0, 0.5) : g.uniform(0.5000001, 2.0);
        const int veh = g.integer(0, 3);
        const int ppl = g.integer(1, 5);
        const std::optional<int> income = g.coin(0.9) ? std::optional<int>(g.integer(1, 6)) : std::nullopt;
        for (int wave = 1; wave <= 2; ++wave) {
            railco2::PanelObservation o;
            o.household_id = "P" + std::to_string(1000 + i);
            o.wave = wave;
            o.group = experimental ? 1 : 0;
            o.distance_mi = distance;
            o.veh_cnt = veh;
            o.ppl_cnt = ppl;
            o.income_bracket = income;
            o.daily_vmt = g.uniform(0.0, 60.0);
            o.car_trips = g.uniform(0.0, 8.0);
            o.bus_trips = g.uniform(0.0, 1.0);
            o.train_trips = g.uniform(0.0, 0.5);
            o.daily_co2_g = g.uniform(0.0, 30000.0);
            p.observations.push_back(o);
        }
    }
    return p;
}

} // namespace gen
