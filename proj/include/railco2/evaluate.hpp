#pragma once

#include "railco2/config.hpp"
#include "railco2/panel.hpp"
#include "railco2/stats.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace railco2 {

enum class Metric { Co2, Vmt, CarTrips, BusTrips, TrainTrips };

std::string_view to_string(Metric metric);
double metric_value(const PanelObservation &obs, Metric metric);

struct NamedSpec {
    std::string name;
    CovariateSpec spec;
};

// Model 1: none; Model 2: veh_cnt; Model 3: + ppl_cnt; Model 4: + income dummies.
std::vector<NamedSpec> model_ladder();

struct DesignMatrix {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    std::vector<std::string> columns;
    std::vector<std::size_t> rows; // panel row index of each design row
    std::size_t dropped = 0;       // rows dropped for missing income
};

inline constexpr std::size_t kGroupColumn = 1;
inline constexpr std::size_t kWaveColumn = 2;
inline constexpr std::size_t kInteractionColumn = 3;

// Columns: intercept, experimental, wave2, experimental x wave2, then the
// requested covariates. Throws AllRowsDropped.
DesignMatrix did_design_matrix(const BalancedPanel &panel, const CovariateSpec &spec, Metric outcome = Metric::Co2);

// Cell means indexed [group][after].
struct CellMeans {
    double control_before = 0.0;
    double experimental_before = 0.0;
    double control_after = 0.0;
    double experimental_after = 0.0;

    double did() const { return (experimental_after - experimental_before) - (control_after - control_before); }
};

struct Coefficient {
    double estimate = 0.0;
    double se = 0.0;
    double t = 0.0;
    double p = 1.0;
};

struct DidFit {
    stats::OlsFit ols;
    std::vector<std::string> columns;
    CovariateSpec spec;
    CellMeans cells;
    std::size_t n_used = 0;
    std::size_t n_dropped = 0;
    std::size_t n_experimental = 0; // observations
    std::size_t n_control = 0;

    Coefficient coefficient(std::size_t column) const;
    Coefficient group_effect() const { return coefficient(kGroupColumn); }
    Coefficient wave_effect() const { return coefficient(kWaveColumn); }
    Coefficient treatment_effect() const { return coefficient(kInteractionColumn); }
};

DidFit did_fit(const BalancedPanel &panel, const CovariateSpec &spec, Metric outcome = Metric::Co2);

struct ContrastRow {
    Metric metric = Metric::Co2;
    int wave = 1;
    stats::MeanSd control;
    stats::MeanSd experimental;
    double difference = 0.0;                 // experimental - control
    std::optional<double> percent_difference; // 100 * difference / control mean
    std::optional<stats::TestResult> test;    // empty when both groups are constant and equal
};

// Throws EmptyGroup when a group has no observations in the wave.
ContrastRow group_contrast_table(const BalancedPanel &panel, Metric metric, int wave, TTestVariant variant);

// Paired test on per-household (wave 2 - wave 1) differences within a group.
stats::TestResult within_group_change(const BalancedPanel &panel, Group group, Metric metric);

struct SensitivityRow {
    Length radius;
    DidFit fit;
};

// Re-labels groups for each radius and refits; order follows `radii`.
std::vector<SensitivityRow> sensitivity_sweep(const BalancedPanel &panel, const std::vector<Length> &radii,
                                              const CovariateSpec &spec);

std::string significance_stars(double p);

} // namespace railco2
