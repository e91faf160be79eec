#include "railco2/evaluate.hpp"

#include "railco2/error.hpp"

#include <fmt/format.h>

#include <map>

namespace railco2 {

std::string_view to_string(Metric metric) {
    switch (metric) {
    case Metric::Co2: return "co2";
    case Metric::Vmt: return "vmt";
    case Metric::CarTrips: return "car_trips";
    case Metric::BusTrips: return "bus_trips";
    case Metric::TrainTrips: return "train_trips";
    }
    return "?";
}

double metric_value(const PanelObservation &obs, Metric metric) {
    switch (metric) {
    case Metric::Co2: return obs.daily_co2_g;
    case Metric::Vmt: return obs.daily_vmt;
    case Metric::CarTrips: return obs.car_trips;
    case Metric::BusTrips: return obs.bus_trips;
    case Metric::TrainTrips: return obs.train_trips;
    }
    return 0.0;
}

std::vector<NamedSpec> model_ladder() {
    return {
        {"Model 1", CovariateSpec{}},
        {"Model 2", CovariateSpec{true, false, false}},
        {"Model 3", CovariateSpec{true, true, false}},
        {"Model 4", CovariateSpec{true, true, true}},
    };
}

DesignMatrix did_design_matrix(const BalancedPanel &panel, const CovariateSpec &spec, Metric outcome) {
    if (panel.observations.empty()) throw Error(ErrorCode::AllRowsDropped, "panel has no observations");
    DesignMatrix d;
    d.columns = {"intercept", "experimental", "wave2", "experimental_x_wave2"};
    if (spec.veh_cnt) d.columns.emplace_back("veh_cnt");
    if (spec.ppl_cnt) d.columns.emplace_back("ppl_cnt");
    if (spec.income_dummies) {
        for (int bracket = 2; bracket <= 6; ++bracket) d.columns.push_back(fmt::format("income_{}", bracket));
    }
    for (std::size_t i = 0; i < panel.observations.size(); ++i) {
        if (spec.income_dummies && !panel.observations[i].income_bracket) {
            ++d.dropped;
            continue;
        }
        d.rows.push_back(i);
    }
    if (d.rows.empty()) {
        throw Error(ErrorCode::AllRowsDropped, "every observation lacks income; no rows left for the income model");
    }
    const auto n = static_cast<Eigen::Index>(d.rows.size());
    const auto k = static_cast<Eigen::Index>(d.columns.size());
    d.x = Eigen::MatrixXd::Zero(n, k);
    d.y.resize(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto &obs = panel.observations[d.rows[static_cast<std::size_t>(r)]];
        Eigen::Index c = 0;
        d.x(r, c++) = 1.0;
        d.x(r, c++) = obs.group;
        d.x(r, c++) = obs.after();
        d.x(r, c++) = static_cast<double>(obs.group * obs.after());
        if (spec.veh_cnt) d.x(r, c++) = obs.veh_cnt;
        if (spec.ppl_cnt) d.x(r, c++) = obs.ppl_cnt;
        if (spec.income_dummies) {
            for (int bracket = 2; bracket <= 6; ++bracket) d.x(r, c++) = *obs.income_bracket == bracket ? 1.0 : 0.0;
        }
        d.y(r) = metric_value(obs, outcome);
    }
    return d;
}

Coefficient DidFit::coefficient(std::size_t column) const {
    const auto j = static_cast<Eigen::Index>(column);
    return Coefficient{ols.coefficients(j), ols.standard_errors(j), ols.t_values(j), ols.p_values(j)};
}

DidFit did_fit(const BalancedPanel &panel, const CovariateSpec &spec, Metric outcome) {
    auto design = did_design_matrix(panel, spec, outcome);
    DidFit fit;
    fit.spec = spec;
    fit.n_used = design.rows.size();
    fit.n_dropped = design.dropped;

    double sums[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    std::size_t counts[2][2] = {{0, 0}, {0, 0}};
    for (std::size_t r = 0; r < design.rows.size(); ++r) {
        const auto &obs = panel.observations[design.rows[r]];
        sums[obs.group][obs.after()] += design.y(static_cast<Eigen::Index>(r));
        ++counts[obs.group][obs.after()];
        (obs.group == 1 ? fit.n_experimental : fit.n_control) += 1;
    }
    auto cell = [&](int g, int t) {
        return counts[g][t] ? sums[g][t] / static_cast<double>(counts[g][t])
                            : std::numeric_limits<double>::quiet_NaN();
    };
    fit.cells = CellMeans{cell(0, 0), cell(1, 0), cell(0, 1), cell(1, 1)};

    fit.ols = stats::ols_fit(design.x, design.y);
    fit.columns = std::move(design.columns);
    return fit;
}

ContrastRow group_contrast_table(const BalancedPanel &panel, Metric metric, int wave, TTestVariant variant) {
    std::vector<double> control;
    std::vector<double> experimental;
    for (const auto &obs : panel.observations) {
        if (obs.wave != wave) continue;
        (obs.group == 1 ? experimental : control).push_back(metric_value(obs, metric));
    }
    if (control.empty() || experimental.empty()) {
        throw Error(ErrorCode::EmptyGroup, fmt::format("wave {} has an empty {} group", wave,
                                                       control.empty() ? "control" : "experimental"));
    }
    ContrastRow row;
    row.metric = metric;
    row.wave = wave;
    row.control = stats::mean_sd(control);
    row.experimental = stats::mean_sd(experimental);
    row.difference = row.experimental.mean - row.control.mean;
    if (row.control.mean != 0.0) row.percent_difference = 100.0 * row.difference / row.control.mean;
    try {
        row.test = stats::two_sample_t(experimental, control, variant);
    } catch (const Error &e) {
        if (e.code() != ErrorCode::DegenerateVariance) throw;
    }
    return row;
}

stats::TestResult within_group_change(const BalancedPanel &panel, Group group, Metric metric) {
    const int g = group == Group::Experimental ? 1 : 0;
    std::map<std::string, std::array<std::optional<double>, 2>> by_household;
    for (const auto &obs : panel.observations) {
        if (obs.group != g) continue;
        by_household[obs.household_id][static_cast<std::size_t>(obs.wave - 1)] = metric_value(obs, metric);
    }
    std::vector<double> diffs;
    for (const auto &[id, v] : by_household) {
        if (v[0] && v[1]) diffs.push_back(*v[1] - *v[0]);
    }
    if (diffs.empty()) throw Error(ErrorCode::EmptyGroup, fmt::format("{} group is empty", to_string(group)));
    return stats::paired_t(diffs);
}

std::vector<SensitivityRow> sensitivity_sweep(const BalancedPanel &panel, const std::vector<Length> &radii,
                                              const CovariateSpec &spec) {
    std::vector<SensitivityRow> rows;
    rows.reserve(radii.size());
    for (const auto &radius : radii) {
        auto relabeled = regroup(panel, radius);
        try {
            rows.push_back(SensitivityRow{radius, did_fit(relabeled, spec)});
        } catch (const Error &e) {
            throw Error(e.code(), fmt::format("radius {}: {}", radius.label(), e.detail()));
        }
    }
    return rows;
}

std::string significance_stars(double p) {
    if (!(p < 0.1)) return "";
    if (p < 0.01) return "***";
    if (p < 0.05) return "**";
    return "*";
}

} // namespace railco2
