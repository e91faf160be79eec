#include "railco2/report.hpp"

#include "railco2/csv.hpp"
#include "railco2/error.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iterator>
#include <memory>

#ifndef RAILCO2_VERSION
#define RAILCO2_VERSION "0.0.0"
#endif

namespace railco2::report {

namespace {

Json optional_json(const std::optional<double> &v) { return v ? Json(*v) : Json(nullptr); }

Json test_json(const std::optional<stats::TestResult> &t) {
    if (!t) return nullptr;
    return Json{{"statistic", t->statistic}, {"df", t->df},     {"p_two_sided", t->p_two_sided},
                {"mean_diff", t->mean_diff}, {"n1", t->n1},     {"n2", t->n2}};
}

std::string fixed(double v, int digits) {
    if (!std::isfinite(v)) return v != v ? "nan" : (v > 0 ? "inf" : "-inf");
    if (std::fabs(v) < 0.5 * std::pow(10.0, -digits)) v = 0.0; // no "-0.0"
    return fmt::format("{:.{}f}", v, digits);
}

std::string opt_fixed(const std::optional<double> &v, int digits) { return v ? fixed(*v, digits) : "-"; }

std::string length_label(const Length &l) {
    return l.unit == LengthUnit::Mile ? fmt::format("{} mi", csv::format_real(l.value))
                                      : fmt::format("{} km ({} mi)", csv::format_real(l.value), fixed(l.miles(), 2));
}

std::string metric_label(Metric m) {
    switch (m) {
    case Metric::Co2: return "Daily CO2 (g)";
    case Metric::Vmt: return "Daily VMT (mi)";
    case Metric::CarTrips: return "Car trips/day";
    case Metric::BusTrips: return "Bus trips/day";
    case Metric::TrainTrips: return "Train trips/day";
    }
    return "?";
}

// Grams print to 0.1, trip counts to 0.01.
int digits_for(Metric m) { return m == Metric::Co2 || m == Metric::Vmt ? 1 : 2; }

std::string csv_real(double v) { return std::isfinite(v) ? csv::format_real(v) : (v != v ? "nan" : (v > 0 ? "inf" : "-inf")); }

std::string csv_opt(const std::optional<double> &v) { return v ? csv_real(*v) : std::string(); }

} // namespace

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorCode::Io, "SHA-256 computation failed");
    }
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", digest[i]);
    return out;
}

std::string file_sha256(const std::filesystem::path &path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(ErrorCode::Io, fmt::format("cannot open {}", path.string()));
    std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return sha256_hex(bytes);
}

Json config_json(const RunConfig &cfg) {
    Json radii = Json::array();
    for (const auto &r : cfg.sensitivity_radii) radii.push_back(r.label());
    return Json{
        {"catchment_radius", cfg.catchment_radius.label()},
        {"catchment_radius_mi", cfg.catchment_radius.miles()},
        {"outlier_vmt_per_day", cfg.outlier_vmt_per_day},
        {"min_odometer_readings", cfg.min_odometer_readings},
        {"survey_days", cfg.survey_days},
        {"calendar_years", {cfg.calendar_years[0], cfg.calendar_years[1]}},
        {"ttest", std::string(to_string(cfg.ttest))},
        {"covariates", cfg.covariates.label()},
        {"sensitivity_radii", radii},
        {"seed", cfg.seed},
    };
}

Json sim_config_json(const sim::SimConfig &cfg) {
    return Json{
        {"households_per_group", cfg.households_per_group},
        {"cell_means",
         {{"control_before", cfg.mu_control_before},
          {"experimental_before", cfg.mu_experimental_before},
          {"control_after", cfg.mu_control_after()},
          {"experimental_after", cfg.mu_experimental_after()}}},
        {"secular_change", cfg.secular_change},
        {"treatment_effect", cfg.treatment_effect},
        {"noise_sd", cfg.noise_sd},
        {"noise", cfg.noise_shape == sim::NoiseShape::Gamma ? "gamma" : "normal"},
        {"vehicle_count_probs", cfg.vehicle_count_probs},
        {"income_probs", cfg.income_probs},
        {"income_missing_prob", cfg.income_missing_prob},
        {"mean_run_g_per_mile", cfg.mean_run_g_per_mile},
        {"mean_start_g_per_day", cfg.mean_start_g_per_day},
        {"truck_share", cfg.truck_share},
        {"motorcycle_share", cfg.motorcycle_share},
        {"electrified_share", cfg.electrified_share},
        {"ldt_split_threshold_lb", cfg.ldt_split_threshold_lb},
        {"experimental_distance_mi", {cfg.experimental_distance.min_mi, cfg.experimental_distance.max_mi}},
        {"control_distance_mi", {cfg.control_distance.min_mi, cfg.control_distance.max_mi}},
        {"seed", cfg.seed},
    };
}

Json RunManifest::body() const {
    Json inputs_json = Json::array();
    for (const auto &in : inputs) inputs_json.push_back(Json{{"name", in.name}, {"path", in.path}, {"sha256", in.sha256}});
    Json rows = Json::array();
    for (const auto &rc : row_counts) {
        rows.push_back(Json{{"file", rc.file}, {"read", rc.read}, {"parsed", rc.parsed}, {"rejected", rc.rejected}});
    }
    Json stages = Json::object();
    for (const auto &[stage, n] : stage_counts) stages[stage] = n;
    return Json{{"toolkit_version", toolkit_version}, {"command", command}, {"config", config},
                {"inputs", inputs_json},              {"row_counts", rows}, {"stage_counts", stages}};
}

std::string RunManifest::digest() const { return sha256_hex(body().dump()); }

Json RunManifest::embedded() const {
    auto j = body();
    j["digest"] = digest();
    return j;
}

Json RunManifest::to_json() const {
    auto j = embedded();
    j["timestamp"] = timestamp;
    return j;
}

RunManifest make_manifest(std::string command, const RunConfig &cfg) {
    RunManifest m;
    m.toolkit_version = RAILCO2_VERSION;
    m.command = std::move(command);
    m.config = config_json(cfg);
    const std::vector<std::pair<std::string, std::filesystem::path>> files{
        {"households", cfg.inputs.households},
        {"vehicles", cfg.inputs.vehicles},
        {"odometer", cfg.inputs.odometer},
        {"trips", cfg.inputs.trips},
        {"factors_gasoline", cfg.inputs.factors_gasoline},
        {"factors_electrified", cfg.inputs.factors_electrified},
        {"stations", cfg.inputs.stations},
        {"lifecycle", cfg.inputs.lifecycle.value_or(std::filesystem::path())},
    };
    for (const auto &[name, path] : files) {
        if (path.empty() || !std::filesystem::is_regular_file(path)) continue;
        m.inputs.push_back(InputDigest{name, path.filename().string(), file_sha256(path)});
    }
    return m;
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

Json validation_json(const ValidationReport &report) {
    Json issues = Json::array();
    for (const auto &i : report.issues) {
        issues.push_back(Json{{"kind", std::string(to_string(i.kind))},
                              {"severity", std::string(to_string(i.severity))},
                              {"household_id", i.household_id},
                              {"wave", i.wave},
                              {"detail", i.detail}});
    }
    Json counts = Json::object();
    for (const auto &[kind, n] : report.counts()) counts[std::string(to_string(kind))] = n;
    return Json{{"has_fatal", report.has_fatal()}, {"counts", counts}, {"issues", issues}};
}

Json ledger_json(const ExclusionLedger &ledger) {
    Json waves = Json::array();
    for (int wave = 1; wave <= 2; ++wave) {
        Json reasons = Json::object();
        for (auto r : kExclusionReasons) reasons[std::string(to_string(r))] = ledger.at(wave, r);
        const auto w = static_cast<std::size_t>(wave - 1);
        waves.push_back(Json{{"wave", wave},
                             {"input", ledger.input[w]},
                             {"dropped", ledger.dropped(wave)},
                             {"retained", ledger.retained[w]},
                             {"reasons", reasons}});
    }
    return waves;
}

std::string ledger_table(const ExclusionLedger &ledger) {
    std::string out = fmt::format("{:<44}{:>10}{:>10}\n", "Households", "Wave 1", "Wave 2");
    auto line = [&](std::string_view label, std::size_t a, std::size_t b) {
        out += fmt::format("{:<44}{:>10}{:>10}\n", label, a, b);
    };
    line("Surveyed", ledger.input[0], ledger.input[1]);
    line("Dropped: missing make, model or year", ledger.at(1, ExclusionReason::MissingVehicleInfo),
         ledger.at(2, ExclusionReason::MissingVehicleInfo));
    line("Dropped: VMT missing, unreliable or outlier", ledger.at(1, ExclusionReason::IncompleteVmt),
         ledger.at(2, ExclusionReason::IncompleteVmt));
    line("Dropped: no emission factor", ledger.at(1, ExclusionReason::NoFactorAvailable),
         ledger.at(2, ExclusionReason::NoFactorAvailable));
    line("Dropped: not valid in the other wave", ledger.at(1, ExclusionReason::Unmatched),
         ledger.at(2, ExclusionReason::Unmatched));
    line("Total dropped", ledger.dropped(1), ledger.dropped(2));
    line("Balanced panel", ledger.retained[0], ledger.retained[1]);
    return out;
}

Json did_json(const std::string &model, const DidFit &fit) {
    Json coefs = Json::array();
    for (std::size_t j = 0; j < fit.columns.size(); ++j) {
        const auto c = fit.coefficient(j);
        coefs.push_back(Json{{"term", fit.columns[j]}, {"estimate", c.estimate}, {"se", c.se}, {"t", c.t}, {"p", c.p}});
    }
    const auto te = fit.treatment_effect();
    return Json{
        {"model", model},
        {"covariates", fit.spec.label()},
        {"n", fit.ols.n},
        {"n_dropped_missing_income", fit.n_dropped},
        {"n_experimental", fit.n_experimental},
        {"n_control", fit.n_control},
        {"df_resid", fit.ols.df_resid()},
        {"r_squared", fit.ols.r_squared},
        {"adj_r_squared", fit.ols.adj_r_squared},
        {"sigma2", fit.ols.sigma2},
        {"rss", fit.ols.rss},
        {"cell_means",
         {{"control_before", fit.cells.control_before},
          {"experimental_before", fit.cells.experimental_before},
          {"control_after", fit.cells.control_after},
          {"experimental_after", fit.cells.experimental_after},
          {"did", fit.cells.did()}}},
        {"interaction", {{"estimate", te.estimate}, {"se", te.se}, {"t", te.t}, {"p", te.p}}},
        {"coefficients", coefs},
    };
}

std::string did_table(const std::vector<std::pair<std::string, DidFit>> &models) {
    std::vector<std::string> terms;
    for (const auto &[name, fit] : models) {
        for (const auto &c : fit.columns) {
            if (std::find(terms.begin(), terms.end(), c) == terms.end()) terms.push_back(c);
        }
    }
    constexpr int w0 = 24;
    constexpr int w = 18;
    std::string out = fmt::format("{:<{}}", "", w0);
    for (const auto &m : models) out += fmt::format("{:>{}}", m.first, w);
    out += "\n";
    for (const auto &term : terms) {
        std::string est = fmt::format("{:<{}}", term, w0);
        std::string se = fmt::format("{:<{}}", "", w0);
        for (const auto &[name, fit] : models) {
            auto it = std::find(fit.columns.begin(), fit.columns.end(), term);
            if (it == fit.columns.end()) {
                est += fmt::format("{:>{}}", "", w);
                se += fmt::format("{:>{}}", "", w);
                continue;
            }
            const auto c = fit.coefficient(static_cast<std::size_t>(it - fit.columns.begin()));
            est += fmt::format("{:>{}}", fixed(c.estimate, 1) + significance_stars(c.p), w);
            se += fmt::format("{:>{}}", "(" + fixed(c.se, 1) + ")", w);
        }
        out += est + "\n" + se + "\n";
    }
    auto stat_line = [&](std::string_view label, auto value) {
        std::string line = fmt::format("{:<{}}", label, w0);
        for (const auto &[name, fit] : models) line += fmt::format("{:>{}}", value(fit), w);
        out += line + "\n";
    };
    stat_line("N", [](const DidFit &f) { return std::to_string(f.ols.n); });
    stat_line("R-squared", [](const DidFit &f) { return fixed(f.ols.r_squared, 3); });
    stat_line("Adj. R-squared", [](const DidFit &f) { return fixed(f.ols.adj_r_squared, 3); });
    out += "Standard errors in parentheses. *** p<0.01, ** p<0.05, * p<0.1\n";
    return out;
}

std::string contrast_csv(const std::vector<ContrastRow> &rows) {
    std::string out = "metric,wave,control_n,control_mean,control_sd,experimental_n,experimental_mean,experimental_sd,"
                      "difference,percent_difference,t,df,p\n";
    for (const auto &r : rows) {
        out += csv::join({std::string(to_string(r.metric)), std::to_string(r.wave), std::to_string(r.control.n),
                          csv_real(r.control.mean), csv_opt(r.control.sd), std::to_string(r.experimental.n),
                          csv_real(r.experimental.mean), csv_opt(r.experimental.sd), csv_real(r.difference),
                          csv_opt(r.percent_difference), r.test ? csv_real(r.test->statistic) : "",
                          r.test ? csv_real(r.test->df) : "", r.test ? csv_real(r.test->p_two_sided) : ""}) +
               "\n";
    }
    return out;
}

std::string contrast_table(const std::vector<ContrastRow> &rows) {
    std::string out = fmt::format("{:<18}{:>6}{:>14}{:>14}{:>14}{:>14}{:>12}{:>10}\n", "", "Wave", "Control",
                                  "Experimental", "Difference", "Difference %", "t", "p");
    for (const auto &r : rows) {
        const int d = digits_for(r.metric);
        out += fmt::format("{:<18}{:>6}{:>14}{:>14}{:>14}{:>14}{:>12}{:>10}\n", metric_label(r.metric), r.wave,
                           fixed(r.control.mean, d), fixed(r.experimental.mean, d), fixed(r.difference, d),
                           opt_fixed(r.percent_difference, 2), r.test ? fixed(r.test->statistic, 3) : "-",
                           r.test ? fixed(r.test->p_two_sided, 4) : "-");
        out += fmt::format("{:<18}{:>6}{:>14}{:>14}\n", "", "", "(" + opt_fixed(r.control.sd, d) + ")",
                           "(" + opt_fixed(r.experimental.sd, d) + ")");
    }
    out += "Means with standard deviations in parentheses; difference is experimental minus control.\n";
    return out;
}

std::string change_csv(const std::vector<ChangeRow> &rows) {
    std::string out = "group,metric,households,wave1_mean,wave2_mean,change,t,df,p\n";
    for (const auto &r : rows) {
        out += csv::join({std::string(to_string(r.group)), std::string(to_string(r.metric)),
                          std::to_string(r.test.n1), csv_real(r.wave1_mean), csv_real(r.wave2_mean),
                          csv_real(r.test.mean_diff), csv_real(r.test.statistic), csv_real(r.test.df),
                          csv_real(r.test.p_two_sided)}) +
               "\n";
    }
    return out;
}

std::string change_table(const std::vector<ChangeRow> &rows) {
    std::string out = fmt::format("{:<14}{:<18}{:>12}{:>12}{:>12}{:>10}{:>10}\n", "Group", "", "Wave 1", "Wave 2",
                                  "Change", "t", "p");
    for (const auto &r : rows) {
        const int d = digits_for(r.metric);
        out += fmt::format("{:<14}{:<18}{:>12}{:>12}{:>12}{:>10}{:>10}\n", to_string(r.group), metric_label(r.metric),
                           fixed(r.wave1_mean, d), fixed(r.wave2_mean, d), fixed(r.test.mean_diff, d),
                           fixed(r.test.statistic, 3), fixed(r.test.p_two_sided, 4));
    }
    out += "Paired t-tests on per-household wave 2 minus wave 1 changes.\n";
    return out;
}

std::string sensitivity_csv(const std::vector<SensitivityRow> &rows) {
    std::string out = "radius,radius_mi,n,n_experimental,n_control,group_estimate,group_se,wave_estimate,wave_se,"
                      "interaction_estimate,interaction_se,interaction_t,interaction_p,r_squared,adj_r_squared\n";
    for (const auto &r : rows) {
        const auto g = r.fit.group_effect();
        const auto t = r.fit.wave_effect();
        const auto i = r.fit.treatment_effect();
        out += csv::join({r.radius.label(), csv_real(r.radius.miles()), std::to_string(r.fit.ols.n),
                          std::to_string(r.fit.n_experimental), std::to_string(r.fit.n_control), csv_real(g.estimate),
                          csv_real(g.se), csv_real(t.estimate), csv_real(t.se), csv_real(i.estimate), csv_real(i.se),
                          csv_real(i.t), csv_real(i.p), csv_real(r.fit.ols.r_squared),
                          csv_real(r.fit.ols.adj_r_squared)}) +
               "\n";
    }
    return out;
}

std::string sensitivity_table(const std::vector<SensitivityRow> &rows) {
    constexpr int w0 = 24;
    constexpr int w = 22;
    std::string out = fmt::format("{:<{}}", "Catchment radius", w0);
    for (const auto &r : rows) out += fmt::format("{:>{}}", length_label(r.radius), w);
    out += "\n";
    auto coef_lines = [&](std::string_view label, auto pick) {
        std::string est = fmt::format("{:<{}}", label, w0);
        std::string se = fmt::format("{:<{}}", "", w0);
        for (const auto &r : rows) {
            const Coefficient c = pick(r.fit);
            est += fmt::format("{:>{}}", fixed(c.estimate, 1) + significance_stars(c.p), w);
            se += fmt::format("{:>{}}", "(" + fixed(c.se, 1) + ")", w);
        }
        out += est + "\n" + se + "\n";
    };
    coef_lines("Wave", [](const DidFit &f) { return f.wave_effect(); });
    coef_lines("Experimental - control", [](const DidFit &f) { return f.group_effect(); });
    coef_lines("Wave x group", [](const DidFit &f) { return f.treatment_effect(); });
    auto count_line = [&](std::string_view label, auto value) {
        std::string line = fmt::format("{:<{}}", label, w0);
        for (const auto &r : rows) line += fmt::format("{:>{}}", value(r.fit), w);
        out += line + "\n";
    };
    count_line("N", [](const DidFit &f) { return std::to_string(f.ols.n); });
    count_line("Experimental N", [](const DidFit &f) { return std::to_string(f.n_experimental); });
    count_line("Adj. R-squared", [](const DidFit &f) { return fixed(f.ols.adj_r_squared, 3); });
    out += "Covariate coefficients omitted. *** p<0.01, ** p<0.05, * p<0.1\n";
    return out;
}

Json lifecycle_json(const LifecycleReport &report) {
    auto mode_json = [](const ModeFactors &f) {
        Json j{{"mode", std::string(to_string(f.mode))},
               {"g_per_passenger_mile", f.g_per_passenger_mile},
               {"avg_trip_miles", f.avg_trip_miles},
               {"per_trip_operational_g", f.per_trip_operational()},
               {"scale_factor", f.scale_factor},
               {"scale_below_one", f.scale_factor < 1.0},
               {"per_trip_lifecycle_g", f.per_trip_lifecycle()}};
        if (f.components) {
            const auto &c = *f.components;
            j["components"] = Json{{"vehicle_operation", c.vehicle_operation},
                                   {"propulsion_electricity", c.propulsion_electricity},
                                   {"energy_production", c.energy_production},
                                   {"vehicle_manufacturing_maintenance", c.vehicle_manufacturing_maintenance},
                                   {"infrastructure_construction_operation", c.infrastructure_construction_operation},
                                   {"operational", c.operational()},
                                   {"gross", c.gross()}};
        }
        return j;
    };
    Json transit = Json::array();
    for (const auto &r : report.transit) {
        transit.push_back(Json{{"group", std::string(to_string(r.group))},
                               {"households", r.households},
                               {"wave1_mean_g", r.wave1_mean},
                               {"wave2_mean_g", r.wave2_mean},
                               {"difference_g", r.difference},
                               {"percent_difference", optional_json(r.percent_difference)},
                               {"paired_test", test_json(r.paired)}});
    }
    Json j{{"bus", mode_json(report.factors.bus)}, {"rail", mode_json(report.factors.rail)}, {"transit", transit}};
    j["rail_trip_change"] = optional_json(report.rail_trip_change);
    j["rail_only_bound_g"] = optional_json(report.rail_bound);
    if (report.net) {
        j["net_effect"] = Json{{"vehicle_effect_g", report.net->vehicle_effect},
                               {"transit_offset_g", report.net->transit_offset},
                               {"net_g", report.net->net},
                               {"offset_share", optional_json(report.net->offset_share)}};
    } else {
        j["net_effect"] = nullptr;
    }
    return j;
}

std::string lifecycle_table(const LifecycleReport &report) {
    std::string out = fmt::format("{:<8}{:>14}{:>12}{:>16}{:>10}{:>16}\n", "Mode", "g/pass-mile", "Trip mi",
                                  "Operational g", "Scale", "Life-cycle g");
    for (const auto *f : {&report.factors.rail, &report.factors.bus}) {
        out += fmt::format("{:<8}{:>14}{:>12}{:>16}{:>10}{:>16}\n", to_string(f->mode), fixed(f->g_per_passenger_mile, 1),
                           fixed(f->avg_trip_miles, 2), fixed(f->per_trip_operational(), 1),
                           fixed(f->scale_factor, 2), fixed(f->per_trip_lifecycle(), 1));
    }
    if (!report.transit.empty()) {
        out += "\n";
        out += fmt::format("{:<14}{:>12}{:>12}{:>12}{:>12}{:>10}\n", "Group", "Wave 1 g", "Wave 2 g", "Change g",
                           "Change %", "p");
        for (const auto &r : report.transit) {
            out += fmt::format("{:<14}{:>12}{:>12}{:>12}{:>12}{:>10}\n", to_string(r.group), fixed(r.wave1_mean, 1),
                               fixed(r.wave2_mean, 1), fixed(r.difference, 1), opt_fixed(r.percent_difference, 2),
                               r.paired ? fixed(r.paired->p_two_sided, 4) : "-");
        }
    }
    if (report.rail_bound) out += fmt::format("\nRail-only bound: {} g/day\n", fixed(*report.rail_bound, 1));
    if (report.net) {
        out += fmt::format("Vehicle effect {} g/day, transit offset {} g/day, net {} g/day", fixed(report.net->vehicle_effect, 1),
                           fixed(report.net->transit_offset, 1), fixed(report.net->net, 1));
        if (report.net->offset_share) out += fmt::format(", offset share {}%", fixed(100.0 * *report.net->offset_share, 2));
        out += "\n";
    }
    return out;
}

Json recovery_json(const sim::RecoveryReport &report, const sim::SimConfig &cfg) {
    return Json{{"replications", report.replications},
                {"households_per_group", report.households_per_group},
                {"true_effect", report.true_effect},
                {"mean_estimate", report.mean_estimate},
                {"bias", report.bias},
                {"relative_bias", report.true_effect != 0.0 ? Json(report.bias / std::fabs(report.true_effect))
                                                            : Json(nullptr)},
                {"rmse", report.rmse},
                {"empirical_sd", report.empirical_sd},
                {"mean_se", report.mean_se},
                {"coverage_95", report.coverage},
                {"rejection_rate_05", report.rejection_rate},
                {"sim_config", sim_config_json(cfg)}};
}

std::string with_manifest_comment(const RunManifest &manifest, const std::string &csv_text) {
    return fmt::format("# manifest_sha256={}\n{}", manifest.digest(), csv_text);
}

} // namespace railco2::report
