// railco2: command-line driver for the household CO2 difference-in-differences pipeline.

#include "railco2/config.hpp"
#include "railco2/dataio.hpp"
#include "railco2/error.hpp"
#include "railco2/evaluate.hpp"
#include "railco2/lifecycle.hpp"
#include "railco2/panel.hpp"
#include "railco2/report.hpp"
#include "railco2/simulate.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using railco2::report::Json;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct Flags {
    std::string config;
    std::string out;
    std::string radii;
    std::string model;
    std::string ttest;
    std::optional<std::uint64_t> seed;
    std::size_t reps = 500;
};

// Raised for bad flag values so they exit with the usage status.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void write_text(const fs::path &path, const std::string &text) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw railco2::Error(railco2::ErrorCode::Io, fmt::format("cannot write {}", path.string()));
    os << text;
}

class Output {
public:
    explicit Output(const std::string &dir) : dir_(dir) {
        if (dir_.empty()) return;
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw railco2::Error(railco2::ErrorCode::Io, fmt::format("cannot create {}: {}", dir, ec.message()));
    }

    bool enabled() const { return !dir_.empty(); }

    void text(const std::string &name, const std::string &body) const {
        if (enabled()) write_text(dir_ / name, body);
    }
    void json(const std::string &name, const Json &j) const { text(name, j.dump(2) + "\n"); }

private:
    fs::path dir_;
};

struct Loaded {
    railco2::RunConfig cfg;
    railco2::RawSurvey survey;
    railco2::FactorTables factors;
    railco2::StationSet stations;
};

railco2::RunConfig run_config(const Flags &f) {
    if (f.config.empty()) throw UsageError("--config is required");
    auto cfg = railco2::load_run_config(f.config);
    try {
        if (!f.ttest.empty()) cfg.ttest = railco2::parse_ttest_variant(f.ttest);
        if (!f.radii.empty()) cfg.sensitivity_radii = railco2::parse_length_list(f.radii);
    } catch (const railco2::Error &e) {
        throw UsageError(e.detail());
    }
    if (f.seed) cfg.seed = *f.seed;
    return cfg;
}

Loaded load(const Flags &f) {
    Loaded l;
    l.cfg = run_config(f);
    const auto &in = l.cfg.inputs;
    auto need = [](const fs::path &p, std::string_view key) {
        if (p.empty()) {
            throw railco2::Error(railco2::ErrorCode::InvalidConfig, fmt::format("input.{} is not set", key));
        }
    };
    need(in.households, "households");
    need(in.vehicles, "vehicles");
    need(in.odometer, "odometer");
    need(in.trips, "trips");
    need(in.factors_gasoline, "factors_gasoline");
    need(in.factors_electrified, "factors_electrified");
    need(in.stations, "stations");
    l.survey = railco2::load_survey({in.households, in.vehicles, in.odometer, in.trips});
    l.factors = railco2::load_factor_tables(in.factors_gasoline, in.factors_electrified);
    l.stations = railco2::load_stations(in.stations);
    return l;
}

railco2::report::RunManifest manifest_for(const std::string &command, const Loaded &l) {
    auto m = railco2::report::make_manifest(command, l.cfg);
    m.row_counts = l.survey.row_counts;
    m.stage_counts.emplace_back("households_loaded", l.survey.households.size());
    m.stage_counts.emplace_back("vehicles_loaded", l.survey.vehicles.size());
    m.timestamp = railco2::report::utc_timestamp();
    return m;
}

void add_panel_counts(railco2::report::RunManifest &m, const railco2::BalancedPanel &panel) {
    m.stage_counts.emplace_back("panel_households", panel.households());
    m.stage_counts.emplace_back("panel_observations", panel.observations.size());
}

Json with_manifest(const railco2::report::RunManifest &m, Json body) {
    body["manifest"] = m.embedded();
    return body;
}

std::vector<railco2::NamedSpec> selected_models(const std::string &model) {
    const auto ladder = railco2::model_ladder();
    if (model.empty() || model == "all") return ladder;
    if (model.size() == 1 && model[0] >= '1' && model[0] <= '4') {
        return {ladder[static_cast<std::size_t>(model[0] - '1')]};
    }
    throw UsageError(fmt::format("--model must be 1, 2, 3, 4 or all (got \"{}\")", model));
}

std::string model_file(const std::string &name) {
    // "Model 4" -> did_model4.json
    return fmt::format("did_model{}.json", name.substr(name.find(' ') + 1));
}

int cmd_validate(const Flags &f) {
    const auto l = load(f);
    const auto report = railco2::validate_dataset(l.survey, l.factors, l.stations, l.cfg);
    const Output out(f.out);
    auto m = manifest_for("validate", l);
    out.json("validation.json", with_manifest(m, railco2::report::validation_json(report)));
    out.json("manifest.json", m.to_json());
    for (const auto &i : report.issues) {
        fmt::print("{} {} {} wave {}: {}\n", railco2::to_string(i.severity), railco2::to_string(i.kind),
                   i.household_id.empty() ? "-" : i.household_id, i.wave, i.detail);
    }
    fmt::print("{} issue(s), {}\n", report.issues.size(), report.has_fatal() ? "fatal" : "no fatal issues");
    return report.has_fatal() ? kExitFailure : 0;
}

int cmd_panel(const Flags &f) {
    const auto l = load(f);
    const auto panel = railco2::build_balanced_panel(l.survey, l.factors, l.stations, l.cfg);
    const Output out(f.out);
    auto m = manifest_for("panel", l);
    add_panel_counts(m, panel);
    out.text("panel_ledger.csv", railco2::report::with_manifest_comment(m, railco2::format_ledger_csv(panel.ledger)));
    out.text("panel.csv", railco2::report::with_manifest_comment(m, railco2::format_panel_csv(panel)));
    out.json("manifest.json", m.to_json());
    fmt::print("{}", railco2::report::ledger_table(panel.ledger));
    return 0;
}

int cmd_emissions(const Flags &f) {
    const auto l = load(f);
    const auto panel = railco2::build_balanced_panel(l.survey, l.factors, l.stations, l.cfg);
    const Output out(f.out);
    auto m = manifest_for("emissions", l);
    add_panel_counts(m, panel);
    m.stage_counts.emplace_back("vehicle_emissions", panel.vehicle_emissions.size());
    out.text("emissions.csv",
             railco2::report::with_manifest_comment(m, railco2::format_emissions_csv(panel.vehicle_emissions)));
    out.text("panel.csv", railco2::report::with_manifest_comment(m, railco2::format_panel_csv(panel)));
    out.json("manifest.json", m.to_json());
    fmt::print("{} vehicle-wave emission rows for {} households\n", panel.vehicle_emissions.size(), panel.households());
    return 0;
}

struct ContrastTables {
    std::vector<railco2::ContrastRow> co2;
    std::vector<railco2::ContrastRow> travel;
    std::vector<railco2::report::ChangeRow> change;
};

ContrastTables contrasts(const railco2::BalancedPanel &panel, railco2::TTestVariant variant) {
    using railco2::Metric;
    ContrastTables t;
    for (int wave = 1; wave <= 2; ++wave) t.co2.push_back(railco2::group_contrast_table(panel, Metric::Co2, wave, variant));
    for (auto metric : {Metric::Vmt, Metric::CarTrips, Metric::BusTrips, Metric::TrainTrips}) {
        for (int wave = 1; wave <= 2; ++wave) {
            t.travel.push_back(railco2::group_contrast_table(panel, metric, wave, variant));
        }
    }
    for (auto group : {railco2::Group::Control, railco2::Group::Experimental}) {
        for (auto metric : {Metric::Co2, Metric::Vmt, Metric::CarTrips, Metric::BusTrips, Metric::TrainTrips}) {
            railco2::report::ChangeRow row;
            row.group = group;
            row.metric = metric;
            double sums[2] = {0.0, 0.0};
            std::size_t n[2] = {0, 0};
            for (const auto &obs : panel.observations) {
                if (obs.group != static_cast<int>(group)) continue;
                sums[obs.wave - 1] += railco2::metric_value(obs, metric);
                ++n[obs.wave - 1];
            }
            row.wave1_mean = n[0] ? sums[0] / static_cast<double>(n[0]) : 0.0;
            row.wave2_mean = n[1] ? sums[1] / static_cast<double>(n[1]) : 0.0;
            try {
                row.test = railco2::within_group_change(panel, group, metric);
            } catch (const railco2::Error &e) {
                if (e.code() != railco2::ErrorCode::DegenerateVariance &&
                    e.code() != railco2::ErrorCode::InsufficientSample) {
                    throw;
                }
                continue;
            }
            t.change.push_back(row);
        }
    }
    return t;
}

int cmd_contrast(const Flags &f) {
    const auto l = load(f);
    const auto panel = railco2::build_balanced_panel(l.survey, l.factors, l.stations, l.cfg);
    const auto t = contrasts(panel, l.cfg.ttest);
    const Output out(f.out);
    auto m = manifest_for("contrast", l);
    add_panel_counts(m, panel);
    using railco2::report::with_manifest_comment;
    out.text("contrast_co2.csv", with_manifest_comment(m, railco2::report::contrast_csv(t.co2)));
    out.text("contrast_travel.csv", with_manifest_comment(m, railco2::report::contrast_csv(t.travel)));
    out.text("contrast_change.csv", with_manifest_comment(m, railco2::report::change_csv(t.change)));
    out.json("manifest.json", m.to_json());
    fmt::print("{}\n{}\n{}", railco2::report::contrast_table(t.co2), railco2::report::contrast_table(t.travel),
               railco2::report::change_table(t.change));
    return 0;
}

std::vector<std::pair<std::string, railco2::DidFit>> fit_models(const railco2::BalancedPanel &panel,
                                                                 const std::string &model) {
    std::vector<std::pair<std::string, railco2::DidFit>> fits;
    for (const auto &spec : selected_models(model)) fits.emplace_back(spec.name, railco2::did_fit(panel, spec.spec));
    return fits;
}

int cmd_did(const Flags &f) {
    const auto l = load(f);
    const auto panel = railco2::build_balanced_panel(l.survey, l.factors, l.stations, l.cfg);
    const auto fits = fit_models(panel, f.model);
    const Output out(f.out);
    auto m = manifest_for("did", l);
    add_panel_counts(m, panel);
    for (const auto &[name, fit] : fits) out.json(model_file(name), with_manifest(m, railco2::report::did_json(name, fit)));
    const auto table = railco2::report::did_table(fits);
    out.text("did_table.txt", table);
    out.json("manifest.json", m.to_json());
    fmt::print("{}", table);
    return 0;
}

railco2::report::LifecycleReport lifecycle_report(const railco2::BalancedPanel &panel,
                                                  const railco2::LifecycleInputs &factors,
                                                  const railco2::CovariateSpec &spec) {
    railco2::report::LifecycleReport r;
    r.factors = factors;
    r.transit = railco2::transit_emission_table(panel, factors);
    double sums[2] = {0.0, 0.0};
    std::size_t n[2] = {0, 0};
    for (const auto &obs : panel.observations) {
        if (obs.group != 1) continue;
        sums[obs.wave - 1] += obs.train_trips;
        ++n[obs.wave - 1];
    }
    if (n[0] && n[1]) {
        r.rail_trip_change = sums[1] / static_cast<double>(n[1]) - sums[0] / static_cast<double>(n[0]);
        r.rail_bound = *r.rail_trip_change * factors.rail.per_trip_lifecycle();
        const auto fit = railco2::did_fit(panel, spec);
        r.net = railco2::net_effect_summary(fit.treatment_effect().estimate, *r.rail_bound);
    }
    return r;
}

int cmd_lifecycle(const Flags &f) {
    const auto l = load(f);
    if (!l.cfg.inputs.lifecycle) {
        throw railco2::Error(railco2::ErrorCode::InvalidConfig, "input.lifecycle is not set");
    }
    const auto factors = railco2::load_lifecycle(*l.cfg.inputs.lifecycle);
    const auto panel = railco2::build_balanced_panel(l.survey, l.factors, l.stations, l.cfg);
    const auto r = lifecycle_report(panel, factors, l.cfg.covariates);
    const Output out(f.out);
    auto m = manifest_for("lifecycle", l);
    add_panel_counts(m, panel);
    out.json("lifecycle.json", with_manifest(m, railco2::report::lifecycle_json(r)));
    out.json("manifest.json", m.to_json());
    fmt::print("{}", railco2::report::lifecycle_table(r));
    return 0;
}

int cmd_sensitivity(const Flags &f) {
    const auto l = load(f);
    const auto panel = railco2::build_balanced_panel(l.survey, l.factors, l.stations, l.cfg);
    const auto rows = railco2::sensitivity_sweep(panel, l.cfg.sensitivity_radii, l.cfg.covariates);
    const Output out(f.out);
    auto m = manifest_for("sensitivity", l);
    add_panel_counts(m, panel);
    out.text("sensitivity.csv", railco2::report::with_manifest_comment(m, railco2::report::sensitivity_csv(rows)));
    const auto table = railco2::report::sensitivity_table(rows);
    out.text("sensitivity_table.txt", table);
    out.json("manifest.json", m.to_json());
    fmt::print("{}", table);
    return 0;
}

railco2::sim::SimConfig sim_config(const Flags &f) {
    railco2::sim::SimConfig cfg;
    if (!f.config.empty()) cfg = railco2::sim::sim_config_from(railco2::ConfigFile::read(f.config));
    if (f.seed) cfg.seed = *f.seed;
    return cfg;
}

int cmd_simulate(const Flags &f) {
    if (f.out.empty()) throw UsageError("simulate needs --out");
    const auto cfg = sim_config(f);
    const auto data = railco2::sim::generate_panel(cfg);
    railco2::sim::write_dataset(data, cfg, f.out);
    auto m = railco2::report::make_manifest("simulate", railco2::RunConfig{});
    m.config = railco2::report::sim_config_json(cfg);
    m.stage_counts.emplace_back("households", data.survey.households.size());
    m.stage_counts.emplace_back("vehicles", data.survey.vehicles.size());
    m.stage_counts.emplace_back("odometer_readings", data.survey.odometer.size());
    m.timestamp = railco2::report::utc_timestamp();
    Output(f.out).json("manifest.json", m.to_json());
    fmt::print("wrote {} household-waves to {}\n", data.survey.households.size(), f.out);
    return 0;
}

int cmd_recover(const Flags &f) {
    const auto cfg = sim_config(f);
    railco2::RunConfig run;
    if (!f.config.empty()) run = railco2::load_run_config(f.config);
    railco2::CovariateSpec spec = run.covariates;
    if (!f.model.empty()) {
        const auto models = selected_models(f.model);
        if (models.size() != 1) throw UsageError("recover takes a single --model");
        spec = models.front().spec;
    }
    const auto report = railco2::sim::recovery_experiment(cfg, f.reps, run, spec);
    auto m = railco2::report::make_manifest("recover", run);
    m.config["sim"] = railco2::report::sim_config_json(cfg);
    m.config["covariates"] = spec.label();
    m.stage_counts.emplace_back("replications", report.replications);
    m.timestamp = railco2::report::utc_timestamp();
    const Output out(f.out);
    out.json("recovery.json", with_manifest(m, railco2::report::recovery_json(report, cfg)));
    out.json("manifest.json", m.to_json());
    fmt::print("replications {}\ntrue effect {:.1f}\nmean estimate {:.1f}\nbias {:.2f}\nrmse {:.1f}\n"
               "empirical sd {:.1f}\nmean se {:.1f}\ncoverage {:.3f}\nrejection rate {:.3f}\n",
               report.replications, report.true_effect, report.mean_estimate, report.bias, report.rmse,
               report.empirical_sd, report.mean_se, report.coverage, report.rejection_rate);
    return 0;
}

int cmd_report(const Flags &f) {
    const auto l = load(f);
    const auto validation = railco2::validate_dataset(l.survey, l.factors, l.stations, l.cfg);
    if (validation.has_fatal()) {
        for (const auto &i : validation.issues) {
            if (i.severity == railco2::Severity::Fatal) fmt::print(stderr, "{}: {}\n", railco2::to_string(i.kind), i.detail);
        }
        return kExitFailure;
    }
    const auto panel = railco2::build_balanced_panel(l.survey, l.factors, l.stations, l.cfg);
    const auto t = contrasts(panel, l.cfg.ttest);
    const auto fits = fit_models(panel, f.model);
    const auto sens = railco2::sensitivity_sweep(panel, l.cfg.sensitivity_radii, l.cfg.covariates);

    auto m = manifest_for("report", l);
    add_panel_counts(m, panel);
    m.stage_counts.emplace_back("vehicle_emissions", panel.vehicle_emissions.size());
    const Output out(f.out);
    using railco2::report::with_manifest_comment;
    out.json("validation.json", with_manifest(m, railco2::report::validation_json(validation)));
    out.text("panel_ledger.csv", with_manifest_comment(m, railco2::format_ledger_csv(panel.ledger)));
    out.text("panel.csv", with_manifest_comment(m, railco2::format_panel_csv(panel)));
    out.text("emissions.csv", with_manifest_comment(m, railco2::format_emissions_csv(panel.vehicle_emissions)));
    out.text("contrast_co2.csv", with_manifest_comment(m, railco2::report::contrast_csv(t.co2)));
    out.text("contrast_travel.csv", with_manifest_comment(m, railco2::report::contrast_csv(t.travel)));
    out.text("contrast_change.csv", with_manifest_comment(m, railco2::report::change_csv(t.change)));
    for (const auto &[name, fit] : fits) out.json(model_file(name), with_manifest(m, railco2::report::did_json(name, fit)));
    out.text("sensitivity.csv", with_manifest_comment(m, railco2::report::sensitivity_csv(sens)));

    std::string text;
    text += "Households retained\n" + railco2::report::ledger_table(panel.ledger) + "\n";
    text += "Household daily CO2 by group\n" + railco2::report::contrast_table(t.co2) + "\n";
    text += "Travel by group\n" + railco2::report::contrast_table(t.travel) + "\n";
    text += "Within-group change\n" + railco2::report::change_table(t.change) + "\n";
    text += "Difference-in-differences\n" + railco2::report::did_table(fits) + "\n";
    if (l.cfg.inputs.lifecycle) {
        const auto factors = railco2::load_lifecycle(*l.cfg.inputs.lifecycle);
        const auto r = lifecycle_report(panel, factors, l.cfg.covariates);
        out.json("lifecycle.json", with_manifest(m, railco2::report::lifecycle_json(r)));
        text += "Transit life-cycle emissions\n" + railco2::report::lifecycle_table(r) + "\n";
    }
    text += "Catchment sensitivity\n" + railco2::report::sensitivity_table(sens);
    out.text("report.txt", text);
    out.json("manifest.json", m.to_json());
    fmt::print("{}", text);
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Household vehicle CO2 difference-in-differences toolkit"};
    app.set_version_flag("--version", std::string(RAILCO2_VERSION));
    app.require_subcommand(1);

    Flags flags;
    struct Sub {
        const char *name;
        const char *help;
        int (*run)(const Flags &);
    };
    const std::vector<Sub> subs{
        {"validate", "Check inputs for schema and data-quality issues", cmd_validate},
        {"panel", "Screen households and write the exclusion ledger", cmd_panel},
        {"emissions", "Write per-vehicle and per-household daily CO2", cmd_emissions},
        {"contrast", "Group contrasts and within-group changes", cmd_contrast},
        {"did", "Fit the difference-in-differences model ladder", cmd_did},
        {"lifecycle", "Transit life-cycle emissions and net effect", cmd_lifecycle},
        {"sensitivity", "Refit across catchment radii", cmd_sensitivity},
        {"simulate", "Generate a synthetic dataset", cmd_simulate},
        {"recover", "Monte Carlo estimator recovery", cmd_recover},
        {"report", "Run the full pipeline and write every output", cmd_report},
    };
    std::vector<std::pair<CLI::App *, int (*)(const Flags &)>> commands;
    for (const auto &s : subs) {
        auto *sub = app.add_subcommand(s.name, s.help);
        sub->add_option("--config", flags.config, "Run configuration file");
        sub->add_option("--out", flags.out, "Output directory");
        sub->add_option("--radii", flags.radii, "Catchment radii, e.g. 0.5mi,1km,0.75mi");
        sub->add_option("--model", flags.model, "Model 1, 2, 3, 4 or all");
        sub->add_option("--ttest", flags.ttest, "welch or pooled");
        sub->add_option("--seed", flags.seed, "Random seed");
        sub->add_option("--reps", flags.reps, "Monte Carlo replications")->check(CLI::PositiveNumber);
        commands.emplace_back(sub, s.run);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        std::cerr << app.help();
        return kExitUsage;
    }

    for (const auto &[sub, run] : commands) {
        if (!sub->parsed()) continue;
        try {
            return run(flags);
        } catch (const UsageError &e) {
            std::cerr << "error: " << e.what() << "\n\n" << sub->help();
            return kExitUsage;
        } catch (const railco2::Error &e) {
            std::cerr << e.what() << "\n";
            return kExitFailure;
        } catch (const std::exception &e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitFailure;
        }
    }
    return kExitUsage;
}
