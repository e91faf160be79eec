#pragma once

#include "railco2/config.hpp"
#include "railco2/dataio.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace railco2::sim {

enum class NoiseShape { Gamma, Normal };

struct DistanceRange {
    double min_mi = 0.0;
    double max_mi = 0.0;
};

struct SimConfig {
    std::size_t households_per_group = 80;

    // Expected household daily CO2 (g): control/experimental before opening,
    // the shared secular change, and the treatment effect on the experimental
    // group after opening.
    double mu_control_before = 9992.7;
    double mu_experimental_before = 9371.1;
    double secular_change = 823.2;
    double treatment_effect = -2316.8;

    double noise_sd = 8700.0;
    // Gamma noise is shifted to start at the household's summed start rates so
    // every target is attainable; normal noise fails with InfeasibleTarget
    // when a draw falls below that floor.
    NoiseShape noise_shape = NoiseShape::Gamma;

    std::array<double, 4> vehicle_count_probs{0.0, 0.86, 0.12, 0.02};
    std::array<double, 6> income_probs{42.0 / 312, 77.0 / 312, 71.0 / 312, 48.0 / 312, 35.0 / 312, 39.0 / 312};
    double income_missing_prob = 0.025;

    double mean_run_g_per_mile = 380.0;
    double mean_start_g_per_day = 300.0;
    double truck_share = 0.25;
    double motorcycle_share = 0.01;
    double electrified_share = 0.04;
    double ldt_split_threshold_lb = 3750.0;

    DistanceRange experimental_distance{0.05, 0.45};
    DistanceRange control_distance{0.55, 1.5};

    double car_trips_mean = 4.5;
    double bus_trips_mean = 0.46;
    double train_trips_mean = 0.03;
    double train_trip_change = 0.15; // added for the experimental group after opening

    std::array<int, 2> calendar_years{2011, 2012};
    int survey_days = 7;
    std::uint64_t seed = 20111001;

    double mu_control_after() const { return mu_control_before + secular_change; }
    double mu_experimental_after() const { return mu_experimental_before + secular_change + treatment_effect; }
    // Sets the four expected cell means directly (control/experimental x before/after).
    void set_cell_means(double control_before, double experimental_before, double control_after,
                        double experimental_after);
    void check() const;
};

// Reads `sim.*` keys; `run.seed` is used when `sim.seed` is absent.
SimConfig sim_config_from(const ConfigFile &file);

struct HouseholdTarget {
    std::string household_id;
    int wave = 1;
    int group = 0;
    double target_co2_g = 0.0;
};

struct SyntheticDataset {
    RawSurvey survey;
    FactorTables factors;
    StationSet stations;
    std::vector<HouseholdTarget> targets;
};

// Deterministic in (cfg, cfg.seed). Throws InfeasibleTarget.
SyntheticDataset generate_panel(const SimConfig &cfg);

// Writes the CSV inputs plus a run.conf that points at them.
void write_dataset(const SyntheticDataset &data, const SimConfig &cfg, const std::filesystem::path &dir);

// Counter-based seed for replication `index` of a master seed.
std::uint64_t replication_seed(std::uint64_t master, std::uint64_t index);

struct RecoveryReport {
    std::size_t replications = 0;
    std::size_t households_per_group = 0;
    double true_effect = 0.0;
    double mean_estimate = 0.0;
    double bias = 0.0;
    double rmse = 0.0;
    double empirical_sd = 0.0;
    double mean_se = 0.0;
    double coverage = 0.0;       // share of 95% intervals containing the true effect
    double rejection_rate = 0.0; // share with p < 0.05
    std::vector<double> estimates;
};

// generate -> screen -> emissions -> DID fit per replication. Throws
// InsufficientSample when replications < 2.
RecoveryReport recovery_experiment(const SimConfig &cfg, std::size_t replications, const RunConfig &run,
                                   const CovariateSpec &spec);

} // namespace railco2::sim
