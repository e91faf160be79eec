#pragma once

#include "railco2/config.hpp"
#include "railco2/panel.hpp"
#include "railco2/stats.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace railco2 {

enum class TransitMode { Bus, Rail };

std::string_view to_string(TransitMode mode);

// Per passenger-mile grams CO2 by source. The first three are operational;
// manufacturing and infrastructure make up system building and maintenance.
struct LifecycleComponents {
    double vehicle_operation = 0.0;
    double propulsion_electricity = 0.0;
    double energy_production = 0.0;
    double vehicle_manufacturing_maintenance = 0.0;
    double infrastructure_construction_operation = 0.0;

    double operational() const { return vehicle_operation + propulsion_electricity + energy_production; }
    double gross() const {
        return operational() + vehicle_manufacturing_maintenance + infrastructure_construction_operation;
    }
};

double per_trip_operational(double g_per_passenger_mile, double avg_trip_miles);

// gross / operational. Throws ZeroOperational.
double scale_factor(const LifecycleComponents &components);

enum class ScalePolicy { RequireAtLeastOne, AllowBelowOne };

double per_trip_lifecycle(double operational_g_per_trip, double scale,
                          ScalePolicy policy = ScalePolicy::RequireAtLeastOne);

struct ModeFactors {
    TransitMode mode = TransitMode::Rail;
    double g_per_passenger_mile = 0.0;
    double avg_trip_miles = 0.0;
    double scale_factor = 1.0;
    std::optional<LifecycleComponents> components; // when present, scale_factor was derived from it

    double per_trip_operational() const;
    double per_trip_lifecycle() const;
};

struct LifecycleInputs {
    ModeFactors bus;
    ModeFactors rail;
};

// lifecycle.csv: one row per mode. Component columns are optional; a row with
// all five components recomputes its scale factor from them.
LifecycleInputs parse_lifecycle(std::string_view csv_text);
LifecycleInputs load_lifecycle(const std::filesystem::path &path);

double household_transit_co2(double bus_trips_per_day, double rail_trips_per_day, const ModeFactors &bus,
                             const ModeFactors &rail);

struct NetEffect {
    double vehicle_effect = 0.0;
    double transit_offset = 0.0;
    double net = 0.0;
    std::optional<double> offset_share; // |transit / vehicle|; empty when the vehicle effect is zero
};

NetEffect net_effect_summary(double did_effect, double transit_delta);

// One group's before/after household transit emissions with a paired test.
struct TransitChangeRow {
    Group group = Group::Control;
    std::size_t households = 0;
    double wave1_mean = 0.0;
    double wave2_mean = 0.0;
    double difference = 0.0;
    std::optional<double> percent_difference;
    std::optional<stats::TestResult> paired; // empty when the differences are constant
};

std::vector<TransitChangeRow> transit_emission_table(const BalancedPanel &panel, const LifecycleInputs &factors);

} // namespace railco2
