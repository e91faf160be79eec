#pragma once

#include "railco2/config.hpp"
#include "railco2/dataio.hpp"
#include "railco2/emissions.hpp"

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace railco2 {

// Ledger precedence follows declaration order.
enum class ExclusionReason { MissingVehicleInfo, IncompleteVmt, NoFactorAvailable, Unmatched };

inline constexpr std::array<ExclusionReason, 4> kExclusionReasons{
    ExclusionReason::MissingVehicleInfo, ExclusionReason::IncompleteVmt, ExclusionReason::NoFactorAvailable,
    ExclusionReason::Unmatched};

std::string_view to_string(ExclusionReason reason);

enum class Group { Control = 0, Experimental = 1 };

std::string_view to_string(Group group);

struct GroupLabel {
    Group group = Group::Control;
    double distance_to_nearest_station_mi = 0.0;
};

inline constexpr double kEarthRadiusMiles = 3958.8;

double haversine_miles(double lat1, double lon1, double lat2, double lon2);

// Minimum great-circle distance from a home to any station. Throws EmptyStationSet.
double station_distance(double home_lat, double home_lon, const StationSet &stations);

// Experimental iff distance <= radius (inclusive boundary).
GroupLabel assign_group(double distance_mi, const Length &radius);

struct DayReading {
    int day_index = 0;
    double reading_miles = 0.0;
};

// Average daily miles from end-of-day odometer readings, using the longest
// non-decreasing run of readings (earliest days win ties). Throws
// TooFewReadings or NonMonotone.
double daily_average_vmt(std::span<const DayReading> readings, int min_readings = 3);

// One household in one wave with its child rows gathered.
struct HouseholdWaveBundle {
    HouseholdRecord household;
    std::vector<VehicleRecord> vehicles;                          // sorted by vehicle_id
    std::map<std::string, std::vector<DayReading>> odometer;      // by vehicle_id, sorted by day
    std::vector<TripDayRecord> trips;                             // sorted by day
};

std::vector<HouseholdWaveBundle> bundle_survey(const RawSurvey &survey);

struct ScreenOutcome {
    std::optional<ExclusionReason> reason; // empty means the household-wave passed
    std::string detail;
    std::vector<VehicleEmission> vehicles; // filled only on pass

    bool passed() const { return !reason.has_value(); }
};

// Never throws; the first triggered reason wins.
ScreenOutcome screen_household_wave(const HouseholdWaveBundle &bundle, const FactorTables &factors,
                                    const RunConfig &cfg);

struct ExclusionLedger {
    // counts[wave - 1][reason]
    std::array<std::array<std::size_t, 4>, 2> counts{};
    std::array<std::size_t, 2> input{};
    std::array<std::size_t, 2> retained{};

    std::size_t at(int wave, ExclusionReason reason) const {
        return counts.at(static_cast<std::size_t>(wave - 1)).at(static_cast<std::size_t>(reason));
    }
    std::size_t dropped(int wave) const;
};

struct PanelObservation {
    std::string household_id;
    int wave = 1;                 // survey wave (1 or 2)
    int group = 0;                // 1 = experimental
    double distance_mi = 0.0;     // wave-1 home to nearest station
    int veh_cnt = 0;
    int ppl_cnt = 1;
    std::optional<int> income_bracket;
    double daily_vmt = 0.0;
    double car_trips = 0.0;
    double bus_trips = 0.0;
    double train_trips = 0.0;
    double daily_co2_g = 0.0;

    int after() const { return wave == 2 ? 1 : 0; }
};

struct BalancedPanel {
    std::vector<PanelObservation> observations; // sorted by (household_id, wave)
    std::vector<VehicleEmission> vehicle_emissions;
    ExclusionLedger ledger;
    Length radius;

    std::size_t households() const { return observations.size() / 2; }
};

// Throws EmptyStationSet or EmptyPanel.
BalancedPanel build_balanced_panel(const RawSurvey &survey, const FactorTables &factors,
                                   const StationSet &stations, const RunConfig &cfg);

// Re-label groups for a different catchment radius; emissions are reused.
BalancedPanel regroup(const BalancedPanel &panel, const Length &radius);

std::string format_ledger_csv(const ExclusionLedger &ledger);
std::string format_panel_csv(const BalancedPanel &panel);
std::string format_emissions_csv(std::span<const VehicleEmission> vehicles);

} // namespace railco2
