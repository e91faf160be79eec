#pragma once

#include "railco2/config.hpp"

#include <compare>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace railco2 {

enum class Fuel { Gasoline, Hybrid, Electric };
enum class Body { Auto, Truck, Motorcycle };
enum class VehicleClass { LDA, LDT1, LDT2, MCY };

std::string_view to_string(Fuel fuel);
std::string_view to_string(Body body);
std::string_view to_string(VehicleClass cls);
std::optional<VehicleClass> parse_vehicle_class(std::string_view text);

struct HouseholdRecord {
    std::string household_id;
    int wave = 1;
    double home_lat = 0.0;
    double home_lon = 0.0;
    int size_12plus = 1;
    std::optional<int> income_bracket; // 1..6, empty when not reported
    int vehicle_count = 0;             // vehicles listed for this household-wave

    friend bool operator==(const HouseholdRecord &, const HouseholdRecord &) = default;
};

struct VehicleRecord {
    std::string household_id;
    int wave = 1;
    std::string vehicle_id;
    std::string make;
    std::string model;
    std::optional<int> model_year;
    Fuel fuel = Fuel::Gasoline;
    Body body = Body::Auto;
    std::optional<double> curb_weight_lb;

    friend bool operator==(const VehicleRecord &, const VehicleRecord &) = default;
};

struct OdometerReading {
    std::string household_id;
    int wave = 1;
    std::string vehicle_id;
    int day_index = 1;
    double reading_miles = 0.0; // end-of-day cumulative odometer

    friend bool operator==(const OdometerReading &, const OdometerReading &) = default;
};

struct TripDayRecord {
    std::string household_id;
    int wave = 1;
    int day_index = 1;
    int car_trips = 0;
    int bus_trips = 0;
    int train_trips = 0;

    friend bool operator==(const TripDayRecord &, const TripDayRecord &) = default;
};

struct RowCount {
    std::string file;
    std::size_t read = 0;
    std::size_t parsed = 0;
    std::size_t rejected = 0;
};

struct RawSurvey {
    std::vector<HouseholdRecord> households;
    std::vector<VehicleRecord> vehicles;
    std::vector<OdometerReading> odometer;
    std::vector<TripDayRecord> trips;
    // Load bookkeeping; not part of the domain value.
    std::vector<RowCount> row_counts;

    friend bool operator==(const RawSurvey &a, const RawSurvey &b) {
        return a.households == b.households && a.vehicles == b.vehicles && a.odometer == b.odometer &&
               a.trips == b.trips;
    }
};

struct GasolineKey {
    int calendar_year = 0;
    VehicleClass vehicle_class = VehicleClass::LDA;
    int model_year = 0;

    friend auto operator<=>(const GasolineKey &, const GasolineKey &) = default;
};

struct GasolineFactor {
    double run_g_per_mile = 0.0;
    double start_g_per_day = 0.0;

    friend bool operator==(const GasolineFactor &, const GasolineFactor &) = default;
};

// Make and model are matched case-insensitively after trimming.
struct ElectrifiedKey {
    std::string make;
    std::string model;
    int model_year = 0;

    friend auto operator<=>(const ElectrifiedKey &, const ElectrifiedKey &) = default;
};

struct ElectrifiedFactor {
    double combined_g_per_mile = 0.0; // tailpipe + upstream

    friend bool operator==(const ElectrifiedFactor &, const ElectrifiedFactor &) = default;
};

ElectrifiedKey make_electrified_key(std::string_view make, std::string_view model, int model_year);

struct FactorTables {
    std::map<GasolineKey, GasolineFactor> gasoline;
    std::map<ElectrifiedKey, ElectrifiedFactor> electrified;
    double ldt_split_threshold_lb = 0.0;

    friend bool operator==(const FactorTables &, const FactorTables &) = default;
};

struct Station {
    std::string station_id;
    double lat = 0.0;
    double lon = 0.0;

    friend bool operator==(const Station &, const Station &) = default;
};

struct StationSet {
    std::vector<Station> stations;

    friend bool operator==(const StationSet &, const StationSet &) = default;
};

struct SurveyPaths {
    std::filesystem::path households;
    std::filesystem::path vehicles;
    std::filesystem::path odometer;
    std::filesystem::path trips;
};

// CSV text for each survey entity, used for in-memory parsing and serialisation.
struct SurveyText {
    std::string households;
    std::string vehicles;
    std::string odometer;
    std::string trips;
};

RawSurvey load_survey(const SurveyPaths &paths);
RawSurvey parse_survey(const SurveyText &text);
SurveyText format_survey(const RawSurvey &survey);
void write_survey(const RawSurvey &survey, const std::filesystem::path &dir);

FactorTables load_factor_tables(const std::filesystem::path &gasoline,
                                const std::filesystem::path &electrified);
FactorTables parse_factor_tables(std::string_view gasoline_csv, std::string_view electrified_csv);
std::string format_gasoline_factors(const FactorTables &factors);
std::string format_electrified_factors(const FactorTables &factors);

StationSet load_stations(const std::filesystem::path &path);
StationSet parse_stations(std::string_view csv_text);
std::string format_stations(const StationSet &stations);

enum class Severity { Warning, Fatal };

enum class IssueKind {
    UnreliableOdometer,
    MissingIncome,
    MissingVehicleInfo,
    ImplausibleModelYear,
    MissingTripLog,
    SingleWaveHousehold,
    EmptyStationSet,
    EmptyFactorTables,
};

std::string_view to_string(IssueKind kind);
std::string_view to_string(Severity severity);

struct Issue {
    IssueKind kind;
    Severity severity;
    std::string household_id;
    int wave = 0;
    std::string detail;

    friend bool operator==(const Issue &, const Issue &) = default;
};

struct ValidationReport {
    std::vector<Issue> issues;

    std::size_t count(IssueKind kind) const;
    std::map<IssueKind, std::size_t> counts() const;
    bool has_fatal() const;

    friend bool operator==(const ValidationReport &, const ValidationReport &) = default;
};

ValidationReport validate_dataset(const RawSurvey &survey, const FactorTables &factors,
                                  const StationSet &stations, const RunConfig &cfg = {});

} // namespace railco2
