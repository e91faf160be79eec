#pragma once

#include "railco2/dataio.hpp"

#include <optional>
#include <span>
#include <string>

namespace railco2 {

inline constexpr double kTestWeightAllowanceLb = 300.0;

// Curb weight plus the fixed test-weight allowance.
double equivalent_test_weight(double curb_weight_lb);

// Gasoline classification. Trucks at or below the split threshold are LDT1.
VehicleClass classify_vehicle(const VehicleRecord &vehicle, double ldt_split_threshold_lb);

GasolineFactor lookup_gasoline_factor(VehicleClass cls, int model_year, int calendar_year,
                                      const FactorTables &factors);
ElectrifiedFactor lookup_electrified_factor(std::string_view make, std::string_view model, int model_year,
                                            const FactorTables &factors);

// run x VMT + start; the start rate is charged once per day.
double gasoline_daily_co2(const GasolineFactor &factor, double daily_vmt);
// combined (tailpipe + upstream) x VMT; no start emissions.
double electrified_daily_co2(const ElectrifiedFactor &factor, double daily_vmt);

struct VehicleEmission {
    std::string household_id;
    int wave = 1;
    std::string vehicle_id;
    double daily_vmt = 0.0;
    double daily_co2_g = 0.0;
    std::optional<VehicleClass> gasoline_class; // empty for hybrid/electric

    std::string class_label() const;
};

// Resolves the factor for one screened vehicle and applies the matching
// formula. Throws MissingCurbWeight / NoFactorAvailable.
VehicleEmission vehicle_daily_co2(const VehicleRecord &vehicle, double daily_vmt, int calendar_year,
                                  const FactorTables &factors);

// Sum in vehicle_id order so the result does not depend on input order.
double household_daily_co2(std::span<const VehicleEmission> vehicles);

} // namespace railco2
