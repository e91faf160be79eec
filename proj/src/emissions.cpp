#include "railco2/emissions.hpp"

#include "railco2/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <tuple>
#include <vector>

namespace railco2 {

double equivalent_test_weight(double curb_weight_lb) {
    if (!(curb_weight_lb > 0.0)) {
        throw Error(ErrorCode::NonPositiveWeight, fmt::format("curb weight {} lb is not positive", curb_weight_lb));
    }
    return curb_weight_lb + kTestWeightAllowanceLb;
}

VehicleClass classify_vehicle(const VehicleRecord &vehicle, double ldt_split_threshold_lb) {
    switch (vehicle.body) {
    case Body::Auto: return VehicleClass::LDA;
    case Body::Motorcycle: return VehicleClass::MCY;
    case Body::Truck: break;
    }
    if (!vehicle.curb_weight_lb) {
        throw Error(ErrorCode::MissingCurbWeight,
                    fmt::format("truck {} of household {} has no curb weight", vehicle.vehicle_id,
                                vehicle.household_id));
    }
    return equivalent_test_weight(*vehicle.curb_weight_lb) <= ldt_split_threshold_lb ? VehicleClass::LDT1
                                                                                      : VehicleClass::LDT2;
}

GasolineFactor lookup_gasoline_factor(VehicleClass cls, int model_year, int calendar_year,
                                      const FactorTables &factors) {
    auto it = factors.gasoline.find(GasolineKey{calendar_year, cls, model_year});
    if (it == factors.gasoline.end()) {
        throw Error(ErrorCode::NoFactorAvailable,
                    fmt::format("no gasoline factor for {} model year {} in calendar year {}", to_string(cls),
                                model_year, calendar_year));
    }
    return it->second;
}

ElectrifiedFactor lookup_electrified_factor(std::string_view make, std::string_view model, int model_year,
                                            const FactorTables &factors) {
    auto it = factors.electrified.find(make_electrified_key(make, model, model_year));
    if (it == factors.electrified.end()) {
        throw Error(ErrorCode::NoFactorAvailable,
                    fmt::format("no combined rate for {} {} {}", make, model, model_year));
    }
    return it->second;
}

double gasoline_daily_co2(const GasolineFactor &factor, double daily_vmt) {
    if (daily_vmt < 0.0) throw Error(ErrorCode::NegativeVmt, fmt::format("daily VMT {} is negative", daily_vmt));
    return factor.run_g_per_mile * daily_vmt + factor.start_g_per_day;
}

double electrified_daily_co2(const ElectrifiedFactor &factor, double daily_vmt) {
    if (daily_vmt < 0.0) throw Error(ErrorCode::NegativeVmt, fmt::format("daily VMT {} is negative", daily_vmt));
    return factor.combined_g_per_mile * daily_vmt;
}

std::string VehicleEmission::class_label() const {
    return gasoline_class ? std::string(to_string(*gasoline_class)) : std::string("Electrified");
}

VehicleEmission vehicle_daily_co2(const VehicleRecord &vehicle, double daily_vmt, int calendar_year,
                                  const FactorTables &factors) {
    if (!vehicle.model_year) {
        throw Error(ErrorCode::NoFactorAvailable, fmt::format("vehicle {} has no model year", vehicle.vehicle_id));
    }
    VehicleEmission out;
    out.household_id = vehicle.household_id;
    out.wave = vehicle.wave;
    out.vehicle_id = vehicle.vehicle_id;
    out.daily_vmt = daily_vmt;
    if (vehicle.fuel == Fuel::Gasoline) {
        auto cls = classify_vehicle(vehicle, factors.ldt_split_threshold_lb);
        out.gasoline_class = cls;
        out.daily_co2_g =
            gasoline_daily_co2(lookup_gasoline_factor(cls, *vehicle.model_year, calendar_year, factors), daily_vmt);
    } else {
        out.daily_co2_g = electrified_daily_co2(
            lookup_electrified_factor(vehicle.make, vehicle.model, *vehicle.model_year, factors), daily_vmt);
    }
    return out;
}

double household_daily_co2(std::span<const VehicleEmission> vehicles) {
    std::vector<const VehicleEmission *> ordered;
    ordered.reserve(vehicles.size());
    for (const auto &v : vehicles) ordered.push_back(&v);
    std::sort(ordered.begin(), ordered.end(), [](const VehicleEmission *a, const VehicleEmission *b) {
        return std::tie(a->vehicle_id, a->daily_co2_g) < std::tie(b->vehicle_id, b->daily_co2_g);
    });
    double total = 0.0;
    for (const auto *v : ordered) total += v->daily_co2_g;
    return total;
}

} // namespace railco2
