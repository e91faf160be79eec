#include "railco2/emissions.hpp"
#include "railco2/error.hpp"

#include "../support/gen.hpp"

#include <doctest.h>

#include <algorithm>

using namespace railco2;

namespace {

template <typename F> ErrorCode code_of(F &&f) {
    try {
        f();
    } catch (const Error &e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::Io;
}

FactorTables tables() {
    FactorTables f;
    f.ldt_split_threshold_lb = 3750.0;
    f.gasoline[{2011, VehicleClass::LDA, 2005}] = {350.0, 250.0};
    f.gasoline[{2011, VehicleClass::LDT1, 2005}] = {420.0, 300.0};
    f.gasoline[{2011, VehicleClass::LDT2, 2005}] = {500.0, 350.0};
    f.electrified[make_electrified_key("Toyota", "Prius", 2010)] = {220.0};
    return f;
}

VehicleRecord vehicle(Body body, std::optional<double> curb, Fuel fuel = Fuel::Gasoline) {
    VehicleRecord v;
    v.household_id = "H";
    v.vehicle_id = "V1";
    v.make = "Toyota";
    v.model = "Prius";
    v.model_year = fuel == Fuel::Gasoline ? 2005 : 2010;
    v.body = body;
    v.curb_weight_lb = curb;
    v.fuel = fuel;
    return v;
}

} // namespace

TEST_CASE("equivalent test weight") {
    CHECK(equivalent_test_weight(3450.0) == 3750.0);
    CHECK(code_of([] { equivalent_test_weight(0.0); }) == ErrorCode::NonPositiveWeight);
    CHECK(code_of([] { equivalent_test_weight(-5.0); }) == ErrorCode::NonPositiveWeight);
}

TEST_CASE("truck classification is inclusive at the threshold") {
    CHECK(classify_vehicle(vehicle(Body::Truck, 3450.0), 3750.0) == VehicleClass::LDT1);
    CHECK(classify_vehicle(vehicle(Body::Truck, 3450.5), 3750.0) == VehicleClass::LDT2);
    CHECK(classify_vehicle(vehicle(Body::Auto, std::nullopt), 3750.0) == VehicleClass::LDA);
    CHECK(classify_vehicle(vehicle(Body::Motorcycle, std::nullopt), 3750.0) == VehicleClass::MCY);
    CHECK(code_of([] { classify_vehicle(vehicle(Body::Truck, std::nullopt), 3750.0); }) ==
          ErrorCode::MissingCurbWeight);
}

TEST_CASE("daily CO2 formulas") {
    CHECK(gasoline_daily_co2({350.0, 250.0}, 20.0) == 7250.0);
    CHECK(gasoline_daily_co2({350.0, 250.0}, 0.0) == 250.0);
    CHECK(electrified_daily_co2({220.0}, 10.0) == 2200.0);
    CHECK(electrified_daily_co2({220.0}, 0.0) == 0.0);
    CHECK(code_of([] { gasoline_daily_co2({1.0, 1.0}, -0.1); }) == ErrorCode::NegativeVmt);
    CHECK(code_of([] { electrified_daily_co2({1.0}, -0.1); }) == ErrorCode::NegativeVmt);
}

TEST_CASE("vehicle_daily_co2 resolves factors") {
    const auto f = tables();
    const auto truck = vehicle_daily_co2(vehicle(Body::Truck, 4000.0), 10.0, 2011, f);
    CHECK(truck.gasoline_class == VehicleClass::LDT2);
    CHECK(truck.daily_co2_g == 5350.0);
    const auto hybrid = vehicle_daily_co2(vehicle(Body::Auto, std::nullopt, Fuel::Hybrid), 10.0, 2011, f);
    CHECK_FALSE(hybrid.gasoline_class.has_value());
    CHECK(hybrid.class_label() == "Electrified");
    CHECK(hybrid.daily_co2_g == 2200.0);
    CHECK(code_of([&] { vehicle_daily_co2(vehicle(Body::Auto, 3000.0), 10.0, 2012, f); }) ==
          ErrorCode::NoFactorAvailable);
    auto old = vehicle(Body::Auto, 3000.0);
    old.model_year = 1985;
    CHECK(code_of([&] { vehicle_daily_co2(old, 10.0, 2011, f); }) == ErrorCode::NoFactorAvailable);
    CHECK(code_of([&] { lookup_electrified_factor("Tesla", "Model S", 2010, f); }) == ErrorCode::NoFactorAvailable);
}

TEST_CASE("property: emissions are non-negative and additive") {
    gen::Gen g(101);
    for (int c = 0; c < 1000; ++c) {
        const GasolineFactor gf{g.uniform(0.0, 900.0), g.uniform(0.0, 600.0)};
        const ElectrifiedFactor ef{g.uniform(0.0, 400.0)};
        const double a = g.uniform(0.0, 200.0);
        const double b = g.uniform(0.0, 200.0);
        CHECK(gasoline_daily_co2(gf, a) >= 0.0);
        CHECK(electrified_daily_co2(ef, a) >= 0.0);
        // Running emissions are additive in VMT; the start charge is paid once.
        CHECK(gasoline_daily_co2(gf, a + b) - gf.start_g_per_day ==
              doctest::Approx((gasoline_daily_co2(gf, a) - gf.start_g_per_day) +
                              (gasoline_daily_co2(gf, b) - gf.start_g_per_day))
                  .epsilon(1e-12));
        CHECK(electrified_daily_co2(ef, a + b) ==
              doctest::Approx(electrified_daily_co2(ef, a) + electrified_daily_co2(ef, b)).epsilon(1e-12));

        std::vector<VehicleEmission> fleet;
        double sum = 0.0;
        const int n = g.integer(0, 5);
        for (int v = 0; v < n; ++v) {
            VehicleEmission e;
            e.vehicle_id = "V" + std::to_string(v);
            e.daily_co2_g = gasoline_daily_co2(gf, g.uniform(0.0, 80.0));
            sum += e.daily_co2_g;
            fleet.push_back(e);
        }
        const double total = household_daily_co2(fleet);
        CHECK(total >= 0.0);
        CHECK(total == doctest::Approx(sum).epsilon(1e-12));
        std::shuffle(fleet.begin(), fleet.end(), g.engine());
        CHECK(household_daily_co2(fleet) == total);
    }
}
