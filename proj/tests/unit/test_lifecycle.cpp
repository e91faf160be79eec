#include "railco2/error.hpp"
#include "railco2/lifecycle.hpp"

#include <doctest.h>

#include <cmath>

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

PanelObservation obs(const std::string &id, int wave, int group, double bus, double rail) {
    PanelObservation o;
    o.household_id = id;
    o.wave = wave;
    o.group = group;
    o.bus_trips = bus;
    o.train_trips = rail;
    return o;
}

} // namespace

TEST_CASE("per-trip factors") {
    CHECK(per_trip_operational(99.3, 6.81) == doctest::Approx(676.233).epsilon(1e-12));
    CHECK(per_trip_operational(224.1, 4.2) == doctest::Approx(941.22).epsilon(1e-12));
    CHECK(per_trip_lifecycle(676.233, 1.44) == doctest::Approx(973.77552).epsilon(1e-12));
    CHECK(code_of([] { per_trip_operational(-1.0, 2.0); }) == ErrorCode::NegativeInput);
    CHECK(code_of([] { per_trip_lifecycle(100.0, 0.9); }) == ErrorCode::ScaleBelowOne);
    CHECK(per_trip_lifecycle(100.0, 0.9, ScalePolicy::AllowBelowOne) == doctest::Approx(90.0));
    CHECK(code_of([] { per_trip_lifecycle(-1.0, 1.2); }) == ErrorCode::NegativeInput);
}

TEST_CASE("scale factor from components") {
    const LifecycleComponents rail{0.0, 120.73, 3.29, 1.31, 53.72};
    CHECK(rail.operational() == doctest::Approx(124.02).epsilon(1e-12));
    CHECK(rail.gross() == doctest::Approx(179.05).epsilon(1e-12));
    CHECK(scale_factor(rail) == doctest::Approx(179.05 / 124.02).epsilon(1e-12));
    CHECK(code_of([] { scale_factor({0, 0, 0, 1, 1}); }) == ErrorCode::ZeroOperational);
    CHECK(code_of([] { scale_factor({1, -1, 0, 1, 1}); }) == ErrorCode::NegativeInput);
}

TEST_CASE("lifecycle csv parsing") {
    const auto l = parse_lifecycle("mode,g_per_passenger_mile,avg_trip_miles,scale_factor\n"
                                   "rail,99.3,6.81,1.44\nbus,224.1,4.2,1.57\n");
    CHECK(l.rail.per_trip_operational() == doctest::Approx(676.233));
    CHECK(l.bus.per_trip_lifecycle() == doctest::Approx(941.22 * 1.57));
    CHECK_FALSE(l.rail.components.has_value());

    const auto c = parse_lifecycle(
        "mode,g_per_passenger_mile,avg_trip_miles,scale_factor,comp_vehicle_operation,comp_propulsion,"
        "comp_energy_production,comp_vehicle_manufacturing,comp_infrastructure\n"
        "rail,99.3,6.81,,0,120.73,3.29,1.31,53.72\nbus,224.1,4.2,,53.91,0,14.63,19.09,19.84\n");
    REQUIRE(c.bus.components.has_value());
    CHECK(c.bus.scale_factor == doctest::Approx(107.47 / 68.54).epsilon(1e-12));

    CHECK(code_of([] { parse_lifecycle("mode,g_per_passenger_mile,avg_trip_miles,scale_factor\nrail,1,2,1.1\n"); }) ==
          ErrorCode::MalformedRow);
    CHECK(code_of([] {
              parse_lifecycle("mode,g_per_passenger_mile,avg_trip_miles,scale_factor\n"
                              "rail,1,2,1.1\nrail,1,2,1.1\nbus,1,1,1\n");
          }) == ErrorCode::DuplicateKey);
    CHECK(code_of([] { parse_lifecycle("mode,g_per_passenger_mile,avg_trip_miles,scale_factor\ntram,1,2,1\n"); }) ==
          ErrorCode::MalformedRow);
    CHECK(code_of([] { parse_lifecycle("mode,g_per_passenger_mile,avg_trip_miles\nrail,1,2\nbus,1,2\n"); }) ==
          ErrorCode::MalformedRow);
}

TEST_CASE("household transit emissions and net effect") {
    ModeFactors bus{TransitMode::Bus, 100.0, 2.0, 1.5, std::nullopt};
    ModeFactors rail{TransitMode::Rail, 50.0, 4.0, 1.25, std::nullopt};
    CHECK(household_transit_co2(0.5, 2.0, bus, rail) == doctest::Approx(0.5 * 300.0 + 2.0 * 250.0));
    CHECK(code_of([&] { household_transit_co2(-0.1, 0.0, bus, rail); }) == ErrorCode::NegativeTrips);

    const auto n = net_effect_summary(-3145.0, 146.06);
    CHECK(n.net == doctest::Approx(-2998.94));
    CHECK(*n.offset_share == doctest::Approx(146.06 / 3145.0));
    CHECK_FALSE(net_effect_summary(0.0, 10.0).offset_share.has_value());
}

TEST_CASE("transit emission table by group") {
    BalancedPanel p;
    p.observations = {obs("A", 1, 0, 1.0, 0.0), obs("A", 2, 0, 1.0, 0.0), obs("B", 1, 0, 0.0, 0.0),
                      obs("B", 2, 0, 0.0, 0.0), obs("C", 1, 1, 0.0, 0.0), obs("C", 2, 1, 0.0, 1.0),
                      obs("D", 1, 1, 0.0, 0.0), obs("D", 2, 1, 0.0, 2.0)};
    LifecycleInputs f{{TransitMode::Bus, 10.0, 1.0, 1.0, std::nullopt},
                      {TransitMode::Rail, 100.0, 1.0, 1.0, std::nullopt}};
    const auto rows = transit_emission_table(p, f);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].group == Group::Control);
    CHECK(rows[0].wave1_mean == 5.0);
    CHECK(rows[0].difference == 0.0);
    CHECK_FALSE(rows[0].paired.has_value());
    CHECK(rows[1].group == Group::Experimental);
    CHECK(rows[1].households == 2);
    CHECK(rows[1].wave2_mean == 150.0);
    CHECK(rows[1].difference == 150.0);
    CHECK_FALSE(rows[1].percent_difference.has_value());
    REQUIRE(rows[1].paired.has_value());
    CHECK(rows[1].paired->statistic == doctest::Approx(150.0 / (std::sqrt(5000.0) / std::sqrt(2.0))));
}
