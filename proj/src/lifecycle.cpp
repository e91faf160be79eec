#include "railco2/lifecycle.hpp"

#include "railco2/csv.hpp"
#include "railco2/error.hpp"

#include <fmt/format.h>

#include <array>
#include <cmath>
#include <map>

namespace railco2 {

std::string_view to_string(TransitMode mode) { return mode == TransitMode::Bus ? "bus" : "rail"; }

double per_trip_operational(double g_per_passenger_mile, double avg_trip_miles) {
    if (g_per_passenger_mile < 0.0 || avg_trip_miles < 0.0) {
        throw Error(ErrorCode::NegativeInput,
                    fmt::format("negative rate {} or trip length {}", g_per_passenger_mile, avg_trip_miles));
    }
    return g_per_passenger_mile * avg_trip_miles;
}

double scale_factor(const LifecycleComponents &c) {
    const std::array<double, 5> parts{c.vehicle_operation, c.propulsion_electricity, c.energy_production,
                                      c.vehicle_manufacturing_maintenance, c.infrastructure_construction_operation};
    for (double p : parts) {
        if (p < 0.0) throw Error(ErrorCode::NegativeInput, fmt::format("negative life-cycle component {}", p));
    }
    const double operational = c.operational();
    if (!(operational > 0.0)) throw Error(ErrorCode::ZeroOperational, "operational emissions sum to zero");
    return c.gross() / operational;
}

double per_trip_lifecycle(double operational_g_per_trip, double scale, ScalePolicy policy) {
    if (operational_g_per_trip < 0.0 || scale < 0.0) {
        throw Error(ErrorCode::NegativeInput,
                    fmt::format("negative per-trip emission {} or scale {}", operational_g_per_trip, scale));
    }
    if (scale < 1.0 && policy == ScalePolicy::RequireAtLeastOne) {
        throw Error(ErrorCode::ScaleBelowOne, fmt::format("life-cycle scale factor {} is below 1", scale));
    }
    return operational_g_per_trip * scale;
}

double ModeFactors::per_trip_operational() const {
    return railco2::per_trip_operational(g_per_passenger_mile, avg_trip_miles);
}

double ModeFactors::per_trip_lifecycle() const {
    return railco2::per_trip_lifecycle(per_trip_operational(), scale_factor, ScalePolicy::AllowBelowOne);
}

namespace {

LifecycleInputs lifecycle_from_table(const csv::Table &t) {
    const auto c_mode = t.column("mode"), c_rate = t.column("g_per_passenger_mile"),
               c_len = t.column("avg_trip_miles");
    const auto c_scale = t.find_column("scale_factor");
    const std::array<std::optional<std::size_t>, 5> c_comp{
        t.find_column("comp_vehicle_operation"), t.find_column("comp_propulsion"),
        t.find_column("comp_energy_production"), t.find_column("comp_vehicle_manufacturing"),
        t.find_column("comp_infrastructure")};

    std::map<TransitMode, ModeFactors> modes;
    for (const auto &row : t.rows) {
        csv::RowReader r(t, row);
        auto name = r.trimmed(c_mode);
        ModeFactors f;
        if (name == "bus") {
            f.mode = TransitMode::Bus;
        } else if (name == "rail") {
            f.mode = TransitMode::Rail;
        } else {
            r.fail(fmt::format("unknown mode \"{}\" (expected bus or rail)", name));
        }
        f.g_per_passenger_mile = r.real(c_rate);
        f.avg_trip_miles = r.real(c_len);
        if (f.g_per_passenger_mile < 0.0 || f.avg_trip_miles < 0.0) r.fail("rates and trip lengths must be non-negative");

        std::array<std::optional<double>, 5> comp;
        std::size_t present = 0;
        for (std::size_t i = 0; i < 5; ++i) {
            if (c_comp[i]) comp[i] = r.optional_real(*c_comp[i]);
            if (comp[i]) ++present;
        }
        if (present == 5) {
            f.components = LifecycleComponents{*comp[0], *comp[1], *comp[2], *comp[3], *comp[4]};
            f.scale_factor = scale_factor(*f.components);
        } else if (present != 0) {
            r.fail("life-cycle components must be given for all five sources or none");
        } else if (c_scale && !r.blank(*c_scale)) {
            f.scale_factor = r.real(*c_scale);
            if (f.scale_factor < 0.0) r.fail("scale_factor must be non-negative");
        } else {
            r.fail("row needs either scale_factor or all five life-cycle components");
        }
        if (!modes.emplace(f.mode, f).second) {
            throw Error(ErrorCode::DuplicateKey, fmt::format("{}:{}: duplicate mode {}", t.source, row.line, name));
        }
    }
    if (!modes.count(TransitMode::Bus) || !modes.count(TransitMode::Rail)) {
        throw Error(ErrorCode::MalformedRow, fmt::format("{}: both bus and rail rows are required", t.source));
    }
    return LifecycleInputs{modes.at(TransitMode::Bus), modes.at(TransitMode::Rail)};
}

} // namespace

LifecycleInputs parse_lifecycle(std::string_view csv_text) {
    return lifecycle_from_table(csv::parse(csv_text, "lifecycle.csv"));
}

LifecycleInputs load_lifecycle(const std::filesystem::path &path) { return lifecycle_from_table(csv::read_file(path)); }

double household_transit_co2(double bus_trips_per_day, double rail_trips_per_day, const ModeFactors &bus,
                             const ModeFactors &rail) {
    if (bus_trips_per_day < 0.0 || rail_trips_per_day < 0.0) {
        throw Error(ErrorCode::NegativeTrips,
                    fmt::format("negative trip count (bus {}, rail {})", bus_trips_per_day, rail_trips_per_day));
    }
    return bus_trips_per_day * bus.per_trip_lifecycle() + rail_trips_per_day * rail.per_trip_lifecycle();
}

NetEffect net_effect_summary(double did_effect, double transit_delta) {
    NetEffect out;
    out.vehicle_effect = did_effect;
    out.transit_offset = transit_delta;
    out.net = did_effect + transit_delta;
    if (did_effect != 0.0) out.offset_share = std::fabs(transit_delta / did_effect);
    return out;
}

std::vector<TransitChangeRow> transit_emission_table(const BalancedPanel &panel, const LifecycleInputs &factors) {
    std::vector<TransitChangeRow> rows;
    for (Group group : {Group::Control, Group::Experimental}) {
        const int g = group == Group::Experimental ? 1 : 0;
        std::map<std::string, std::array<std::optional<double>, 2>> by_household;
        for (const auto &obs : panel.observations) {
            if (obs.group != g) continue;
            by_household[obs.household_id][static_cast<std::size_t>(obs.wave - 1)] =
                household_transit_co2(obs.bus_trips, obs.train_trips, factors.bus, factors.rail);
        }
        TransitChangeRow row;
        row.group = group;
        std::vector<double> diffs;
        double sum1 = 0.0;
        double sum2 = 0.0;
        for (const auto &[id, v] : by_household) {
            if (!v[0] || !v[1]) continue;
            sum1 += *v[0];
            sum2 += *v[1];
            diffs.push_back(*v[1] - *v[0]);
        }
        row.households = diffs.size();
        if (!diffs.empty()) {
            row.wave1_mean = sum1 / static_cast<double>(diffs.size());
            row.wave2_mean = sum2 / static_cast<double>(diffs.size());
            row.difference = row.wave2_mean - row.wave1_mean;
            if (row.wave1_mean != 0.0) row.percent_difference = 100.0 * row.difference / row.wave1_mean;
            try {
                row.paired = stats::paired_t(diffs);
            } catch (const Error &e) {
                if (e.code() != ErrorCode::DegenerateVariance && e.code() != ErrorCode::InsufficientSample) throw;
            }
        }
        rows.push_back(row);
    }
    return rows;
}

} // namespace railco2
