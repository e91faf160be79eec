#include "railco2/panel.hpp"

#include "railco2/csv.hpp"
#include "railco2/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <tuple>

namespace railco2 {

std::string_view to_string(ExclusionReason reason) {
    switch (reason) {
    case ExclusionReason::MissingVehicleInfo: return "MissingVehicleInfo";
    case ExclusionReason::IncompleteVmt: return "IncompleteVmt";
    case ExclusionReason::NoFactorAvailable: return "NoFactorAvailable";
    case ExclusionReason::Unmatched: return "Unmatched";
    }
    return "?";
}

std::string_view to_string(Group group) { return group == Group::Experimental ? "experimental" : "control"; }

double haversine_miles(double lat1, double lon1, double lat2, double lon2) {
    constexpr double to_rad = std::numbers::pi / 180.0;
    const double phi1 = lat1 * to_rad;
    const double phi2 = lat2 * to_rad;
    const double dphi = (lat2 - lat1) * to_rad;
    const double dlambda = (lon2 - lon1) * to_rad;
    const double s1 = std::sin(dphi / 2.0);
    const double s2 = std::sin(dlambda / 2.0);
    const double a = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    return 2.0 * kEarthRadiusMiles * std::asin(std::min(1.0, std::sqrt(a)));
}

double station_distance(double home_lat, double home_lon, const StationSet &stations) {
    if (stations.stations.empty()) {
        throw Error(ErrorCode::EmptyStationSet, "station set is empty; cannot assign groups by distance");
    }
    double best = std::numeric_limits<double>::infinity();
    for (const auto &s : stations.stations) best = std::min(best, haversine_miles(home_lat, home_lon, s.lat, s.lon));
    return best;
}

GroupLabel assign_group(double distance_mi, const Length &radius) {
    return GroupLabel{distance_mi <= radius.miles() ? Group::Experimental : Group::Control, distance_mi};
}

double daily_average_vmt(std::span<const DayReading> readings, int min_readings) {
    std::vector<DayReading> r(readings.begin(), readings.end());
    std::sort(r.begin(), r.end(), [](const auto &a, const auto &b) { return a.day_index < b.day_index; });
    const auto min_count = static_cast<std::size_t>(std::max(min_readings, 2));
    if (r.size() < min_count) {
        throw Error(ErrorCode::TooFewReadings,
                    fmt::format("{} odometer readings, at least {} required", r.size(), min_count));
    }
    // longest[i]: length of the longest non-decreasing chain starting at i.
    const std::size_t n = r.size();
    std::vector<std::size_t> longest(n, 1);
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (r[j].reading_miles >= r[i].reading_miles) longest[i] = std::max(longest[i], longest[j] + 1);
        }
    }
    const std::size_t best = *std::max_element(longest.begin(), longest.end());
    if (best < min_count) {
        throw Error(ErrorCode::NonMonotone,
                    fmt::format("no non-decreasing run of {} odometer readings (longest {})", min_count, best));
    }
    std::size_t first = 0;
    while (longest[first] != best) ++first;
    std::size_t last = first;
    for (std::size_t need = best - 1; need > 0; --need) {
        std::size_t j = last + 1;
        while (!(r[j].reading_miles >= r[last].reading_miles && longest[j] == need)) ++j;
        last = j;
    }
    return (r[last].reading_miles - r[first].reading_miles) /
           static_cast<double>(r[last].day_index - r[first].day_index);
}

std::vector<HouseholdWaveBundle> bundle_survey(const RawSurvey &survey) {
    std::map<std::pair<std::string, int>, HouseholdWaveBundle> by_key;
    for (const auto &h : survey.households) by_key[{h.household_id, h.wave}].household = h;
    for (const auto &v : survey.vehicles) {
        auto it = by_key.find({v.household_id, v.wave});
        if (it != by_key.end()) it->second.vehicles.push_back(v);
    }
    for (const auto &o : survey.odometer) {
        auto it = by_key.find({o.household_id, o.wave});
        if (it != by_key.end()) it->second.odometer[o.vehicle_id].push_back({o.day_index, o.reading_miles});
    }
    for (const auto &t : survey.trips) {
        auto it = by_key.find({t.household_id, t.wave});
        if (it != by_key.end()) it->second.trips.push_back(t);
    }
    std::vector<HouseholdWaveBundle> out;
    out.reserve(by_key.size());
    for (auto &[key, b] : by_key) {
        std::sort(b.vehicles.begin(), b.vehicles.end(),
                  [](const auto &a, const auto &c) { return a.vehicle_id < c.vehicle_id; });
        for (auto &[vid, days] : b.odometer) {
            std::sort(days.begin(), days.end(), [](const auto &a, const auto &c) { return a.day_index < c.day_index; });
        }
        std::sort(b.trips.begin(), b.trips.end(), [](const auto &a, const auto &c) { return a.day_index < c.day_index; });
        out.push_back(std::move(b));
    }
    return out;
}

ScreenOutcome screen_household_wave(const HouseholdWaveBundle &bundle, const FactorTables &factors,
                                    const RunConfig &cfg) {
    ScreenOutcome out;
    auto reject = [&](ExclusionReason reason, std::string detail) {
        out.reason = reason;
        out.detail = std::move(detail);
        out.vehicles.clear();
        return out;
    };

    for (const auto &v : bundle.vehicles) {
        if (v.make.empty() || v.model.empty() || !v.model_year) {
            return reject(ExclusionReason::MissingVehicleInfo,
                          fmt::format("vehicle {} lacks make, model or year", v.vehicle_id));
        }
        if (v.body == Body::Truck && !v.curb_weight_lb) {
            return reject(ExclusionReason::MissingVehicleInfo,
                          fmt::format("truck {} lacks curb weight", v.vehicle_id));
        }
    }

    std::vector<double> vmt;
    vmt.reserve(bundle.vehicles.size());
    for (const auto &v : bundle.vehicles) {
        auto it = bundle.odometer.find(v.vehicle_id);
        if (it == bundle.odometer.end()) {
            return reject(ExclusionReason::IncompleteVmt, fmt::format("vehicle {} has no odometer log", v.vehicle_id));
        }
        try {
            vmt.push_back(daily_average_vmt(it->second, cfg.min_odometer_readings));
        } catch (const Error &e) {
            return reject(ExclusionReason::IncompleteVmt, fmt::format("vehicle {}: {}", v.vehicle_id, e.what()));
        }
        if (vmt.back() > cfg.outlier_vmt_per_day) {
            return reject(ExclusionReason::IncompleteVmt,
                          fmt::format("vehicle {} averages {:.1f} mi/day", v.vehicle_id, vmt.back()));
        }
    }

    const int calendar_year = cfg.calendar_year(bundle.household.wave);
    for (std::size_t i = 0; i < bundle.vehicles.size(); ++i) {
        try {
            out.vehicles.push_back(vehicle_daily_co2(bundle.vehicles[i], vmt[i], calendar_year, factors));
        } catch (const Error &e) {
            return reject(ExclusionReason::NoFactorAvailable, e.what());
        }
    }
    return out;
}

std::size_t ExclusionLedger::dropped(int wave) const {
    std::size_t total = 0;
    for (auto c : counts.at(static_cast<std::size_t>(wave - 1))) total += c;
    return total;
}

BalancedPanel build_balanced_panel(const RawSurvey &survey, const FactorTables &factors,
                                   const StationSet &stations, const RunConfig &cfg) {
    if (stations.stations.empty()) {
        throw Error(ErrorCode::EmptyStationSet, "station set is empty; cannot assign groups by distance");
    }
    auto bundles = bundle_survey(survey);

    struct Screened {
        const HouseholdWaveBundle *bundle = nullptr;
        ScreenOutcome outcome;
    };
    std::map<std::string, std::array<std::optional<Screened>, 2>> by_household;
    for (const auto &b : bundles) {
        by_household[b.household.household_id][static_cast<std::size_t>(b.household.wave - 1)] =
            Screened{&b, screen_household_wave(b, factors, cfg)};
    }

    BalancedPanel panel;
    panel.radius = cfg.catchment_radius;
    for (auto &[id, waves] : by_household) {
        const bool retained = waves[0] && waves[1] && waves[0]->outcome.passed() && waves[1]->outcome.passed();
        for (std::size_t w = 0; w < 2; ++w) {
            if (!waves[w]) continue;
            ++panel.ledger.input[w];
            if (retained) {
                ++panel.ledger.retained[w];
            } else if (!waves[w]->outcome.passed()) {
                ++panel.ledger.counts[w][static_cast<std::size_t>(*waves[w]->outcome.reason)];
            } else {
                ++panel.ledger.counts[w][static_cast<std::size_t>(ExclusionReason::Unmatched)];
            }
        }
        if (!retained) continue;

        const auto &home = waves[0]->bundle->household;
        const auto label = assign_group(station_distance(home.home_lat, home.home_lon, stations), cfg.catchment_radius);
        for (std::size_t w = 0; w < 2; ++w) {
            const auto &b = *waves[w]->bundle;
            const auto &vehicles = waves[w]->outcome.vehicles;
            PanelObservation obs;
            obs.household_id = id;
            obs.wave = static_cast<int>(w) + 1;
            obs.group = label.group == Group::Experimental ? 1 : 0;
            obs.distance_mi = label.distance_to_nearest_station_mi;
            obs.veh_cnt = static_cast<int>(vehicles.size());
            obs.ppl_cnt = b.household.size_12plus;
            obs.income_bracket = b.household.income_bracket;
            for (const auto &v : vehicles) obs.daily_vmt += v.daily_vmt;
            if (!b.trips.empty()) {
                for (const auto &t : b.trips) {
                    obs.car_trips += t.car_trips;
                    obs.bus_trips += t.bus_trips;
                    obs.train_trips += t.train_trips;
                }
                const auto days = static_cast<double>(b.trips.size());
                obs.car_trips /= days;
                obs.bus_trips /= days;
                obs.train_trips /= days;
            }
            obs.daily_co2_g = household_daily_co2(vehicles);
            panel.observations.push_back(std::move(obs));
            panel.vehicle_emissions.insert(panel.vehicle_emissions.end(), vehicles.begin(), vehicles.end());
        }
    }
    if (panel.observations.empty()) {
        throw Error(ErrorCode::EmptyPanel, "no household passed screening in both waves");
    }
    return panel;
}

BalancedPanel regroup(const BalancedPanel &panel, const Length &radius) {
    BalancedPanel out = panel;
    out.radius = radius;
    for (auto &obs : out.observations) {
        obs.group = assign_group(obs.distance_mi, radius).group == Group::Experimental ? 1 : 0;
    }
    return out;
}

std::string format_ledger_csv(const ExclusionLedger &ledger) {
    std::string out = "wave,missing_vehicle_info,incomplete_vmt,no_emission_factor,unmatched,total,retained,input\n";
    for (int wave = 1; wave <= 2; ++wave) {
        const auto &c = ledger.counts[static_cast<std::size_t>(wave - 1)];
        out += fmt::format("{},{},{},{},{},{},{},{}\n", wave, c[0], c[1], c[2], c[3], ledger.dropped(wave),
                           ledger.retained[static_cast<std::size_t>(wave - 1)],
                           ledger.input[static_cast<std::size_t>(wave - 1)]);
    }
    return out;
}

std::string format_panel_csv(const BalancedPanel &panel) {
    std::string out = "household_id,wave,experimental,distance_mi,veh_cnt,ppl_cnt,income_bracket,daily_vmt,"
                      "car_trips,bus_trips,train_trips,daily_co2_g\n";
    for (const auto &o : panel.observations) {
        out += csv::join({o.household_id, std::to_string(o.wave), std::to_string(o.group),
                          csv::format_real(o.distance_mi), std::to_string(o.veh_cnt), std::to_string(o.ppl_cnt),
                          o.income_bracket ? std::to_string(*o.income_bracket) : std::string(),
                          csv::format_real(o.daily_vmt), csv::format_real(o.car_trips),
                          csv::format_real(o.bus_trips), csv::format_real(o.train_trips),
                          csv::format_real(o.daily_co2_g)}) +
               "\n";
    }
    return out;
}

std::string format_emissions_csv(std::span<const VehicleEmission> vehicles) {
    std::string out = "household_id,wave,vehicle_id,class,daily_vmt,daily_co2_g\n";
    for (const auto &v : vehicles) {
        out += csv::join({v.household_id, std::to_string(v.wave), v.vehicle_id, v.class_label(),
                          csv::format_real(v.daily_vmt), csv::format_real(v.daily_co2_g)}) +
               "\n";
    }
    return out;
}

} // namespace railco2
