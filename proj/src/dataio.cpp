#include "railco2/dataio.hpp"

#include "railco2/csv.hpp"
#include "railco2/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <tuple>

namespace railco2 {

namespace {

using HouseholdWave = std::pair<std::string, int>;
using VehicleKey = std::tuple<std::string, int, std::string>;

std::string lower_trim(std::string_view s) {
    auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    auto last = s.find_last_not_of(" \t\r\n");
    std::string out(s.substr(first, last - first + 1));
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

int read_wave(const csv::RowReader &r, std::size_t col) {
    auto wave = r.integer(col);
    if (wave != 1 && wave != 2) r.fail(fmt::format("wave must be 1 or 2, got {}", wave));
    return static_cast<int>(wave);
}

std::string read_id(const csv::RowReader &r, std::size_t col, std::string_view what) {
    auto id = r.trimmed(col);
    if (id.empty()) r.fail(fmt::format("{} is empty", what));
    return id;
}

[[noreturn]] void duplicate(const csv::Table &t, const csv::Row &row, const std::string &what) {
    throw Error(ErrorCode::DuplicateKey, fmt::format("{}:{}: duplicate {}", t.source, row.line, what));
}

[[noreturn]] void dangling(const csv::Table &t, const csv::Row &row, const std::string &what) {
    throw Error(ErrorCode::DanglingReference,
                fmt::format("{}:{}: references missing {}", t.source, row.line, what));
}

RowCount count_of(const csv::Table &t, std::size_t parsed) {
    return RowCount{t.source, t.lines_read, parsed, t.lines_read - parsed};
}

RawSurvey survey_from_tables(const csv::Table &hh, const csv::Table &veh, const csv::Table &odo,
                             const csv::Table &trip) {
    RawSurvey survey;
    std::set<HouseholdWave> household_keys;
    {
        const auto c_id = hh.column("household_id"), c_wave = hh.column("wave"),
                   c_lat = hh.column("home_lat"), c_lon = hh.column("home_lon"),
                   c_size = hh.column("size_12plus"), c_inc = hh.column("income_bracket");
        for (const auto &row : hh.rows) {
            csv::RowReader r(hh, row);
            HouseholdRecord rec;
            rec.household_id = read_id(r, c_id, "household_id");
            rec.wave = read_wave(r, c_wave);
            rec.home_lat = r.real(c_lat);
            rec.home_lon = r.real(c_lon);
            if (rec.home_lat < -90.0 || rec.home_lat > 90.0) r.fail("home_lat outside [-90, 90]");
            if (rec.home_lon < -180.0 || rec.home_lon > 180.0) r.fail("home_lon outside [-180, 180]");
            auto size = r.integer(c_size);
            if (size < 1) r.fail("size_12plus must be at least 1");
            rec.size_12plus = static_cast<int>(size);
            if (auto inc = r.optional_integer(c_inc)) {
                if (*inc < 1 || *inc > 6) r.fail("income_bracket must be within 1..6");
                rec.income_bracket = static_cast<int>(*inc);
            }
            if (!household_keys.emplace(rec.household_id, rec.wave).second) {
                duplicate(hh, row, fmt::format("household ({}, wave {})", rec.household_id, rec.wave));
            }
            survey.households.push_back(std::move(rec));
        }
        survey.row_counts.push_back(count_of(hh, survey.households.size()));
    }

    std::set<VehicleKey> vehicle_keys;
    std::map<HouseholdWave, int> vehicles_per_household;
    {
        const auto c_id = veh.column("household_id"), c_wave = veh.column("wave"),
                   c_vid = veh.column("vehicle_id"), c_make = veh.column("make"),
                   c_model = veh.column("model"), c_year = veh.column("model_year"),
                   c_fuel = veh.column("fuel"), c_body = veh.column("body"),
                   c_curb = veh.column("curb_weight_lb");
        for (const auto &row : veh.rows) {
            csv::RowReader r(veh, row);
            VehicleRecord rec;
            rec.household_id = read_id(r, c_id, "household_id");
            rec.wave = read_wave(r, c_wave);
            rec.vehicle_id = read_id(r, c_vid, "vehicle_id");
            rec.make = r.trimmed(c_make);
            rec.model = r.trimmed(c_model);
            if (auto year = r.optional_integer(c_year)) rec.model_year = static_cast<int>(*year);
            auto fuel = lower_trim(r.text(c_fuel));
            if (fuel == "gasoline") {
                rec.fuel = Fuel::Gasoline;
            } else if (fuel == "hybrid") {
                rec.fuel = Fuel::Hybrid;
            } else if (fuel == "electric") {
                rec.fuel = Fuel::Electric;
            } else {
                r.fail(fmt::format("unknown fuel \"{}\"", fuel));
            }
            auto body = lower_trim(r.text(c_body));
            if (body == "auto") {
                rec.body = Body::Auto;
            } else if (body == "truck") {
                rec.body = Body::Truck;
            } else if (body == "motorcycle") {
                rec.body = Body::Motorcycle;
            } else {
                r.fail(fmt::format("unknown body \"{}\"", body));
            }
            rec.curb_weight_lb = r.optional_real(c_curb);
            if (rec.curb_weight_lb && *rec.curb_weight_lb <= 0.0) r.fail("curb_weight_lb must be positive");
            if (!household_keys.count({rec.household_id, rec.wave})) {
                dangling(veh, row, fmt::format("household ({}, wave {})", rec.household_id, rec.wave));
            }
            if (!vehicle_keys.emplace(rec.household_id, rec.wave, rec.vehicle_id).second) {
                duplicate(veh, row, fmt::format("vehicle {}", rec.vehicle_id));
            }
            ++vehicles_per_household[{rec.household_id, rec.wave}];
            survey.vehicles.push_back(std::move(rec));
        }
        survey.row_counts.push_back(count_of(veh, survey.vehicles.size()));
    }
    for (auto &h : survey.households) h.vehicle_count = vehicles_per_household[{h.household_id, h.wave}];

    {
        const auto c_id = odo.column("household_id"), c_wave = odo.column("wave"),
                   c_vid = odo.column("vehicle_id"), c_day = odo.column("day_index"),
                   c_read = odo.column("reading_miles");
        std::set<std::tuple<std::string, int, std::string, int>> seen;
        for (const auto &row : odo.rows) {
            csv::RowReader r(odo, row);
            OdometerReading rec;
            rec.household_id = read_id(r, c_id, "household_id");
            rec.wave = read_wave(r, c_wave);
            rec.vehicle_id = read_id(r, c_vid, "vehicle_id");
            auto day = r.integer(c_day);
            if (day < 1 || day > 7) r.fail("day_index must be within 1..7");
            rec.day_index = static_cast<int>(day);
            rec.reading_miles = r.real(c_read);
            if (rec.reading_miles < 0.0) r.fail("reading_miles must be non-negative");
            if (!vehicle_keys.count({rec.household_id, rec.wave, rec.vehicle_id})) {
                dangling(odo, row,
                         fmt::format("vehicle {} of household ({}, wave {})", rec.vehicle_id,
                                     rec.household_id, rec.wave));
            }
            if (!seen.emplace(rec.household_id, rec.wave, rec.vehicle_id, rec.day_index).second) {
                duplicate(odo, row, fmt::format("reading for vehicle {} day {}", rec.vehicle_id, rec.day_index));
            }
            survey.odometer.push_back(std::move(rec));
        }
        survey.row_counts.push_back(count_of(odo, survey.odometer.size()));
    }

    {
        const auto c_id = trip.column("household_id"), c_wave = trip.column("wave"),
                   c_day = trip.column("day_index"), c_car = trip.column("car_trips"),
                   c_bus = trip.column("bus_trips"), c_train = trip.column("train_trips");
        std::set<std::tuple<std::string, int, int>> seen;
        auto count = [](const csv::RowReader &r, std::size_t col) {
            auto v = r.integer(col);
            if (v < 0) r.fail("trip counts must be non-negative");
            return static_cast<int>(v);
        };
        for (const auto &row : trip.rows) {
            csv::RowReader r(trip, row);
            TripDayRecord rec;
            rec.household_id = read_id(r, c_id, "household_id");
            rec.wave = read_wave(r, c_wave);
            auto day = r.integer(c_day);
            if (day < 1 || day > 7) r.fail("day_index must be within 1..7");
            rec.day_index = static_cast<int>(day);
            rec.car_trips = count(r, c_car);
            rec.bus_trips = count(r, c_bus);
            rec.train_trips = count(r, c_train);
            if (!household_keys.count({rec.household_id, rec.wave})) {
                dangling(trip, row, fmt::format("household ({}, wave {})", rec.household_id, rec.wave));
            }
            if (!seen.emplace(rec.household_id, rec.wave, rec.day_index).second) {
                duplicate(trip, row, fmt::format("trip day {} for household {}", rec.day_index, rec.household_id));
            }
            survey.trips.push_back(std::move(rec));
        }
        survey.row_counts.push_back(count_of(trip, survey.trips.size()));
    }
    return survey;
}

std::string opt_int(const std::optional<int> &v) { return v ? std::to_string(*v) : std::string(); }

std::string opt_real(const std::optional<double> &v) { return v ? csv::format_real(*v) : std::string(); }

FactorTables factors_from_tables(const csv::Table &gas, const csv::Table &elec) {
    FactorTables factors;
    std::optional<double> threshold;
    for (const auto &comment : gas.comments) {
        auto eq = comment.find('=');
        if (eq == std::string::npos) continue;
        auto key = lower_trim(std::string_view(comment).substr(0, eq));
        if (key != "ldt_split_threshold_lb") continue;
        auto table = csv::parse("v\n" + comment.substr(eq + 1) + "\n", gas.source);
        csv::RowReader r(table, table.rows.at(0));
        threshold = r.real(0);
        if (*threshold <= 0.0) {
            throw Error(ErrorCode::MalformedRow,
                        fmt::format("{}: ldt_split_threshold_lb must be positive", gas.source));
        }
    }
    if (!threshold) {
        throw Error(ErrorCode::MalformedRow,
                    fmt::format("{}:1: missing '# ldt_split_threshold_lb=<value>' header line", gas.source));
    }
    factors.ldt_split_threshold_lb = *threshold;

    const auto c_cal = gas.column("calendar_year"), c_cls = gas.column("vehicle_class"),
               c_my = gas.column("model_year"), c_run = gas.column("run_g_per_mile"),
               c_start = gas.column("start_g_per_day");
    for (const auto &row : gas.rows) {
        csv::RowReader r(gas, row);
        GasolineKey key;
        key.calendar_year = static_cast<int>(r.integer(c_cal));
        auto cls = parse_vehicle_class(r.trimmed(c_cls));
        if (!cls) r.fail(fmt::format("unknown vehicle_class \"{}\"", r.trimmed(c_cls)));
        key.vehicle_class = *cls;
        key.model_year = static_cast<int>(r.integer(c_my));
        GasolineFactor f{r.real(c_run), r.real(c_start)};
        if (f.run_g_per_mile < 0.0 || f.start_g_per_day < 0.0) {
            throw Error(ErrorCode::NegativeRate, fmt::format("{}:{}: negative emission rate", gas.source, row.line));
        }
        if (!factors.gasoline.emplace(key, f).second) {
            duplicate(gas, row,
                      fmt::format("gasoline factor ({}, {}, {})", key.calendar_year,
                                  to_string(key.vehicle_class), key.model_year));
        }
    }

    const auto c_make = elec.column("make"), c_model = elec.column("model"),
               c_year = elec.column("model_year"), c_rate = elec.column("combined_g_per_mile");
    for (const auto &row : elec.rows) {
        csv::RowReader r(elec, row);
        if (r.blank(c_make) || r.blank(c_model)) r.fail("make and model are required");
        auto key = make_electrified_key(r.text(c_make), r.text(c_model),
                                        static_cast<int>(r.integer(c_year)));
        ElectrifiedFactor f{r.real(c_rate)};
        if (f.combined_g_per_mile < 0.0) {
            throw Error(ErrorCode::NegativeRate, fmt::format("{}:{}: negative emission rate", elec.source, row.line));
        }
        if (!factors.electrified.emplace(key, f).second) {
            duplicate(elec, row,
                      fmt::format("electrified factor ({}, {}, {})", key.make, key.model, key.model_year));
        }
    }
    return factors;
}

StationSet stations_from_table(const csv::Table &t) {
    StationSet set;
    if (t.header.empty()) return set;
    const auto c_id = t.column("station_id"), c_lat = t.column("lat"), c_lon = t.column("lon");
    std::set<std::string> ids;
    for (const auto &row : t.rows) {
        csv::RowReader r(t, row);
        Station s{read_id(r, c_id, "station_id"), r.real(c_lat), r.real(c_lon)};
        if (s.lat < -90.0 || s.lat > 90.0) r.fail("lat outside [-90, 90]");
        if (s.lon < -180.0 || s.lon > 180.0) r.fail("lon outside [-180, 180]");
        if (!ids.insert(s.station_id).second) duplicate(t, row, fmt::format("station {}", s.station_id));
        set.stations.push_back(std::move(s));
    }
    return set;
}

void write_text(const std::filesystem::path &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, fmt::format("cannot write '{}'", path.string()));
    out << text;
}

} // namespace

std::string_view to_string(Fuel fuel) {
    switch (fuel) {
    case Fuel::Gasoline: return "gasoline";
    case Fuel::Hybrid: return "hybrid";
    case Fuel::Electric: return "electric";
    }
    return "?";
}

std::string_view to_string(Body body) {
    switch (body) {
    case Body::Auto: return "auto";
    case Body::Truck: return "truck";
    case Body::Motorcycle: return "motorcycle";
    }
    return "?";
}

std::string_view to_string(VehicleClass cls) {
    switch (cls) {
    case VehicleClass::LDA: return "LDA";
    case VehicleClass::LDT1: return "LDT1";
    case VehicleClass::LDT2: return "LDT2";
    case VehicleClass::MCY: return "MCY";
    }
    return "?";
}

std::optional<VehicleClass> parse_vehicle_class(std::string_view text) {
    if (text == "LDA") return VehicleClass::LDA;
    if (text == "LDT1") return VehicleClass::LDT1;
    if (text == "LDT2") return VehicleClass::LDT2;
    if (text == "MCY") return VehicleClass::MCY;
    return std::nullopt;
}

ElectrifiedKey make_electrified_key(std::string_view make, std::string_view model, int model_year) {
    return ElectrifiedKey{lower_trim(make), lower_trim(model), model_year};
}

RawSurvey parse_survey(const SurveyText &text) {
    return survey_from_tables(csv::parse(text.households, "households.csv"),
                              csv::parse(text.vehicles, "vehicles.csv"),
                              csv::parse(text.odometer, "odometer.csv"), csv::parse(text.trips, "trips.csv"));
}

RawSurvey load_survey(const SurveyPaths &paths) {
    return survey_from_tables(csv::read_file(paths.households), csv::read_file(paths.vehicles),
                              csv::read_file(paths.odometer), csv::read_file(paths.trips));
}

SurveyText format_survey(const RawSurvey &survey) {
    SurveyText out;
    out.households = "household_id,wave,home_lat,home_lon,size_12plus,income_bracket\n";
    for (const auto &h : survey.households) {
        out.households += csv::join({h.household_id, std::to_string(h.wave), csv::format_real(h.home_lat),
                                     csv::format_real(h.home_lon), std::to_string(h.size_12plus),
                                     opt_int(h.income_bracket)}) +
                          "\n";
    }
    out.vehicles = "household_id,wave,vehicle_id,make,model,model_year,fuel,body,curb_weight_lb\n";
    for (const auto &v : survey.vehicles) {
        out.vehicles += csv::join({v.household_id, std::to_string(v.wave), v.vehicle_id, v.make, v.model,
                                   opt_int(v.model_year), std::string(to_string(v.fuel)),
                                   std::string(to_string(v.body)), opt_real(v.curb_weight_lb)}) +
                        "\n";
    }
    out.odometer = "household_id,wave,vehicle_id,day_index,reading_miles\n";
    for (const auto &o : survey.odometer) {
        out.odometer += csv::join({o.household_id, std::to_string(o.wave), o.vehicle_id,
                                   std::to_string(o.day_index), csv::format_real(o.reading_miles)}) +
                        "\n";
    }
    out.trips = "household_id,wave,day_index,car_trips,bus_trips,train_trips\n";
    for (const auto &t : survey.trips) {
        out.trips += csv::join({t.household_id, std::to_string(t.wave), std::to_string(t.day_index),
                                std::to_string(t.car_trips), std::to_string(t.bus_trips),
                                std::to_string(t.train_trips)}) +
                     "\n";
    }
    return out;
}

void write_survey(const RawSurvey &survey, const std::filesystem::path &dir) {
    std::filesystem::create_directories(dir);
    auto text = format_survey(survey);
    write_text(dir / "households.csv", text.households);
    write_text(dir / "vehicles.csv", text.vehicles);
    write_text(dir / "odometer.csv", text.odometer);
    write_text(dir / "trips.csv", text.trips);
}

FactorTables parse_factor_tables(std::string_view gasoline_csv, std::string_view electrified_csv) {
    return factors_from_tables(csv::parse(gasoline_csv, "factors_gasoline.csv"),
                               csv::parse(electrified_csv, "factors_electrified.csv"));
}

FactorTables load_factor_tables(const std::filesystem::path &gasoline, const std::filesystem::path &electrified) {
    return factors_from_tables(csv::read_file(gasoline), csv::read_file(electrified));
}

std::string format_gasoline_factors(const FactorTables &factors) {
    std::string out = fmt::format("# ldt_split_threshold_lb={}\n", csv::format_real(factors.ldt_split_threshold_lb));
    out += "calendar_year,vehicle_class,model_year,run_g_per_mile,start_g_per_day\n";
    for (const auto &[key, f] : factors.gasoline) {
        out += csv::join({std::to_string(key.calendar_year), std::string(to_string(key.vehicle_class)),
                          std::to_string(key.model_year), csv::format_real(f.run_g_per_mile),
                          csv::format_real(f.start_g_per_day)}) +
               "\n";
    }
    return out;
}

std::string format_electrified_factors(const FactorTables &factors) {
    std::string out = "make,model,model_year,combined_g_per_mile\n";
    for (const auto &[key, f] : factors.electrified) {
        out += csv::join({key.make, key.model, std::to_string(key.model_year),
                          csv::format_real(f.combined_g_per_mile)}) +
               "\n";
    }
    return out;
}

StationSet parse_stations(std::string_view csv_text) { return stations_from_table(csv::parse(csv_text, "stations.csv")); }

StationSet load_stations(const std::filesystem::path &path) { return stations_from_table(csv::read_file(path)); }

std::string format_stations(const StationSet &stations) {
    std::string out = "station_id,lat,lon\n";
    for (const auto &s : stations.stations) {
        out += csv::join({s.station_id, csv::format_real(s.lat), csv::format_real(s.lon)}) + "\n";
    }
    return out;
}

std::string_view to_string(IssueKind kind) {
    switch (kind) {
    case IssueKind::UnreliableOdometer: return "UnreliableOdometer";
    case IssueKind::MissingIncome: return "MissingIncome";
    case IssueKind::MissingVehicleInfo: return "MissingVehicleInfo";
    case IssueKind::ImplausibleModelYear: return "ImplausibleModelYear";
    case IssueKind::MissingTripLog: return "MissingTripLog";
    case IssueKind::SingleWaveHousehold: return "SingleWaveHousehold";
    case IssueKind::EmptyStationSet: return "EmptyStationSet";
    case IssueKind::EmptyFactorTables: return "EmptyFactorTables";
    }
    return "?";
}

std::string_view to_string(Severity severity) { return severity == Severity::Fatal ? "fatal" : "warning"; }

std::size_t ValidationReport::count(IssueKind kind) const {
    return static_cast<std::size_t>(
        std::count_if(issues.begin(), issues.end(), [kind](const Issue &i) { return i.kind == kind; }));
}

std::map<IssueKind, std::size_t> ValidationReport::counts() const {
    std::map<IssueKind, std::size_t> out;
    for (const auto &i : issues) ++out[i.kind];
    return out;
}

bool ValidationReport::has_fatal() const {
    return std::any_of(issues.begin(), issues.end(), [](const Issue &i) { return i.severity == Severity::Fatal; });
}

ValidationReport validate_dataset(const RawSurvey &survey, const FactorTables &factors,
                                  const StationSet &stations, const RunConfig &cfg) {
    ValidationReport report;
    auto add = [&](IssueKind kind, Severity sev, std::string hh, int wave, std::string detail) {
        report.issues.push_back(Issue{kind, sev, std::move(hh), wave, std::move(detail)});
    };

    if (stations.stations.empty()) {
        add(IssueKind::EmptyStationSet, Severity::Fatal, "", 0, "no stations; distance-based grouping impossible");
    }
    if (factors.gasoline.empty() && factors.electrified.empty()) {
        add(IssueKind::EmptyFactorTables, Severity::Fatal, "", 0, "no emission factors loaded");
    }

    std::map<std::string, std::set<int>> waves_of;
    for (const auto &h : survey.households) waves_of[h.household_id].insert(h.wave);

    std::set<HouseholdWave> with_trips;
    for (const auto &t : survey.trips) with_trips.emplace(t.household_id, t.wave);

    // Sorted copies keep the report independent of input row order.
    auto households = survey.households;
    std::sort(households.begin(), households.end(), [](const auto &a, const auto &b) {
        return std::tie(a.household_id, a.wave) < std::tie(b.household_id, b.wave);
    });
    for (const auto &h : households) {
        if (!h.income_bracket) {
            add(IssueKind::MissingIncome, Severity::Warning, h.household_id, h.wave, "income_bracket empty");
        }
        if (!with_trips.count({h.household_id, h.wave})) {
            add(IssueKind::MissingTripLog, Severity::Warning, h.household_id, h.wave, "no trip-day records");
        }
        if (waves_of[h.household_id].size() == 1 && h.wave == *waves_of[h.household_id].begin()) {
            add(IssueKind::SingleWaveHousehold, Severity::Warning, h.household_id, h.wave,
                "household observed in one wave only");
        }
    }

    auto vehicles = survey.vehicles;
    std::sort(vehicles.begin(), vehicles.end(), [](const auto &a, const auto &b) {
        return std::tie(a.household_id, a.wave, a.vehicle_id) < std::tie(b.household_id, b.wave, b.vehicle_id);
    });
    for (const auto &v : vehicles) {
        if (v.make.empty() || v.model.empty() || !v.model_year ||
            (v.body == Body::Truck && !v.curb_weight_lb)) {
            add(IssueKind::MissingVehicleInfo, Severity::Warning, v.household_id, v.wave,
                fmt::format("vehicle {} lacks make/model/year or truck curb weight", v.vehicle_id));
        }
        if (v.model_year && (*v.model_year < 1950 || *v.model_year > cfg.calendar_year(v.wave) + 1)) {
            add(IssueKind::ImplausibleModelYear, Severity::Warning, v.household_id, v.wave,
                fmt::format("vehicle {} model year {}", v.vehicle_id, *v.model_year));
        }
    }

    std::map<VehicleKey, std::vector<std::pair<int, double>>> series;
    for (const auto &o : survey.odometer) {
        series[{o.household_id, o.wave, o.vehicle_id}].emplace_back(o.day_index, o.reading_miles);
    }
    for (auto &[key, readings] : series) {
        std::sort(readings.begin(), readings.end());
        for (std::size_t i = 1; i < readings.size(); ++i) {
            if (readings[i].second < readings[i - 1].second) {
                const auto &[hh, wave, vid] = key;
                add(IssueKind::UnreliableOdometer, Severity::Warning, hh, wave,
                    fmt::format("vehicle {} odometer decreases on day {}", vid, readings[i].first));
                break;
            }
        }
    }
    return report;
}

} // namespace railco2
