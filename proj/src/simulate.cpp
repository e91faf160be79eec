#include "railco2/simulate.hpp"

#include "railco2/csv.hpp"
#include "railco2/emissions.hpp"
#include "railco2/error.hpp"
#include "railco2/evaluate.hpp"
#include "railco2/panel.hpp"
#include "railco2/stats.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

namespace railco2::sim {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kStationLat = 34.0220;
constexpr double kStationLon = -118.3960;
constexpr double kStationSpacingMi = 2.0;
constexpr int kStationCount = 6;
constexpr int kOldestModelYear = 1990;
constexpr int kNewestModelYear = 2013;
constexpr int kOldestFleetYear = 1998;
constexpr int kNewestFleetYear = 2011;
constexpr std::string_view kElectrifiedMake = "Synthetic";
constexpr std::string_view kHybridModel = "Hybrid Sedan";
constexpr std::string_view kElectricModel = "EV Hatch";

using Rng = std::mt19937_64;

double uniform(Rng &rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

void require(bool ok, const std::string &what) {
    if (!ok) throw Error(ErrorCode::InvalidConfig, what);
}

template <std::size_t N> void check_probs(const std::array<double, N> &p, std::string_view name) {
    double sum = 0.0;
    for (double v : p) {
        require(v >= 0.0 && std::isfinite(v), fmt::format("{} has a negative or non-finite entry", name));
        sum += v;
    }
    require(std::fabs(sum - 1.0) <= 1e-9, fmt::format("{} sums to {}, not 1", name, sum));
}

// Largest-remainder allocation of n items over a probability vector.
template <std::size_t N> std::array<std::size_t, N> quota(const std::array<double, N> &p, std::size_t n) {
    std::array<std::size_t, N> out{};
    std::array<double, N> rem{};
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < N; ++i) {
        const double exact = p[i] * static_cast<double>(n);
        out[i] = static_cast<std::size_t>(std::floor(exact));
        rem[i] = exact - std::floor(exact);
        assigned += out[i];
    }
    std::array<std::size_t, N> order{};
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
    for (std::size_t i = 0; assigned < n; ++i, ++assigned) ++out[order[i % N]];
    return out;
}

double class_multiplier(VehicleClass cls) {
    switch (cls) {
    case VehicleClass::LDA: return 1.0;
    case VehicleClass::LDT1: return 1.25;
    case VehicleClass::LDT2: return 1.5;
    case VehicleClass::MCY: return 0.4;
    }
    return 1.0;
}

FactorTables synthetic_factors(const SimConfig &cfg) {
    FactorTables f;
    f.ldt_split_threshold_lb = cfg.ldt_split_threshold_lb;
    for (std::size_t w = 0; w < 2; ++w) {
        const int year = cfg.calendar_years[w];
        const double trend = w == 0 ? 1.0 : 0.99;
        for (auto cls : {VehicleClass::LDA, VehicleClass::LDT1, VehicleClass::LDT2, VehicleClass::MCY}) {
            for (int my = kOldestModelYear; my <= kNewestModelYear; ++my) {
                const double age = 1.0 + 0.01 * (kNewestFleetYear - my);
                const double m = class_multiplier(cls) * age * trend;
                f.gasoline[GasolineKey{year, cls, my}] =
                    GasolineFactor{cfg.mean_run_g_per_mile * m, cfg.mean_start_g_per_day * m};
            }
        }
    }
    for (int my = kOldestModelYear; my <= kNewestModelYear; ++my) {
        const double age = 1.0 + 0.005 * (kNewestFleetYear - my);
        f.electrified[make_electrified_key(kElectrifiedMake, kHybridModel, my)] =
            ElectrifiedFactor{0.6 * cfg.mean_run_g_per_mile * age};
        f.electrified[make_electrified_key(kElectrifiedMake, kElectricModel, my)] =
            ElectrifiedFactor{0.35 * cfg.mean_run_g_per_mile * age};
    }
    return f;
}

// Point at `distance_mi` along `bearing_rad` from (lat, lon), on a sphere of
// the haversine radius so distances round-trip.
std::pair<double, double> destination(double lat_deg, double lon_deg, double distance_mi, double bearing_rad) {
    const double phi1 = lat_deg * kPi / 180.0;
    const double lambda1 = lon_deg * kPi / 180.0;
    const double delta = distance_mi / kEarthRadiusMiles;
    const double phi2 =
        std::asin(std::sin(phi1) * std::cos(delta) + std::cos(phi1) * std::sin(delta) * std::cos(bearing_rad));
    const double lambda2 = lambda1 + std::atan2(std::sin(bearing_rad) * std::sin(delta) * std::cos(phi1),
                                                std::cos(delta) - std::sin(phi1) * std::sin(phi2));
    return {phi2 * 180.0 / kPi, lambda2 * 180.0 / kPi};
}

StationSet synthetic_stations() {
    StationSet s;
    const double lon_step =
        kStationSpacingMi / (kEarthRadiusMiles * std::cos(kStationLat * kPi / 180.0)) * 180.0 / kPi;
    for (int i = 0; i < kStationCount; ++i) {
        s.stations.push_back(Station{fmt::format("S{}", i + 1), kStationLat, kStationLon + lon_step * i});
    }
    return s;
}

struct VehicleDraw {
    VehicleRecord record;
    double start_g = 0.0; // per-day start emissions at the wave's calendar year
    double per_mile = 0.0;
};

// Per-mile and per-day rates for a vehicle in a calendar year, using the same
// lookups as the emissions pipeline.
void attach_rates(VehicleDraw &v, int calendar_year, const FactorTables &f) {
    if (v.record.fuel == Fuel::Gasoline) {
        const auto cls = classify_vehicle(v.record, f.ldt_split_threshold_lb);
        const auto g = lookup_gasoline_factor(cls, *v.record.model_year, calendar_year, f);
        v.start_g = g.start_g_per_day;
        v.per_mile = g.run_g_per_mile;
    } else {
        v.start_g = 0.0;
        v.per_mile = lookup_electrified_factor(v.record.make, v.record.model, *v.record.model_year, f)
                         .combined_g_per_mile;
    }
}

VehicleRecord draw_vehicle(const SimConfig &cfg, Rng &rng, const std::string &hh, int index) {
    VehicleRecord v;
    v.household_id = hh;
    v.vehicle_id = fmt::format("V{}", index);
    v.model_year = std::uniform_int_distribution<int>(kOldestFleetYear, kNewestFleetYear)(rng);
    const double body = uniform(rng, 0.0, 1.0);
    if (body < cfg.motorcycle_share) {
        v.body = Body::Motorcycle;
        v.make = "Generic";
        v.model = "Motorcycle";
        v.curb_weight_lb = std::round(uniform(rng, 400.0, 800.0));
    } else if (body < cfg.motorcycle_share + cfg.truck_share) {
        v.body = Body::Truck;
        v.make = "Generic";
        v.model = "Light Truck";
        v.curb_weight_lb = std::round(uniform(rng, 3000.0, 5500.0));
    } else {
        v.body = Body::Auto;
        v.curb_weight_lb = std::round(uniform(rng, 2400.0, 3800.0));
        if (uniform(rng, 0.0, 1.0) < cfg.electrified_share) {
            const bool hybrid = uniform(rng, 0.0, 1.0) < 0.75;
            v.fuel = hybrid ? Fuel::Hybrid : Fuel::Electric;
            v.make = std::string(kElectrifiedMake);
            v.model = std::string(hybrid ? kHybridModel : kElectricModel);
        } else {
            v.make = "Generic";
            v.model = "Sedan";
        }
    }
    return v;
}

int poisson(Rng &rng, double mean) {
    if (!(mean > 0.0)) return 0;
    return std::poisson_distribution<int>(mean)(rng);
}

} // namespace

void SimConfig::set_cell_means(double control_before, double experimental_before, double control_after,
                               double experimental_after) {
    mu_control_before = control_before;
    mu_experimental_before = experimental_before;
    secular_change = control_after - control_before;
    treatment_effect = (experimental_after - experimental_before) - secular_change;
}

void SimConfig::check() const {
    require(households_per_group >= 2, "sim.households_per_group must be at least 2");
    require(noise_sd >= 0.0 && std::isfinite(noise_sd), "sim.noise_sd must be finite and non-negative");
    for (double mu : {mu_control_before, mu_experimental_before, mu_control_after(), mu_experimental_after()}) {
        require(std::isfinite(mu) && mu >= 0.0, fmt::format("cell mean {} must be finite and non-negative", mu));
    }
    check_probs(vehicle_count_probs, "sim.vehicle_count_probs");
    check_probs(income_probs, "sim.income_probs");
    require(income_missing_prob >= 0.0 && income_missing_prob <= 1.0, "sim.income_missing_prob must be in [0, 1]");
    require(mean_run_g_per_mile > 0.0 && mean_start_g_per_day >= 0.0,
            "sim.mean_run_g_per_mile must be positive and sim.mean_start_g_per_day non-negative");
    for (double s : {truck_share, motorcycle_share, electrified_share}) {
        require(s >= 0.0 && s <= 1.0, "vehicle shares must be in [0, 1]");
    }
    require(truck_share + motorcycle_share <= 1.0, "sim.truck_share + sim.motorcycle_share exceeds 1");
    require(ldt_split_threshold_lb > 0.0, "sim.ldt_split_threshold_lb must be positive");
    for (const auto &r : {experimental_distance, control_distance}) {
        require(r.min_mi >= 0.0 && r.min_mi <= r.max_mi, "distance ranges need 0 <= min <= max");
        require(r.max_mi < kStationSpacingMi,
                fmt::format("home distances must stay below the {} mi station spacing", kStationSpacingMi));
    }
    for (double m : {car_trips_mean, bus_trips_mean, train_trips_mean, train_trips_mean + train_trip_change}) {
        require(m >= 0.0, "trip means must be non-negative");
    }
    require(survey_days >= 2, "sim.survey_days must be at least 2");
}

SimConfig sim_config_from(const ConfigFile &file) {
    SimConfig cfg;
    auto reals = [&](std::string_view key, const std::string &value) {
        std::vector<double> out;
        std::size_t pos = 0;
        while (pos <= value.size()) {
            auto comma = value.find(',', pos);
            if (comma == std::string::npos) comma = value.size();
            const auto piece = value.substr(pos, comma - pos);
            try {
                std::size_t used = 0;
                out.push_back(std::stod(piece, &used));
                if (piece.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(piece);
            } catch (const std::exception &) {
                file.fail(key, fmt::format("\"{}\" is not a number", piece));
            }
            pos = comma + 1;
        }
        return out;
    };
    auto real = [&](std::string_view key, const std::string &value) {
        auto v = reals(key, value);
        if (v.size() != 1) file.fail(key, "expected a single number");
        return v[0];
    };
    auto count = [&](std::string_view key, const std::string &value) {
        const double v = real(key, value);
        if (v < 0.0 || v != std::floor(v)) file.fail(key, "expected a non-negative integer");
        return static_cast<std::uint64_t>(v);
    };
    auto fill = [&](std::string_view key, const std::string &value, auto &arr) {
        auto v = reals(key, value);
        if (v.size() != arr.size()) file.fail(key, fmt::format("expected {} comma-separated numbers", arr.size()));
        std::copy(v.begin(), v.end(), arr.begin());
    };
    auto range = [&](std::string_view key, const std::string &value) {
        std::array<double, 2> v{};
        fill(key, value, v);
        return DistanceRange{v[0], v[1]};
    };

    std::optional<std::array<double, 4>> cells;
    bool seed_set = false;
    for (const auto &[key, entry] : file.entries()) {
        const auto &value = entry.value;
        if (key == "run.seed" && !seed_set) {
            cfg.seed = count(key, value);
        } else if (key.rfind("sim.", 0) != 0) {
            continue;
        } else if (key == "sim.seed") {
            cfg.seed = count(key, value);
            seed_set = true;
        } else if (key == "sim.households_per_group") {
            cfg.households_per_group = count(key, value);
        } else if (key == "sim.cell_means") {
            std::array<double, 4> v{};
            fill(key, value, v);
            cells = v;
        } else if (key == "sim.mu_control_before") {
            cfg.mu_control_before = real(key, value);
        } else if (key == "sim.mu_experimental_before") {
            cfg.mu_experimental_before = real(key, value);
        } else if (key == "sim.secular_change") {
            cfg.secular_change = real(key, value);
        } else if (key == "sim.treatment_effect") {
            cfg.treatment_effect = real(key, value);
        } else if (key == "sim.noise_sd") {
            cfg.noise_sd = real(key, value);
        } else if (key == "sim.noise") {
            if (value == "gamma") {
                cfg.noise_shape = NoiseShape::Gamma;
            } else if (value == "normal") {
                cfg.noise_shape = NoiseShape::Normal;
            } else {
                file.fail(key, "expected gamma or normal");
            }
        } else if (key == "sim.vehicle_count_probs") {
            fill(key, value, cfg.vehicle_count_probs);
        } else if (key == "sim.income_probs") {
            fill(key, value, cfg.income_probs);
        } else if (key == "sim.income_missing_prob") {
            cfg.income_missing_prob = real(key, value);
        } else if (key == "sim.mean_run_g_per_mile") {
            cfg.mean_run_g_per_mile = real(key, value);
        } else if (key == "sim.mean_start_g_per_day") {
            cfg.mean_start_g_per_day = real(key, value);
        } else if (key == "sim.truck_share") {
            cfg.truck_share = real(key, value);
        } else if (key == "sim.motorcycle_share") {
            cfg.motorcycle_share = real(key, value);
        } else if (key == "sim.electrified_share") {
            cfg.electrified_share = real(key, value);
        } else if (key == "sim.ldt_split_threshold_lb") {
            cfg.ldt_split_threshold_lb = real(key, value);
        } else if (key == "sim.experimental_distance_mi") {
            cfg.experimental_distance = range(key, value);
        } else if (key == "sim.control_distance_mi") {
            cfg.control_distance = range(key, value);
        } else if (key == "sim.car_trips_mean") {
            cfg.car_trips_mean = real(key, value);
        } else if (key == "sim.bus_trips_mean") {
            cfg.bus_trips_mean = real(key, value);
        } else if (key == "sim.train_trips_mean") {
            cfg.train_trips_mean = real(key, value);
        } else if (key == "sim.train_trip_change") {
            cfg.train_trip_change = real(key, value);
        } else {
            file.fail(key, "unknown simulator key");
        }
    }
    if (cells) {
        if (file.get("sim.mu_control_before") || file.get("sim.mu_experimental_before") ||
            file.get("sim.secular_change") || file.get("sim.treatment_effect")) {
            file.fail("sim.cell_means", "cannot be combined with the individual mean/effect keys");
        }
        cfg.set_cell_means((*cells)[0], (*cells)[1], (*cells)[2], (*cells)[3]);
    }
    // Calendar years and survey length follow the run configuration.
    const auto run = run_config_from(file);
    cfg.calendar_years = run.calendar_years;
    cfg.survey_days = run.survey_days;
    try {
        cfg.check();
    } catch (const Error &e) {
        throw Error(ErrorCode::InvalidConfig, fmt::format("{}: {}", file.source(), e.detail()));
    }
    return cfg;
}

std::uint64_t replication_seed(std::uint64_t master, std::uint64_t index) {
    // splitmix64 applied to master + (index + 1) * golden gamma.
    std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

SyntheticDataset generate_panel(const SimConfig &cfg) {
    cfg.check();
    Rng rng(cfg.seed);
    SyntheticDataset out;
    out.factors = synthetic_factors(cfg);
    out.stations = synthetic_stations();

    const std::size_t n = cfg.households_per_group;
    const auto width = std::max<std::size_t>(4, fmt::format("{}", 2 * n).size());
    std::discrete_distribution<int> income_draw(cfg.income_probs.begin(), cfg.income_probs.end());

    for (int group = 0; group < 2; ++group) {
        const auto vehicle_quota = quota(cfg.vehicle_count_probs, n);
        std::vector<int> vehicle_counts;
        for (std::size_t c = 0; c < vehicle_quota.size(); ++c) {
            vehicle_counts.insert(vehicle_counts.end(), vehicle_quota[c], static_cast<int>(c));
        }
        std::shuffle(vehicle_counts.begin(), vehicle_counts.end(), rng);
        const std::size_t owners = n - vehicle_quota[0];
        const double mu[2] = {
            group == 0 ? cfg.mu_control_before : cfg.mu_experimental_before,
            group == 0 ? cfg.mu_control_after() : cfg.mu_experimental_after(),
        };
        // Zero-vehicle households emit nothing; owners carry the whole cell mean.
        double owner_mu[2];
        for (int w = 0; w < 2; ++w) {
            if (owners == 0) {
                if (mu[w] != 0.0) {
                    throw Error(ErrorCode::InfeasibleTarget,
                                fmt::format("cell mean {} needs vehicles but every household has none", mu[w]));
                }
                owner_mu[w] = 0.0;
            } else {
                owner_mu[w] = mu[w] * static_cast<double>(n) / static_cast<double>(owners);
            }
        }

        const auto &range = group == 1 ? cfg.experimental_distance : cfg.control_distance;
        for (std::size_t i = 0; i < n; ++i) {
            const std::string hh =
                fmt::format("H{:0{}}", static_cast<std::size_t>(group) * n + i + 1, width);
            const auto &station = out.stations.stations[std::uniform_int_distribution<std::size_t>(
                0, out.stations.stations.size() - 1)(rng)];
            const double distance = uniform(rng, range.min_mi, range.max_mi);
            const double side = uniform(rng, 0.0, 1.0) < 0.5 ? 0.0 : kPi;
            const double bearing = side + uniform(rng, -kPi / 6.0, kPi / 6.0);
            const auto [lat, lon] = destination(station.lat, station.lon, distance, bearing);
            const int people = std::min(6, 1 + poisson(rng, 0.9));
            std::optional<int> income;
            if (!(uniform(rng, 0.0, 1.0) < cfg.income_missing_prob)) income = income_draw(rng) + 1;

            const int vehicles = vehicle_counts[i];
            std::vector<VehicleRecord> fleet;
            for (int v = 0; v < vehicles; ++v) fleet.push_back(draw_vehicle(cfg, rng, hh, v + 1));

            for (int wave = 1; wave <= 2; ++wave) {
                const int calendar_year = cfg.calendar_years[static_cast<std::size_t>(wave - 1)];
                out.survey.households.push_back(HouseholdRecord{hh, wave, lat, lon, people, income, vehicles});

                std::vector<VehicleDraw> draws;
                double floor = 0.0;
                for (const auto &rec : fleet) {
                    VehicleDraw d{rec};
                    d.record.wave = wave;
                    attach_rates(d, calendar_year, out.factors);
                    floor += d.start_g;
                    draws.push_back(std::move(d));
                }

                double target = 0.0;
                if (vehicles > 0) {
                    const double m = owner_mu[wave - 1];
                    if (cfg.noise_sd == 0.0) {
                        target = m;
                    } else if (cfg.noise_shape == NoiseShape::Gamma) {
                        const double excess = m - floor;
                        if (!(excess > 0.0)) {
                            throw Error(ErrorCode::InfeasibleTarget,
                                        fmt::format("household {} wave {}: mean {} does not exceed start "
                                                    "emissions {}",
                                                    hh, wave, m, floor));
                        }
                        const double shape = excess * excess / (cfg.noise_sd * cfg.noise_sd);
                        const double scale = cfg.noise_sd * cfg.noise_sd / excess;
                        target = floor + std::gamma_distribution<double>(shape, scale)(rng);
                    } else {
                        target = m + std::normal_distribution<double>(0.0, cfg.noise_sd)(rng);
                    }
                    if (target < floor) {
                        throw Error(ErrorCode::InfeasibleTarget,
                                    fmt::format("household {} wave {}: target {} g/day is below start "
                                                "emissions {} g/day",
                                                hh, wave, target, floor));
                    }
                }
                out.targets.push_back(HouseholdTarget{hh, wave, group, target});

                // Split the running share of the target across vehicles.
                std::vector<double> weights;
                for (std::size_t v = 0; v < draws.size(); ++v) weights.push_back(uniform(rng, 0.5, 1.5));
                const double weight_sum = std::accumulate(weights.begin(), weights.end(), 0.0);
                const double running = target - floor;
                for (std::size_t v = 0; v < draws.size(); ++v) {
                    const auto &d = draws[v];
                    const double vmt = running * weights[v] / weight_sum / d.per_mile;
                    out.survey.vehicles.push_back(d.record);

                    const int days = cfg.survey_days;
                    std::vector<double> steps;
                    for (int day = 1; day < days; ++day) steps.push_back(uniform(rng, 0.2, 1.8));
                    const double step_sum = std::accumulate(steps.begin(), steps.end(), 0.0);
                    const double total = vmt * (days - 1);
                    double reading = std::floor(uniform(rng, 5000.0, 150000.0));
                    out.survey.odometer.push_back(OdometerReading{hh, wave, d.record.vehicle_id, 1, reading});
                    const double start = reading;
                    double cumulative = 0.0;
                    for (int day = 2; day <= days; ++day) {
                        cumulative += steps[static_cast<std::size_t>(day - 2)];
                        // The final day lands exactly on start + total.
                        reading = day == days ? start + total : start + total * (cumulative / step_sum);
                        out.survey.odometer.push_back(
                            OdometerReading{hh, wave, d.record.vehicle_id, day, reading});
                    }
                }

                const double train_mean =
                    cfg.train_trips_mean + (group == 1 && wave == 2 ? cfg.train_trip_change : 0.0);
                for (int day = 1; day <= cfg.survey_days; ++day) {
                    out.survey.trips.push_back(TripDayRecord{hh, wave, day,
                                                             vehicles > 0 ? poisson(rng, cfg.car_trips_mean) : 0,
                                                             poisson(rng, cfg.bus_trips_mean),
                                                             poisson(rng, train_mean)});
                }
            }
        }
    }
    return out;
}

namespace {

void write_file(const std::filesystem::path &path, const std::string &text) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ErrorCode::Io, fmt::format("cannot open {} for writing", path.string()));
    os << text;
    if (!os) throw Error(ErrorCode::Io, fmt::format("failed writing {}", path.string()));
}

} // namespace

void write_dataset(const SyntheticDataset &data, const SimConfig &cfg, const std::filesystem::path &dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::Io, fmt::format("cannot create {}: {}", dir.string(), ec.message()));
    write_survey(data.survey, dir);
    write_file(dir / "factors_gasoline.csv", format_gasoline_factors(data.factors));
    write_file(dir / "factors_electrified.csv", format_electrified_factors(data.factors));
    write_file(dir / "stations.csv", format_stations(data.stations));

    std::string truth = "household_id,wave,group,target_co2_g\n";
    for (const auto &t : data.targets) {
        truth += fmt::format("{},{},{},{}\n", t.household_id, t.wave, t.group, csv::format_real(t.target_co2_g));
    }
    write_file(dir / "truth.csv", truth);

    std::string conf = fmt::format(
        "# synthetic dataset, seed {}\n"
        "input.households = households.csv\n"
        "input.vehicles = vehicles.csv\n"
        "input.odometer = odometer.csv\n"
        "input.trips = trips.csv\n"
        "input.factors_gasoline = factors_gasoline.csv\n"
        "input.factors_electrified = factors_electrified.csv\n"
        "input.stations = stations.csv\n"
        "survey.calendar_year.wave1 = {}\n"
        "survey.calendar_year.wave2 = {}\n"
        "panel.survey_days = {}\n"
        "run.seed = {}\n",
        cfg.seed, cfg.calendar_years[0], cfg.calendar_years[1], cfg.survey_days, cfg.seed);
    write_file(dir / "run.conf", conf);
}

RecoveryReport recovery_experiment(const SimConfig &cfg, std::size_t replications, const RunConfig &run,
                                   const CovariateSpec &spec) {
    if (replications < 2) {
        throw Error(ErrorCode::InsufficientSample, fmt::format("need at least 2 replications, got {}", replications));
    }
    cfg.check();
    RunConfig pipeline = run;
    pipeline.calendar_years = cfg.calendar_years;
    pipeline.survey_days = cfg.survey_days;

    const double tau = cfg.treatment_effect;
    std::vector<double> estimates(replications);
    std::vector<double> ses(replications);
    std::vector<char> covered(replications);
    std::vector<char> rejected(replications);
    for (std::size_t r = 0; r < replications; ++r) {
        SimConfig rep = cfg;
        rep.seed = replication_seed(cfg.seed, r);
        const auto data = generate_panel(rep);
        const auto panel = build_balanced_panel(data.survey, data.factors, data.stations, pipeline);
        const auto fit = did_fit(panel, spec);
        const auto c = fit.treatment_effect();
        estimates[r] = c.estimate;
        ses[r] = c.se;
        const double half = stats::t_critical_two_sided(0.05, fit.ols.df_resid()) * c.se;
        // Exact recovery leaves only rounding error, so allow a tiny relative floor.
        covered[r] = std::fabs(c.estimate - tau) <= half + 1e-9 * std::max(1.0, std::fabs(tau));
        rejected[r] = c.p < 0.05;
    }

    RecoveryReport rep;
    rep.replications = replications;
    rep.households_per_group = cfg.households_per_group;
    rep.true_effect = tau;
    const double nr = static_cast<double>(replications);
    double sum = 0.0, sum_se = 0.0, sq_err = 0.0;
    std::size_t n_cov = 0, n_rej = 0;
    for (std::size_t r = 0; r < replications; ++r) {
        sum += estimates[r];
        sum_se += ses[r];
        sq_err += (estimates[r] - tau) * (estimates[r] - tau);
        n_cov += covered[r] ? 1 : 0;
        n_rej += rejected[r] ? 1 : 0;
    }
    rep.mean_estimate = sum / nr;
    rep.bias = rep.mean_estimate - tau;
    rep.rmse = std::sqrt(sq_err / nr);
    double ss = 0.0;
    for (double e : estimates) ss += (e - rep.mean_estimate) * (e - rep.mean_estimate);
    rep.empirical_sd = std::sqrt(ss / (nr - 1.0));
    rep.mean_se = sum_se / nr;
    rep.coverage = static_cast<double>(n_cov) / nr;
    rep.rejection_rate = static_cast<double>(n_rej) / nr;
    rep.estimates = std::move(estimates);
    return rep;
}

} // namespace railco2::sim
