#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace railco2 {

inline constexpr double kMilesPerKilometer = 0.621371;

enum class LengthUnit { Mile, Kilometer };

struct Length {
    double value = 0.0;
    LengthUnit unit = LengthUnit::Mile;

    double miles() const { return unit == LengthUnit::Mile ? value : value * kMilesPerKilometer; }
    // Compact flag form, e.g. "0.5mi" or "1km".
    std::string label() const;

    friend bool operator==(const Length &, const Length &) = default;
};

// Accepts "<number><unit>" with optional whitespace; units mi, mile, miles,
// km, kilometer, kilometers.
Length parse_length(std::string_view text);
std::vector<Length> parse_length_list(std::string_view text);

enum class TTestVariant { Welch, Pooled };

std::string_view to_string(TTestVariant variant);
TTestVariant parse_ttest_variant(std::string_view text);

// Z-vector covariates appended after the four core difference-in-differences
// columns. Income expands to dummies for brackets 2..6 (bracket 1 is base).
struct CovariateSpec {
    bool veh_cnt = false;
    bool ppl_cnt = false;
    bool income_dummies = false;

    bool empty() const { return !veh_cnt && !ppl_cnt && !income_dummies; }
    std::string label() const;

    friend bool operator==(const CovariateSpec &, const CovariateSpec &) = default;
};

CovariateSpec parse_covariate_spec(std::string_view text);

struct InputPaths {
    std::filesystem::path households;
    std::filesystem::path vehicles;
    std::filesystem::path odometer;
    std::filesystem::path trips;
    std::filesystem::path factors_gasoline;
    std::filesystem::path factors_electrified;
    std::filesystem::path stations;
    std::optional<std::filesystem::path> lifecycle;
};

// Plain-text `dotted.key = value` file. '#' starts a comment line.
class ConfigFile {
public:
    struct Entry {
        std::string value;
        std::size_t line = 0;
    };

    static ConfigFile parse(std::string_view text, std::string source);
    static ConfigFile read(const std::filesystem::path &path);

    std::optional<std::string> get(std::string_view key) const;
    std::size_t line_of(std::string_view key) const;
    const std::map<std::string, Entry, std::less<>> &entries() const { return entries_; }
    const std::string &source() const { return source_; }
    const std::filesystem::path &base_dir() const { return base_dir_; }

    [[noreturn]] void fail(std::string_view key, const std::string &reason) const;

private:
    std::string source_;
    std::filesystem::path base_dir_;
    std::map<std::string, Entry, std::less<>> entries_;
};

struct RunConfig {
    Length catchment_radius{0.5, LengthUnit::Mile};
    double outlier_vmt_per_day = 200.0;
    int min_odometer_readings = 3;
    int survey_days = 7;
    TTestVariant ttest = TTestVariant::Welch;
    CovariateSpec covariates{true, true, true};
    std::uint64_t seed = 20111001;
    // Emission-factor calendar year for wave 1 and wave 2.
    std::array<int, 2> calendar_years{2011, 2012};
    std::vector<Length> sensitivity_radii{
        {0.5, LengthUnit::Mile}, {1.0, LengthUnit::Kilometer}, {0.75, LengthUnit::Mile}};
    InputPaths inputs;

    int calendar_year(int wave) const { return calendar_years.at(static_cast<std::size_t>(wave - 1)); }
    // Throws InvalidConfig when an invariant is violated.
    void check() const;
};

// Keys under `sim.` are left for the simulator; any other unknown key is an error.
RunConfig run_config_from(const ConfigFile &file);
RunConfig load_run_config(const std::filesystem::path &path);

} // namespace railco2
