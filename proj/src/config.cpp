#include "railco2/config.hpp"

#include "railco2/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace railco2 {

namespace {

std::string trim(std::string_view s) {
    auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::vector<std::string> split_list(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto comma = text.find(',', start);
        auto piece = trim(text.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                              : comma - start));
        if (!piece.empty()) out.push_back(piece);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

double parse_number(const ConfigFile &file, std::string_view key, const std::string &text) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
        file.fail(key, fmt::format("expected a number, got \"{}\"", text));
    }
    return value;
}

long long parse_whole(const ConfigFile &file, std::string_view key, const std::string &text) {
    long long value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
        file.fail(key, fmt::format("expected an integer, got \"{}\"", text));
    }
    return value;
}

} // namespace

std::string Length::label() const {
    return fmt::format("{}{}", value, unit == LengthUnit::Mile ? "mi" : "km");
}

Length parse_length(std::string_view text) {
    auto s = trim(text);
    std::size_t split = 0;
    while (split < s.size() &&
           (std::isdigit(static_cast<unsigned char>(s[split])) || s[split] == '.' || s[split] == '-' ||
            s[split] == '+' || s[split] == 'e' || s[split] == 'E')) {
        // Stop before a unit that starts with 'e' would be ambiguous; no unit does.
        ++split;
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + split, value);
    if (split == 0 || ec != std::errc{} || ptr != s.data() + split) {
        throw Error(ErrorCode::InvalidConfig, fmt::format("invalid length \"{}\"", s));
    }
    auto unit = lower(trim(std::string_view(s).substr(split)));
    Length length{value, LengthUnit::Mile};
    if (unit == "mi" || unit == "mile" || unit == "miles") {
        length.unit = LengthUnit::Mile;
    } else if (unit == "km" || unit == "kilometer" || unit == "kilometers" || unit == "kilometre" ||
               unit == "kilometres") {
        length.unit = LengthUnit::Kilometer;
    } else {
        throw Error(ErrorCode::InvalidConfig,
                    fmt::format("invalid length unit in \"{}\" (expected mi or km)", s));
    }
    if (!(value > 0.0)) {
        throw Error(ErrorCode::InvalidConfig, fmt::format("length must be positive: \"{}\"", s));
    }
    return length;
}

std::vector<Length> parse_length_list(std::string_view text) {
    std::vector<Length> out;
    for (const auto &piece : split_list(text)) out.push_back(parse_length(piece));
    if (out.empty()) throw Error(ErrorCode::InvalidConfig, "empty radius list");
    return out;
}

std::string_view to_string(TTestVariant variant) {
    return variant == TTestVariant::Welch ? "welch" : "pooled";
}

TTestVariant parse_ttest_variant(std::string_view text) {
    auto s = lower(trim(text));
    if (s == "welch") return TTestVariant::Welch;
    if (s == "pooled") return TTestVariant::Pooled;
    throw Error(ErrorCode::InvalidConfig,
                fmt::format("unknown t-test variant \"{}\" (expected welch or pooled)", s));
}

std::string CovariateSpec::label() const {
    std::vector<std::string> parts;
    if (veh_cnt) parts.emplace_back("veh_cnt");
    if (ppl_cnt) parts.emplace_back("ppl_cnt");
    if (income_dummies) parts.emplace_back("income_dummies");
    if (parts.empty()) return "none";
    return fmt::format("{}", fmt::join(parts, ","));
}

CovariateSpec parse_covariate_spec(std::string_view text) {
    CovariateSpec spec;
    auto s = lower(trim(text));
    if (s.empty() || s == "none") return spec;
    for (const auto &piece : split_list(s)) {
        if (piece == "veh_cnt") {
            spec.veh_cnt = true;
        } else if (piece == "ppl_cnt") {
            spec.ppl_cnt = true;
        } else if (piece == "income_dummies" || piece == "income") {
            spec.income_dummies = true;
        } else {
            throw Error(ErrorCode::InvalidConfig, fmt::format("unknown covariate \"{}\"", piece));
        }
    }
    return spec;
}

ConfigFile ConfigFile::parse(std::string_view text, std::string source) {
    ConfigFile file;
    file.source_ = std::move(source);
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        ++line_no;
        auto line = trim(raw);
        if (!line.empty() && line.front() != '#') {
            auto eq = line.find('=');
            if (eq == std::string::npos) {
                throw Error(ErrorCode::InvalidConfig,
                            fmt::format("{}:{}: expected 'key = value'", file.source_, line_no));
            }
            auto key = trim(std::string_view(line).substr(0, eq));
            auto value = trim(std::string_view(line).substr(eq + 1));
            if (key.empty()) {
                throw Error(ErrorCode::InvalidConfig,
                            fmt::format("{}:{}: empty key", file.source_, line_no));
            }
            if (file.entries_.count(key)) {
                throw Error(ErrorCode::InvalidConfig,
                            fmt::format("{}:{}: duplicate key '{}'", file.source_, line_no, key));
            }
            file.entries_.emplace(key, Entry{value, line_no});
        }
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return file;
}

ConfigFile ConfigFile::read(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, fmt::format("cannot open config '{}'", path.string()));
    std::ostringstream buffer;
    buffer << in.rdbuf();
    auto file = parse(buffer.str(), path.string());
    file.base_dir_ = path.parent_path();
    return file;
}

std::optional<std::string> ConfigFile::get(std::string_view key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second.value;
}

std::size_t ConfigFile::line_of(std::string_view key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.line;
}

void ConfigFile::fail(std::string_view key, const std::string &reason) const {
    throw Error(ErrorCode::InvalidConfig,
                fmt::format("{}:{}: {}: {}", source_, line_of(key), key, reason));
}

void RunConfig::check() const {
    if (!(catchment_radius.value > 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "panel.catchment_radius must be positive");
    }
    if (!(outlier_vmt_per_day > 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "panel.outlier_vmt_per_day must be positive");
    }
    if (min_odometer_readings < 2) {
        throw Error(ErrorCode::InvalidConfig, "panel.min_odometer_readings must be at least 2");
    }
    if (survey_days < 2) {
        throw Error(ErrorCode::InvalidConfig, "panel.survey_days must be at least 2");
    }
    if (min_odometer_readings > survey_days) {
        throw Error(ErrorCode::InvalidConfig,
                    "panel.min_odometer_readings cannot exceed panel.survey_days");
    }
    for (const auto &r : sensitivity_radii) {
        if (!(r.value > 0.0)) throw Error(ErrorCode::InvalidConfig, "sensitivity radius must be positive");
    }
}

RunConfig run_config_from(const ConfigFile &file) {
    RunConfig cfg;
    auto path_of = [&](const std::string &value) {
        std::filesystem::path p(value);
        return p.is_absolute() ? p : file.base_dir() / p;
    };
    for (const auto &[key, entry] : file.entries()) {
        const auto &value = entry.value;
        try {
            if (key.rfind("sim.", 0) == 0) {
                continue;
            } else if (key == "panel.catchment_radius") {
                cfg.catchment_radius = parse_length(value);
            } else if (key == "panel.outlier_vmt_per_day") {
                cfg.outlier_vmt_per_day = parse_number(file, key, value);
            } else if (key == "panel.min_odometer_readings") {
                cfg.min_odometer_readings = static_cast<int>(parse_whole(file, key, value));
            } else if (key == "panel.survey_days") {
                cfg.survey_days = static_cast<int>(parse_whole(file, key, value));
            } else if (key == "survey.calendar_year.wave1") {
                cfg.calendar_years[0] = static_cast<int>(parse_whole(file, key, value));
            } else if (key == "survey.calendar_year.wave2") {
                cfg.calendar_years[1] = static_cast<int>(parse_whole(file, key, value));
            } else if (key == "stats.ttest") {
                cfg.ttest = parse_ttest_variant(value);
            } else if (key == "did.covariates") {
                cfg.covariates = parse_covariate_spec(value);
            } else if (key == "sensitivity.radii") {
                cfg.sensitivity_radii = parse_length_list(value);
            } else if (key == "run.seed") {
                auto seed = parse_whole(file, key, value);
                if (seed < 0) file.fail(key, "seed must be non-negative");
                cfg.seed = static_cast<std::uint64_t>(seed);
            } else if (key == "input.households") {
                cfg.inputs.households = path_of(value);
            } else if (key == "input.vehicles") {
                cfg.inputs.vehicles = path_of(value);
            } else if (key == "input.odometer") {
                cfg.inputs.odometer = path_of(value);
            } else if (key == "input.trips") {
                cfg.inputs.trips = path_of(value);
            } else if (key == "input.factors_gasoline") {
                cfg.inputs.factors_gasoline = path_of(value);
            } else if (key == "input.factors_electrified") {
                cfg.inputs.factors_electrified = path_of(value);
            } else if (key == "input.stations") {
                cfg.inputs.stations = path_of(value);
            } else if (key == "input.lifecycle") {
                cfg.inputs.lifecycle = path_of(value);
            } else {
                file.fail(key, "unknown key");
            }
        } catch (const Error &e) {
            if (e.code() != ErrorCode::InvalidConfig || std::string_view(e.what()).find(file.source()) !=
                                                             std::string_view::npos) {
                throw;
            }
            file.fail(key, e.what());
        }
    }
    cfg.check();
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path &path) {
    return run_config_from(ConfigFile::read(path));
}

} // namespace railco2
