#pragma once

#include "railco2/config.hpp"
#include "railco2/dataio.hpp"
#include "railco2/evaluate.hpp"
#include "railco2/lifecycle.hpp"
#include "railco2/simulate.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace railco2::report {

using Json = nlohmann::ordered_json;

std::string sha256_hex(std::string_view bytes);
// Throws Io when the file cannot be read.
std::string file_sha256(const std::filesystem::path &path);

Json config_json(const RunConfig &cfg);
Json sim_config_json(const sim::SimConfig &cfg);

struct InputDigest {
    std::string name; // config key suffix, e.g. "households"
    std::string path;
    std::string sha256;
};

struct RunManifest {
    std::string toolkit_version;
    std::string command;
    Json config;
    std::vector<InputDigest> inputs;
    std::vector<RowCount> row_counts;
    std::vector<std::pair<std::string, std::size_t>> stage_counts;
    std::string timestamp; // kept out of body() and digest()

    Json body() const;
    std::string digest() const; // SHA-256 of body()
    // body + digest; what every report embeds.
    Json embedded() const;
    // embedded + timestamp; written only to manifest.json.
    Json to_json() const;
};

// Digests every configured input file that exists.
RunManifest make_manifest(std::string command, const RunConfig &cfg);

// UTC, ISO 8601.
std::string utc_timestamp();

Json validation_json(const ValidationReport &report);
Json ledger_json(const ExclusionLedger &ledger);
std::string ledger_table(const ExclusionLedger &ledger);

Json did_json(const std::string &model, const DidFit &fit);
// Coefficients with SEs in parentheses, one column per model.
std::string did_table(const std::vector<std::pair<std::string, DidFit>> &models);

std::string contrast_csv(const std::vector<ContrastRow> &rows);
std::string contrast_table(const std::vector<ContrastRow> &rows);

struct ChangeRow {
    Group group = Group::Control;
    Metric metric = Metric::Co2;
    double wave1_mean = 0.0;
    double wave2_mean = 0.0;
    stats::TestResult test;
};
std::string change_csv(const std::vector<ChangeRow> &rows);
std::string change_table(const std::vector<ChangeRow> &rows);

std::string sensitivity_csv(const std::vector<SensitivityRow> &rows);
std::string sensitivity_table(const std::vector<SensitivityRow> &rows);

struct LifecycleReport {
    LifecycleInputs factors;
    std::vector<TransitChangeRow> transit;
    // Rail-only upper bound: experimental change in rail trips x rail per-trip factor.
    std::optional<double> rail_trip_change;
    std::optional<double> rail_bound;
    std::optional<NetEffect> net;
};
Json lifecycle_json(const LifecycleReport &report);
std::string lifecycle_table(const LifecycleReport &report);

Json recovery_json(const sim::RecoveryReport &report, const sim::SimConfig &cfg);

// Prefixes a CSV body with a `# manifest_sha256=` comment line.
std::string with_manifest_comment(const RunManifest &manifest, const std::string &csv);

} // namespace railco2::report
