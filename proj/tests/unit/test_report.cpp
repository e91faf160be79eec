#include "railco2/report.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

using namespace railco2;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string &args) {
    const std::string cmd = std::string(RAILCO2_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path fresh(const std::string &name) {
    const auto dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    return dir;
}

const std::string kGolden = std::string(RAILCO2_SOURCE_DIR) + "/data/golden/run.conf";

} // namespace

TEST_CASE("sha256") {
    CHECK(report::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(report::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("manifest digest ignores the timestamp") {
    const auto cfg = load_run_config(kGolden);
    auto a = report::make_manifest("did", cfg);
    auto b = report::make_manifest("did", cfg);
    a.timestamp = "2020-01-01T00:00:00Z";
    b.timestamp = "2030-06-30T12:00:00Z";
    CHECK(a.digest() == b.digest());
    CHECK_FALSE(a.embedded().contains("timestamp"));
    CHECK(a.to_json()["timestamp"] == "2020-01-01T00:00:00Z");
    CHECK(a.inputs.size() >= 7);
    b.command = "panel";
    CHECK(a.digest() != b.digest());
    CHECK(report::with_manifest_comment(a, "x\n") == "# manifest_sha256=" + a.digest() + "\nx\n");
}

TEST_CASE("cli validate and did") {
    const auto out = fresh("railco2_cli_did");
    CHECK(run_cli("validate --config " + kGolden + " --out " + out.string()) == 0);
    CHECK(fs::exists(out / "validation.json"));
    CHECK(run_cli("did --config " + kGolden + " --out " + out.string()) == 0);
    const auto j = report::Json::parse(slurp(out / "did_model1.json"));
    CHECK(j["interaction"]["estimate"].get<double>() == doctest::Approx(-2316.8).epsilon(1e-9));
    CHECK(j.contains("manifest"));
    CHECK(fs::exists(out / "did_model4.json"));
    CHECK(fs::exists(out / "manifest.json"));
}

TEST_CASE("cli outputs are idempotent") {
    const auto a = fresh("railco2_cli_a"), b = fresh("railco2_cli_b");
    CHECK(run_cli("sensitivity --config " + kGolden + " --out " + a.string()) == 0);
    CHECK(run_cli("sensitivity --config " + kGolden + " --out " + b.string()) == 0);
    CHECK(slurp(a / "sensitivity.csv") == slurp(b / "sensitivity.csv"));
    CHECK(slurp(a / "sensitivity_table.txt") == slurp(b / "sensitivity_table.txt"));
    const auto table = slurp(a / "sensitivity_table.txt");
    CHECK(table.find("0.5 mi") != std::string::npos);
    CHECK(table.find("1 km") != std::string::npos);
    CHECK(table.find("0.75 mi") != std::string::npos);
}

TEST_CASE("cli exit codes") {
    const auto out = fresh("railco2_cli_err");
    CHECK(run_cli("did --bogus-flag") == 2);
    CHECK(run_cli("") == 2);
    CHECK(run_cli("did --config " + out.string() + "/missing.conf --out " + out.string()) == 1);
    CHECK(run_cli("did --config " + kGolden + " --model 9 --out " + out.string()) == 2);
}
