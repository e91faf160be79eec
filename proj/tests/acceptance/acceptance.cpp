// Runs the ten acceptance criteria and prints one PASS/FAIL line per criterion.
// Exit status is non-zero when any criterion fails.

#include "railco2/emissions.hpp"
#include "railco2/error.hpp"
#include "railco2/evaluate.hpp"
#include "railco2/lifecycle.hpp"
#include "railco2/panel.hpp"
#include "railco2/simulate.hpp"
#include "railco2/stats.hpp"

#include "../support/common.hpp"
#include "../support/gen.hpp"
#include "../support/oracles.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

using namespace railco2;

namespace {

// Collects failed sub-checks so a criterion can report what went wrong.
struct Checks {
    std::vector<std::string> failures;
    std::string summary;

    void expect(bool ok, const std::string &what) {
        if (!ok) failures.push_back(what);
    }
    void near(double got, double want, double tol, const std::string &what) {
        expect(std::fabs(got - want) <= tol, fmt::format("{}: got {:.6f}, want {} +/- {}", what, got, want, tol));
    }
};

double round_to(double x, int places) {
    const double s = std::pow(10.0, places);
    return std::round(x * s) / s;
}

BalancedPanel golden_panel() {
    sim::SimConfig c;
    c.households_per_group = 80;
    c.set_cell_means(9992.7, 9371.1, 10815.9, 7877.5);
    c.noise_sd = 0.0;
    c.income_missing_prob = 0.0;
    const auto d = sim::generate_panel(c);
    return build_balanced_panel(d.survey, d.factors, d.stations, RunConfig{});
}

void saturated_did(Checks &c) {
    const auto fit = did_fit(golden_panel(), {});
    const double want[4] = {9992.7, -621.6, 823.2, -2316.8};
    for (Eigen::Index j = 0; j < 4; ++j) {
        const double got = fit.ols.coefficients(j);
        c.expect(oracle::rel_err(got, want[j]) <= 1e-6, fmt::format("beta{} = {:.9f}, want {}", j, got, want[j]));
    }
    c.summary = fmt::format("beta = ({:.4f}, {:.4f}, {:.4f}, {:.4f}), N = {}", fit.ols.coefficients(0),
                            fit.ols.coefficients(1), fit.ols.coefficients(2), fit.ols.coefficients(3), fit.n_used);
}

void contrast(Checks &c) {
    const auto panel = golden_panel();
    const auto w2 = group_contrast_table(panel, Metric::Co2, 2, TTestVariant::Welch);
    const auto w1 = group_contrast_table(panel, Metric::Co2, 1, TTestVariant::Welch);
    c.near(w2.difference, -2938.4, 0.01, "wave-2 difference");
    c.near(w2.percent_difference.value_or(0.0), -27.17, 0.01, "wave-2 percent");
    c.near(w1.difference, -621.6, 0.01, "wave-1 difference");
    c.near(w1.percent_difference.value_or(0.0), -6.22, 0.01, "wave-1 percent");
    c.summary = fmt::format("wave 2: {:.2f} g ({:.2f}%), wave 1: {:.2f} g ({:.2f}%)", w2.difference,
                            w2.percent_difference.value_or(0.0), w1.difference, w1.percent_difference.value_or(0.0));
}

void lifecycle_values(Checks &c) {
    const auto published = load_lifecycle(RAILCO2_SOURCE_DIR "/data/lifecycle.csv");
    const auto components = load_lifecycle(RAILCO2_SOURCE_DIR "/data/lifecycle_components.csv");
    c.near(published.rail.per_trip_operational(), 676.2, 0.05, "rail per-trip operational");
    c.near(published.bus.per_trip_operational(), 941.2, 0.05, "bus per-trip operational");
    c.near(components.rail.scale_factor, 1.44, 0.005, "rail scale from components");
    c.near(components.bus.scale_factor, 1.57, 0.005, "bus scale from components");
    const double rail = published.rail.per_trip_lifecycle();
    const double bus = published.bus.per_trip_lifecycle();
    c.near(rail, 973.7, 0.1, "rail per-trip life-cycle");
    c.near(bus, 1477.7, 0.1, "bus per-trip life-cycle");
    const double bound = 0.15 * rail;
    c.near(bound, 146.1, 0.5, "rail-trip bound");
    c.summary = fmt::format("operational {:.3f}/{:.3f}, scales {:.5f}/{:.5f}, life-cycle {:.2f}/{:.2f}, bound {:.2f}",
                            published.rail.per_trip_operational(), published.bus.per_trip_operational(),
                            components.rail.scale_factor, components.bus.scale_factor, rail, bus, bound);
}

void component_sums(Checks &c) {
    const auto l = load_lifecycle(RAILCO2_SOURCE_DIR "/data/lifecycle_components.csv");
    c.expect(l.rail.components && l.bus.components, "components missing");
    if (!c.failures.empty()) return;
    const auto check = [&](double got, double want, const char *what) {
        c.expect(std::fabs(got - want) < 1e-9 && round_to(got, 2) == want,
                 fmt::format("{} = {:.12f}, want {}", what, got, want));
    };
    check(l.rail.components->gross(), 179.05, "rail gross");
    check(l.bus.components->gross(), 107.47, "bus gross");
    check(l.rail.components->operational(), 124.02, "rail operational");
    check(l.bus.components->operational(), 68.54, "bus operational");
    c.summary = fmt::format("gross {:.2f}/{:.2f}, operational {:.2f}/{:.2f}", l.rail.components->gross(),
                            l.bus.components->gross(), l.rail.components->operational(),
                            l.bus.components->operational());
}

void net_effect(Checks &c) {
    const auto n = net_effect_summary(-3145.0, 146.0);
    c.near(n.net, -2999.0, 0.5, "net");
    c.near(100.0 * n.offset_share.value_or(0.0), 4.6, 0.1, "offset share");
    c.summary = fmt::format("net {:.1f}, offset share {:.2f}%", n.net, 100.0 * n.offset_share.value_or(0.0));
}

void ols_oracle(Checks &c) {
    gen::Gen g(2024);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const auto k = static_cast<std::size_t>(g.integer(1, 12));
        const auto n = static_cast<std::size_t>(g.integer(static_cast<int>(k) + 5, 200));
        const auto x = gen::design(g, n, k);
        std::vector<double> beta(k);
        for (auto &b : beta) b = g.uniform(1.0, 10.0) * (g.coin() ? 1 : -1);
        const auto y = gen::response(g, x, beta, g.uniform(0.1, 5.0));
        const auto fit = stats::ols_fit(support::to_matrix(x), support::to_vector(y));
        const auto want = oracle::normal_equations(x, y);
        for (std::size_t j = 0; j < k; ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            worst = std::max({worst, oracle::rel_err(fit.coefficients(jj), want.beta[j]),
                              oracle::rel_err(fit.standard_errors(jj), want.se[j])});
        }
    }
    c.expect(worst <= 1e-8, fmt::format("worst relative error {:.3e}", worst));
    c.summary = fmt::format("100 instances, worst relative error {:.3e}", worst);
}

void t_tail(Checks &c) {
    double worst = 0.0;
    int points = 0;
    for (double df : {1.0, 3.0, 4.0, 10.0, 30.0, 120.0, 1e5}) {
        for (int i = 0; i <= 60; ++i) {
            const double t = 0.1 * i;
            worst = std::max(worst, std::fabs(stats::t_tail_two_sided(t, df) - oracle::t_two_sided_by_quadrature(t, df)));
            ++points;
        }
    }
    c.expect(worst <= 1e-6, fmt::format("worst absolute error {:.3e}", worst));
    c.summary = fmt::format("{} grid points, worst absolute error {:.3e}", points, worst);
}

void recovery(Checks &c) {
    sim::SimConfig cfg;
    cfg.households_per_group = 80;
    cfg.treatment_effect = -3145.0;
    cfg.noise_sd = 8000.0;
    const RunConfig run;
    const auto r = sim::recovery_experiment(cfg, 500, run, {});
    c.expect(std::fabs(r.bias) < 0.05 * 3145.0, fmt::format("bias {:.1f}", r.bias));
    c.expect(r.coverage >= 0.93 && r.coverage <= 0.97, fmt::format("coverage {:.3f}", r.coverage));
    cfg.treatment_effect = 0.0;
    const auto z = sim::recovery_experiment(cfg, 500, run, {});
    c.expect(z.rejection_rate >= 0.03 && z.rejection_rate <= 0.07, fmt::format("null rejection {:.3f}", z.rejection_rate));
    c.summary = fmt::format("bias {:.1f} ({:.2f}%), coverage {:.3f}, null rejection {:.3f}", r.bias,
                            100.0 * std::fabs(r.bias) / 3145.0, r.coverage, z.rejection_rate);
}

void ledger_fixture(Checks &c) {
    const std::string dir = RAILCO2_TEST_DATA "/ledger/";
    const auto cfg = load_run_config(dir + "run.conf");
    const auto survey =
        load_survey({cfg.inputs.households, cfg.inputs.vehicles, cfg.inputs.odometer, cfg.inputs.trips});
    const auto factors = load_factor_tables(cfg.inputs.factors_gasoline, cfg.inputs.factors_electrified);
    const auto panel = build_balanced_panel(survey, factors, load_stations(cfg.inputs.stations), cfg);
    const auto &l = panel.ledger;
    // Hand trace: {input, missing info, incomplete VMT, no factor, unmatched, retained} per wave.
    const std::size_t want[2][6] = {{12, 2, 2, 1, 3, 4}, {11, 1, 2, 1, 3, 4}};
    for (int w = 1; w <= 2; ++w) {
        const auto &x = want[w - 1];
        const std::size_t got[6] = {l.input[w - 1],
                                    l.at(w, ExclusionReason::MissingVehicleInfo),
                                    l.at(w, ExclusionReason::IncompleteVmt),
                                    l.at(w, ExclusionReason::NoFactorAvailable),
                                    l.at(w, ExclusionReason::Unmatched),
                                    l.retained[w - 1]};
        for (int i = 0; i < 6; ++i) c.expect(got[i] == x[i], fmt::format("wave {} column {}: {} != {}", w, i, got[i], x[i]));
    }
    std::map<std::string, std::set<int>> waves;
    for (const auto &o : panel.observations) waves[o.household_id].insert(o.wave);
    for (const auto &[id, w] : waves) c.expect(w == std::set<int>{1, 2}, id + " is not in both waves");
    c.expect(waves.size() == 4, fmt::format("{} retained households", waves.size()));
    c.summary = fmt::format("wave 1: {} in, {} dropped, {} kept; wave 2: {} in, {} dropped, {} kept", l.input[0],
                            l.dropped(1), l.retained[0], l.input[1], l.dropped(2), l.retained[1]);
}

void invariants(Checks &c) {
    constexpr int kCases = 1000;
    gen::Gen g(77);
    int bad_equivariance = 0, bad_identity = 0, bad_monotone = 0, bad_emission = 0;

    for (int i = 0; i < kCases; ++i) {
        const auto k = static_cast<std::size_t>(g.integer(1, 6));
        const auto n = static_cast<std::size_t>(g.integer(static_cast<int>(k) + 3, 40));
        const auto xr = gen::design(g, n, k);
        std::vector<double> beta(k);
        for (auto &b : beta) b = g.uniform(-5.0, 5.0);
        const auto x = support::to_matrix(xr);
        const auto y = support::to_vector(gen::response(g, xr, beta, 1.0));
        const double a = g.uniform(0.1, 50.0) * (g.coin() ? 1 : -1);
        Eigen::VectorXd shift(static_cast<Eigen::Index>(k));
        for (auto &s : shift) s = g.uniform(-10.0, 10.0);
        const auto base = stats::ols_fit(x, y);
        const auto moved = stats::ols_fit(x, a * y + x * shift);
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(k); ++j) {
            const double want = a * base.coefficients(j) + shift(j);
            const double tol = 1e-7 * (std::fabs(a * base.coefficients(j)) + std::fabs(shift(j)) + 1.0);
            if (std::fabs(moved.coefficients(j) - want) > tol ||
                oracle::rel_err(moved.standard_errors(j), std::fabs(a) * base.standard_errors(j)) > 1e-6) {
                ++bad_equivariance;
                break;
            }
        }
    }

    for (int i = 0; i < kCases; ++i) {
        const auto p = gen::panel(g);
        double sum[2][2] = {{0, 0}, {0, 0}}, cnt[2][2] = {{0, 0}, {0, 0}};
        for (const auto &o : p.observations) {
            sum[o.group][o.wave - 1] += o.daily_co2_g;
            cnt[o.group][o.wave - 1] += 1;
        }
        double m[2][2];
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) m[a][b] = sum[a][b] / cnt[a][b];
        const auto fit = did_fit(p, {});
        const double want[4] = {m[0][0], m[1][0] - m[0][0], m[0][1] - m[0][0],
                                (m[1][1] - m[1][0]) - (m[0][1] - m[0][0])};
        for (Eigen::Index j = 0; j < 4; ++j) {
            if (std::fabs(fit.ols.coefficients(j) - want[j]) > 1e-9 * 30000.0) {
                ++bad_identity;
                break;
            }
        }

        std::set<std::string> previous;
        for (double r : {0.25, 0.5, 0.62, 0.75, 1.0}) {
            const auto q = regroup(p, {r, LengthUnit::Mile});
            std::set<std::string> members;
            for (const auto &o : q.observations) {
                if (o.group == 1) members.insert(o.household_id);
            }
            if (!std::includes(members.begin(), members.end(), previous.begin(), previous.end())) {
                ++bad_monotone;
                break;
            }
            previous = std::move(members);
        }
    }

    for (int i = 0; i < kCases; ++i) {
        const GasolineFactor gf{g.uniform(0.0, 900.0), g.uniform(0.0, 600.0)};
        const ElectrifiedFactor ef{g.uniform(0.0, 400.0)};
        const double u = g.uniform(0.0, 200.0), v = g.uniform(0.0, 200.0);
        const double running = (gasoline_daily_co2(gf, u) - gf.start_g_per_day) +
                               (gasoline_daily_co2(gf, v) - gf.start_g_per_day);
        const bool ok = gasoline_daily_co2(gf, u) >= 0.0 && electrified_daily_co2(ef, u) >= 0.0 &&
                        std::fabs(gasoline_daily_co2(gf, u + v) - gf.start_g_per_day - running) <=
                            1e-9 * std::max(1.0, running) &&
                        std::fabs(electrified_daily_co2(ef, u + v) - electrified_daily_co2(ef, u) -
                                  electrified_daily_co2(ef, v)) <= 1e-9 * std::max(1.0, electrified_daily_co2(ef, u + v));
        if (!ok) ++bad_emission;
    }

    c.expect(bad_equivariance == 0, fmt::format("{} equivariance failures", bad_equivariance));
    c.expect(bad_identity == 0, fmt::format("{} saturated-identity failures", bad_identity));
    c.expect(bad_monotone == 0, fmt::format("{} monotonicity failures", bad_monotone));
    c.expect(bad_emission == 0, fmt::format("{} emission failures", bad_emission));
    c.summary = fmt::format("{} cases per property", kCases);
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void(Checks &)>>> criteria{
        {"saturated DID golden", saturated_did},
        {"group contrast golden", contrast},
        {"life-cycle per-trip factors", lifecycle_values},
        {"life-cycle component sums", component_sums},
        {"net-effect summary", net_effect},
        {"OLS oracle equivalence", ols_oracle},
        {"t tail vs quadrature", t_tail},
        {"estimator recovery", recovery},
        {"exclusion ledger fixture", ledger_fixture},
        {"invariant suite", invariants},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Checks c;
        const auto start = std::chrono::steady_clock::now();
        try {
            criteria[i].second(c);
        } catch (const std::exception &e) {
            c.failures.push_back(std::string("threw: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool pass = c.failures.empty();
        failed += pass ? 0 : 1;
        fmt::print("{} {:2} {} ({:.2f}s): {}\n", pass ? "PASS" : "FAIL", i + 1, criteria[i].first, secs, c.summary);
        for (const auto &f : c.failures) fmt::print("       {}\n", f);
    }
    fmt::print("{}/{} criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
    return failed == 0 ? 0 : 1;
}
