#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "doctest.h"
#include "stagechain/dde.hpp"
#include "stagechain/error.hpp"
#include "stagechain/model.hpp"
#include "stagechain/orbit.hpp"

using namespace stagechain;
using dde::SystemState;
using model::ModelParams;

namespace {

ModelParams reference_params(double tau) {
    return ModelParams{2.0, 1.0, 1.0, 0.6, 0.05, 0.4, 0.3, 1.2, 1.3, tau};
}

ModelParams strong_growth_params(double tau) {
    return ModelParams{7.0, 1.0, 1.0, 0.5, 0.05, 0.6, 1.2, 1.5, 2.0, tau};
}

// Frozen crossings of the reference rates (pinned in the switches suite).
constexpr double kTauA = 0.721306464322212;
constexpr double kTauB = 1.659619918615453;

template <typename F>
std::string thrown_code(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return "";
}

dde::Trajectory synthetic_trajectory(const ModelParams& p, double t_end, double step) {
    dde::Trajectory tr;
    tr.params = p;
    tr.step = step;
    const std::size_t n = static_cast<std::size_t>(std::llround(t_end / step));
    for (std::size_t i = 0; i <= n; ++i) {
        tr.times.push_back(step * double(i));
        tr.states.push_back({0, 0, 0, 0});
        tr.derivatives.push_back({0, 0, 0, 0});
    }
    return tr;
}

dde::HistorySpec kicked_equilibrium(const ModelParams& p, double kick) {
    const auto eq = model::interior_equilibrium(p);
    REQUIRE(eq.has_value());
    dde::HistorySpec h;
    h.constant = {eq->x * (1 + kick), eq->y * (1 + kick), eq->z1 * (1 + kick),
                  eq->z2 * (1 + kick)};
    return h;
}

} // namespace

TEST_SUITE("orbit") {

TEST_CASE("a decaying spiral is labeled as settling to the coexistence point") {
    const ModelParams p = reference_params(1.0);
    const auto eq = model::interior_equilibrium(p);
    REQUIRE(eq.has_value());
    auto tr = synthetic_trajectory(p, 3000.0, 0.5);
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        const double t = tr.times[i];
        const double osc = 1e-3 * std::exp(-t / 200.0) * std::cos(0.7 * t);
        tr.states[i] = {eq->x + osc, eq->y - 0.5 * osc, eq->z1, eq->z2 + osc};
    }
    const auto cls = orbit::classify_orbit(tr);
    CHECK(cls.kind == orbit::OrbitKind::Equilibrium);
    REQUIRE(cls.target.has_value());
    CHECK(*cls.target == model::EqKind::E3);
    CHECK(cls.amplitude < 1e-5);
    CHECK(!cls.period.has_value());
}

TEST_CASE("a clean oscillation is labeled periodic with the right period") {
    const ModelParams p = reference_params(1.0);
    auto tr = synthetic_trajectory(p, 3000.0, 0.05);
    const double period = 7.0;
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        const double t = tr.times[i];
        const double phase = 2.0 * std::numbers::pi * t / period;
        tr.states[i] = {2.0 + 0.5 * std::sin(phase), 1.0, 0.5,
                        3.0 + 0.2 * std::cos(phase)};
    }
    const auto cls = orbit::classify_orbit(tr);
    CHECK(cls.kind == orbit::OrbitKind::Periodic);
    REQUIRE(cls.period.has_value());
    CHECK(*cls.period == doctest::Approx(period).epsilon(1e-4));
    REQUIRE(cls.peak_cv.has_value());
    CHECK(*cls.peak_cv < 1e-4);
    CHECK(cls.amplitude == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("chaos is never declared without a supplied positive exponent") {
    const ModelParams p = strong_growth_params(1.5);
    const auto sim = dde::simulate(p, dde::HistorySpec{}, 3000.0, 0.01);

    const auto no_lle = orbit::classify_orbit(sim.trajectory);
    CHECK(no_lle.kind == orbit::OrbitKind::Undetermined);
    CHECK(!no_lle.lle.has_value());

    const auto with_lle = orbit::classify_orbit(sim.trajectory, {}, 0.07);
    CHECK(with_lle.kind == orbit::OrbitKind::Chaotic);
    CHECK(with_lle.lle == 0.07);

    // A negative exponent cannot rescue an irregular signal either.
    const auto neg = orbit::classify_orbit(sim.trajectory, {}, -0.05);
    CHECK(neg.kind == orbit::OrbitKind::Undetermined);
}

TEST_CASE("integrated runs on both sides of the first crossing") {
    // Below the crossing: the kicked start settles back.
    {
        const ModelParams p = reference_params(0.3);
        const auto sim = dde::simulate(p, kicked_equilibrium(p, 1e-4), 3000.0, 0.01);
        const auto cls = orbit::classify_orbit(sim.trajectory);
        CHECK(cls.kind == orbit::OrbitKind::Equilibrium);
        REQUIRE(cls.target.has_value());
        CHECK(*cls.target == model::EqKind::E3);
    }
    // Inside the unstable window: a sustained cycle.
    {
        const ModelParams p = reference_params(1.0);
        const auto sim = dde::simulate(p, kicked_equilibrium(p, 1e-4), 3000.0, 0.01);
        const auto cls = orbit::classify_orbit(sim.trajectory);
        CHECK(cls.kind == orbit::OrbitKind::Periodic);
        REQUIRE(cls.period.has_value());
        CHECK(*cls.period > 7.0);
        CHECK(*cls.period < 12.0);
        CHECK(cls.amplitude > 0.1);
    }
}

TEST_CASE("too little post-transient coverage is a typed error") {
    const ModelParams p = reference_params(1.0);
    const auto sim = dde::simulate(p, dde::HistorySpec{}, 2.0, 0.01);
    CHECK(thrown_code([&] { orbit::classify_orbit(sim.trajectory); }) ==
          "orbit.TrajectoryTooShort");
}

TEST_CASE("largest exponent: positive on the strange attractor, negative at rest") {
    orbit::LyapunovSettings ls;  // horizon 3000, renorm every 5, offset 1e-8

    const auto chaotic = orbit::largest_lyapunov(strong_growth_params(1.5), ls);
    CHECK(chaotic.lle > 0.03);
    CHECK(chaotic.lle < 0.15);
    CHECK(chaotic.renorms_used == 300);

    const auto settling = orbit::largest_lyapunov(reference_params(0.3), ls);
    CHECK(settling.lle < -0.02);
    CHECK(settling.lle > -0.10);

    // On a stable cycle the leading exponent is the neutral one.
    const auto cycling = orbit::largest_lyapunov(reference_params(1.0), ls);
    CHECK(std::fabs(cycling.lle) < 5e-3);
}

TEST_CASE("delay sweep brackets both switches and agrees with the scan partition") {
    const ModelParams p = reference_params(1.0);
    const auto rows = orbit::bifurcation_sweep(p, 0.0, 2.0, 0.02);
    REQUIRE(rows.size() == 101);

    for (const auto& r : rows) CHECK(r.feasible);

    // Transition structure: Equilibrium plateau, cycle window, plateau again.
    std::vector<std::size_t> changes;
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].cls.kind != rows[i - 1].cls.kind) changes.push_back(i);
    REQUIRE(changes.size() == 2);

    const double onset = rows[changes[0]].tau;      // first Periodic row
    const double offset = rows[changes[1]].tau;     // first Equilibrium row after
    CHECK(rows[changes[0]].cls.kind == orbit::OrbitKind::Periodic);
    CHECK(rows[changes[1]].cls.kind == orbit::OrbitKind::Equilibrium);

    // Finite-horizon decay blurs each boundary by at most a few grid cells
    // toward the slow side, never into the opposite regime's interior.
    CHECK(onset > kTauA - 0.07);
    CHECK(onset < kTauA + 0.03);
    CHECK(offset > kTauB - 0.03);
    CHECK(offset < kTauB + 0.13);

    for (const auto& r : rows) {
        if (r.tau < onset - 0.001) {
            CHECK(r.cls.kind == orbit::OrbitKind::Equilibrium);
            REQUIRE(r.cls.target.has_value());
            CHECK(*r.cls.target == model::EqKind::E3);
        } else if (r.tau > 0.75 && r.tau < 1.55) {
            CHECK(r.cls.kind == orbit::OrbitKind::Periodic);
            CHECK(!r.extrema.empty());
        }
    }

    // Cycle amplitude grows away from onset.
    const auto& mid = rows[60];  // tau = 1.2
    CHECK(mid.cls.amplitude > 1.0);
}

TEST_CASE("sweep rows past the feasibility ceiling settle on the enemy-free state") {
    // The predator tail decays like exp(-0.018 t) here, so give it room.
    orbit::SweepSettings ss;
    ss.t_end = 6000.0;
    const auto rows =
        orbit::bifurcation_sweep(reference_params(1.0), 5.5, 5.5, 0.1, ss);
    REQUIRE(rows.size() == 1);
    CHECK(!rows[0].feasible);
    CHECK(rows[0].cls.kind == orbit::OrbitKind::Equilibrium);
    REQUIRE(rows[0].cls.target.has_value());
    CHECK(*rows[0].cls.target == model::EqKind::E2);
}

TEST_CASE("strong-growth sweep flags chaos when exponents are requested") {
    orbit::SweepSettings ss;
    ss.with_lle = true;
    const auto rows =
        orbit::bifurcation_sweep(strong_growth_params(1.5), 1.4, 1.6, 0.1);
    REQUIRE(rows.size() == 3);
    const auto rows_lle =
        orbit::bifurcation_sweep(strong_growth_params(1.5), 1.4, 1.6, 0.1, ss);
    REQUIRE(rows_lle.size() == 3);

    int chaotic = 0;
    for (const auto& r : rows_lle) {
        if (r.cls.kind == orbit::OrbitKind::Chaotic) {
            ++chaotic;
            REQUIRE(r.cls.lle.has_value());
            CHECK(*r.cls.lle > 0.01);
        }
    }
    CHECK(chaotic >= 1);
    // Without exponents the same rows can say anything except Chaotic.
    for (const auto& r : rows)
        CHECK(r.cls.kind != orbit::OrbitKind::Chaotic);
}

TEST_CASE("sweeps are deterministic across worker counts") {
    orbit::SweepSettings one;
    one.jobs = 1;
    orbit::SweepSettings three;
    three.jobs = 3;
    const ModelParams p = reference_params(1.0);
    const auto a = orbit::bifurcation_sweep(p, 0.7, 0.8, 0.02, one);
    const auto b = orbit::bifurcation_sweep(p, 0.7, 0.8, 0.02, three);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].tau == b[i].tau);
        CHECK(a[i].cls.kind == b[i].cls.kind);
        CHECK(a[i].cls.amplitude == b[i].cls.amplitude);
        REQUIRE(a[i].extrema.size() == b[i].extrema.size());
        for (std::size_t k = 0; k < a[i].extrema.size(); ++k)
            CHECK(a[i].extrema[k] == b[i].extrema[k]);
    }
}

TEST_CASE("an empty delay range yields an empty table") {
    const auto rows = orbit::bifurcation_sweep(reference_params(1.0), 1.0, 0.5, 0.1);
    CHECK(rows.empty());
    CHECK(thrown_code([&] {
              orbit::bifurcation_sweep(reference_params(1.0), 0.0, 1.0, 0.0);
          }) == "dde.NonPositiveStep");
}

} // TEST_SUITE("orbit")
