#include <cmath>
#include <random>
#include <string>

#include "doctest.h"
#include "stagechain/error.hpp"
#include "stagechain/model.hpp"

using namespace stagechain;
using model::ModelParams;

namespace {

ModelParams reference_params(double tau) {
    return ModelParams{2.0, 1.0, 1.0, 0.6, 0.05, 0.4, 0.3, 1.2, 1.3, tau};
}

template <typename F>
std::string thrown_code(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return "";
}

template <typename F>
std::string thrown_message(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST_SUITE("model") {

TEST_CASE("validation reports every violated field at once") {
    ModelParams p = reference_params(1.0);
    p.a1 = -1.0;
    p.d2 = std::numeric_limits<double>::quiet_NaN();
    p.tau = -0.5;
    const std::string msg = thrown_message([&] { model::validate_params(p); });
    CHECK(msg.find("a1") != std::string::npos);
    CHECK(msg.find("d2") != std::string::npos);
    CHECK(msg.find("tau must be >= 0") != std::string::npos);
    CHECK(thrown_code([&] { model::validate_params(p); }) == "model.NonFiniteParam");

    ModelParams q = reference_params(1.0);
    q.c2 = 0.0;
    CHECK(thrown_code([&] { model::validate_params(q); }) == "model.NonPositiveRate");

    ModelParams r = reference_params(-1e-9);
    CHECK(thrown_code([&] { model::validate_params(r); }) == "model.NegativeDelay");

    CHECK_NOTHROW(model::validate_params(reference_params(0.0)));
    CHECK_NOTHROW(model::validate_params(reference_params(4.0)));
}

TEST_CASE("every feasible equilibrium annihilates the vector field") {
    for (double tau : {0.0, 1.0, 2.5}) {
        const ModelParams p = reference_params(tau);
        for (const auto& eq : model::compute_equilibria(p)) {
            if (!eq.feasible) continue;
            CAPTURE(tau);
            CAPTURE(model::eq_kind_name(eq.kind));
            const model::State3 s{eq.x, eq.y, eq.z2};
            const auto f = model::rhs_reduced(p, s, s);
            CHECK(std::fabs(f.x) <= 1e-12);
            CHECK(std::fabs(f.y) <= 1e-12);
            CHECK(std::fabs(f.z2) <= 1e-12);

            const model::SystemState full{eq.x, eq.y, eq.z1, eq.z2};
            const auto g = model::rhs_full(p, full, full);
            CHECK(std::fabs(g.x) <= 1e-12);
            CHECK(std::fabs(g.y) <= 1e-12);
            CHECK(std::fabs(g.z1) <= 1e-12);
            CHECK(std::fabs(g.z2) <= 1e-12);
        }
    }
}

TEST_CASE("equilibrium coordinates at the reference rates") {
    const ModelParams p0 = reference_params(0.0);
    const auto eqs = model::compute_equilibria(p0);
    REQUIRE(eqs.size() == 4);

    CHECK(eqs[0].x == 0.0);
    CHECK(eqs[1].x == doctest::Approx(2.0).epsilon(1e-14));

    // Pest-only coexistence: x = d1/alpha1, y = (a1*alpha1 - b1*d1)/(c1*alpha1).
    CHECK(eqs[2].x == doctest::Approx(1.0 / 24.0).epsilon(1e-14));
    CHECK(eqs[2].y == doctest::Approx(47.0 / 24.0).epsilon(1e-14));
    CHECK(eqs[2].z2 == 0.0);
    CHECK(eqs[2].feasible);

    // Full coexistence at zero delay.
    CHECK(eqs[3].x == doctest::Approx(23.0 / 13.0).epsilon(1e-14));
    CHECK(eqs[3].y == doctest::Approx(3.0 / 13.0).epsilon(1e-14));
    CHECK(eqs[3].z2 == doctest::Approx(3.455128205128205).epsilon(1e-13));
    CHECK(eqs[3].z1 == 0.0);  // no juveniles without a maturation window
    CHECK(eqs[3].feasible);

    // With a delay the coexistence point shifts along the recruitment factor.
    const ModelParams p1 = reference_params(1.0);
    const auto e3 = model::interior_equilibrium(p1);
    REQUIRE(e3.has_value());
    const double growth = std::exp(p1.d2 * p1.tau);
    CHECK(e3->x == doctest::Approx((p1.a1 * p1.alpha2 - p1.c1 * p1.d3 * growth) /
                                   (p1.b1 * p1.alpha2))
                       .epsilon(1e-14));
    CHECK(e3->y == doctest::Approx(p1.d3 * growth / p1.alpha2).epsilon(1e-14));
    CHECK(e3->z1 ==
          doctest::Approx(model::z1_steady(p1, e3->y, e3->z2)).epsilon(1e-14));
}

TEST_CASE("delay ceiling value and the two formula paths agree") {
    const auto th = model::existence_thresholds(reference_params(1.0));
    REQUIRE(th.tau_bar_defined);
    CHECK(th.tau_bar == doctest::Approx(5.346077100388850).epsilon(1e-13));
    CHECK(th.tau_cr == doctest::Approx(5.346077100388850).epsilon(1e-13));
    CHECK(std::fabs(th.tau_bar - th.tau_cr) <= 1e-12 * th.tau_bar);
    CHECK(th.h1_holds);
    CHECK(th.h2_holds);

    // The ceiling is exactly where the coexistence state loses feasibility.
    ModelParams below = reference_params(th.tau_bar - 1e-6);
    ModelParams above = reference_params(th.tau_bar + 1e-6);
    CHECK(model::interior_equilibrium(below).has_value());
    CHECK(!model::interior_equilibrium(above).has_value());
}

TEST_CASE("delay ceiling moves monotonically in each rate") {
    const ModelParams base = reference_params(0.0);
    const double tau_bar0 = model::existence_thresholds(base).tau_bar;

    auto ceiling_with = [&](auto adjust) {
        ModelParams p = base;
        adjust(p);
        const auto th = model::existence_thresholds(p);
        REQUIRE(th.tau_bar_defined);
        return th.tau_bar;
    };

    // Faster growth or recruitment widens the window...
    CHECK(ceiling_with([](ModelParams& p) { p.a1 *= 1.1; }) > tau_bar0);
    CHECK(ceiling_with([](ModelParams& p) { p.alpha2 *= 1.1; }) > tau_bar0);
    CHECK(ceiling_with([](ModelParams& p) { p.alpha1 *= 1.1; }) > tau_bar0);
    // ...while stronger limitation or mortality narrows it.
    CHECK(ceiling_with([](ModelParams& p) { p.b1 *= 1.1; }) < tau_bar0);
    CHECK(ceiling_with([](ModelParams& p) { p.c1 *= 1.1; }) < tau_bar0);
    CHECK(ceiling_with([](ModelParams& p) { p.d1 *= 1.1; }) < tau_bar0);
    CHECK(ceiling_with([](ModelParams& p) { p.d2 *= 1.1; }) < tau_bar0);
    CHECK(ceiling_with([](ModelParams& p) { p.d3 *= 1.1; }) < tau_bar0);
}

TEST_CASE("coexistence feasibility coincides with the delay window (randomized)") {
    std::mt19937 rng(20260816u);
    std::uniform_real_distribution<double> log_rate(std::log(0.05), std::log(5.0));
    std::uniform_real_distribution<double> delay(0.0, 6.0);

    int defined = 0, feasible = 0;
    for (int trial = 0; trial < 500; ++trial) {
        ModelParams p{};
        p.a1 = std::exp(log_rate(rng));
        p.b1 = std::exp(log_rate(rng));
        p.c1 = std::exp(log_rate(rng));
        p.c2 = std::exp(log_rate(rng));
        p.d1 = std::exp(log_rate(rng));
        p.d2 = std::exp(log_rate(rng));
        p.d3 = std::exp(log_rate(rng));
        p.alpha1 = std::exp(log_rate(rng));
        p.alpha2 = std::exp(log_rate(rng));
        p.tau = delay(rng);

        const auto th = model::existence_thresholds(p);
        if (th.tau_bar_defined) {
            ++defined;
            CHECK(th.h1_holds);  // a defined window implies pest persistence
            CHECK(std::fabs(th.tau_bar - th.tau_cr) <=
                  1e-10 * std::max(1.0, std::fabs(th.tau_bar)));
        } else {
            CHECK(!th.absent_reason.empty());
            CHECK(std::isnan(th.tau_bar));
        }
        CHECK(th.h2_holds == (th.tau_bar_defined && p.tau < th.tau_bar));

        const auto e3 = model::interior_equilibrium(p);
        CHECK(e3.has_value() == th.h2_holds);
        if (e3) {
            ++feasible;
            CHECK(e3->x > 0.0);
            CHECK(e3->y > 0.0);
            CHECK(e3->z2 > 0.0);
            CHECK(e3->z1 >= 0.0);
        }
    }
    // The draw ranges genuinely exercise both sides of the window.
    CHECK(defined > 50);
    CHECK(feasible > 20);
    CHECK(defined < 500);
}

TEST_CASE("juvenile steady mass saturates with the delay") {
    const ModelParams p = reference_params(1.0);
    CHECK(model::z1_steady(reference_params(0.0), 2.0, 3.0) == 0.0);

    const double y = 0.7, z2 = 1.9;
    double prev = 0.0;
    for (double tau : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        ModelParams q = p;
        q.tau = tau;
        const double v = model::z1_steady(q, y, z2);
        CHECK(v > prev);
        prev = v;
    }
    // Saturation level: recruitment over mean juvenile lifetime.
    CHECK(prev < p.alpha2 * y * z2 / p.d2);
    ModelParams far = p;
    far.tau = 200.0;
    CHECK(model::z1_steady(far, y, z2) ==
          doctest::Approx(p.alpha2 * y * z2 / p.d2).epsilon(1e-12));
}

TEST_CASE("empty delay windows are reported with a reason, not thrown") {
    // Pest persistence fails outright.
    ModelParams weak = reference_params(1.0);
    weak.a1 = 0.01;
    const auto th1 = model::existence_thresholds(weak);
    CHECK(!th1.h1_holds);
    CHECK(!th1.tau_bar_defined);
    CHECK(th1.absent_reason.find("persistence") != std::string::npos);
    CHECK(!th1.h2_holds);

    // Persistence holds but enemies cannot establish even at zero delay.
    ModelParams starving = reference_params(0.0);
    starving.d3 = 50.0;
    const auto th2 = model::existence_thresholds(starving);
    CHECK(th2.h1_holds);
    CHECK(!th2.tau_bar_defined);
    CHECK(th2.absent_reason.find("delay window") != std::string::npos);
    CHECK(!model::interior_equilibrium(starving).has_value());

    // The coexistence row is still reported, marked infeasible.
    const auto eqs = model::compute_equilibria(starving);
    CHECK(eqs.back().kind == model::EqKind::E3);
    CHECK(!eqs.back().feasible);
}

} // TEST_SUITE("model")
