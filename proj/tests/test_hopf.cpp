#include <array>
#include <cmath>
#include <complex>
#include <string>

#include "doctest.h"
#include "stagechain/error.hpp"
#include "stagechain/hopf.hpp"
#include "stagechain/linstab.hpp"
#include "stagechain/model.hpp"
#include "stagechain/switches.hpp"

using namespace stagechain;
using hopf::Complex;
using hopf::Vec3c;
using model::ModelParams;
using Mat3c = std::array<std::array<Complex, 3>, 3>;

namespace {

ModelParams reference_params(double tau) {
    return ModelParams{2.0, 1.0, 1.0, 0.6, 0.05, 0.4, 0.3, 1.2, 1.3, tau};
}

// Crossings of the reference rates, frozen from the switch scan (the scan
// itself is pinned in the switches suite).
constexpr double kTauA = 0.721306464322212;
constexpr double kOmegaA = 0.731048166110398;
constexpr double kTauB = 1.659619918615453;
constexpr double kOmegaB = 0.601532030919078;

template <typename F>
std::string thrown_code(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return "";
}

// Jacobians of the reduced vector field by central finite differences:
// J0 with respect to the current state, J1 with respect to the delayed state.
void fd_jacobians(const ModelParams& p, Mat3c& J0, Mat3c& J1) {
    const auto eq = model::interior_equilibrium(p);
    REQUIRE(eq.has_value());
    const model::State3 s{eq->x, eq->y, eq->z2};
    const double h = 1e-6;
    for (int j = 0; j < 3; ++j) {
        auto bump = [&](const model::State3& base, double eps) {
            model::State3 b = base;
            (j == 0 ? b.x : j == 1 ? b.y : b.z2) += eps;
            return b;
        };
        const auto fp0 = model::rhs_reduced(p, bump(s, h), s);
        const auto fm0 = model::rhs_reduced(p, bump(s, -h), s);
        const auto fp1 = model::rhs_reduced(p, s, bump(s, h));
        const auto fm1 = model::rhs_reduced(p, s, bump(s, -h));
        J0[0][j] = (fp0.x - fm0.x) / (2 * h);
        J0[1][j] = (fp0.y - fm0.y) / (2 * h);
        J0[2][j] = (fp0.z2 - fm0.z2) / (2 * h);
        J1[0][j] = (fp1.x - fm1.x) / (2 * h);
        J1[1][j] = (fp1.y - fm1.y) / (2 * h);
        J1[2][j] = (fp1.z2 - fm1.z2) / (2 * h);
    }
}

Vec3c mat_apply(const Mat3c& M, const Vec3c& v) {
    Vec3c out{};
    for (int r = 0; r < 3; ++r)
        out[r] = M[r][0] * v[0] + M[r][1] * v[1] + M[r][2] * v[2];
    return out;
}

double vec_norm(const Vec3c& v) {
    return std::max(std::abs(v[0]), std::max(std::abs(v[1]), std::abs(v[2])));
}

// Transcendental characteristic value and its lambda-derivative, for the
// root-tracking cross-check.
Complex char_value(const linstab::CharCoefficients& c, Complex lam) {
    return linstab::char_residual(c, lam);
}

Complex char_dlambda(const linstab::CharCoefficients& c, Complex lam) {
    const Complex P_prime = 3.0 * lam * lam + 2.0 * c.A1 * lam + c.A2;
    const Complex Q = linstab::eval_Q(c, lam);
    const Complex Q_prime = 2.0 * c.B1 * lam + c.B2;
    const Complex e = std::exp(-lam * c.tau);
    return P_prime + (Q_prime - c.tau * Q) * e;
}

// Newton root of the characteristic function at delay tau, seeded from lam0.
Complex track_root(const ModelParams& base, double tau, Complex lam0) {
    ModelParams p = base;
    p.tau = tau;
    const auto c = linstab::char_coeffs(p, tau);
    Complex lam = lam0;
    for (int it = 0; it < 60; ++it) {
        const Complex f = char_value(c, lam);
        lam -= f / char_dlambda(c, lam);
        if (std::abs(f) < 1e-14) break;
    }
    return lam;
}

} // namespace

TEST_SUITE("hopf") {

TEST_CASE("critical eigenvectors against finite-difference linearizations") {
    for (auto [tau, omega] : {std::pair{kTauA, kOmegaA}, std::pair{kTauB, kOmegaB}}) {
        const ModelParams p = reference_params(tau);
        const auto ctx = hopf::eigenvectors(p, tau, omega);
        CAPTURE(tau);

        Mat3c J0{}, J1{};
        fd_jacobians(p, J0, J1);
        const Complex rot = std::exp(Complex(0.0, -omega * tau));

        // (i*omega*I - J0 - J1*e^{-i omega tau}) q0 = 0.
        Mat3c M{};
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) {
                M[r][c] = -J0[r][c] - J1[r][c] * rot;
                if (r == c) M[r][c] += Complex(0.0, omega);
            }
        CHECK(vec_norm(mat_apply(M, ctx.q0)) <= 1e-8);

        // The left direction annihilates M from the left:
        // (1, conj(alpha*), conj(beta*)) M = 0.
        const Vec3c left{1.0, std::conj(ctx.alpha_star), std::conj(ctx.beta_star)};
        Vec3c lres{};
        for (int c = 0; c < 3; ++c)
            lres[c] = left[0] * M[0][c] + left[1] * M[1][c] + left[2] * M[2][c];
        CHECK(vec_norm(lres) <= 1e-8);

        // The equilibrium coordinates driving the formulas match the model's.
        const auto eq = model::interior_equilibrium(p);
        CHECK(ctx.x_star == doctest::Approx(eq->x).epsilon(1e-12));
        CHECK(ctx.y_star == doctest::Approx(eq->y).epsilon(1e-12));
        CHECK(ctx.z2_star == doctest::Approx(eq->z2).epsilon(1e-12));

        // Normalizer: Dbar times the adjoint pairing equals one.  The pairing
        // is recomputed here from its definition.
        const Complex pairing =
            1.0 + ctx.alpha * std::conj(ctx.alpha_star) +
            ctx.beta * std::conj(ctx.beta_star) +
            tau * rot * p.alpha2 * std::exp(-p.d2 * tau) *
                std::conj(ctx.beta_star) *
                (ctx.alpha * ctx.z2_star + ctx.beta * ctx.y_star);
        CHECK(std::abs(ctx.Dbar * pairing - 1.0) <= 1e-12);

        // Packed vectors agree with their components.
        CHECK(std::abs(ctx.q0[0] - 1.0) == 0.0);
        CHECK(std::abs(ctx.q0[1] - ctx.alpha) == 0.0);
        CHECK(std::abs(ctx.q0[2] - ctx.beta) == 0.0);
        CHECK(std::abs(ctx.qstar0[0] - ctx.Dbar) <= 1e-15);
    }
}

TEST_CASE("frequencies that fail the characteristic equation are rejected") {
    const ModelParams p = reference_params(0.743);
    const auto fc = switches::f_cubic(p, 0.743);
    REQUIRE(fc.omegas.size() == 1);
    // (0.743, omega(0.743)) satisfies the magnitude condition by construction
    // but not the full characteristic equation: it is not a crossing.
    CHECK(thrown_code([&] { hopf::eigenvectors(p, 0.743, fc.omegas[0]); }) ==
          "hopf.NotACrossing");
    // Garbage frequencies are rejected for the same reason.
    CHECK(thrown_code([&] { hopf::eigenvectors(p, 0.743, 2.5); }) ==
          "hopf.NotACrossing");
}

TEST_CASE("center-manifold corrections solve their defining linear systems") {
    for (auto [tau, omega] : {std::pair{kTauA, kOmegaA}, std::pair{kTauB, kOmegaB}}) {
        const ModelParams p = reference_params(tau);
        const auto ctx = hopf::eigenvectors(p, tau, omega);
        const auto g = hopf::g_coefficients(ctx, p);
        const auto cc = hopf::solve_E1_E2(ctx, g, p);
        CAPTURE(tau);

        Mat3c J0{}, J1{};
        fd_jacobians(p, J0, J1);

        // (2 i omega I - J0 - J1 e^{-2 i omega tau}) E1 = 2 F20.
        const Complex rot2 = std::exp(Complex(0.0, -2.0 * omega * tau));
        Mat3c M1{};
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) {
                M1[r][c] = -J0[r][c] - J1[r][c] * rot2;
                if (r == c) M1[r][c] += Complex(0.0, 2.0 * omega);
            }
        const Vec3c r1 = mat_apply(M1, cc.E1);
        for (int k = 0; k < 3; ++k)
            CHECK(std::abs(r1[k] - 2.0 * g.F20[k]) <=
                  1e-7 * std::max(1.0, std::abs(2.0 * g.F20[k])));

        // -(J0 + J1) E2 = 2 F11, with E2 real.
        Mat3c M2{};
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) M2[r][c] = -(J0[r][c] + J1[r][c]);
        const Vec3c r2 = mat_apply(M2, cc.E2);
        for (int k = 0; k < 3; ++k) {
            CHECK(std::abs(r2[k] - 2.0 * g.F11[k]) <=
                  1e-7 * std::max(1.0, std::abs(2.0 * g.F11[k])));
            CHECK(std::fabs(cc.E2[k].imag()) <= 1e-12);
            CHECK(std::fabs(g.F11[k].imag()) <= 1e-14);  // mean response is real
        }

        // g02 pairs the conjugated quadratic vector with the same left form.
        const Complex g02_check =
            2.0 * tau * ctx.Dbar *
            (std::conj(g.F20[0]) + std::conj(ctx.alpha_star) * std::conj(g.F20[1]) +
             std::conj(ctx.beta_star) * std::conj(g.F20[2]));
        CHECK(std::abs(g.g02 - g02_check) <= 1e-10 * std::max(1.0, std::abs(g.g02)));
    }
}

TEST_CASE("root-pair velocity matches numeric root tracking") {
    for (auto [tau, omega] : {std::pair{kTauA, kOmegaA}, std::pair{kTauB, kOmegaB}}) {
        const ModelParams p = reference_params(tau);
        const Complex lp = hopf::lambda_prime(p, tau, Complex(0.0, omega));
        const double dt = 1e-5;
        const Complex above = track_root(p, tau + dt, Complex(0.0, omega));
        const Complex below = track_root(p, tau - dt, Complex(0.0, omega));
        const Complex fd = (above - below) / (2.0 * dt);
        CAPTURE(tau);
        CHECK(std::abs(lp - fd) <= 1e-6 * std::max(1.0, std::abs(lp)));
    }
}

TEST_CASE("full normal form at the first crossing") {
    const ModelParams p = reference_params(kTauA);
    const auto rep = hopf::analyze_crossing(p, kTauA, kOmegaA);

    CHECK(rep.g20.real() == doctest::Approx(0.37375715135493875).epsilon(1e-6));
    CHECK(rep.g20.imag() == doctest::Approx(-1.3342569885587083).epsilon(1e-6));
    CHECK(rep.g11.real() == doctest::Approx(0.1163731661617233).epsilon(1e-6));
    CHECK(rep.g11.imag() == doctest::Approx(0.26141141023894104).epsilon(1e-6));
    CHECK(rep.g02.real() == doctest::Approx(2.5314229687552077).epsilon(1e-6));
    CHECK(rep.g02.imag() == doctest::Approx(0.7881484239820126).epsilon(1e-6));
    CHECK(rep.g21.real() == doctest::Approx(-0.9629161389267828).epsilon(1e-6));
    CHECK(rep.g21.imag() == doctest::Approx(2.0825274652756915).epsilon(1e-6));

    CHECK(rep.E1[0].real() == doctest::Approx(-3.05787233).epsilon(1e-6));
    CHECK(rep.E1[0].imag() == doctest::Approx(0.34442509).epsilon(1e-6));
    CHECK(rep.E1[1].real() == doctest::Approx(3.3554894).epsilon(1e-6));
    CHECK(rep.E1[1].imag() == doctest::Approx(2.80855816).epsilon(1e-6));
    CHECK(rep.E1[2].real() == doctest::Approx(-6.09518104).epsilon(1e-6));
    CHECK(rep.E1[2].imag() == doctest::Approx(-4.96403183).epsilon(1e-6));
    CHECK(rep.E2[0].real() == doctest::Approx(-1.21184043).epsilon(1e-6));
    CHECK(rep.E2[1].real() == doctest::Approx(1.21184043).epsilon(1e-6));
    CHECK(rep.E2[2].real() == doctest::Approx(-2.42368087).epsilon(1e-6));

    CHECK(rep.C1.real() == doctest::Approx(-0.42687219820824457).epsilon(1e-6));
    CHECK(rep.C1.imag() == doctest::Approx(-0.963786711958059).epsilon(1e-6));
    CHECK(rep.lambda_prime.real() == doctest::Approx(0.07442969397425553).epsilon(1e-6));
    CHECK(rep.lambda_prime.imag() == doctest::Approx(-0.16732306324685156).epsilon(1e-6));
    CHECK(rep.mu2 == doctest::Approx(5.7352405393).epsilon(1e-6));
    CHECK(rep.beta2 == doctest::Approx(-0.8537443964).epsilon(1e-6));
    CHECK(rep.T2 == doctest::Approx(3.6476182395).epsilon(1e-6));

    // Stability is lost rightward here, so orbits grow out of the loss side.
    CHECK(rep.lambda_prime.real() > 0.0);
    CHECK(rep.direction == hopf::Direction::Supercritical);
    CHECK(rep.orbit == hopf::OrbitStability::Stable);
}

TEST_CASE("full normal form at the second crossing") {
    const ModelParams p = reference_params(kTauB);
    const auto rep = hopf::analyze_crossing(p, kTauB, kOmegaB);

    CHECK(rep.g20.real() == doctest::Approx(1.1935918810542037).epsilon(1e-6));
    CHECK(rep.g20.imag() == doctest::Approx(-1.7090588407127891).epsilon(1e-6));
    CHECK(rep.g11.real() == doctest::Approx(0.15337131636049062).epsilon(1e-6));
    CHECK(rep.g11.imag() == doctest::Approx(0.5994127711212849).epsilon(1e-6));
    CHECK(rep.g02.real() == doctest::Approx(1.9993864327713375).epsilon(1e-6));
    CHECK(rep.g02.imag() == doctest::Approx(1.870772444312043).epsilon(1e-6));
    CHECK(rep.g21.real() == doctest::Approx(-1.7425551740344922).epsilon(1e-6));
    CHECK(rep.g21.imag() == doctest::Approx(1.1631907864159226).epsilon(1e-6));

    CHECK(rep.C1.real() == doctest::Approx(-1.098327076240738).epsilon(1e-6));
    CHECK(rep.C1.imag() == doctest::Approx(-0.4487683885260071).epsilon(1e-6));
    CHECK(rep.lambda_prime.real() == doctest::Approx(-0.055346260725790714).epsilon(1e-6));
    CHECK(rep.lambda_prime.imag() == doctest::Approx(-0.10793942083852189).epsilon(1e-6));
    CHECK(rep.mu2 == doctest::Approx(-19.8446482533).epsilon(1e-6));
    CHECK(rep.beta2 == doctest::Approx(-2.1966541525).epsilon(1e-6));
    CHECK(rep.T2 == doctest::Approx(-1.6961101762).epsilon(1e-6));

    // Stability is regained rightward: orbits live on the left of the
    // crossing, i.e. the family branches against the delay direction.
    CHECK(rep.lambda_prime.real() < 0.0);
    CHECK(rep.direction == hopf::Direction::Subcritical);
    CHECK(rep.orbit == hopf::OrbitStability::Stable);
}

TEST_CASE("crossing velocities agree with the scan's direction signs") {
    const auto sw = switches::find_switches(reference_params(1.0));
    REQUIRE(sw.zeros.size() == 2);
    for (const auto& z : sw.zeros) {
        const ModelParams p = reference_params(z.tau_zero);
        const Complex lp = hopf::lambda_prime(p, z.tau_zero, Complex(0.0, z.omega));
        CAPTURE(z.tau_zero);
        CHECK(((lp.real() > 0.0) ? 1 : -1) == z.delta);
    }
}

} // TEST_SUITE("hopf")
