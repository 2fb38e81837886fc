#include "stagechain/hopf.hpp"

#include <cmath>

#include "stagechain/error.hpp"
#include "stagechain/linstab.hpp"

namespace stagechain::hopf {

namespace {

using Mat3c = std::array<std::array<Complex, 3>, 3>;

const Complex kI{0.0, 1.0};

// Linearization blocks at the coexistence equilibrium: J0 acts on the current
// state, J1 on the delayed state.
void jacobians(const ModelParams& p, double tau, double xs, double ys, double zs,
               Mat3c& J0, Mat3c& J1) {
    const double ed = std::exp(-p.d2 * tau);
    J0 = {{{Complex(-p.b1 * xs), Complex(-p.c1 * xs), Complex(0.0)},
           {Complex(p.alpha1 * ys), Complex(0.0), Complex(-p.c2 * ys)},
           {Complex(0.0), Complex(0.0), Complex(-p.d3)}}};
    J1 = {{{Complex(0.0), Complex(0.0), Complex(0.0)},
           {Complex(0.0), Complex(0.0), Complex(0.0)},
           {Complex(0.0), Complex(p.alpha2 * zs * ed), Complex(p.alpha2 * ys * ed)}}};
}

} // namespace

Vec3c solve3(const Mat3c& A_in, const Vec3c& rhs_in) {
    Mat3c A = A_in;
    Vec3c b = rhs_in;
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(A[r][col]) > std::abs(A[pivot][col])) pivot = r;
        if (std::abs(A[pivot][col]) < 1e-12)
            throw Error("hopf.SingularSystem",
                        "pivot magnitude below 1e-12 in 3x3 solve");
        if (pivot != col) {
            std::swap(A[pivot], A[col]);
            std::swap(b[pivot], b[col]);
        }
        for (int r = col + 1; r < 3; ++r) {
            const Complex factor = A[r][col] / A[col][col];
            for (int c = col; c < 3; ++c) A[r][c] -= factor * A[col][c];
            b[r] -= factor * b[col];
        }
    }
    Vec3c x{};
    for (int r = 2; r >= 0; --r) {
        Complex acc = b[r];
        for (int c = r + 1; c < 3; ++c) acc -= A[r][c] * x[c];
        x[r] = acc / A[r][r];
    }
    return x;
}

HopfContext eigenvectors(const ModelParams& p, double tau_c, double omega_c) {
    model::validate_params(p);
    const linstab::CharCoefficients cc = linstab::char_coeffs(p, tau_c);
    const Complex lam = kI * omega_c;
    const Complex resid = linstab::char_residual(cc, lam);
    const double scale = std::max(1.0, std::abs(linstab::eval_P(cc, lam)));
    if (std::abs(resid) > 1e-7 * scale)
        throw Error("hopf.NotACrossing",
                    "i*omega fails the characteristic equation (residual " +
                        std::to_string(std::abs(resid)) + ") at tau = " +
                        std::to_string(tau_c));

    ModelParams q = p;
    q.tau = tau_c;
    const auto eq = model::interior_equilibrium(q);
    if (!eq)
        throw Error("linstab.NoInteriorEquilibrium",
                    "coexistence equilibrium infeasible at tau = " + std::to_string(tau_c));

    HopfContext ctx;
    ctx.tau_c = tau_c;
    ctx.omega_c = omega_c;
    ctx.x_star = eq->x;
    ctx.y_star = eq->y;
    ctx.z2_star = eq->z2;

    const double xs = eq->x, ys = eq->y, zs = eq->z2;
    const double ed = std::exp(-p.d2 * tau_c);
    const Complex rot = std::exp(-lam * tau_c);  // e^{-i omega tau}

    // Right eigenvector (1, alpha, beta) of the delayed linearization.
    ctx.alpha = -(lam + p.b1 * xs) / (p.c1 * xs);
    ctx.beta = ctx.alpha * p.alpha2 * zs * ed * rot /
               (lam + p.d3 - p.alpha2 * ys * ed * rot);
    // Left eigenvector direction (1, alpha*, beta*) of the adjoint problem.
    ctx.alpha_star = (p.b1 * xs - lam) / (p.alpha1 * ys);
    ctx.beta_star = p.c2 * ys * (p.b1 * xs - lam) /
                    (p.alpha1 * ys * (lam - p.d3 + p.alpha2 * ys * ed / rot));

    const Complex pairing = 1.0 + ctx.alpha * std::conj(ctx.alpha_star) +
                            ctx.beta * std::conj(ctx.beta_star) +
                            tau_c * (ctx.alpha * zs + ctx.beta * ys) * p.alpha2 *
                                std::conj(ctx.beta_star) * ed * rot;
    if (std::abs(pairing) < 1e-12)
        throw Error("hopf.SingularNormalizer", "adjoint pairing is degenerate");
    ctx.Dbar = 1.0 / pairing;

    ctx.q0 = {Complex(1.0), ctx.alpha, ctx.beta};
    ctx.qstar0 = {ctx.Dbar, ctx.Dbar * std::conj(ctx.alpha_star),
                  ctx.Dbar * std::conj(ctx.beta_star)};
    return ctx;
}

GCoefficients g_coefficients(const HopfContext& ctx, const ModelParams& p) {
    const double tau = ctx.tau_c;
    const double ed = std::exp(-p.d2 * tau);
    const Complex rot = std::exp(-kI * ctx.omega_c * tau);
    const Complex a = ctx.alpha, b = ctx.beta;
    const double re_a = a.real();
    const double re_ab = (a * std::conj(b)).real();

    GCoefficients g;
    // Quadratic response vectors: second harmonic and mean.
    g.F20 = {-p.b1 - p.c1 * a, a * p.alpha1 - p.c2 * a * b,
             p.alpha2 * a * b * ed * rot * rot};
    g.F11 = {Complex(-p.b1 - p.c1 * re_a), Complex(p.alpha1 * re_a - p.c2 * re_ab),
             Complex(p.alpha2 * ed * re_ab)};

    const Complex w1 = std::conj(ctx.alpha_star);
    const Complex w2 = std::conj(ctx.beta_star);
    auto pair_with_left = [&](const Vec3c& F) { return F[0] + w1 * F[1] + w2 * F[2]; };

    const Complex factor = 2.0 * tau * ctx.Dbar;
    g.g20 = factor * pair_with_left(g.F20);
    g.g11 = factor * pair_with_left(g.F11);
    const Vec3c F02 = {std::conj(g.F20[0]), std::conj(g.F20[1]), std::conj(g.F20[2])};
    g.g02 = factor * pair_with_left(F02);
    return g;
}

CenterCorrections solve_E1_E2(const HopfContext& ctx, const GCoefficients& g,
                              const ModelParams& p) {
    Mat3c J0, J1;
    jacobians(p, ctx.tau_c, ctx.x_star, ctx.y_star, ctx.z2_star, J0, J1);

    const Complex two_i_omega = 2.0 * kI * ctx.omega_c;
    const Complex rot2 = std::exp(-two_i_omega * ctx.tau_c);  // e^{-2 i omega tau}

    Mat3c M1, M2;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            M1[r][c] = ((r == c) ? two_i_omega : Complex(0.0)) - J0[r][c] - J1[r][c] * rot2;
            M2[r][c] = -(J0[r][c] + J1[r][c]);
        }
    }

    CenterCorrections cc;
    cc.E1 = solve3(M1, {2.0 * g.F20[0], 2.0 * g.F20[1], 2.0 * g.F20[2]});
    cc.E2 = solve3(M2, {2.0 * g.F11[0], 2.0 * g.F11[1], 2.0 * g.F11[2]});
    return cc;
}

Complex lambda_prime(const ModelParams& p, double tau, Complex lambda) {
    const linstab::CharCoefficients c = linstab::char_coeffs(p, tau);
    ModelParams q = p;
    q.tau = tau;
    const auto eq = model::interior_equilibrium(q);
    const double xs = eq->x, ys = eq->y, zs = eq->z2;

    // Delay derivatives of the equilibrium and of the coefficients.  The
    // delayed gain m = alpha2*y*(tau)*e^{-d2 tau} is delay-independent because
    // y* grows at exactly the discount rate, so B1' = 0.
    const double dxs = -p.c1 * p.d3 * p.d2 * std::exp(p.d2 * tau) / (p.b1 * p.alpha2);
    const double dys = p.d2 * ys;
    const double dzs = (p.alpha1 / p.c2) * dxs;
    const double m = p.alpha2 * ys * std::exp(-p.d2 * tau);

    const double dA1 = p.b1 * dxs;
    const double dA2 = p.b1 * p.d3 * dxs + p.c1 * p.alpha1 * (dxs * ys + xs * dys);
    const double dA3 = p.c1 * p.d3 * p.alpha1 * (dxs * ys + xs * dys);
    const double dB1 = 0.0;
    const double dB2 = m * (p.c2 * dzs - p.b1 * dxs);
    const double dB3 = m * (dxs * (p.b1 * p.c2 * zs - p.c1 * p.alpha1 * ys) +
                            xs * (p.b1 * p.c2 * dzs - p.c1 * p.alpha1 * dys));

    const Complex E = std::exp(-lambda * tau);
    const Complex Q = linstab::eval_Q(c, lambda);
    const Complex D_lambda = 3.0 * lambda * lambda + 2.0 * c.A1 * lambda + c.A2 +
                             (2.0 * c.B1 * lambda + c.B2) * E - tau * Q * E;
    const Complex D_tau = dA1 * lambda * lambda + dA2 * lambda + dA3 +
                          (dB1 * lambda * lambda + dB2 * lambda + dB3) * E -
                          lambda * Q * E;
    return -D_tau / D_lambda;
}

HopfReport normal_form(const HopfContext& ctx, const GCoefficients& g,
                       const CenterCorrections& cc, const ModelParams& p) {
    const double tau = ctx.tau_c;
    const double ot = ctx.omega_c * tau;  // phase advance across one delay
    const Complex a = ctx.alpha, b = ctx.beta;
    const Complex ca = std::conj(a), cb = std::conj(b);
    const double ed = std::exp(-p.d2 * tau);
    const Complex rot = std::exp(-kI * ctx.omega_c * tau);

    // Center-manifold quadratic modes evaluated where the nonlinearity reads
    // them: current time (theta = 0) and one delay back (theta = -1).
    auto W20 = [&](double theta) -> Vec3c {
        const Complex e1 = std::exp(kI * ot * theta);
        const Complex e2 = std::exp(2.0 * kI * ot * theta);
        const Complex ce1 = std::conj(e1);
        Vec3c w;
        for (int k = 0; k < 3; ++k)
            w[k] = (kI * g.g20 / ot) * ctx.q0[k] * e1 +
                   (kI * std::conj(g.g02) / (3.0 * ot)) * std::conj(ctx.q0[k]) * ce1 +
                   cc.E1[k] * e2;
        return w;
    };
    auto W11 = [&](double theta) -> Vec3c {
        const Complex e1 = std::exp(kI * ot * theta);
        const Complex ce1 = std::conj(e1);
        Vec3c w;
        for (int k = 0; k < 3; ++k)
            w[k] = (-kI * g.g11 / ot) * ctx.q0[k] * e1 +
                   (kI * std::conj(g.g11) / ot) * std::conj(ctx.q0[k]) * ce1 + cc.E2[k];
        return w;
    };

    const Vec3c A0 = W20(0.0), Am1 = W20(-1.0);
    const Vec3c B0 = W11(0.0), Bm1 = W11(-1.0);

    const Complex w1 = std::conj(ctx.alpha_star);
    const Complex w2 = std::conj(ctx.beta_star);
    const Complex bracket =
        -p.b1 * (2.0 * A0[0] + 4.0 * B0[0]) -
        (p.c1 - p.alpha1 * w1) * (ca * A0[0] + 2.0 * a * B0[0] + 2.0 * B0[1] + A0[1]) -
        p.c2 * w1 * (cb * A0[1] + 2.0 * b * B0[1] + 2.0 * a * B0[2] + ca * A0[2]) +
        p.alpha2 * w2 * ed *
            (cb / rot * Am1[1] + 2.0 * b * rot * Bm1[1] + 2.0 * a * rot * Bm1[2] +
             ca / rot * Am1[2]);
    const Complex g21 = tau * ctx.Dbar * bracket;

    HopfReport rep;
    rep.tau_c = ctx.tau_c;
    rep.omega_c = ctx.omega_c;
    rep.g20 = g.g20;
    rep.g11 = g.g11;
    rep.g02 = g.g02;
    rep.g21 = g21;
    rep.E1 = cc.E1;
    rep.E2 = cc.E2;
    rep.C1 = (kI / (2.0 * ot)) *
                 (g.g20 * g.g11 - 2.0 * std::norm(g.g11) - std::norm(g.g02) / 3.0) +
             g21 / 2.0;
    rep.lambda_prime = lambda_prime(p, ctx.tau_c, kI * ctx.omega_c);

    const double re_lp = rep.lambda_prime.real();
    if (std::fabs(re_lp) < 1e-10)
        throw Error("hopf.TransversalityFailure",
                    "root pair grazes the axis (|Re lambda'| < 1e-10); no direction");

    rep.mu2 = -rep.C1.real() / re_lp;
    rep.beta2 = 2.0 * rep.C1.real();
    rep.T2 = -(rep.C1.imag() + rep.mu2 * rep.lambda_prime.imag()) / ot;
    rep.direction = rep.mu2 > 0.0 ? Direction::Supercritical : Direction::Subcritical;
    rep.orbit = rep.beta2 < 0.0 ? OrbitStability::Stable : OrbitStability::Unstable;
    return rep;
}

HopfReport analyze_crossing(const ModelParams& p, double tau_c, double omega_c) {
    const HopfContext ctx = eigenvectors(p, tau_c, omega_c);
    const GCoefficients g = g_coefficients(ctx, p);
    const CenterCorrections cc = solve_E1_E2(ctx, g, p);
    return normal_form(ctx, g, cc, p);
}

} // namespace stagechain::hopf
