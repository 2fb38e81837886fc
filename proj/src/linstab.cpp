#include "stagechain/linstab.hpp"

#include <cmath>

#include "stagechain/error.hpp"

namespace stagechain::linstab {

namespace {

constexpr double kMarginalBand = 1e-9;

Verdict verdict_from_real_parts(const std::vector<double>& re) {
    bool marginal = false;
    for (double r : re) {
        if (r > kMarginalBand) return Verdict::Unstable;
        if (r > -kMarginalBand) marginal = true;
    }
    return marginal ? Verdict::Marginal : Verdict::Stable;
}

} // namespace

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Stable: return "stable";
        case Verdict::Unstable: return "unstable";
        case Verdict::Marginal: return "marginal";
    }
    return "?";
}

CharCoefficients char_coeffs(const ModelParams& p, double tau) {
    model::validate_params(p);
    ModelParams q = p;
    q.tau = tau;
    auto eq = model::interior_equilibrium(q);
    if (!eq)
        throw Error("linstab.NoInteriorEquilibrium",
                    "coexistence equilibrium infeasible at tau = " + std::to_string(tau));
    const double xs = eq->x, ys = eq->y, zs = eq->z2;
    const double m = p.alpha2 * ys * std::exp(-p.d2 * tau);  // delayed recruitment gain

    CharCoefficients c;
    c.tau = tau;
    c.A1 = p.b1 * xs + p.d3;
    c.A2 = p.b1 * p.d3 * xs + p.c1 * p.alpha1 * xs * ys;
    c.A3 = p.c1 * p.d3 * p.alpha1 * xs * ys;
    c.B1 = -m;
    c.B2 = m * (p.c2 * zs - p.b1 * xs);
    c.B3 = m * xs * (p.b1 * p.c2 * zs - p.c1 * p.alpha1 * ys);
    return c;
}

std::complex<double> eval_P(const CharCoefficients& c, std::complex<double> lambda) {
    return ((lambda + c.A1) * lambda + c.A2) * lambda + c.A3;
}

std::complex<double> eval_Q(const CharCoefficients& c, std::complex<double> lambda) {
    return (c.B1 * lambda + c.B2) * lambda + c.B3;
}

std::complex<double> char_residual(const CharCoefficients& c, std::complex<double> lambda) {
    return eval_P(c, lambda) + eval_Q(c, lambda) * std::exp(-lambda * c.tau);
}

Spectrum boundary_spectrum(const ModelParams& p, EqKind which, double tau) {
    model::validate_params(p);
    Spectrum s;
    s.kind = which;

    switch (which) {
        case EqKind::E0: {
            // Fully factored: growth of the empty field, decay of pest and
            // mature enemies.
            s.eigenvalues = {p.a1, -p.d1, -p.d3};
            break;
        }
        case EqKind::E1: {
            // Crop at carrying capacity: crop relaxation, enemy decay, and
            // the pest's invasion exponent.
            s.eigenvalues = {-p.a1, -p.d3, -p.d1 + p.a1 * p.alpha1 / p.b1};
            break;
        }
        case EqKind::E2: {
            const double ybar = (p.a1 * p.alpha1 - p.b1 * p.d1) / (p.c1 * p.alpha1);
            if (ybar < 0.0)
                throw Error("linstab.EquilibriumAbsent",
                            "enemy-free equilibrium infeasible (pest cannot persist)");
            const double xbar = p.d1 / p.alpha1;
            // Planar pair: lambda^2 + b1*xbar*lambda + c1*alpha1*xbar*ybar = 0.
            const double b = p.b1 * xbar;
            const double cq = p.c1 * p.alpha1 * xbar * ybar;
            const double disc = b * b - 4.0 * cq;
            if (disc >= 0.0) {
                const double root = std::sqrt(disc);
                s.eigenvalues = {(-b + root) / 2.0, (-b - root) / 2.0};
            } else {
                const double root = std::sqrt(-disc);
                s.eigenvalues = {{-b / 2.0, root / 2.0}, {-b / 2.0, -root / 2.0}};
            }
            // Transversal enemy growth: positive indicator means the delayed
            // recruitment channel admits a real positive root.
            s.has_indicator = true;
            s.indicator = -p.d3 + p.alpha2 * ybar * std::exp(-p.d2 * tau);
            break;
        }
        case EqKind::E3:
            throw Error("linstab.UnsupportedEquilibrium",
                        "coexistence spectrum is delay-transcendental; use the switch "
                        "analysis instead");
    }

    std::vector<double> re;
    for (auto ev : s.eigenvalues) re.push_back(ev.real());
    if (s.has_indicator) re.push_back(s.indicator);
    s.verdict = verdict_from_real_parts(re);
    return s;
}

RouthHurwitz routh_hurwitz_tau0(const ModelParams& p) {
    const CharCoefficients c = char_coeffs(p, 0.0);
    RouthHurwitz rh;
    rh.c1 = c.A1 + c.B1;
    rh.c2 = c.A2 + c.B2;
    rh.c3 = c.A3 + c.B3;
    rh.discriminant = rh.c1 * rh.c2 - rh.c3;

    // The discriminant collapses to b1*c1*alpha1*x*^2*y* at zero delay; treat
    // disagreement as a numerics bug, not a model property.
    ModelParams q = p;
    q.tau = 0.0;
    auto eq = model::interior_equilibrium(q);
    const double closed = p.b1 * p.c1 * p.alpha1 * eq->x * eq->x * eq->y;
    if (std::fabs(rh.discriminant - closed) > 1e-10 * std::max(1.0, std::fabs(closed)))
        throw Error("linstab.IdentityViolation",
                    "zero-delay discriminant deviates from its closed form");

    if (rh.c1 > 0.0 && rh.c2 > 0.0 && rh.c3 > 0.0 && rh.discriminant > kMarginalBand)
        rh.verdict = Verdict::Stable;
    else if (rh.discriminant < -kMarginalBand || rh.c3 < 0.0)
        rh.verdict = Verdict::Unstable;
    else
        rh.verdict = Verdict::Marginal;
    return rh;
}

} // namespace stagechain::linstab
