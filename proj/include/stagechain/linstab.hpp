#pragma once

#include <complex>
#include <vector>

#include "stagechain/model.hpp"

namespace stagechain::linstab {

using model::EqKind;
using model::ModelParams;

// Coefficients of the characteristic function at the coexistence equilibrium,
//   D(lambda) = P(lambda) + Q(lambda) e^{-lambda tau},
//   P(lambda) = lambda^3 + A1 lambda^2 + A2 lambda + A3,
//   Q(lambda) = B1 lambda^2 + B2 lambda + B3.
// The coefficients depend on tau both directly and through the equilibrium.
struct CharCoefficients {
    double tau;
    double A1, A2, A3;
    double B1, B2, B3;
};

// Throws linstab.NoInteriorEquilibrium when the coexistence state is
// infeasible at this delay.
CharCoefficients char_coeffs(const ModelParams& p, double tau);

std::complex<double> eval_P(const CharCoefficients& c, std::complex<double> lambda);
std::complex<double> eval_Q(const CharCoefficients& c, std::complex<double> lambda);
// P(lambda) + Q(lambda) e^{-lambda tau}; zero exactly at characteristic roots.
std::complex<double> char_residual(const CharCoefficients& c, std::complex<double> lambda);

enum class Verdict { Stable, Unstable, Marginal };

const char* verdict_name(Verdict v);

struct Spectrum {
    EqKind kind;
    std::vector<std::complex<double>> eigenvalues;
    bool has_indicator = false;  // set for the pest-only equilibrium
    double indicator = 0.0;      // enemy-invasion indicator; > 0 means invadable
    Verdict verdict = Verdict::Stable;
};

// Exact spectra of the boundary equilibria (extinction, crop-only,
// enemy-free), whose characteristic functions factor in closed form.  For the
// enemy-free state the delay enters only through a real invasion indicator.
// Throws linstab.EquilibriumAbsent when the equilibrium is infeasible and
// linstab.UnsupportedEquilibrium for the coexistence state (its delayed
// spectrum is the switch machinery's job).
Spectrum boundary_spectrum(const ModelParams& p, EqKind which, double tau);

struct RouthHurwitz {
    double c1, c2, c3;    // cubic coefficients at zero delay
    double discriminant;  // c1*c2 - c3
    Verdict verdict;      // Stable iff all coefficients and the discriminant are positive
};

// Zero-delay stability of the coexistence equilibrium.  Cross-checks the
// discriminant against its closed form b1*c1*alpha1*x*^2*y* and throws
// linstab.IdentityViolation if the two disagree beyond rounding.
RouthHurwitz routh_hurwitz_tau0(const ModelParams& p);

} // namespace stagechain::linstab
