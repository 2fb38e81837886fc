#pragma once

#include <array>
#include <complex>

#include "stagechain/model.hpp"

namespace stagechain::hopf {

using model::ModelParams;
using Complex = std::complex<double>;
using Vec3c = std::array<Complex, 3>;

// Solves a 3x3 complex system by Gaussian elimination with partial pivoting.
// Throws hopf.SingularSystem when a pivot magnitude drops below 1e-12.
Vec3c solve3(const std::array<std::array<Complex, 3>, 3>& A, const Vec3c& rhs);

// Eigenvector data of the critical root pair +-i*omega_c at delay tau_c:
// right eigenvector q(theta) = q0 * exp(i*omega_c*tau_c*theta) on [-1, 0],
// left eigenvector normalized so the adjoint pairing <q*, q> equals 1.
struct HopfContext {
    double tau_c = 0.0;
    double omega_c = 0.0;
    double x_star = 0.0, y_star = 0.0, z2_star = 0.0;
    Complex alpha, beta;             // q0 = (1, alpha, beta)
    Complex alpha_star, beta_star;   // unnormalized left direction (1, alpha*, beta*)
    Complex Dbar;                    // normalizer: qstar0 = Dbar * conj((1, alpha*, beta*))
    Vec3c q0, qstar0;
};

// Builds the context at a crossing found by the switch analysis.  Throws
// hopf.NotACrossing when i*omega_c fails the characteristic equation beyond
// 1e-7 and hopf.SingularNormalizer when the adjoint pairing is degenerate.
HopfContext eigenvectors(const ModelParams& p, double tau_c, double omega_c);

// Quadratic normal-form coefficients, plus the quadratic interaction vectors
// reused by the center-manifold corrections (they are the parts of the cubic
// coefficient that do not involve W).
struct GCoefficients {
    Complex g20, g11, g02;
    Vec3c F20;  // coefficient vector of the e^{2 i phi} quadratic response
    Vec3c F11;  // coefficient vector of the mean quadratic response
};

GCoefficients g_coefficients(const HopfContext& ctx, const ModelParams& p);

// Center-manifold correction amplitudes: E1 for the second-harmonic response,
// E2 for the mean response (E2 is real up to rounding).  The linear systems
// are assembled from the linearization matrices at the crossing.
struct CenterCorrections {
    Vec3c E1, E2;
};

CenterCorrections solve_E1_E2(const HopfContext& ctx, const GCoefficients& g,
                              const ModelParams& p);

enum class Direction { Supercritical, Subcritical };
enum class OrbitStability { Stable, Unstable };

struct HopfReport {
    double tau_c = 0.0, omega_c = 0.0;
    Complex g20, g11, g02, g21;
    Vec3c E1, E2;
    Complex C1;             // first Lyapunov coefficient
    Complex lambda_prime;   // d lambda / d tau at the crossing (implicit differentiation)
    double mu2 = 0.0;       // direction:   mu2 > 0 => orbits exist past the crossing
    double beta2 = 0.0;     // orbit stability: beta2 < 0 => orbitally stable
    double T2 = 0.0;        // period drift along the orbit family
    Direction direction = Direction::Supercritical;
    OrbitStability orbit = OrbitStability::Stable;
};

// Root-pair velocity d lambda/d tau at any root, by implicit differentiation
// of the characteristic function with delay-dependent coefficients.
Complex lambda_prime(const ModelParams& p, double tau, Complex lambda);

// Assembles the cubic coefficient and the bifurcation verdicts.  Throws
// hopf.TransversalityFailure when |Re lambda'| < 1e-10 (the crossing speed is
// too small to certify a direction).
HopfReport normal_form(const HopfContext& ctx, const GCoefficients& g,
                       const CenterCorrections& cc, const ModelParams& p);

// Convenience: full pipeline at one crossing.
HopfReport analyze_crossing(const ModelParams& p, double tau_c, double omega_c);

} // namespace stagechain::hopf
