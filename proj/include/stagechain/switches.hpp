#pragma once

#include <string>
#include <vector>

#include "stagechain/linstab.hpp"
#include "stagechain/model.hpp"

namespace stagechain::switches {

using linstab::CharCoefficients;
using model::ModelParams;

// Real roots of z^3 + p z^2 + q z + r (closed form plus Newton polish),
// ascending, multiple roots collapsed; |z| < 1e-12 snaps to zero.
std::vector<double> cubic_real_roots(double p, double q, double r);

// The frequency cubic h(z) = z^3 + p z^2 + q z + r whose positive roots
// z = omega^2 locate candidate imaginary-axis crossings: F(omega, tau) =
// |P(i omega)|^2 - |Q(i omega)|^2 = h(omega^2).
struct FCubic {
    double tau;
    double p, q, r;
    std::vector<double> positive_roots;  // ascending z > 0
    std::vector<double> omegas;          // sqrt of the above, ascending
};

FCubic f_cubic(const ModelParams& params, double tau);

// Sign-pattern interval labels of (p, q, r) and the root-count case.
enum class IntervalLabel { I11, I12, I21, I22, I23, None };

const char* interval_label_name(IntervalLabel l);

struct CaseInfo {
    int case_number;       // 1..4 = 0..3 positive roots
    int root_count;        // positive roots of the cubic
    IntervalLabel label;   // sign pattern of (p, q, r); None on a boundary
};

CaseInfo classify_case(const FCubic& fc);

// Angle theta(tau) in [0, 2pi) such that lambda = i*omega solves the
// characteristic equation when omega*tau = theta + 2*pi*n.  Throws
// switch.InconsistentSinCos when the recovered sine/cosine pair is not on the
// unit circle (omega not a genuine frequency-cubic root).
double theta_of_tau(const ModelParams& params, double tau, double omega);

// S_n(tau) = tau - (theta(tau) + 2 pi n) / omega(tau); crossings are its zeros.
double s_n(const ModelParams& params, double tau, int n, double omega);

struct SnZero {
    int n;            // winding index of the zero
    int branch;       // frequency branch (index into ascending omegas)
    double tau_zero;  // delay at which the root pair sits on the axis
    double omega;     // crossing frequency
    int delta;        // +1 rightward crossing, -1 leftward, 0 degenerate (excluded)
};

struct StabilityInterval {
    double lo, hi;
    bool stable;
};

struct SwitchSample {
    double tau;
    int branch;
    double omega, theta;
    std::vector<double> s;  // S_0 .. S_{n_max}
};

struct IntervalRun {
    IntervalLabel label;
    double lo, hi;
};

struct SwitchReport {
    double tau_bar = 0.0;          // scan domain is [0, tau_bar)
    double grid_step = 0.0;
    int n_max = 0;
    bool stable_at_zero = false;   // zero-delay verdict anchoring the partition
    std::vector<IntervalRun> interval_runs;
    std::vector<SnZero> zeros;     // ascending in tau
    bool has_crossings = false;
    double tau_star = 0.0;         // first crossing (when any)
    double tau_star_star = 0.0;    // last crossing (when any)
    std::vector<StabilityInterval> stability;  // partition of [0, tau_bar)
    std::vector<SwitchSample> samples;         // grid samples for plots/CSV
};

// Scans [0, tau_bar) on a uniform grid (default step tau_bar/2000), follows
// every frequency branch and winding index up to n_max, bisects each sign
// change of S_n to |S_n| < 1e-10, evaluates the crossing direction delta from
// the analytic dF/domega and a central-difference dS_n/dtau, and partitions
// the delay axis by the running count of right-half-plane root pairs.
// Throws switch.GridTooCoarse when refinement contradicts the bracketing grid
// (two crossings hiding in one cell) or a frequency branch dies inside a
// bracket.
SwitchReport find_switches(const ModelParams& params, double grid_step = -1.0,
                           int n_max = 3);

} // namespace stagechain::switches
