#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stagechain/dde.hpp"
#include "stagechain/model.hpp"

namespace stagechain::orbit {

using dde::Trajectory;
using model::ModelParams;

enum class OrbitKind { Equilibrium, Periodic, Chaotic, Undetermined };

const char* orbit_kind_name(OrbitKind k);

struct OrbitClass {
    OrbitKind kind = OrbitKind::Undetermined;
    double amplitude = 0.0;              // largest post-transient swing over channels
    std::optional<model::EqKind> target; // equilibrium approached (Equilibrium only)
    std::optional<double> period;        // mean peak spacing (Periodic only)
    std::optional<double> peak_cv;       // spacing variability that drove the verdict
    std::optional<double> lle;           // echo of the exponent used, if any
};

struct ClassifySettings {
    double transient_fraction = 0.5;  // discarded share of the horizon
    double amplitude_tol = 1e-5;      // per-channel equilibrium threshold
    double peak_cv_tol = 0.02;        // spacing coefficient-of-variation limit
    double lle_threshold = 0.01;      // minimum exponent to call chaos
};

// Labels the long-run regime of a stored trajectory.  The post-transient
// window must span at least 50 delay intervals (and a handful of nodes);
// otherwise throws orbit.TrajectoryTooShort.  A Chaotic verdict is only
// issued when a positive Lyapunov exponent is supplied.
OrbitClass classify_orbit(const Trajectory& traj, const ClassifySettings& settings = {},
                          std::optional<double> lle = std::nullopt);

struct LyapunovSettings {
    double horizon = 3000.0;        // total integration span
    double step = 0.01;             // integration step (snapped to divide tau)
    double renorm_interval = 5.0;   // burst length between renormalizations
    double offset = 1e-8;           // initial per-component history offset
    double warmup_fraction = 0.5;   // share of the horizon discarded as transient
    dde::HistorySpec history{};     // fiducial initial data
};

struct LyapunovResult {
    double lle = 0.0;       // averaged log-stretch rate per unit time
    int renorms_used = 0;   // bursts contributing to the average
};

// Largest Lyapunov exponent by the two-trajectory method: a fiducial and an
// offset delay line advance in lockstep; every burst the full history window
// separation (max-norm over nodes and components) is measured, logged, and
// rescaled back to the initial offset.
LyapunovResult largest_lyapunov(const ModelParams& p, const LyapunovSettings& settings = {});

struct SweepSettings {
    double t_end = 3000.0;
    double step = 0.01;
    ClassifySettings classify{};
    bool with_lle = false;
    LyapunovSettings lyapunov{};     // used when with_lle is set
    double history_kick = 1e-4;      // relative offset of the starting history
    unsigned jobs = 0;               // 0 = all hardware threads
};

struct SweepRow {
    double tau = 0.0;
    bool feasible = false;           // coexistence equilibrium exists here
    OrbitClass cls;
    std::vector<double> extrema;     // post-transient local extrema of the crop series
};

// Classifies the long-run regime across a delay range.  Each delay starts
// from the coexistence equilibrium nudged by `history_kick` (falling back to
// unit constant history where infeasible), so slow transients near onset do
// not masquerade as sustained cycles.  Rows are computed independently and
// in parallel, and the result is deterministic for a fixed setting set.
std::vector<SweepRow> bifurcation_sweep(const ModelParams& p, double tau_min,
                                        double tau_max, double tau_step,
                                        const SweepSettings& settings = {});

} // namespace stagechain::orbit
