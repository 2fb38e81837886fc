#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "stagechain/model.hpp"

namespace stagechain::dde {

using model::ModelParams;
using model::SystemState;

// Dense output over a uniform time grid: cubic Hermite interpolation between
// stored state and derivative nodes.  Exact at the nodes and exact for any
// cubic polynomial in between.
class HistoryBuffer {
public:
    HistoryBuffer(double start_time, double step,
                  std::vector<SystemState> states,
                  std::vector<SystemState> derivatives);

    double start_time() const { return t0_; }
    double end_time() const { return t0_ + h_ * static_cast<double>(y_.size() - 1); }
    double step() const { return h_; }
    std::size_t size() const { return y_.size(); }
    const SystemState& state_at(std::size_t i) const { return y_[i]; }
    const SystemState& derivative_at(std::size_t i) const { return f_[i]; }

    // Interpolated state at time t; throws dde.OutOfCoverage outside the grid.
    SystemState value(double t) const;

private:
    double t0_, h_;
    std::vector<SystemState> y_, f_;
};

// Initial data on [-tau, 0]: a constant state by default, or a callable with
// an optional analytic derivative.  Without `dfn`, derivatives are taken by
// fourth-order finite differences of `fn` on the integration grid so the
// interpolation order of the history segment matches the integrator's.
struct HistorySpec {
    SystemState constant{1.0, 1.0, 1.0, 1.0};
    std::function<SystemState(double)> fn;   // overrides `constant` when set
    std::function<SystemState(double)> dfn;  // optional derivative of fn
};

struct Trajectory {
    ModelParams params;
    double step = 0.0;                     // realized grid step
    std::vector<double> times;
    std::vector<SystemState> states;
    std::vector<SystemState> derivatives;  // RHS values at the nodes
};

// Hermite dense output across a stored trajectory.
HistoryBuffer dense_output(const Trajectory& traj);

struct Simulation {
    Trajectory trajectory;
    double requested_step = 0.0;
    bool step_adjusted = false;  // requested step was shrunk to divide tau
    double z1_requested = 0.0;   // juvenile mass the history prescribed at t = 0
    double z1_applied = 0.0;     // value actually used (recruitment-consistency integral)
};

// One delay line advanced a step at a time: classical RK4 under the method of
// steps, with delayed reads taken off the stored grid (delayed node values at
// whole steps, cubic Hermite at half steps).  The delay must be an exact
// multiple of the step; `simulate` arranges that.  Exposed so the Lyapunov
// estimator can drive two lines in lockstep and rescale whole history windows.
class Stepper {
public:
    // If z1_override is non-null it replaces the z1 component of the t = 0
    // node (the juvenile consistency value); the history segment itself keeps
    // the caller's z1 values, which is harmless because no equation ever reads
    // delayed z1.
    Stepper(const ModelParams& p, const HistorySpec& history, double step,
            const double* z1_override = nullptr);

    void advance();  // one RK4 step; throws dde.NonFiniteState on blow-up

    double time() const { return h_ * static_cast<double>(index_); }
    const SystemState& state() const;
    const SystemState& derivative() const;
    double step() const { return h_; }
    std::size_t delay_steps() const { return lag_; }

    // History samples on [-tau, 0] with their interpolation derivatives.
    const std::vector<SystemState>& history_states() const { return pre_y_; }
    const std::vector<SystemState>& history_derivatives() const { return pre_f_; }

    // The trailing window of delay_steps()+1 nodes ending at the current time
    // (for zero delay, just the current node).  Read/write so a caller can
    // renormalize a perturbed line against a reference line.
    struct Window {
        std::vector<SystemState> states;
        std::vector<SystemState> derivatives;
    };
    Window window() const;
    void set_window(const Window& w);

private:
    struct Node {
        SystemState y, f;
    };

    // Node at grid index i (i <= current index).  Indices <= 0 may resolve to
    // the history segment; delayed reads never cross the t = 0 seam because a
    // cell's side is chosen by its upper index.
    const Node& main_node(std::size_t i) const;
    void history_node(long long i, SystemState& y, SystemState& f) const;
    void delayed_cell(long long upper, SystemState& mid, SystemState& at_upper) const;
    void check_finite(const SystemState& s) const;

    ModelParams p_;
    double h_ = 0.0;
    std::size_t lag_ = 0;    // delay in grid steps
    std::size_t index_ = 0;  // grid index of the newest node
    std::vector<SystemState> pre_y_, pre_f_;  // history segment, t in [-tau, 0]
    std::vector<Node> ring_;                  // recent main nodes, slot = index mod size
};

// Integrates the full four-component system from t = 0 to t_end.  The step is
// shrunk, if needed, to the nearest exact divisor of tau (recorded in the
// result); requesting step > tau/4 is an error (dde.StepTooLarge) so the
// history segment always carries enough nodes for the quadrature and
// finite-difference stencils.  The z1 value at t = 0 is replaced by the
// recruitment integral of the history (recorded as z1_applied).
Simulation simulate(const ModelParams& p, const HistorySpec& history,
                    double t_end, double step);

struct Z1Reconstruction {
    std::size_t first_index = 0;  // first node whose trailing window is covered
    std::vector<double> z1;       // one value per covered node
};

// Recomputes the juvenile mass at each covered node from its defining
// integral over the trailing maturation window (composite Simpson on the
// trajectory grid).  Throws dde.InsufficientHistory if the trajectory is
// shorter than one window.
Z1Reconstruction reconstruct_z1(const Trajectory& traj);

struct PositivityReport {
    bool ok = true;
    std::vector<double> violation_times;  // nodes where any component < -1e-9
};
PositivityReport check_positivity(const Trajectory& traj);

struct BoundednessReport {
    bool ok = true;
    double p_min = 0.0;     // slowest decay rate entering the envelope
    double K = 0.0;         // forcing ceiling of the weighted total mass
    double ceiling = 0.0;   // K / p_min
    std::vector<double> violation_times;
};

// Checks the weighted total mass V = alpha1*alpha2*x + c1*alpha2*y +
// c1*c2*(z1 + z2) against its decay envelope
//   V(t) <= K/p + max(0, V(0) - K/p) * exp(-p t) + tol.
BoundednessReport check_boundedness(const Trajectory& traj, double tol_scale = 1e-6);

} // namespace stagechain::dde
