#include "stagechain/dde.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stagechain/error.hpp"

namespace stagechain::dde {

namespace {

SystemState add_scaled(const SystemState& a, double c, const SystemState& b) {
    return {a.x + c * b.x, a.y + c * b.y, a.z1 + c * b.z1, a.z2 + c * b.z2};
}

SystemState rk4_combine(const SystemState& y, double h, const SystemState& k1,
                        const SystemState& k2, const SystemState& k3,
                        const SystemState& k4) {
    const double c = h / 6.0;
    return {y.x + c * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
            y.y + c * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y),
            y.z1 + c * (k1.z1 + 2.0 * k2.z1 + 2.0 * k3.z1 + k4.z1),
            y.z2 + c * (k1.z2 + 2.0 * k2.z2 + 2.0 * k3.z2 + k4.z2)};
}

// Midpoint of a Hermite cell: the two-point cubic evaluated at u = 1/2.
SystemState hermite_midpoint(const SystemState& ya, const SystemState& fa,
                             const SystemState& yb, const SystemState& fb, double h) {
    const double c = h / 8.0;
    return {0.5 * (ya.x + yb.x) + c * (fa.x - fb.x),
            0.5 * (ya.y + yb.y) + c * (fa.y - fb.y),
            0.5 * (ya.z1 + yb.z1) + c * (fa.z1 - fb.z1),
            0.5 * (ya.z2 + yb.z2) + c * (fa.z2 - fb.z2)};
}

SystemState hermite_eval(const SystemState& ya, const SystemState& fa,
                         const SystemState& yb, const SystemState& fb,
                         double h, double u) {
    const double u2 = u * u, u3 = u2 * u;
    const double h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
    const double h10 = u3 - 2.0 * u2 + u;
    const double h01 = -2.0 * u3 + 3.0 * u2;
    const double h11 = u3 - u2;
    auto comp = [&](double a, double da, double b, double db) {
        return h00 * a + h10 * h * da + h01 * b + h11 * h * db;
    };
    return {comp(ya.x, fa.x, yb.x, fb.x), comp(ya.y, fa.y, yb.y, fb.y),
            comp(ya.z1, fa.z1, yb.z1, fb.z1), comp(ya.z2, fa.z2, yb.z2, fb.z2)};
}

bool state_finite(const SystemState& s, double cap) {
    auto okc = [cap](double v) { return std::isfinite(v) && std::fabs(v) <= cap; };
    return okc(s.x) && okc(s.y) && okc(s.z1) && okc(s.z2);
}

// Integral of g over n uniform intervals of width h: composite Simpson, with
// a 3/8 tail when the interval count is odd (trapezoid only for a single
// interval, which the public entry points never produce).
double simpson(const std::vector<double>& g, double h) {
    const std::size_t n = g.size() - 1;
    if (n == 0) return 0.0;
    if (n == 1) return 0.5 * h * (g[0] + g[1]);
    double total = 0.0;
    std::size_t even_end = (n % 2 == 0) ? n : (n - 3);
    for (std::size_t k = 0; k + 2 <= even_end; k += 2)
        total += (h / 3.0) * (g[k] + 4.0 * g[k + 1] + g[k + 2]);
    if (n % 2 != 0) {
        const std::size_t m = even_end;
        total += (3.0 * h / 8.0) * (g[m] + 3.0 * g[m + 1] + 3.0 * g[m + 2] + g[m + 3]);
    }
    return total;
}

// History samples on the integration grid, with interpolation derivatives.
// Derivatives come from the analytic callback when given, from fourth-order
// finite differences of the sampled values otherwise, and are zero for a
// constant history.
void sample_history(const HistorySpec& spec, double h, std::size_t lag,
                    std::vector<SystemState>& y, std::vector<SystemState>& f) {
    y.resize(lag + 1);
    f.assign(lag + 1, SystemState{0.0, 0.0, 0.0, 0.0});
    for (std::size_t j = 0; j <= lag; ++j) {
        const double t = (static_cast<double>(j) - static_cast<double>(lag)) * h;
        y[j] = spec.fn ? spec.fn(t) : spec.constant;
        if (!state_finite(y[j], 1e12))
            throw Error("dde.NonFiniteState", "history sample not finite at t = " + std::to_string(t));
        if (spec.dfn) f[j] = spec.dfn(t);
    }
    if (!spec.fn || spec.dfn) return;

    if (lag < 4)
        throw Error("dde.StepTooLarge",
                    "callable history needs at least 4 grid nodes for derivative stencils");
    auto fd = [&](std::size_t j) -> SystemState {
        auto comb = [&](double c0, std::size_t i0, double c1, std::size_t i1, double c2,
                        std::size_t i2, double c3, std::size_t i3, double c4,
                        std::size_t i4) -> SystemState {
            auto pick = [&](auto member) {
                return (c0 * y[i0].*member + c1 * y[i1].*member + c2 * y[i2].*member +
                        c3 * y[i3].*member + c4 * y[i4].*member) /
                       (12.0 * h);
            };
            return {pick(&SystemState::x), pick(&SystemState::y), pick(&SystemState::z1),
                    pick(&SystemState::z2)};
        };
        const std::size_t n = lag;
        if (j == 0) return comb(-25, 0, 48, 1, -36, 2, 16, 3, -3, 4);
        if (j == 1) return comb(-3, 0, -10, 1, 18, 2, -6, 3, 1, 4);
        if (j == n - 1) return comb(3, n, 10, n - 1, -18, n - 2, 6, n - 3, -1, n - 4);
        if (j == n) return comb(25, n, -48, n - 1, 36, n - 2, -16, n - 3, 3, n - 4);
        return comb(1, j - 2, -8, j - 1, 0, j, 8, j + 1, -1, j + 2);
    };
    for (std::size_t j = 0; j <= lag; ++j) f[j] = fd(j);
}

// Juvenile mass consistent with the sampled history: recruitment over the
// trailing maturation window, discounted by juvenile mortality.
double consistency_integral(const ModelParams& p, const std::vector<SystemState>& hist,
                            double h) {
    const std::size_t lag = hist.size() - 1;
    if (lag == 0) return 0.0;
    std::vector<double> g(lag + 1);
    for (std::size_t j = 0; j <= lag; ++j) {
        const double age = static_cast<double>(lag - j) * h;  // time since recruitment
        g[j] = p.alpha2 * hist[j].y * hist[j].z2 * std::exp(-p.d2 * age);
    }
    return simpson(g, h);
}

} // namespace

// ---------------------------------------------------------------------------
// HistoryBuffer

HistoryBuffer::HistoryBuffer(double start_time, double step,
                             std::vector<SystemState> states,
                             std::vector<SystemState> derivatives)
    : t0_(start_time), h_(step), y_(std::move(states)), f_(std::move(derivatives)) {
    if (y_.empty() || y_.size() != f_.size())
        throw Error("dde.InvalidBuffer", "need equal, non-empty state and derivative arrays");
    if (!(h_ > 0.0) || !std::isfinite(h_) || !std::isfinite(t0_))
        throw Error("dde.InvalidBuffer", "need a positive finite step and start time");
}

SystemState HistoryBuffer::value(double t) const {
    const std::size_t n = y_.size();
    const double t1 = end_time();
    const double tol = 1e-9 * std::max({1.0, std::fabs(t0_), std::fabs(t1)});
    if (t < t0_ - tol || t > t1 + tol)
        throw Error("dde.OutOfCoverage",
                    "t = " + std::to_string(t) + " outside [" + std::to_string(t0_) + ", " +
                        std::to_string(t1) + "]");
    if (n == 1) return y_[0];
    double s = (t - t0_) / h_;
    s = std::clamp(s, 0.0, static_cast<double>(n - 1));
    std::size_t i = std::min(static_cast<std::size_t>(s), n - 2);
    const double u = s - static_cast<double>(i);
    return hermite_eval(y_[i], f_[i], y_[i + 1], f_[i + 1], h_, u);
}

HistoryBuffer dense_output(const Trajectory& traj) {
    if (traj.times.empty())
        throw Error("dde.InvalidBuffer", "empty trajectory");
    return HistoryBuffer(traj.times.front(), traj.step, traj.states, traj.derivatives);
}

// ---------------------------------------------------------------------------
// Stepper

Stepper::Stepper(const ModelParams& p, const HistorySpec& history, double step,
                 const double* z1_override)
    : p_(p) {
    model::validate_params(p);
    if (!(step > 0.0) || !std::isfinite(step))
        throw Error("dde.NonPositiveStep", "step must be positive and finite");
    h_ = step;
    if (p.tau > 0.0) {
        const double ratio = p.tau / step;
        lag_ = static_cast<std::size_t>(std::llround(ratio));
        if (lag_ < 1 || std::fabs(static_cast<double>(lag_) * step - p.tau) >
                            1e-9 * std::max(step, p.tau))
            throw Error("dde.StepNotDivisor", "step must divide the delay exactly");
    } else {
        lag_ = 0;
    }

    sample_history(history, h_, lag_, pre_y_, pre_f_);

    ring_.assign(lag_ + 2, Node{});
    Node first;
    first.y = pre_y_[lag_];
    if (z1_override) first.y.z1 = *z1_override;
    const SystemState delayed0 = (lag_ > 0) ? pre_y_[0] : first.y;
    first.f = rhs_full(p_, first.y, delayed0);
    index_ = 0;
    ring_[0] = first;
}

const SystemState& Stepper::state() const { return ring_[index_ % ring_.size()].y; }
const SystemState& Stepper::derivative() const { return ring_[index_ % ring_.size()].f; }

const Stepper::Node& Stepper::main_node(std::size_t i) const {
    return ring_[i % ring_.size()];
}

void Stepper::history_node(long long i, SystemState& y, SystemState& f) const {
    const std::size_t j = static_cast<std::size_t>(i + static_cast<long long>(lag_));
    y = pre_y_[j];
    f = pre_f_[j];
}

void Stepper::delayed_cell(long long upper, SystemState& mid, SystemState& at_upper) const {
    SystemState ya, fa, yb, fb;
    if (upper <= 0) {
        // Both cell ends predate t = 0: interpolate the history function with
        // its own derivatives so a smooth history is reproduced faithfully.
        history_node(upper - 1, ya, fa);
        history_node(upper, yb, fb);
    } else {
        const Node& a = main_node(static_cast<std::size_t>(upper) - 1);
        const Node& b = main_node(static_cast<std::size_t>(upper));
        ya = a.y; fa = a.f; yb = b.y; fb = b.f;
    }
    mid = hermite_midpoint(ya, fa, yb, fb, h_);
    at_upper = yb;
}

void Stepper::check_finite(const SystemState& s) const {
    if (!state_finite(s, 1e12))
        throw Error("dde.NonFiniteState",
                    "state left the trust region near t = " + std::to_string(time()));
}

void Stepper::advance() {
    const std::size_t i = index_;
    const Node& cur = main_node(i);
    const SystemState y0 = cur.y;
    const SystemState k1 = cur.f;  // rhs at t_i with the delayed value at t_i - tau

    SystemState mid{}, up{};
    if (lag_ > 0) {
        // Delayed times for the half and full stages fall in the grid cell
        // whose upper node is i - lag + 1; pick that cell once per step.
        const long long upper =
            static_cast<long long>(i) - static_cast<long long>(lag_) + 1;
        delayed_cell(upper, mid, up);
    }

    const SystemState s2 = add_scaled(y0, 0.5 * h_, k1);
    const SystemState k2 = rhs_full(p_, s2, lag_ ? mid : s2);
    const SystemState s3 = add_scaled(y0, 0.5 * h_, k2);
    const SystemState k3 = rhs_full(p_, s3, lag_ ? mid : s3);
    const SystemState s4 = add_scaled(y0, h_, k3);
    const SystemState k4 = rhs_full(p_, s4, lag_ ? up : s4);

    Node next;
    next.y = rk4_combine(y0, h_, k1, k2, k3, k4);
    index_ = i + 1;
    check_finite(next.y);
    next.f = rhs_full(p_, next.y, lag_ ? up : next.y);
    ring_[index_ % ring_.size()] = next;
}

Stepper::Window Stepper::window() const {
    Window w;
    w.states.resize(lag_ + 1);
    w.derivatives.resize(lag_ + 1);
    for (std::size_t k = 0; k <= lag_; ++k) {
        const long long idx =
            static_cast<long long>(index_) - static_cast<long long>(lag_ - k);
        if (idx < 0) {
            history_node(idx, w.states[k], w.derivatives[k]);
        } else {
            const Node& n = main_node(static_cast<std::size_t>(idx));
            w.states[k] = n.y;
            w.derivatives[k] = n.f;
        }
    }
    return w;
}

void Stepper::set_window(const Window& w) {
    if (w.states.size() != lag_ + 1 || w.derivatives.size() != lag_ + 1)
        throw Error("dde.InvalidBuffer", "window size must equal delay_steps()+1");
    for (std::size_t k = 0; k <= lag_; ++k) {
        const long long idx =
            static_cast<long long>(index_) - static_cast<long long>(lag_ - k);
        if (idx < 0) {
            const std::size_t j = static_cast<std::size_t>(idx + static_cast<long long>(lag_));
            pre_y_[j] = w.states[k];
            pre_f_[j] = w.derivatives[k];
        } else {
            Node& n = ring_[static_cast<std::size_t>(idx) % ring_.size()];
            n.y = w.states[k];
            n.f = w.derivatives[k];
        }
    }
}

// ---------------------------------------------------------------------------
// simulate

Simulation simulate(const ModelParams& p, const HistorySpec& history, double t_end,
                    double step) {
    model::validate_params(p);
    if (!(step > 0.0) || !std::isfinite(step))
        throw Error("dde.NonPositiveStep", "step must be positive and finite");

    Simulation sim;
    sim.requested_step = step;
    double h = step;
    if (p.tau > 0.0) {
        if (step > p.tau / 4.0 * (1.0 + 1e-12))
            throw Error("dde.StepTooLarge", "step must be at most tau/4");
        const std::size_t n = static_cast<std::size_t>(std::ceil(p.tau / step - 1e-9));
        h = p.tau / static_cast<double>(n);
        sim.step_adjusted = std::fabs(h - step) > 1e-12 * step;
    }

    const std::size_t lag =
        (p.tau > 0.0) ? static_cast<std::size_t>(std::llround(p.tau / h)) : 0;
    std::vector<SystemState> hist_y, hist_f;
    sample_history(history, h, lag, hist_y, hist_f);
    sim.z1_requested = hist_y.back().z1;
    sim.z1_applied = consistency_integral(p, hist_y, h);

    Stepper stepper(p, history, h, &sim.z1_applied);

    std::size_t steps = 0;
    if (t_end > 0.0) steps = static_cast<std::size_t>(std::ceil(t_end / h - 1e-9));

    Trajectory& traj = sim.trajectory;
    traj.params = p;
    traj.step = h;
    traj.times.reserve(steps + 1);
    traj.states.reserve(steps + 1);
    traj.derivatives.reserve(steps + 1);
    traj.times.push_back(0.0);
    traj.states.push_back(stepper.state());
    traj.derivatives.push_back(stepper.derivative());
    for (std::size_t i = 0; i < steps; ++i) {
        stepper.advance();
        traj.times.push_back(stepper.time());
        traj.states.push_back(stepper.state());
        traj.derivatives.push_back(stepper.derivative());
    }
    return sim;
}

// ---------------------------------------------------------------------------
// diagnostics

Z1Reconstruction reconstruct_z1(const Trajectory& traj) {
    Z1Reconstruction out;
    const std::size_t n_nodes = traj.states.size();
    if (n_nodes == 0) throw Error("dde.InsufficientHistory", "empty trajectory");

    if (traj.params.tau <= 0.0) {
        out.first_index = 0;
        out.z1.assign(n_nodes, 0.0);
        return out;
    }

    const double h = traj.step;
    const std::size_t lag = static_cast<std::size_t>(std::llround(traj.params.tau / h));
    if (lag < 1 || std::fabs(static_cast<double>(lag) * h - traj.params.tau) >
                       1e-9 * std::max(h, traj.params.tau))
        throw Error("dde.StepNotDivisor", "trajectory grid does not divide the delay");
    if (n_nodes < lag + 1)
        throw Error("dde.InsufficientHistory",
                    "trajectory shorter than one maturation window");

    std::vector<double> decay(lag + 1);
    for (std::size_t k = 0; k <= lag; ++k)
        decay[k] = std::exp(-traj.params.d2 * h * static_cast<double>(k));

    out.first_index = lag;
    out.z1.reserve(n_nodes - lag);
    std::vector<double> g(lag + 1);
    for (std::size_t i = lag; i < n_nodes; ++i) {
        for (std::size_t j = 0; j <= lag; ++j) {
            const SystemState& s = traj.states[i - lag + j];
            g[j] = traj.params.alpha2 * s.y * s.z2 * decay[lag - j];
        }
        out.z1.push_back(simpson(g, h));
    }
    return out;
}

PositivityReport check_positivity(const Trajectory& traj) {
    PositivityReport rep;
    constexpr double kFloor = -1e-9;
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        const SystemState& s = traj.states[i];
        if (s.x < kFloor || s.y < kFloor || s.z1 < kFloor || s.z2 < kFloor)
            rep.violation_times.push_back(traj.times[i]);
    }
    rep.ok = rep.violation_times.empty();
    return rep;
}

BoundednessReport check_boundedness(const Trajectory& traj, double tol_scale) {
    const ModelParams& p = traj.params;
    BoundednessReport rep;
    rep.p_min = std::min({p.a1, p.d1, p.d2, p.d3});
    rep.K = p.a1 * p.a1 * p.alpha1 * p.alpha2 / p.b1;
    rep.ceiling = rep.K / rep.p_min;
    if (traj.states.empty()) return rep;

    auto weighted = [&](const SystemState& s) {
        return p.alpha1 * p.alpha2 * s.x + p.c1 * p.alpha2 * s.y +
               p.c1 * p.c2 * (s.z1 + s.z2);
    };
    const double v0 = weighted(traj.states.front());
    const double excess = std::max(0.0, v0 - rep.ceiling);
    const double tol = tol_scale * std::max(1.0, rep.ceiling);
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        const double bound = rep.ceiling + excess * std::exp(-rep.p_min * traj.times[i]);
        if (weighted(traj.states[i]) > bound + tol)
            rep.violation_times.push_back(traj.times[i]);
    }
    rep.ok = rep.violation_times.empty();
    return rep;
}

} // namespace stagechain::dde
