#include "stagechain/orbit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "stagechain/error.hpp"

namespace stagechain::orbit {

namespace {

using dde::SystemState;

double channel(const SystemState& s, int c) {
    switch (c) {
        case 0: return s.x;
        case 1: return s.y;
        case 2: return s.z1;
        default: return s.z2;
    }
}

// Parabolic refinement of a grid extremum's value.
double refine_extremum(double ym, double y0, double yp) {
    const double denom = ym - 2.0 * y0 + yp;
    if (std::fabs(denom) < 1e-300) return y0;
    const double d = yp - ym;
    return y0 - d * d / (8.0 * denom);
}

// Parabolic refinement of a grid extremum's time.
double refine_time(double t0, double h, double ym, double y0, double yp) {
    const double denom = ym - 2.0 * y0 + yp;
    if (std::fabs(denom) < 1e-300) return t0;
    return t0 + 0.5 * h * (ym - yp) / denom;
}

double window_distance(const dde::Stepper::Window& a, const dde::Stepper::Window& b) {
    double d = 0.0;
    for (std::size_t k = 0; k < a.states.size(); ++k) {
        for (int c = 0; c < 4; ++c)
            d = std::max(d, std::fabs(channel(a.states[k], c) - channel(b.states[k], c)));
    }
    return d;
}

} // namespace

const char* orbit_kind_name(OrbitKind k) {
    switch (k) {
        case OrbitKind::Equilibrium: return "Equilibrium";
        case OrbitKind::Periodic: return "Periodic";
        case OrbitKind::Chaotic: return "Chaotic";
        case OrbitKind::Undetermined: return "Undetermined";
    }
    return "?";
}

OrbitClass classify_orbit(const Trajectory& traj, const ClassifySettings& settings,
                          std::optional<double> lle) {
    if (traj.states.size() < 3)
        throw Error("orbit.TrajectoryTooShort", "need at least 3 trajectory nodes");
    const double t_total = traj.times.back() - traj.times.front();
    const double t_cut = traj.times.front() + settings.transient_fraction * t_total;
    std::size_t cut = 0;
    while (cut < traj.times.size() && traj.times[cut] < t_cut) ++cut;
    if (cut + 10 > traj.times.size())
        throw Error("orbit.TrajectoryTooShort", "post-transient window has too few nodes");
    const double window_span = traj.times.back() - traj.times[cut];
    if (traj.params.tau > 0.0 && window_span < 50.0 * traj.params.tau)
        throw Error("orbit.TrajectoryTooShort",
                    "post-transient window spans fewer than 50 delay intervals");

    OrbitClass out;
    out.lle = lle;

    // Per-channel swing over the analysis window.
    double amp[4];
    int widest = 0;
    for (int c = 0; c < 4; ++c) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (std::size_t i = cut; i < traj.states.size(); ++i) {
            const double v = channel(traj.states[i], c);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        amp[c] = hi - lo;
        if (amp[c] > amp[widest]) widest = c;
    }
    out.amplitude = amp[widest];

    if (out.amplitude < settings.amplitude_tol) {
        out.kind = OrbitKind::Equilibrium;
        // Nearest feasible equilibrium to the window mean.
        double mx = 0, my = 0, mz2 = 0;
        const double n = static_cast<double>(traj.states.size() - cut);
        for (std::size_t i = cut; i < traj.states.size(); ++i) {
            mx += traj.states[i].x;
            my += traj.states[i].y;
            mz2 += traj.states[i].z2;
        }
        mx /= n; my /= n; mz2 /= n;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& eq : model::compute_equilibria(traj.params)) {
            if (!eq.feasible) continue;
            const double d2 = (eq.x - mx) * (eq.x - mx) + (eq.y - my) * (eq.y - my) +
                              (eq.z2 - mz2) * (eq.z2 - mz2);
            if (d2 < best) {
                best = d2;
                out.target = eq.kind;
            }
        }
        return out;
    }

    // Peak-spacing regularity on the widest channel.
    std::vector<double> peak_times;
    for (std::size_t i = cut + 1; i + 1 < traj.states.size(); ++i) {
        const double ym = channel(traj.states[i - 1], widest);
        const double y0 = channel(traj.states[i], widest);
        const double yp = channel(traj.states[i + 1], widest);
        if (y0 > ym && y0 >= yp)
            peak_times.push_back(refine_time(traj.times[i], traj.step, ym, y0, yp));
    }
    if (peak_times.size() >= 4) {
        std::vector<double> gaps;
        for (std::size_t i = 1; i < peak_times.size(); ++i)
            gaps.push_back(peak_times[i] - peak_times[i - 1]);
        double mean = 0.0;
        for (double g : gaps) mean += g;
        mean /= static_cast<double>(gaps.size());
        double var = 0.0;
        for (double g : gaps) var += (g - mean) * (g - mean);
        var /= static_cast<double>(gaps.size());
        const double cv = std::sqrt(var) / mean;
        out.peak_cv = cv;
        if (cv < settings.peak_cv_tol) {
            out.kind = OrbitKind::Periodic;
            out.period = mean;
            return out;
        }
    }

    if (lle.has_value() && *lle > settings.lle_threshold) {
        out.kind = OrbitKind::Chaotic;
        return out;
    }
    out.kind = OrbitKind::Undetermined;
    return out;
}

LyapunovResult largest_lyapunov(const ModelParams& p, const LyapunovSettings& settings) {
    model::validate_params(p);
    if (!(settings.step > 0.0) || !(settings.horizon > 0.0) ||
        !(settings.renorm_interval > 0.0) || !(settings.offset > 0.0))
        throw Error("dde.NonPositiveStep",
                    "step, horizon, renorm interval and offset must be positive");

    double h = settings.step;
    if (p.tau > 0.0) {
        if (h > p.tau / 4.0 * (1.0 + 1e-12))
            throw Error("dde.StepTooLarge", "step must be at most tau/4");
        const std::size_t n = static_cast<std::size_t>(std::ceil(p.tau / h - 1e-9));
        h = p.tau / static_cast<double>(n);
    }

    dde::HistorySpec shifted = settings.history;
    if (shifted.fn) {
        auto base = shifted.fn;
        const double off = settings.offset;
        shifted.fn = [base, off](double t) {
            SystemState s = base(t);
            s.x += off; s.y += off; s.z1 += off; s.z2 += off;
            return s;
        };
    } else {
        shifted.constant.x += settings.offset;
        shifted.constant.y += settings.offset;
        shifted.constant.z1 += settings.offset;
        shifted.constant.z2 += settings.offset;
    }

    dde::Stepper fiducial(p, settings.history, h);
    dde::Stepper probe(p, shifted, h);

    const double d0 = window_distance(fiducial.window(), probe.window());
    if (!(d0 > 0.0))
        throw Error("dde.NonPositiveStep", "history offset produced no separation");

    const std::size_t burst =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(settings.renorm_interval / h)));
    const std::size_t total_steps =
        static_cast<std::size_t>(std::ceil(settings.horizon / h - 1e-9));
    const std::size_t n_bursts = total_steps / burst;
    const double warm_time = settings.warmup_fraction * settings.horizon;

    LyapunovResult res;
    double accum = 0.0;
    for (std::size_t k = 0; k < n_bursts; ++k) {
        for (std::size_t s = 0; s < burst; ++s) {
            fiducial.advance();
            probe.advance();
        }
        double d = window_distance(fiducial.window(), probe.window());
        if (!(d > 0.0)) d = std::numeric_limits<double>::min();
        if (fiducial.time() > warm_time) {
            accum += std::log(d / d0);
            ++res.renorms_used;
        }
        // Pull the probe window back to the original offset along the current
        // separation direction (states and derivatives scale together).
        const double scale = d0 / d;
        auto wf = fiducial.window();
        auto wp = probe.window();
        for (std::size_t i = 0; i < wp.states.size(); ++i) {
            auto blend = [scale](SystemState& out, const SystemState& f, const SystemState& g) {
                out.x = f.x + (g.x - f.x) * scale;
                out.y = f.y + (g.y - f.y) * scale;
                out.z1 = f.z1 + (g.z1 - f.z1) * scale;
                out.z2 = f.z2 + (g.z2 - f.z2) * scale;
            };
            blend(wp.states[i], wf.states[i], wp.states[i]);
            blend(wp.derivatives[i], wf.derivatives[i], wp.derivatives[i]);
        }
        probe.set_window(wp);
    }
    if (res.renorms_used == 0)
        throw Error("orbit.TrajectoryTooShort", "no renormalization bursts past warmup");
    res.lle = accum /
              (static_cast<double>(res.renorms_used) * static_cast<double>(burst) * h);
    return res;
}

std::vector<SweepRow> bifurcation_sweep(const ModelParams& p, double tau_min,
                                        double tau_max, double tau_step,
                                        const SweepSettings& settings) {
    model::validate_params(p);
    if (!(tau_step > 0.0))
        throw Error("dde.NonPositiveStep", "tau_step must be positive");
    std::vector<double> taus;
    for (double t = tau_min; t <= tau_max + 1e-9 * std::max(1.0, tau_max); t += tau_step)
        taus.push_back(t);
    std::vector<SweepRow> rows(taus.size());
    if (taus.empty()) return rows;

    unsigned jobs = settings.jobs ? settings.jobs : std::thread::hardware_concurrency();
    if (jobs == 0) jobs = 1;
    jobs = std::min<unsigned>(jobs, static_cast<unsigned>(taus.size()));

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= taus.size() || failed.load()) return;
            try {
                ModelParams pt = p;
                pt.tau = taus[i];
                SweepRow& row = rows[i];
                row.tau = taus[i];

                dde::HistorySpec hist;
                const auto eq = model::interior_equilibrium(pt);
                row.feasible = eq.has_value();
                if (eq) {
                    const double kick = 1.0 + settings.history_kick;
                    hist.constant = {eq->x * kick, eq->y * kick, eq->z1 * kick,
                                     eq->z2 * kick};
                } else {
                    hist.constant = {1.0, 1.0, 1.0, 1.0};
                }

                // Small delays demand a finer grid than the sweep-wide request.
                double row_step = settings.step;
                if (pt.tau > 0.0 && row_step > pt.tau / 4.0) row_step = pt.tau / 4.0;

                const auto sim = dde::simulate(pt, hist, settings.t_end, row_step);

                std::optional<double> lle;
                if (settings.with_lle) {
                    LyapunovSettings ls = settings.lyapunov;
                    ls.history = hist;
                    ls.step = row_step;
                    lle = largest_lyapunov(pt, ls).lle;
                }
                row.cls = classify_orbit(sim.trajectory, settings.classify, lle);

                // Bifurcation-diagram ordinates: refined local extrema of the
                // crop series past the transient.
                const auto& traj = sim.trajectory;
                const double t_cut = traj.times.front() +
                                     settings.classify.transient_fraction *
                                         (traj.times.back() - traj.times.front());
                for (std::size_t k = 1; k + 1 < traj.states.size(); ++k) {
                    if (traj.times[k] < t_cut) continue;
                    const double ym = traj.states[k - 1].x;
                    const double y0 = traj.states[k].x;
                    const double yp = traj.states[k + 1].x;
                    const bool is_max = y0 > ym && y0 >= yp;
                    const bool is_min = y0 < ym && y0 <= yp;
                    if (is_max || is_min)
                        row.extrema.push_back(refine_extremum(ym, y0, yp));
                }
            } catch (...) {
                if (!failed.exchange(true)) failure = std::current_exception();
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failed.load()) std::rethrow_exception(failure);
    return rows;
}

} // namespace stagechain::orbit
