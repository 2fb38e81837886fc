#include "stagechain/switches.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "stagechain/error.hpp"

namespace stagechain::switches {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double eval_cubic(double p, double q, double r, double z) {
    return ((z + p) * z + q) * z + r;
}

double eval_cubic_deriv(double p, double q, double z) {
    return (3.0 * z + 2.0 * p) * z + q;
}

void newton_polish(double p, double q, double r, double& z) {
    for (int it = 0; it < 50; ++it) {
        const double f = eval_cubic(p, q, r, z);
        if (std::fabs(f) <= 1e-12 * std::max(1.0, std::fabs(z * z * z))) break;
        const double df = eval_cubic_deriv(p, q, z);
        if (std::fabs(df) < 1e-300) break;
        const double step = f / df;
        z -= step;
        if (std::fabs(step) < 1e-16 * std::max(1.0, std::fabs(z))) break;
    }
}

} // namespace

std::vector<double> cubic_real_roots(double p, double q, double r) {
    std::vector<double> roots;
    // Depress: z = t - p/3 turns the cubic into t^3 + P t + Q.
    const double P = q - p * p / 3.0;
    const double Q = 2.0 * p * p * p / 27.0 - p * q / 3.0 + r;
    const double shift = -p / 3.0;
    const double disc = Q * Q / 4.0 + P * P * P / 27.0;

    if (disc > 0.0) {
        const double s = std::sqrt(disc);
        const double u = std::cbrt(-Q / 2.0 + s);
        const double v = std::cbrt(-Q / 2.0 - s);
        roots.push_back(u + v + shift);
    } else if (P == 0.0 && Q == 0.0) {
        roots.push_back(shift);  // triple root
    } else {
        // Three real roots (trigonometric form).
        const double m = 2.0 * std::sqrt(-P / 3.0);
        double arg = 3.0 * Q / (P * m);
        arg = std::clamp(arg, -1.0, 1.0);
        const double phi = std::acos(arg);
        for (int k = 0; k < 3; ++k)
            roots.push_back(m * std::cos((phi + kTwoPi * k) / 3.0) + shift);
    }

    for (double& z : roots) {
        newton_polish(p, q, r, z);
        if (std::fabs(z) < 1e-12) z = 0.0;
    }
    std::sort(roots.begin(), roots.end());
    // Collapse numerically coincident roots.
    std::vector<double> unique;
    for (double z : roots) {
        if (unique.empty() || std::fabs(z - unique.back()) > 1e-9 * std::max(1.0, std::fabs(z)))
            unique.push_back(z);
    }
    return unique;
}

FCubic f_cubic(const ModelParams& params, double tau) {
    const CharCoefficients c = linstab::char_coeffs(params, tau);
    FCubic fc;
    fc.tau = tau;
    fc.p = c.A1 * c.A1 - 2.0 * c.A2 - c.B1 * c.B1;
    fc.q = c.A2 * c.A2 - 2.0 * c.A1 * c.A3 - c.B2 * c.B2 + 2.0 * c.B1 * c.B3;
    fc.r = c.A3 * c.A3 - c.B3 * c.B3;
    for (double z : cubic_real_roots(fc.p, fc.q, fc.r)) {
        if (z > 1e-12) {
            fc.positive_roots.push_back(z);
            fc.omegas.push_back(std::sqrt(z));
        }
    }
    return fc;
}

const char* interval_label_name(IntervalLabel l) {
    switch (l) {
        case IntervalLabel::I11: return "I11";
        case IntervalLabel::I12: return "I12";
        case IntervalLabel::I21: return "I21";
        case IntervalLabel::I22: return "I22";
        case IntervalLabel::I23: return "I23";
        case IntervalLabel::None: return "none";
    }
    return "?";
}

CaseInfo classify_case(const FCubic& fc) {
    CaseInfo info;
    info.root_count = static_cast<int>(fc.positive_roots.size());
    info.case_number = info.root_count + 1;
    const double p = fc.p, q = fc.q, r = fc.r;
    if (r > 0.0 && p > 0.0 && q > 0.0) info.label = IntervalLabel::I11;
    else if (r > 0.0 && (p < 0.0 || q < 0.0)) info.label = IntervalLabel::I12;
    else if (r < 0.0 && p > 0.0) info.label = IntervalLabel::I21;
    else if (r < 0.0 && p < 0.0 && q < 0.0) info.label = IntervalLabel::I22;
    else if (r < 0.0 && p < 0.0 && q > 0.0) info.label = IntervalLabel::I23;
    else info.label = IntervalLabel::None;
    return info;
}

double theta_of_tau(const ModelParams& params, double tau, double omega) {
    const CharCoefficients c = linstab::char_coeffs(params, tau);
    const double w = omega, w2 = w * w;
    const double qmag2 = (c.B3 - c.B1 * w2) * (c.B3 - c.B1 * w2) + c.B2 * c.B2 * w2;
    if (qmag2 <= 0.0)
        throw Error("switch.InconsistentSinCos", "delayed polynomial vanishes at i*omega");
    const double sin_num = c.B1 * w2 * w2 * w +
                           (c.A1 * c.B2 - c.A2 * c.B1 - c.B3) * w2 * w +
                           (c.A2 * c.B3 - c.A3 * c.B2) * w;
    const double cos_num = (c.B2 - c.A1 * c.B1) * w2 * w2 +
                           (c.A1 * c.B3 + c.A3 * c.B1 - c.A2 * c.B2) * w2 -
                           c.A3 * c.B3;
    const double s = sin_num / qmag2;
    const double co = cos_num / qmag2;
    const double norm = s * s + co * co;
    if (std::fabs(norm - 1.0) > 1e-8)
        throw Error("switch.InconsistentSinCos",
                    "sin^2+cos^2 = " + std::to_string(norm) +
                        " at omega = " + std::to_string(omega) +
                        "; not a frequency-cubic root");
    double theta = std::atan2(s, co);
    if (theta < 0.0) theta += kTwoPi;
    return theta;
}

double s_n(const ModelParams& params, double tau, int n, double omega) {
    const double theta = theta_of_tau(params, tau, omega);
    return tau - (theta + kTwoPi * static_cast<double>(n)) / omega;
}

namespace {

struct GridPoint {
    double tau;
    FCubic fc;
    std::vector<double> theta;  // per branch
};

// S_n at a given tau on a given branch; empty when the branch is missing.
bool branch_s(const ModelParams& params, double tau, int branch, int n, double& s_out,
              double& omega_out) {
    const FCubic fc = f_cubic(params, tau);
    if (static_cast<std::size_t>(branch) >= fc.omegas.size()) return false;
    omega_out = fc.omegas[branch];
    const double theta = theta_of_tau(params, tau, omega_out);
    s_out = tau - (theta + kTwoPi * static_cast<double>(n)) / omega_out;
    return true;
}

} // namespace

SwitchReport find_switches(const ModelParams& params, double grid_step, int n_max) {
    model::validate_params(params);
    if (n_max < 0) throw Error("switch.GridTooCoarse", "n_max must be >= 0");

    const auto th = model::existence_thresholds(params);
    if (!th.tau_bar_defined)
        throw Error("linstab.NoInteriorEquilibrium", th.absent_reason);

    SwitchReport rep;
    rep.tau_bar = th.tau_bar;
    rep.n_max = n_max;
    rep.grid_step = (grid_step > 0.0) ? grid_step : th.tau_bar / 2000.0;
    if (!(rep.grid_step > 0.0) || rep.grid_step >= th.tau_bar)
        throw Error("switch.GridTooCoarse", "grid step must lie in (0, tau_bar)");

    rep.stable_at_zero =
        linstab::routh_hurwitz_tau0(params).verdict == linstab::Verdict::Stable;

    // Grid sweep.  Stop strictly inside the feasibility window: coefficients
    // blow through zero enemy density at tau_bar itself.
    std::vector<GridPoint> grid;
    for (double tau = 0.0; tau < th.tau_bar - 0.5 * rep.grid_step; tau += rep.grid_step) {
        GridPoint gp;
        gp.tau = tau;
        gp.fc = f_cubic(params, tau);
        for (double w : gp.fc.omegas) gp.theta.push_back(theta_of_tau(params, tau, w));
        grid.push_back(std::move(gp));
    }
    if (grid.size() < 3)
        throw Error("switch.GridTooCoarse", "fewer than 3 grid points in [0, tau_bar)");

    // Samples and sign-pattern runs (runs tile the grid: each starts where the
    // previous one ends).
    for (const auto& gp : grid) {
        const IntervalLabel label = classify_case(gp.fc).label;
        if (rep.interval_runs.empty()) {
            rep.interval_runs.push_back({label, gp.tau, gp.tau});
        } else if (rep.interval_runs.back().label != label) {
            rep.interval_runs.push_back({label, rep.interval_runs.back().hi, gp.tau});
        } else {
            rep.interval_runs.back().hi = gp.tau;
        }
        for (std::size_t b = 0; b < gp.fc.omegas.size(); ++b) {
            SwitchSample smp;
            smp.tau = gp.tau;
            smp.branch = static_cast<int>(b);
            smp.omega = gp.fc.omegas[b];
            smp.theta = gp.theta[b];
            for (int n = 0; n <= n_max; ++n)
                smp.s.push_back(gp.tau - (smp.theta + kTwoPi * n) / smp.omega);
            rep.samples.push_back(std::move(smp));
        }
    }

    // Locate zeros of every S_n on every branch.
    const int max_branches = 3;
    for (int b = 0; b < max_branches; ++b) {
        for (int n = 0; n <= n_max; ++n) {
            for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
                const GridPoint& ga = grid[i];
                const GridPoint& gb = grid[i + 1];
                if (static_cast<std::size_t>(b) >= ga.fc.omegas.size() ||
                    static_cast<std::size_t>(b) >= gb.fc.omegas.size())
                    continue;
                const double sa =
                    ga.tau - (ga.theta[b] + kTwoPi * n) / ga.fc.omegas[b];
                const double sb =
                    gb.tau - (gb.theta[b] + kTwoPi * n) / gb.fc.omegas[b];
                if ((sa < 0.0) == (sb < 0.0)) continue;

                // Bisect to |S_n| < 1e-10.
                double lo = ga.tau, hi = gb.tau, s_lo = sa;
                double tau_c = 0.5 * (lo + hi), s_mid = 0.0, omega_c = 0.0;
                for (int it = 0; it < 200; ++it) {
                    tau_c = 0.5 * (lo + hi);
                    if (!branch_s(params, tau_c, b, n, s_mid, omega_c))
                        throw Error("switch.GridTooCoarse",
                                    "frequency branch vanished inside a bracket near tau = " +
                                        std::to_string(tau_c));
                    if (std::fabs(s_mid) < 1e-10 || hi - lo < 1e-14) break;
                    if ((s_mid < 0.0) == (s_lo < 0.0)) {
                        lo = tau_c;
                        s_lo = s_mid;
                    } else {
                        hi = tau_c;
                    }
                }

                // Crossing direction: sign of dF/domega * dS_n/dtau.
                const FCubic fcc = f_cubic(params, tau_c);
                const double w = omega_c;
                const double dFdw = ((6.0 * w * w + 4.0 * fcc.p) * w * w + 2.0 * fcc.q) * w;
                const double dt = 1e-6 * std::max(1.0, tau_c);
                double s_m = 0.0, s_p = 0.0, w_m = 0.0, w_p = 0.0;
                if (!branch_s(params, tau_c - dt, b, n, s_m, w_m) ||
                    !branch_s(params, tau_c + dt, b, n, s_p, w_p))
                    throw Error("switch.GridTooCoarse",
                                "frequency branch vanished beside a crossing near tau = " +
                                    std::to_string(tau_c));
                const double dSdtau = (s_p - s_m) / (2.0 * dt);

                // A crossing bracketed as rising must refine to a rising S_n
                // (and vice versa); disagreement means the cell hid more than
                // one crossing.
                const bool rising = sa < 0.0;
                if (std::fabs(dSdtau) > 1e-9 && (dSdtau > 0.0) != rising)
                    throw Error("switch.GridTooCoarse",
                                "bracket direction contradicts refined slope near tau = " +
                                    std::to_string(tau_c) + "; use a finer grid");

                const double signed_quantity = dFdw * dSdtau;
                SnZero z;
                z.n = n;
                z.branch = b;
                z.tau_zero = tau_c;
                z.omega = omega_c;
                z.delta = (std::fabs(signed_quantity) < 1e-9)
                              ? 0
                              : (signed_quantity > 0.0 ? 1 : -1);
                rep.zeros.push_back(z);
            }
        }
    }

    std::sort(rep.zeros.begin(), rep.zeros.end(),
              [](const SnZero& a, const SnZero& b) { return a.tau_zero < b.tau_zero; });

    // Partition [0, tau_bar) by the running count of right-half-plane pairs.
    double lo = 0.0;
    int rhp_pairs = rep.stable_at_zero ? 0 : 1;
    const bool anchored = rep.stable_at_zero;
    auto push_interval = [&](double hi) {
        if (hi > lo)
            rep.stability.push_back({lo, hi, anchored && rhp_pairs == 0});
    };
    for (const SnZero& z : rep.zeros) {
        if (z.delta == 0) continue;  // degenerate: excluded from the partition
        push_interval(z.tau_zero);
        lo = z.tau_zero;
        rhp_pairs = std::max(0, rhp_pairs + z.delta);
    }
    push_interval(th.tau_bar);

    std::vector<double> crossing_taus;
    for (const SnZero& z : rep.zeros)
        if (z.delta != 0) crossing_taus.push_back(z.tau_zero);
    rep.has_crossings = !crossing_taus.empty();
    if (rep.has_crossings) {
        rep.tau_star = crossing_taus.front();
        rep.tau_star_star = crossing_taus.back();
    }
    return rep;
}

} // namespace stagechain::switches
