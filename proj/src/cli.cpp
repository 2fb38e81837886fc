#include "stagechain/cli.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "stagechain/config.hpp"
#include "stagechain/csv.hpp"
#include "stagechain/dde.hpp"
#include "stagechain/error.hpp"
#include "stagechain/hopf.hpp"
#include "stagechain/linstab.hpp"
#include "stagechain/model.hpp"
#include "stagechain/orbit.hpp"
#include "stagechain/svg.hpp"
#include "stagechain/switches.hpp"

namespace fs = std::filesystem;

namespace stagechain::cli {

namespace {

using config::RunConfig;
using csv::format_double;

int exit_code_for(const Error& e) {
    const std::string& c = e.code();
    if (c.rfind("cli.", 0) == 0 || c.rfind("model.", 0) == 0) return 2;
    return 3;
}

std::ofstream open_output(const std::string& dir, const std::string& name) {
    fs::create_directories(dir);
    const fs::path p = fs::path(dir) / name;
    std::ofstream f(p);
    if (!f) throw Error("cli.CannotWrite", "cannot open " + p.string());
    return f;
}

std::string cpx(const std::complex<double>& v) {
    std::string s = format_double(v.real());
    s += v.imag() < 0 ? " - " : " + ";
    s += format_double(std::fabs(v.imag()));
    s += "i";
    return s;
}

// Thin a long series for plotting.
template <typename Get>
svg::Series thin_series(const std::string& label, const std::vector<double>& t,
                        std::size_t n, Get get) {
    svg::Series s;
    s.label = label;
    const std::size_t stride = std::max<std::size_t>(1, n / 2000);
    for (std::size_t i = 0; i < n; i += stride) {
        s.x.push_back(t[i]);
        s.y.push_back(get(i));
    }
    if (n && (n - 1) % stride != 0) {
        s.x.push_back(t[n - 1]);
        s.y.push_back(get(n - 1));
    }
    return s;
}

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    bool want_svg = false;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_svg = true) {
    cmd->add_option("--config", o.config_path, "configuration file (key = value)")
        ->required();
    cmd->add_option("--out", o.out_dir, "directory for CSV/SVG outputs");
    if (with_svg) cmd->add_flag("--svg", o.want_svg, "also write SVG plots");
}

void print_thresholds(std::ostream& out, const model::Thresholds& th) {
    out << "persistence threshold satisfied: " << (th.h1_holds ? "yes" : "no")
        << "\n";
    if (th.tau_bar_defined) {
        out << "delay ceiling tau_bar = " << format_double(th.tau_bar) << "\n"
            << "coexistence cutoff tau_cr = " << format_double(th.tau_cr)
            << "\n";
    } else {
        out << "delay ceiling undefined: " << th.absent_reason << "\n";
    }
    out << "delay below ceiling: " << (th.h2_holds ? "yes" : "no") << "\n";
}

int cmd_equilibria(const CommonOpts& o, std::ostream& out) {
    const RunConfig cfg = config::load_config(o.config_path);
    model::validate_params(cfg.params);
    const auto eqs = model::compute_equilibria(cfg.params);
    out << "kind      x            y            z1           z2           feasible\n";
    for (const auto& e : eqs) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%-8s  %-11.6g  %-11.6g  %-11.6g  %-11.6g  %s\n",
                      model::eq_kind_name(e.kind), e.x, e.y, e.z1, e.z2,
                      e.feasible ? "yes" : "no");
        out << buf;
    }
    print_thresholds(out, model::existence_thresholds(cfg.params));
    if (!o.out_dir.empty()) {
        auto f = open_output(o.out_dir, "equilibria.csv");
        csv::write_equilibria(f, eqs);
        out << "wrote " << (fs::path(o.out_dir) / "equilibria.csv").string()
            << "\n";
    }
    return 0;
}

struct SimulateOpts : CommonOpts {
    double t_end = -1.0;
    double step = -1.0;
};

int cmd_simulate(const SimulateOpts& o, std::ostream& out) {
    const RunConfig cfg = config::load_config(o.config_path);
    const double t_end = o.t_end > 0 ? o.t_end : cfg.t_end.value_or(300.0);
    const double step = o.step > 0 ? o.step : cfg.step.value_or(0.01);

    dde::HistorySpec hist;
    hist.constant = {cfg.x0.value_or(1.0), cfg.y0.value_or(1.0),
                     cfg.z1_0.value_or(1.0), cfg.z2_0.value_or(1.0)};
    const auto sim = dde::simulate(cfg.params, hist, t_end, step);
    const auto& traj = sim.trajectory;

    out << "integrated to t = " << format_double(traj.times.back()) << " with "
        << traj.times.size() << " nodes, grid step "
        << format_double(traj.step);
    if (sim.step_adjusted) out << " (adjusted to divide the delay)";
    out << "\n";
    if (std::fabs(sim.z1_applied - sim.z1_requested) >
        1e-12 * std::max(1.0, std::fabs(sim.z1_requested)))
        out << "juvenile stage seeded from its history integral: "
            << format_double(sim.z1_applied) << " (history value "
            << format_double(sim.z1_requested) << ")\n";
    const auto& fin = traj.states.back();
    out << "final state: x = " << format_double(fin.x)
        << ", y = " << format_double(fin.y)
        << ", z1 = " << format_double(fin.z1)
        << ", z2 = " << format_double(fin.z2) << "\n";

    const auto pos = dde::check_positivity(traj);
    if (pos.ok)
        out << "positivity: ok\n";
    else
        out << "positivity: violated at t = "
            << format_double(pos.violation_times.front()) << "\n";
    const auto bnd = dde::check_boundedness(traj);
    if (bnd.ok)
        out << "boundedness: ok (weighted biomass ceiling "
            << format_double(bnd.ceiling) << ")\n";
    else
        out << "boundedness: envelope exceeded at t = "
            << format_double(bnd.violation_times.front()) << "\n";

    if (!o.out_dir.empty()) {
        auto f = open_output(o.out_dir, "trajectory.csv");
        csv::write_trajectory(f, traj);
        out << "wrote " << (fs::path(o.out_dir) / "trajectory.csv").string()
            << "\n";
        if (o.want_svg) {
            svg::Chart chart;
            chart.title = "Trajectory";
            chart.x_label = "t";
            chart.y_label = "population";
            const std::size_t n = traj.times.size();
            chart.series.push_back(thin_series(
                "x", traj.times, n, [&](std::size_t i) { return traj.states[i].x; }));
            chart.series.push_back(thin_series(
                "y", traj.times, n, [&](std::size_t i) { return traj.states[i].y; }));
            chart.series.push_back(thin_series(
                "z1", traj.times, n, [&](std::size_t i) { return traj.states[i].z1; }));
            chart.series.push_back(thin_series(
                "z2", traj.times, n, [&](std::size_t i) { return traj.states[i].z2; }));
            auto f2 = open_output(o.out_dir, "trajectory.svg");
            svg::write_chart(f2, chart);
            out << "wrote " << (fs::path(o.out_dir) / "trajectory.svg").string()
                << "\n";
        }
    }
    return 0;
}

int cmd_stability(const CommonOpts& o, std::ostream& out) {
    const RunConfig cfg = config::load_config(o.config_path);
    model::validate_params(cfg.params);
    print_thresholds(out, model::existence_thresholds(cfg.params));

    for (const auto kind :
         {model::EqKind::E0, model::EqKind::E1, model::EqKind::E2}) {
        try {
            const auto sp =
                linstab::boundary_spectrum(cfg.params, kind, cfg.params.tau);
            out << model::eq_kind_name(kind) << ": ";
            for (std::size_t i = 0; i < sp.eigenvalues.size(); ++i) {
                if (i) out << ", ";
                out << cpx(sp.eigenvalues[i]);
            }
            if (sp.has_indicator)
                out << "; enemy growth indicator = " << format_double(sp.indicator);
            out << " -> " << linstab::verdict_name(sp.verdict) << "\n";
        } catch (const Error& e) {
            out << model::eq_kind_name(kind) << ": " << e.what() << "\n";
        }
    }

    try {
        const auto rh = linstab::routh_hurwitz_tau0(cfg.params);
        out << "zero-delay coexistence test: c1 = " << format_double(rh.c1)
            << ", c2 = " << format_double(rh.c2)
            << ", c3 = " << format_double(rh.c3)
            << ", c1*c2 - c3 = " << format_double(rh.discriminant) << " -> "
            << linstab::verdict_name(rh.verdict) << "\n";
        const auto cc = linstab::char_coeffs(cfg.params, cfg.params.tau);
        out << "characteristic coefficients at tau = "
            << format_double(cfg.params.tau) << ": A = ["
            << format_double(cc.A1) << ", " << format_double(cc.A2) << ", "
            << format_double(cc.A3) << "], B = [" << format_double(cc.B1)
            << ", " << format_double(cc.B2) << ", " << format_double(cc.B3)
            << "]\n";
    } catch (const Error& e) {
        out << "coexistence state: " << e.what() << "\n";
    }
    return 0;
}

struct SwitchOpts : CommonOpts {
    double grid_step = -1.0;
    int n_max = 3;
};

int cmd_switches(const SwitchOpts& o, std::ostream& out) {
    const RunConfig cfg = config::load_config(o.config_path);
    const auto report = switches::find_switches(cfg.params, o.grid_step, o.n_max);

    out << "scan domain: [0, " << format_double(report.tau_bar) << ") with step "
        << format_double(report.grid_step) << "\n";
    out << "zero-delay coexistence verdict: "
        << (report.stable_at_zero ? "stable" : "unstable") << "\n";
    if (report.zeros.empty()) {
        out << "no stability switches on the scan domain\n";
    } else {
        out << "crossings (branch, winding, tau, omega, direction):\n";
        for (const auto& z : report.zeros) {
            out << "  branch " << z.branch << ", n = " << z.n
                << ", tau = " << format_double(z.tau_zero)
                << ", omega = " << format_double(z.omega) << ", delta = "
                << (z.delta > 0 ? "+1" : (z.delta < 0 ? "-1" : "0")) << "\n";
        }
        out << "first crossing tau* = " << format_double(report.tau_star)
            << ", last crossing tau** = " << format_double(report.tau_star_star)
            << "\n";
    }
    out << "stability partition:\n";
    for (const auto& iv : report.stability)
        out << "  [" << format_double(iv.lo) << ", " << format_double(iv.hi)
            << ") -> " << (iv.stable ? "stable" : "unstable") << "\n";

    if (!o.out_dir.empty()) {
        {
            auto f = open_output(o.out_dir, "zeros.csv");
            csv::write_switch_zeros(f, report);
        }
        {
            auto f = open_output(o.out_dir, "scurve.csv");
            csv::write_switch_curves(f, report);
        }
        {
            auto f = open_output(o.out_dir, "intervals.csv");
            csv::write_switch_intervals(f, report);
        }
        out << "wrote zeros.csv, scurve.csv, intervals.csv under " << o.out_dir
            << "\n";
        if (o.want_svg) {
            svg::Chart chart;
            chart.title = "Switch-locating curves";
            chart.x_label = "tau";
            chart.y_label = "S_n(tau)";
            std::map<int, svg::Series> by_branch;
            for (const auto& smp : report.samples) {
                auto& s = by_branch[smp.branch];
                if (s.label.empty())
                    s.label = "branch " + std::to_string(smp.branch);
                if (!smp.s.empty()) {
                    s.x.push_back(smp.tau);
                    s.y.push_back(smp.s[0]);
                }
            }
            for (auto& [b, s] : by_branch) chart.series.push_back(std::move(s));
            svg::Series zeros_pts;
            zeros_pts.label = "crossings";
            zeros_pts.points = true;
            for (const auto& z : report.zeros) {
                zeros_pts.x.push_back(z.tau_zero);
                zeros_pts.y.push_back(0.0);
            }
            if (!zeros_pts.x.empty()) chart.series.push_back(std::move(zeros_pts));
            auto f = open_output(o.out_dir, "scurve.svg");
            svg::write_chart(f, chart);
            out << "wrote " << (fs::path(o.out_dir) / "scurve.svg").string()
                << "\n";
        }
    }
    return 0;
}

struct HopfOpts : CommonOpts {
    double tau = -1.0;
    double omega = -1.0;
};

int cmd_hopf(const HopfOpts& o, std::ostream& out) {
    const RunConfig cfg = config::load_config(o.config_path);
    std::vector<hopf::HopfReport> reports;
    if (o.tau >= 0.0) {
        if (o.omega <= 0.0)
            throw Error("cli.MissingKey", "--tau also needs --omega");
        reports.push_back(hopf::analyze_crossing(cfg.params, o.tau, o.omega));
    } else {
        const auto sw = switches::find_switches(cfg.params);
        if (sw.zeros.empty()) {
            out << "no crossings detected; nothing to analyze\n";
            return 0;
        }
        for (const auto& z : sw.zeros)
            reports.push_back(
                hopf::analyze_crossing(cfg.params, z.tau_zero, z.omega));
    }
    for (const auto& r : reports) {
        out << "crossing at tau = " << format_double(r.tau_c)
            << ", omega = " << format_double(r.omega_c) << "\n"
            << "  C1 = " << cpx(r.C1) << "\n"
            << "  lambda' = " << cpx(r.lambda_prime) << "\n"
            << "  mu2 = " << format_double(r.mu2)
            << ", beta2 = " << format_double(r.beta2)
            << ", T2 = " << format_double(r.T2) << "\n"
            << "  branching: "
            << (r.direction == hopf::Direction::Supercritical ? "supercritical"
                                                              : "subcritical")
            << ", emerging orbit "
            << (r.orbit == hopf::OrbitStability::Stable ? "stable" : "unstable")
            << "\n";
    }
    if (!o.out_dir.empty()) {
        auto f = open_output(o.out_dir, "hopf.csv");
        csv::write_hopf(f, reports);
        out << "wrote " << (fs::path(o.out_dir) / "hopf.csv").string() << "\n";
    }
    return 0;
}

struct SweepOpts : CommonOpts {
    double tau_min = -1.0, tau_max = -1.0, tau_step = -1.0;
    double t_end = -1.0;
    double step = -1.0;
    bool with_lle = false;
    unsigned jobs = 0;
};

int cmd_sweep(const SweepOpts& o, std::ostream& out) {
    const RunConfig cfg = config::load_config(o.config_path);
    const double tau_min = o.tau_min >= 0 ? o.tau_min : cfg.tau_min.value_or(-1.0);
    const double tau_max = o.tau_max >= 0 ? o.tau_max : cfg.tau_max.value_or(-1.0);
    const double tau_step =
        o.tau_step > 0 ? o.tau_step : cfg.tau_step.value_or(-1.0);
    if (tau_min < 0 || tau_max < 0 || tau_step <= 0)
        throw Error("cli.MissingKey",
                    "sweep needs tau_min, tau_max, tau_step (flags or config)");

    // The config's t_end/step are trajectory-inspection settings; a sweep
    // needs a horizon long enough for classification, so it takes its own
    // defaults unless overridden on the command line.
    orbit::SweepSettings ss;
    if (o.t_end > 0) ss.t_end = o.t_end;
    if (o.step > 0) ss.step = o.step;
    ss.with_lle = o.with_lle;
    ss.jobs = o.jobs;
    if (cfg.transient_fraction)
        ss.classify.transient_fraction = *cfg.transient_fraction;

    const auto rows = orbit::bifurcation_sweep(cfg.params, tau_min, tau_max,
                                               tau_step, ss);
    std::map<std::string, int> counts;
    for (const auto& r : rows) ++counts[orbit::orbit_kind_name(r.cls.kind)];
    out << rows.size() << " delay values classified:";
    for (const auto& [k, n] : counts) out << ' ' << k << " x" << n;
    out << "\n";
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].cls.kind != rows[i - 1].cls.kind)
            out << "  transition " << orbit::orbit_kind_name(rows[i - 1].cls.kind)
                << " -> " << orbit::orbit_kind_name(rows[i].cls.kind)
                << " between tau = " << format_double(rows[i - 1].tau) << " and "
                << format_double(rows[i].tau) << "\n";
    }

    if (!o.out_dir.empty()) {
        auto f = open_output(o.out_dir, "sweep.csv");
        csv::write_sweep(f, rows);
        out << "wrote " << (fs::path(o.out_dir) / "sweep.csv").string() << "\n";
        if (o.want_svg) {
            svg::Chart chart;
            chart.title = "Bifurcation diagram";
            chart.x_label = "tau";
            chart.y_label = "crop extrema";
            svg::Series pts;
            pts.points = true;
            for (const auto& r : rows)
                for (double v : r.extrema) {
                    pts.x.push_back(r.tau);
                    pts.y.push_back(v);
                }
            chart.series.push_back(std::move(pts));
            auto f2 = open_output(o.out_dir, "bifurcation.svg");
            svg::write_chart(f2, chart);
            out << "wrote " << (fs::path(o.out_dir) / "bifurcation.svg").string()
                << "\n";
        }
    }
    return 0;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Analysis toolkit for a stage-structured crop-pest-enemy food "
                 "chain with a maturation delay"};
    app.set_version_flag("--version", "stagechain 1.0.0");
    app.require_subcommand(1);

    CommonOpts eq_opts;
    auto* eq_cmd = app.add_subcommand("equilibria",
                                      "List equilibria and delay thresholds");
    add_common(eq_cmd, eq_opts, false);

    SimulateOpts sim_opts;
    auto* sim_cmd =
        app.add_subcommand("simulate", "Integrate the delayed system");
    add_common(sim_cmd, sim_opts);
    sim_cmd->add_option("--t-end", sim_opts.t_end, "integration horizon");
    sim_cmd->add_option("--step", sim_opts.step, "requested grid step");

    CommonOpts stab_opts;
    auto* stab_cmd = app.add_subcommand(
        "stability", "Boundary spectra and zero-delay coexistence test");
    add_common(stab_cmd, stab_opts, false);

    SwitchOpts sw_opts;
    auto* sw_cmd = app.add_subcommand(
        "switches", "Locate delay-induced stability switches");
    add_common(sw_cmd, sw_opts);
    sw_cmd->add_option("--grid-step", sw_opts.grid_step, "scan grid step");
    sw_cmd->add_option("--n-max", sw_opts.n_max, "largest winding index")
        ->check(CLI::NonNegativeNumber);

    HopfOpts hopf_opts;
    auto* hopf_cmd = app.add_subcommand(
        "hopf", "Branching direction and orbit stability at crossings");
    add_common(hopf_cmd, hopf_opts, false);
    hopf_cmd->add_option("--tau", hopf_opts.tau, "crossing delay (else detected)");
    hopf_cmd->add_option("--omega", hopf_opts.omega, "crossing frequency");

    SweepOpts sweep_opts;
    auto* sweep_cmd =
        app.add_subcommand("sweep", "Classify long-run dynamics over a delay range");
    add_common(sweep_cmd, sweep_opts);
    sweep_cmd->add_option("--tau-min", sweep_opts.tau_min, "first delay");
    sweep_cmd->add_option("--tau-max", sweep_opts.tau_max, "last delay");
    sweep_cmd->add_option("--tau-step", sweep_opts.tau_step, "delay increment");
    sweep_cmd->add_option("--t-end", sweep_opts.t_end, "integration horizon");
    sweep_cmd->add_option("--step", sweep_opts.step, "grid step");
    sweep_cmd->add_flag("--with-lle", sweep_opts.with_lle,
                        "estimate the largest Lyapunov exponent per delay");
    sweep_cmd->add_option("--jobs", sweep_opts.jobs, "worker threads (0 = auto)");

    try {
        app.parse(argc, argv);
        if (eq_cmd->parsed()) return cmd_equilibria(eq_opts, out);
        if (sim_cmd->parsed()) return cmd_simulate(sim_opts, out);
        if (stab_cmd->parsed()) return cmd_stability(stab_opts, out);
        if (sw_cmd->parsed()) return cmd_switches(sw_opts, out);
        if (hopf_cmd->parsed()) return cmd_hopf(hopf_opts, out);
        if (sweep_cmd->parsed()) return cmd_sweep(sweep_opts, out);
        err << "no subcommand selected\n";
        return 2;
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    }
}

} // namespace stagechain::cli
