#include "stagechain/csv.hpp"

#include <cstdio>
#include <cstdlib>

namespace stagechain::csv {

std::string format_double(double v) {
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    return buf;
}

namespace {

std::string opt(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string{};
}

} // namespace

void write_trajectory(std::ostream& os, const dde::Trajectory& traj) {
    os << "t,x,y,z1,z2\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const auto& s = traj.states[i];
        os << format_double(traj.times[i]) << ',' << format_double(s.x) << ','
           << format_double(s.y) << ',' << format_double(s.z1) << ','
           << format_double(s.z2) << '\n';
    }
}

void write_equilibria(std::ostream& os, const std::vector<model::Equilibrium>& eqs) {
    os << "kind,x,y,z1,z2,feasible\n";
    for (const auto& e : eqs) {
        os << model::eq_kind_name(e.kind) << ',' << format_double(e.x) << ','
           << format_double(e.y) << ',' << format_double(e.z1) << ','
           << format_double(e.z2) << ',' << (e.feasible ? 1 : 0) << '\n';
    }
}

void write_switch_zeros(std::ostream& os, const switches::SwitchReport& report) {
    os << "branch,n,tau,omega,delta\n";
    for (const auto& z : report.zeros) {
        os << z.branch << ',' << z.n << ',' << format_double(z.tau_zero) << ','
           << format_double(z.omega) << ',' << z.delta << '\n';
    }
}

void write_switch_curves(std::ostream& os, const switches::SwitchReport& report) {
    os << "tau,branch,omega,theta";
    for (int n = 0; n <= report.n_max; ++n) os << ",S" << n;
    os << '\n';
    for (const auto& smp : report.samples) {
        os << format_double(smp.tau) << ',' << smp.branch << ','
           << format_double(smp.omega) << ',' << format_double(smp.theta);
        for (double s : smp.s) os << ',' << format_double(s);
        os << '\n';
    }
}

void write_switch_intervals(std::ostream& os, const switches::SwitchReport& report) {
    os << "lo,hi,verdict\n";
    for (const auto& iv : report.stability) {
        os << format_double(iv.lo) << ',' << format_double(iv.hi) << ','
           << (iv.stable ? "stable" : "unstable") << '\n';
    }
}

void write_hopf(std::ostream& os, const std::vector<hopf::HopfReport>& reports) {
    os << "tau,omega,re_g20,im_g20,re_g11,im_g11,re_g02,im_g02,re_g21,im_g21,"
          "re_C1,im_C1,re_lambda_prime,im_lambda_prime,mu2,beta2,T2,direction,"
          "orbit\n";
    for (const auto& r : reports) {
        auto c = [&](hopf::Complex v) {
            return format_double(v.real()) + ',' + format_double(v.imag());
        };
        os << format_double(r.tau_c) << ',' << format_double(r.omega_c) << ','
           << c(r.g20) << ',' << c(r.g11) << ',' << c(r.g02) << ',' << c(r.g21)
           << ',' << c(r.C1) << ',' << c(r.lambda_prime) << ','
           << format_double(r.mu2) << ',' << format_double(r.beta2) << ','
           << format_double(r.T2) << ','
           << (r.direction == hopf::Direction::Supercritical ? "supercritical"
                                                             : "subcritical")
           << ','
           << (r.orbit == hopf::OrbitStability::Stable ? "stable" : "unstable")
           << '\n';
    }
}

void write_sweep(std::ostream& os, const std::vector<orbit::SweepRow>& rows) {
    os << "tau,feasible,class,target,amplitude,period,peak_cv,lle,extrema\n";
    for (const auto& r : rows) {
        os << format_double(r.tau) << ',' << (r.feasible ? 1 : 0) << ','
           << orbit::orbit_kind_name(r.cls.kind) << ','
           << (r.cls.target ? model::eq_kind_name(*r.cls.target) : "") << ','
           << format_double(r.cls.amplitude) << ',' << opt(r.cls.period) << ','
           << opt(r.cls.peak_cv) << ',' << opt(r.cls.lle) << ',';
        for (std::size_t i = 0; i < r.extrema.size(); ++i) {
            if (i) os << ';';
            os << format_double(r.extrema[i]);
        }
        os << '\n';
    }
}

} // namespace stagechain::csv
