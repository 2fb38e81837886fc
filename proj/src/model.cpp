#include "stagechain/model.hpp"

#include <cmath>
#include <limits>

#include "stagechain/error.hpp"

namespace stagechain::model {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

} // namespace

void validate_params(const ModelParams& p) {
    struct Field { const char* name; double value; };
    const Field rates[] = {
        {"a1", p.a1}, {"b1", p.b1}, {"c1", p.c1}, {"c2", p.c2},
        {"d1", p.d1}, {"d2", p.d2}, {"d3", p.d3},
        {"alpha1", p.alpha1}, {"alpha2", p.alpha2},
    };

    std::string non_finite, non_positive;
    for (const auto& f : rates) {
        if (!std::isfinite(f.value)) {
            non_finite += std::string(non_finite.empty() ? "" : ", ") + f.name;
        } else if (f.value <= 0.0) {
            non_positive += std::string(non_positive.empty() ? "" : ", ") + f.name;
        }
    }
    bool tau_non_finite = !std::isfinite(p.tau);
    bool tau_negative = !tau_non_finite && p.tau < 0.0;
    if (tau_non_finite) non_finite += std::string(non_finite.empty() ? "" : ", ") + "tau";

    std::string message;
    if (!non_finite.empty()) message += "non-finite: " + non_finite;
    if (!non_positive.empty()) {
        if (!message.empty()) message += "; ";
        message += "must be > 0: " + non_positive;
    }
    if (tau_negative) {
        if (!message.empty()) message += "; ";
        message += "tau must be >= 0";
    }
    if (message.empty()) return;

    const char* code = !non_finite.empty()     ? "model.NonFiniteParam"
                       : !non_positive.empty() ? "model.NonPositiveRate"
                                               : "model.NegativeDelay";
    throw Error(code, message);
}

State3 rhs_reduced(const ModelParams& p, const State3& s, const State3& delayed) {
    const double recruit = p.alpha2 * std::exp(-p.d2 * p.tau) * delayed.y * delayed.z2;
    return State3{
        s.x * (p.a1 - p.b1 * s.x - p.c1 * s.y),
        s.y * (p.alpha1 * s.x - p.d1 - p.c2 * s.z2),
        recruit - p.d3 * s.z2,
    };
}

SystemState rhs_full(const ModelParams& p, const SystemState& s, const SystemState& delayed) {
    const double recruit = p.alpha2 * std::exp(-p.d2 * p.tau) * delayed.y * delayed.z2;
    return SystemState{
        s.x * (p.a1 - p.b1 * s.x - p.c1 * s.y),
        s.y * (p.alpha1 * s.x - p.d1 - p.c2 * s.z2),
        p.alpha2 * s.y * s.z2 - p.d2 * s.z1 - recruit,
        recruit - p.d3 * s.z2,
    };
}

const char* eq_kind_name(EqKind k) {
    switch (k) {
        case EqKind::E0: return "E0";
        case EqKind::E1: return "E1";
        case EqKind::E2: return "E2";
        case EqKind::E3: return "E3";
    }
    return "?";
}

double z1_steady(const ModelParams& p, double y_star, double z2_star) {
    // Integral of recruitment over one maturation window at constant levels:
    // juveniles present are those recruited within the last tau that have not
    // yet died.
    if (p.tau == 0.0) return 0.0;
    return p.alpha2 * y_star * z2_star * (1.0 - std::exp(-p.d2 * p.tau)) / p.d2;
}

std::vector<Equilibrium> compute_equilibria(const ModelParams& p) {
    validate_params(p);
    std::vector<Equilibrium> out;

    out.push_back({EqKind::E0, 0.0, 0.0, 0.0, 0.0, true});
    out.push_back({EqKind::E1, p.a1 / p.b1, 0.0, 0.0, 0.0, true});

    const double y2 = (p.a1 * p.alpha1 - p.b1 * p.d1) / (p.c1 * p.alpha1);
    out.push_back({EqKind::E2, p.d1 / p.alpha1, y2, 0.0, 0.0, y2 >= 0.0});

    const double growth = std::exp(p.d2 * p.tau);
    const double x3 = (p.a1 * p.alpha2 - p.c1 * p.d3 * growth) / (p.b1 * p.alpha2);
    const double y3 = p.d3 * growth / p.alpha2;
    const double z23 = (p.a1 * p.alpha1 * p.alpha2 - p.c1 * p.d3 * p.alpha1 * growth -
                        p.b1 * p.d1 * p.alpha2) /
                       (p.b1 * p.c2 * p.alpha2);
    const bool feasible = z23 > 0.0; // implies x3 > 0
    out.push_back({EqKind::E3, x3, y3, z23, feasible ? z1_steady(p, y3, z23) : 0.0, feasible});

    return out;
}

std::optional<Equilibrium> interior_equilibrium(const ModelParams& p) {
    auto eqs = compute_equilibria(p);
    const Equilibrium& e3 = eqs.back();
    if (!e3.feasible) return std::nullopt;
    return e3;
}

Thresholds existence_thresholds(const ModelParams& p) {
    validate_params(p);
    Thresholds t;
    t.h1_holds = p.a1 * p.alpha1 > p.b1 * p.d1;
    t.tau_bar = kNaN;
    t.tau_cr = kNaN;
    t.tau_bar_defined = false;
    t.h2_holds = false;

    if (!t.h1_holds) {
        t.absent_reason =
            "pest persistence fails (a1*alpha1 <= b1*d1); no coexistence at any delay";
        return t;
    }

    const double arg = (p.a1 * p.alpha1 * p.alpha2 - p.b1 * p.d1 * p.alpha2) /
                       (p.c1 * p.d3 * p.alpha1);
    if (arg <= 1.0) {
        t.absent_reason = "delay window empty (enemy recruitment too weak at zero delay)";
        return t;
    }

    t.tau_bar_defined = true;
    t.tau_bar = std::log(arg) / p.d2;
    // Same ceiling through the factored form; kept as an independent floating
    // path so the two can be cross-checked.
    t.tau_cr = std::log(p.alpha2 * (p.a1 * p.alpha1 - p.b1 * p.d1) /
                        (p.c1 * p.d3 * p.alpha1)) /
               p.d2;
    t.h2_holds = p.tau < t.tau_bar;
    return t;
}

} // namespace stagechain::model
