#pragma once

#include <optional>
#include <string>
#include <vector>

namespace stagechain::model {

// Per-capita rates of the crop / pest / natural-enemy food chain.  All nine
// rates must be strictly positive; the maturation delay tau must be >= 0.
struct ModelParams {
    double a1;      // crop intrinsic growth rate
    double b1;      // crop self-limitation
    double c1;      // crop loss rate per pest encounter
    double c2;      // pest loss rate per mature-enemy encounter
    double d1;      // pest death rate
    double d2;      // juvenile-enemy death rate
    double d3;      // mature-enemy death rate
    double alpha1;  // pest conversion efficiency on crop
    double alpha2;  // enemy recruitment efficiency on pest
    double tau;     // juvenile maturation delay
};

// Throws Error with code model.NonFiniteParam, model.NonPositiveRate or
// model.NegativeDelay.  The message lists every violated field at once so a
// bad configuration surfaces completely on the first run.
void validate_params(const ModelParams& p);

// Full state: crop x, pest y, juvenile enemies z1, mature enemies z2.
struct SystemState {
    double x, y, z1, z2;
};

// Reduced state: the juvenile class decouples (nothing reads z1), so the
// closed dynamics live in (x, y, z2).
struct State3 {
    double x, y, z2;
};

// Right-hand sides.  `delayed` carries the state one maturation delay in the
// past; only its y and z2 components are read.
State3 rhs_reduced(const ModelParams& p, const State3& s, const State3& delayed);
SystemState rhs_full(const ModelParams& p, const SystemState& s, const SystemState& delayed);

enum class EqKind { E0, E1, E2, E3 };

const char* eq_kind_name(EqKind k);

struct Equilibrium {
    EqKind kind;
    double x, y, z2;
    double z1;        // slaved juvenile mass (nonzero only at coexistence)
    bool feasible;    // all coordinates non-negative at this delay
};

// Steady juvenile mass maintained by constant pest/enemy levels over one
// maturation window.
double z1_steady(const ModelParams& p, double y_star, double z2_star);

// The three boundary equilibria plus the coexistence equilibrium.  All four
// are always returned with their algebraic coordinates; `feasible` marks
// which ones exist as population states at p.tau.
std::vector<Equilibrium> compute_equilibria(const ModelParams& p);

// The coexistence equilibrium, or nullopt when it is infeasible at p.tau.
std::optional<Equilibrium> interior_equilibrium(const ModelParams& p);

struct Thresholds {
    bool h1_holds;              // pest persistence: a1*alpha1 > b1*d1
    bool tau_bar_defined;       // the delay ceiling exists (log argument > 1)
    double tau_bar;             // delay ceiling for coexistence (NaN if undefined)
    double tau_cr;              // the same ceiling via the factored form (NaN if undefined)
    std::string absent_reason;  // non-empty exactly when tau_bar_defined is false
    bool h2_holds;              // p.tau < tau_bar (false when undefined)
};

// Existence thresholds for the coexistence equilibrium.  An empty delay
// window is reported as absent-with-reason, never thrown.
Thresholds existence_thresholds(const ModelParams& p);

} // namespace stagechain::model
