#pragma once

#include <ostream>
#include <string>

#include "stagechain/dde.hpp"
#include "stagechain/hopf.hpp"
#include "stagechain/model.hpp"
#include "stagechain/orbit.hpp"
#include "stagechain/switches.hpp"

namespace stagechain::csv {

// Shortest decimal string that round-trips through a double.
std::string format_double(double v);

void write_trajectory(std::ostream& os, const dde::Trajectory& traj);
void write_equilibria(std::ostream& os, const std::vector<model::Equilibrium>& eqs);
void write_switch_zeros(std::ostream& os, const switches::SwitchReport& report);
void write_switch_curves(std::ostream& os, const switches::SwitchReport& report);
void write_switch_intervals(std::ostream& os, const switches::SwitchReport& report);
void write_hopf(std::ostream& os, const std::vector<hopf::HopfReport>& reports);
void write_sweep(std::ostream& os, const std::vector<orbit::SweepRow>& rows);

} // namespace stagechain::csv
