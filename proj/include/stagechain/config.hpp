#pragma once

#include <istream>
#include <optional>
#include <string>

#include "stagechain/model.hpp"

namespace stagechain::config {

// A parsed run configuration: the nine rates plus the delay are mandatory,
// everything else optional with CLI-level defaults.
struct RunConfig {
    model::ModelParams params{};
    std::optional<double> t_end, step;
    std::optional<double> x0, y0, z1_0, z2_0;  // constant pre-history override
    std::optional<double> tau_min, tau_max, tau_step;
    std::optional<double> transient_fraction;
};

// Parses `key = value` lines; '#' starts a comment line, blank lines are
// skipped.  Throws cli.MalformedLine, cli.UnknownKey, cli.DuplicateKey,
// cli.MalformedNumber (all with the line number) and cli.MissingKey listing
// every absent mandatory key.
RunConfig parse_config(std::istream& in);

// Reads the file and parses it; throws cli.FileNotFound.
RunConfig load_config(const std::string& path);

} // namespace stagechain::config
