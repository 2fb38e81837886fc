#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace stagechain {

// Failure with a stable, machine-readable code of the form "module.Name"
// (e.g. "dde.StepTooLarge") plus a human-readable message.  The module
// prefix drives the CLI's exit-code mapping; tests match on codes rather
// than message text so messages can stay descriptive.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

} // namespace stagechain
