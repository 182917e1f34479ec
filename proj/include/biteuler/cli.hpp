#pragma once

#include "biteuler/config.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace biteuler {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitAssertion = 2;

/// Runs a parsed command. Results go to config.output (or `out` for "-"),
/// diagnostics to `err`. Returns kExitAssertion when a requested check fails.
/// Throws on runtime errors.
int run_command(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses and runs; maps help to 0, usage and runtime errors to 1.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace biteuler
