#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace biteuler {

enum class Command { Simulate, Convergence, Divergence, Moments, TamingCheck, CheckConditions, Catalog };

std::string_view to_string(Command command);

struct RunConfig {
  Command command = Command::Catalog;
  std::string model;
  std::string scheme = "bit";
  double T = 1.0;
  std::vector<std::int64_t> Ns;
  std::int64_t N = 64;
  std::int64_t M = 1000;
  double r = 2.0;
  std::uint64_t seed = 0;
  unsigned threads = 1;  // 0 = all cores
  std::string output = "-";
  std::string format = "csv";
  std::vector<double> x0;  // empty: catalog default

  // convergence
  std::string reference = "auto";  // auto | exact | fine
  std::string reference_scheme = "bit";
  std::int64_t N_ref = 0;  // 0: 8 * max(Ns)
  bool assert_result = false;
  double slope_min = 0.4;
  double slope_max = 0.6;

  // taming-check
  double h = 0.01;
  int m = 1;
  std::int64_t samples = 100000;

  // check-conditions
  std::int64_t points = 10000;
  double radius = 10.0;
};

/// Usage errors (exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// --help was given; what() holds the help text (exit code 0).
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses `<program> <command> [flags]`. Flags override values from an INI file
/// given by --config, whose sections name the commands. Environment variables
/// BITEULER_<FLAG> (upper case, dashes as underscores) fill flags that are not
/// given. Unknown keys, type mismatches and a missing --model are ConfigErrors.
RunConfig parse_config(const std::vector<std::string>& args);

/// Checks numeric ranges; throws ConfigError.
void validate(const RunConfig& config);

}  // namespace biteuler
