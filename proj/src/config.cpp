#include "biteuler/config.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>

namespace biteuler {

std::string_view to_string(Command command) {
  switch (command) {
    case Command::Simulate:
      return "simulate";
    case Command::Convergence:
      return "convergence";
    case Command::Divergence:
      return "divergence";
    case Command::Moments:
      return "moments";
    case Command::TamingCheck:
      return "taming-check";
    case Command::CheckConditions:
      return "check-conditions";
    case Command::Catalog:
      return "catalog";
  }
  return "unknown";
}

namespace {

std::string env_name(std::string flag) {
  std::string out = "BITEULER_";
  for (char ch : flag) out += ch == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return out;
}

template <class T>
CLI::Option* add(CLI::App* app, const std::string& name, T& target, const std::string& help) {
  return app->add_option("--" + name, target, help)->envname(env_name(name));
}

bool is_power_of_two(std::int64_t n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

void validate(const RunConfig& c) {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (!(c.T > 0.0) || !std::isfinite(c.T)) fail("--T must be positive");
  if (c.N < 1) fail("--N must be positive");
  if (c.M < 1) fail("--M must be positive");
  if (!(c.r >= 1.0)) fail("--r must be >= 1");
  if (!(c.h > 0.0)) fail("--h must be positive");
  if (c.m < 1) fail("--m must be positive");
  if (c.points < 1) fail("--points must be positive");
  if (!(c.radius > 0.0)) fail("--radius must be positive");
  if (c.N_ref < 0) fail("--N-ref must be positive");
  for (auto n : c.Ns) {
    if (n < 1) fail("--Ns entries must be positive");
  }
  if (c.format != "csv" && c.format != "json") fail("--format must be csv or json");
  if (c.reference != "auto" && c.reference != "exact" && c.reference != "fine") {
    fail("--reference must be auto, exact or fine");
  }
  if (c.command == Command::Convergence) {
    if (c.Ns.size() < 3) fail("convergence needs at least 3 entries in --Ns");
    for (std::size_t i = 0; i < c.Ns.size(); ++i) {
      if (!is_power_of_two(c.Ns[i])) fail("--Ns entries must be powers of two for rate fitting");
      if (i > 0 && c.Ns[i] <= c.Ns[i - 1]) fail("--Ns must be strictly increasing");
    }
    if (c.M < 2) fail("convergence needs --M >= 2");
  }
  if ((c.command == Command::Divergence || c.command == Command::Moments) && c.Ns.empty()) {
    fail(std::string(to_string(c.command)) + " needs --Ns");
  }
  if (c.command == Command::TamingCheck && c.samples < 1000) fail("--samples must be at least 1000");
}

RunConfig parse_config(const std::vector<std::string>& args) {
  RunConfig cfg;
  CLI::App app{"Stopped increment-tamed Euler schemes and Monte Carlo experiments", "biteuler"};
  app.set_config("--config", "", "INI file; [section] names the command, flags override its values");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  app.fallthrough();

  struct Sub {
    Command command;
    const char* name;
    const char* help;
  };
  const Sub subs[] = {
      {Command::Simulate, "simulate", "Simulate paths and print trajectories"},
      {Command::Convergence, "convergence", "Strong-error table and rate fit"},
      {Command::Divergence, "divergence", "Euler-Maruyama explosion versus the stopped scheme"},
      {Command::Moments, "moments", "Moment and exponential-moment sweep over N"},
      {Command::TamingCheck, "taming-check", "Monte Carlo check of the taming-function bounds"},
      {Command::CheckConditions, "check-conditions", "Sampled Lyapunov and monotonicity checks"},
      {Command::Catalog, "catalog", "List shipped models"},
  };

  std::vector<std::pair<CLI::App*, Command>> apps;
  std::vector<CLI::Option*> model_options;
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->allow_config_extras(CLI::config_extras_mode::error);
    apps.emplace_back(sub, s.command);

    add(sub, "output", cfg.output, "Output path, - for stdout");
    add(sub, "format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    add(sub, "seed", cfg.seed, "Random seed");
    if (s.command == Command::Catalog) continue;
    if (s.command == Command::TamingCheck) {
      sub->set_help_flag("--help", "Print this help message and exit");
      add(sub, "h", cfg.h, "Step size");
      add(sub, "m", cfg.m, "Noise dimension");
      add(sub, "samples", cfg.samples, "Sample count (>= 1000)");
      continue;
    }

    model_options.push_back(add(sub, "model", cfg.model, "Catalog model id")->required());
    add(sub, "T", cfg.T, "Horizon");
    add(sub, "x0", cfg.x0, "Initial state (comma separated); default from the catalog")->delimiter(',');
    add(sub, "threads", cfg.threads, "Worker threads, 0 = all cores");
    if (s.command == Command::CheckConditions) {
      add(sub, "points", cfg.points, "Sample points and pairs");
      add(sub, "radius", cfg.radius, "Radius of the sampled ball");
      continue;
    }
    add(sub, "M", cfg.M, "Number of paths");
    if (s.command == Command::Simulate) {
      add(sub, "scheme", cfg.scheme, "em, drift-tamed or bit");
      add(sub, "N", cfg.N, "Number of steps");
      continue;
    }
    add(sub, "Ns", cfg.Ns, "Comma-separated step counts")->delimiter(',');
    if (s.command == Command::Convergence) {
      add(sub, "scheme", cfg.scheme, "em, drift-tamed or bit");
      add(sub, "r", cfg.r, "Error exponent");
      add(sub, "reference", cfg.reference, "auto, exact or fine");
      add(sub, "reference-scheme", cfg.reference_scheme, "Scheme of the fine-grid reference");
      add(sub, "N-ref", cfg.N_ref, "Reference step count (default 8 * max Ns)");
      add(sub, "slope-min", cfg.slope_min, "Lower end of the asserted slope band");
      add(sub, "slope-max", cfg.slope_max, "Upper end of the asserted slope band");
    }
    sub->add_flag("--assert", cfg.assert_result, "Exit with code 2 if the command's check fails")
        ->envname(env_name("assert"));
  }

  std::vector<std::string> reversed(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(reversed.begin(), reversed.end());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForAllHelp&) {
    throw HelpRequested(app.help("", CLI::AppFormatMode::All));
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      for (const auto& [sub, command] : apps) {
        if (sub->parsed()) throw HelpRequested(sub->help());
      }
      throw HelpRequested(app.help());
    }
    throw ConfigError(e.what());
  }

  for (const auto& [sub, command] : apps) {
    if (sub->parsed()) cfg.command = command;
  }
  validate(cfg);
  return cfg;
}

}  // namespace biteuler
