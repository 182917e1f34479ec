#include "biteuler/cli.hpp"

#include "biteuler/diagnostics.hpp"
#include "biteuler/experiments.hpp"
#include "biteuler/models.hpp"
#include "biteuler/report_io.hpp"
#include "biteuler/schemes.hpp"
#include "biteuler/taming.hpp"

#include <algorithm>
#include <exception>
#include <ostream>
#include <sstream>

namespace biteuler {

namespace {

Vector resolve_x0(const RunConfig& cfg, const ModelCatalogEntry& entry) {
  if (cfg.x0.empty()) return entry.default_x0;
  if (static_cast<int>(cfg.x0.size()) != entry.model.d) {
    throw ConfigError("--x0 needs " + std::to_string(entry.model.d) + " components for model '" + entry.id + "'");
  }
  return Eigen::Map<const Vector>(cfg.x0.data(), static_cast<Eigen::Index>(cfg.x0.size()));
}

void emit(const RunConfig& cfg, const std::string& text, std::ostream& out) { write_text(cfg.output, text, out); }

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

int simulate(const RunConfig& cfg, std::ostream& out) {
  const ModelCatalogEntry entry = catalog_entry(cfg.model);
  const SchemeKind kind = parse_scheme(cfg.scheme);
  const Vector x0 = resolve_x0(cfg, entry);
  const GridSpec grid{cfg.T, cfg.N};
  const int d = entry.model.d;

  std::ostringstream csv;
  Json paths = Json::array();
  csv << "path,k,t,tau_index,overflow";
  for (int i = 0; i < d; ++i) csv << ",y" << i;
  csv << '\n';
  for (std::int64_t p = 0; p < cfg.M; ++p) {
    const BrownianGrid path = BrownianGrid::generate(cfg.T, cfg.N, entry.model.m, cfg.seed, std::uint64_t(p));
    const SchemeRun run = run_path(kind, entry.model, grid, x0, path);
    if (cfg.format == "csv") {
      for (std::int64_t k = 0; k <= cfg.N; ++k) {
        csv << p << ',' << k << ',' << format_double(grid_point(grid, k)) << ',' << run.tau_index << ','
            << (run.overflow ? 1 : 0);
        for (int i = 0; i < d; ++i) csv << ',' << format_double(run.states(i, k));
        csv << '\n';
      }
    } else {
      Json states = Json::array();
      for (std::int64_t k = 0; k <= cfg.N; ++k) {
        Json s = Json::array();
        for (int i = 0; i < d; ++i) s.push_back(format_double(run.states(i, k)));
        states.push_back(std::move(s));
      }
      paths.push_back({{"path", p},
                       {"tau_index", run.tau_index},
                       {"frozen", run.frozen},
                       {"overflow", run.overflow},
                       {"states", std::move(states)}});
    }
  }
  if (cfg.format == "csv") {
    emit(cfg, csv.str(), out);
  } else {
    emit(cfg,
         dump({{"model", entry.id},
               {"scheme", std::string(to_string(kind))},
               {"T", cfg.T},
               {"N", cfg.N},
               {"seed", cfg.seed},
               {"paths", std::move(paths)}}),
         out);
  }
  return kExitOk;
}

int convergence(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const ModelCatalogEntry entry = catalog_entry(cfg.model);
  ConvergenceConfig cc;
  cc.model = entry.model;
  cc.model_id = entry.id;
  cc.x0 = resolve_x0(cfg, entry);
  cc.scheme = parse_scheme(cfg.scheme);
  cc.T = cfg.T;
  cc.r = cfg.r;
  cc.Ns = cfg.Ns;
  cc.M = cfg.M;
  cc.seed = cfg.seed;
  cc.threads = cfg.threads;
  cc.reference_scheme = parse_scheme(cfg.reference_scheme);
  const bool exact = cfg.reference == "exact" || (cfg.reference == "auto" && entry.model.has_exact_solution());
  cc.reference = exact ? ReferenceKind::Exact : ReferenceKind::FineGrid;
  const std::int64_t max_N = *std::max_element(cfg.Ns.begin(), cfg.Ns.end());
  cc.N_ref = cfg.N_ref > 0 ? cfg.N_ref : 8 * max_N;
  if (!exact && cc.N_ref < 8 * max_N) {
    err << "warning: N_ref = " << cc.N_ref << " is below 8 * max(Ns); the reference error is not negligible\n";
  }

  const ErrorTable table = strong_error(cc);
  std::optional<RateFit> fit;
  try {
    fit = fit_rate(table, cfg.T);
    if (fit->excluded_rows > 0) err << "warning: " << fit->excluded_rows << " rows excluded from the fit\n";
  } catch (const std::invalid_argument& e) {
    err << "warning: " << e.what() << '\n';
  }

  if (cfg.format == "csv") {
    std::ostringstream csv;
    write_error_csv(csv, table);
    const bool to_file = !cfg.output.empty() && cfg.output != "-";
    if (fit && to_file) {
      write_text(rate_sidecar_path(cfg.output), rate_fit_summary(*fit).dump() + "\n", out);
    } else if (fit) {
      csv << "# " << rate_fit_summary(*fit).dump() << '\n';
    }
    emit(cfg, csv.str(), out);
  } else {
    emit(cfg, dump(error_report_json(table, fit)), out);
  }

  if (cfg.assert_result) {
    if (!fit || !(fit->slope >= cfg.slope_min && fit->slope <= cfg.slope_max)) {
      err << "assertion failed: slope " << (fit ? format_double(fit->slope) : std::string("unavailable"))
          << " outside [" << format_double(cfg.slope_min) << ", " << format_double(cfg.slope_max) << "]\n";
      return kExitAssertion;
    }
  }
  return kExitOk;
}

int divergence(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const ModelCatalogEntry entry = catalog_entry(cfg.model);
  const DivergenceReport report =
      divergence_comparison(entry.model, cfg.Ns, cfg.M, resolve_x0(cfg, entry), cfg.seed, cfg.T, cfg.threads);
  if (cfg.format == "csv") {
    std::ostringstream csv;
    write_csv(csv, report);
    emit(cfg, csv.str(), out);
  } else {
    emit(cfg, dump(to_json(report)), out);
  }
  if (cfg.assert_result) {
    const bool bit_ok = std::all_of(report.rows.begin(), report.rows.end(),
                                    [](const DivergenceRow& r) { return r.bit_fraction == 0.0; });
    const bool em_diverges = std::any_of(report.rows.begin(), report.rows.end(),
                                         [](const DivergenceRow& r) { return r.em_fraction > 0.0; });
    if (!bit_ok || !em_diverges) {
      err << "assertion failed: " << (bit_ok ? "no Euler-Maruyama explosion observed" : "stopped scheme exploded")
          << '\n';
      return kExitAssertion;
    }
  }
  return kExitOk;
}

int moments(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const ModelCatalogEntry entry = catalog_entry(cfg.model);
  if (!entry.growth) throw std::invalid_argument("model '" + entry.id + "' ships without growth constants");
  const MomentReport report = moment_sweep(entry.model, *entry.growth, cfg.Ns, cfg.M, cfg.seed,
                                           resolve_x0(cfg, entry), cfg.T, cfg.threads);
  if (cfg.format == "csv") {
    std::ostringstream csv;
    write_csv(csv, report);
    emit(cfg, csv.str(), out);
  } else {
    emit(cfg, dump(to_json(report)), out);
  }
  if (!report.N0) err << "note: N0 = exp(" << format_double(report.log_N0) << ") exceeds every simulated N\n";
  if (cfg.assert_result && !(report.flat() && report.all_within_bound())) {
    err << "assertion failed: flatness ratio " << format_double(report.flatness_ratio) << " (tolerance "
        << format_double(report.flatness_tolerance) << ")\n";
    return kExitAssertion;
  }
  return kExitOk;
}

int taming_check(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const TamingBoundsReport report = verify_taming_bounds(TamingParams{cfg.h, cfg.m}, cfg.samples, cfg.seed);
  if (cfg.format == "csv") {
    std::ostringstream csv;
    write_csv(csv, report);
    emit(cfg, csv.str(), out);
  } else {
    emit(cfg, dump(to_json(report)), out);
  }
  if (!report.all_hold()) {
    err << "assertion failed: a taming bound does not hold with a 3-stderr margin\n";
    return kExitAssertion;
  }
  return kExitOk;
}

int check_conditions_cmd(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const ModelCatalogEntry entry = catalog_entry(cfg.model);
  if (!entry.model.lyapunov) {
    throw std::invalid_argument("model '" + entry.id + "' ships without Lyapunov data");
  }
  SamplerConfig sampler;
  sampler.radius = cfg.radius;
  sampler.seed = cfg.seed;
  const ConditionReport report = check_conditions(entry.model, *entry.model.lyapunov, cfg.T, sampler, cfg.points);
  const DerivativeCheck derivs = check_lyapunov_derivatives(*entry.model.lyapunov, entry.model.d, sampler,
                                                            std::min<std::int64_t>(cfg.points, 1000));
  std::optional<GrowthPreflight> preflight;
  if (entry.growth) preflight = growth_preflight(entry.model, *entry.growth, cfg.T, sampler, cfg.points);

  if (cfg.format == "csv") {
    std::ostringstream csv;
    write_csv(csv, report);
    emit(cfg, csv.str(), out);
  } else {
    Json doc = to_json(report);
    doc["model"] = entry.id;
    doc["derivatives"] = {{"max_grad_rel_error", derivs.max_grad_rel_error},
                          {"max_hess_rel_error", derivs.max_hess_rel_error},
                          {"points", derivs.points}};
    doc["growth_preflight"] = preflight ? to_json(*preflight) : Json(nullptr);
    emit(cfg, dump(doc), out);
  }
  const bool derivs_ok = derivs.max_grad_rel_error < 1e-5 && derivs.max_hess_rel_error < 1e-5;
  const bool growth_ok = !preflight || preflight->constants_admissible();
  if (!report.passed() || !derivs_ok || !growth_ok) {
    err << "assertion failed: " << report.violations.size() << " condition violations"
        << (derivs_ok ? "" : ", derivative mismatch") << (growth_ok ? "" : ", growth constants inadmissible")
        << '\n';
    return kExitAssertion;
  }
  return kExitOk;
}

int list_catalog(const RunConfig& cfg, std::ostream& out) {
  const auto entries = catalog();
  if (cfg.format == "csv") {
    std::ostringstream csv;
    csv << "id,d,m,exact_solution,lyapunov,rho,c\n";
    for (const auto& e : entries) {
      csv << e.id << ',' << e.model.d << ',' << e.model.m << ',' << (e.model.has_exact_solution() ? 1 : 0) << ','
          << (e.model.lyapunov ? 1 : 0) << ',' << (e.model.lyapunov ? format_double(e.model.lyapunov->rho) : "")
          << ',' << (e.model.lyapunov ? format_double(e.model.lyapunov->c) : "") << '\n';
    }
    emit(cfg, csv.str(), out);
  } else {
    Json doc = Json::array();
    for (const auto& e : entries) doc.push_back(to_json(e));
    emit(cfg, dump(doc), out);
  }
  return kExitOk;
}

}  // namespace

int run_command(const RunConfig& config, std::ostream& out, std::ostream& err) {
  switch (config.command) {
    case Command::Simulate:
      return simulate(config, out);
    case Command::Convergence:
      return convergence(config, out, err);
    case Command::Divergence:
      return divergence(config, out, err);
    case Command::Moments:
      return moments(config, out, err);
    case Command::TamingCheck:
      return taming_check(config, out, err);
    case Command::CheckConditions:
      return check_conditions_cmd(config, out, err);
    case Command::Catalog:
      return list_catalog(config, out);
  }
  return kExitError;
}

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return run_command(parse_config(args), out, err);
  } catch (const HelpRequested& help) {
    out << help.what();
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << "\nRun with --help for usage.\n";
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace biteuler
