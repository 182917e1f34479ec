#include "biteuler/report_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace biteuler {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw std::invalid_argument("parse_double: malformed number '" + std::string(text) + "'");
  }
  return value;
}

OutputFormat parse_format(std::string_view name) {
  if (name == "csv") return OutputFormat::Csv;
  if (name == "json") return OutputFormat::Json;
  throw std::invalid_argument("unknown format '" + std::string(name) + "'");
}

namespace {

// Non-finite doubles are stored as strings so that reports round-trip.
Json num(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

double get_num(const Json& j) {
  if (j.is_string()) return parse_double(j.get<std::string>());
  return j.get<double>();
}

Json vec(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(num(v[i]));
  return out;
}

Json estimate(const Estimate& e) {
  return {{"value", num(e.value)}, {"std_error", num(e.std_error)}, {"saturated", e.saturated}};
}

}  // namespace

void write_error_csv(std::ostream& out, const ErrorTable& table) {
  out << kErrorCsvHeader << '\n';
  for (const auto& row : table.rows) {
    out << table.scheme << ',' << table.model << ',' << format_double(table.r) << ',' << row.N << ',' << row.M
        << ',' << row.seed << ',' << format_double(row.sup_error) << ',' << format_double(row.std_error) << ','
        << format_double(row.overflow_fraction) << '\n';
  }
}

Json rate_fit_summary(const RateFit& fit) {
  return {{"slope", num(fit.slope)}, {"intercept", num(fit.intercept)}, {"residual", num(fit.residual)}};
}

Json error_report_json(const ErrorTable& table, const std::optional<RateFit>& fit) {
  Json rows = Json::array();
  for (const auto& row : table.rows) {
    Json errs = Json::array();
    for (double e : row.per_gridpoint_errors) errs.push_back(num(e));
    rows.push_back({{"N", row.N},
                    {"M", row.M},
                    {"seed", row.seed},
                    {"sup_error", num(row.sup_error)},
                    {"std_error", num(row.std_error)},
                    {"overflow_fraction", num(row.overflow_fraction)},
                    {"per_gridpoint_errors", std::move(errs)}});
  }
  Json doc = {{"scheme", table.scheme}, {"model", table.model}, {"r", num(table.r)}, {"rows", std::move(rows)}};
  if (fit) {
    Json fj = rate_fit_summary(*fit);
    Json points = Json::array();
    for (const auto& [x, y] : fit->points) points.push_back({num(x), num(y)});
    fj["points"] = std::move(points);
    fj["excluded_rows"] = fit->excluded_rows;
    doc["rate_fit"] = std::move(fj);
  }
  return doc;
}

ErrorTable error_table_from_json(const Json& doc) {
  ErrorTable table;
  table.scheme = doc.at("scheme").get<std::string>();
  table.model = doc.at("model").get<std::string>();
  table.r = get_num(doc.at("r"));
  for (const auto& rj : doc.at("rows")) {
    ErrorRow row;
    row.N = rj.at("N").get<std::int64_t>();
    row.M = rj.at("M").get<std::int64_t>();
    row.seed = rj.at("seed").get<std::uint64_t>();
    row.sup_error = get_num(rj.at("sup_error"));
    row.std_error = get_num(rj.at("std_error"));
    row.overflow_fraction = get_num(rj.at("overflow_fraction"));
    for (const auto& e : rj.at("per_gridpoint_errors")) row.per_gridpoint_errors.push_back(get_num(e));
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::optional<RateFit> rate_fit_from_json(const Json& doc) {
  if (!doc.contains("rate_fit")) return std::nullopt;
  const Json& fj = doc.at("rate_fit");
  RateFit fit;
  fit.slope = get_num(fj.at("slope"));
  fit.intercept = get_num(fj.at("intercept"));
  fit.residual = get_num(fj.at("residual"));
  if (fj.contains("points")) {
    for (const auto& p : fj.at("points")) fit.points.emplace_back(get_num(p.at(0)), get_num(p.at(1)));
  }
  if (fj.contains("excluded_rows")) fit.excluded_rows = fj.at("excluded_rows").get<std::size_t>();
  return fit;
}

// ---------------------------------------------------------------------------

Json to_json(const DivergenceReport& report) {
  Json rows = Json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"N", r.N},
                    {"em_fraction", num(r.em_fraction)},
                    {"bit_fraction", num(r.bit_fraction)},
                    {"em_second_moment", num(r.em_second_moment)},
                    {"bit_second_moment", num(r.bit_second_moment)}});
  }
  return {{"model", report.model}, {"x0", vec(report.x0)}, {"M", report.M}, {"seed", report.seed},
          {"rows", std::move(rows)}};
}

Json to_json(const MomentReport& report) {
  Json rows = Json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"N", r.N},
                    {"mean_U", estimate(r.mean_U)},
                    {"exp_moment", estimate(r.exp_moment)},
                    {"epsilon", num(r.epsilon)},
                    {"exp_bound", num(r.exp_bound)},
                    {"moment_bound", num(r.moment_bound)},
                    {"bound_applicable", r.bound_applicable},
                    {"within_bound", r.within_bound}});
  }
  Json doc = {{"model", report.model},
              {"M", report.M},
              {"seed", report.seed},
              {"growth", {{"c", num(report.growth.c)}, {"p", report.growth.p}}},
              {"log_N0", num(report.log_N0)},
              {"flatness_ratio", num(report.flatness_ratio)},
              {"flatness_tolerance", num(report.flatness_tolerance)},
              {"flat", report.flat()},
              {"rows", std::move(rows)}};
  doc["N0"] = report.N0 ? Json(*report.N0) : Json(nullptr);
  return doc;
}

Json to_json(const TamingBoundsReport& r) {
  return {{"h", num(r.params.h)},
          {"m", r.params.m},
          {"samples", r.sample_count},
          {"seed", r.seed},
          {"evaluated_at_t", num(r.evaluated_at_t)},
          {"sup_norm", {{"max", num(r.sup_norm_max)}, {"bound", num(r.sup_norm_bound)},
                        {"violations", r.sup_norm_violations}, {"holds", r.sup_norm_holds}}},
          {"jacobian", {{"estimate", num(r.jacobian_l2)}, {"std_error", num(r.jacobian_l2_stderr)},
                        {"bound", num(r.jacobian_bound)}, {"holds", r.jacobian_holds}}},
          {"laplacian", {{"estimate", num(r.laplacian_l2)}, {"std_error", num(r.laplacian_l2_stderr)},
                         {"bound", num(r.laplacian_bound)}, {"holds", r.laplacian_holds}}},
          {"all_hold", r.all_hold()}};
}

Json to_json(const ConditionReport& r) {
  Json violations = Json::array();
  for (const auto& v : r.violations) {
    Json vj = {{"condition", std::string(to_string(v.condition))},
               {"x", vec(v.x)},
               {"lhs", num(v.lhs)},
               {"rhs", num(v.rhs)},
               {"margin", num(v.margin())}};
    if (v.y) vj["y"] = vec(*v.y);
    violations.push_back(std::move(vj));
  }
  return {{"points_checked", r.points_checked},
          {"pairs_checked", r.pairs_checked},
          {"degenerate_pairs_skipped", r.degenerate_pairs_skipped},
          {"min_generator_margin", num(r.min_generator_margin)},
          {"min_monotonicity_margin", num(r.min_monotonicity_margin)},
          {"min_coercivity_margin", num(r.min_coercivity_margin)},
          {"passed", r.passed()},
          {"violations", std::move(violations)}};
}

Json to_json(const GrowthPreflight& r) {
  Json doc = {{"points_checked", r.points_checked},
              {"lipschitz_violations", r.lipschitz_violations},
              {"growth_violations", r.growth_violations},
              {"min_lipschitz_margin", num(r.min_lipschitz_margin)},
              {"min_growth_margin", num(r.min_growth_margin)},
              {"constants_admissible", r.constants_admissible()},
              {"log_N0", num(r.log_N0)}};
  doc["N0"] = r.N0 ? Json(*r.N0) : Json(nullptr);
  return doc;
}

Json to_json(const StoppingProbability& r) {
  return {{"probability", estimate(r.probability)}, {"C1", num(r.C1)}, {"bound", num(r.bound)}};
}

Json to_json(const ModelCatalogEntry& e) {
  Json doc = {{"id", e.id},
              {"d", e.model.d},
              {"m", e.model.m},
              {"exact_solution", e.model.has_exact_solution()},
              {"admissible_region", {{"description", e.region.description}, {"radius", num(e.region.radius)}}},
              {"default_x0", vec(e.default_x0)},
              {"notes", e.notes}};
  if (e.model.lyapunov) {
    const auto& s = *e.model.lyapunov;
    doc["lyapunov"] = {{"rho", num(s.rho)}, {"c", num(s.c)}, {"p", num(s.p)},
                       {"q0", num(s.q0)},   {"q1", num(s.q1)}, {"r", num(s.r)}};
  } else {
    doc["lyapunov"] = nullptr;
  }
  if (e.growth) {
    doc["growth"] = {{"c", num(e.growth->c)}, {"p", e.growth->p}};
  } else {
    doc["growth"] = nullptr;
  }
  return doc;
}

void write_csv(std::ostream& out, const DivergenceReport& report) {
  out << "model,N,M,seed,em_fraction,bit_fraction,em_second_moment,bit_second_moment\n";
  for (const auto& r : report.rows) {
    out << report.model << ',' << r.N << ',' << report.M << ',' << report.seed << ',' << format_double(r.em_fraction)
        << ',' << format_double(r.bit_fraction) << ',' << format_double(r.em_second_moment) << ','
        << format_double(r.bit_second_moment) << '\n';
  }
}

void write_csv(std::ostream& out, const MomentReport& report) {
  out << "model,N,M,seed,mean_U,mean_U_std_error,exp_moment,exp_moment_std_error,exp_saturated,epsilon,"
         "exp_bound,moment_bound,bound_applicable,within_bound\n";
  for (const auto& r : report.rows) {
    out << report.model << ',' << r.N << ',' << report.M << ',' << report.seed << ','
        << format_double(r.mean_U.value) << ',' << format_double(r.mean_U.std_error) << ','
        << format_double(r.exp_moment.value) << ',' << format_double(r.exp_moment.std_error) << ','
        << (r.exp_moment.saturated ? 1 : 0) << ',' << format_double(r.epsilon) << ','
        << format_double(r.exp_bound) << ',' << format_double(r.moment_bound) << ','
        << (r.bound_applicable ? 1 : 0) << ',' << (r.within_bound ? 1 : 0) << '\n';
  }
}

void write_csv(std::ostream& out, const TamingBoundsReport& r) {
  out << "h,m,samples,seed,quantity,estimate,std_error,bound,holds\n";
  const auto line = [&](const char* name, double est, double se, double bound, bool holds) {
    out << format_double(r.params.h) << ',' << r.params.m << ',' << r.sample_count << ',' << r.seed << ',' << name
        << ',' << format_double(est) << ',' << format_double(se) << ',' << format_double(bound) << ','
        << (holds ? 1 : 0) << '\n';
  };
  line("sup_norm", r.sup_norm_max, 0.0, r.sup_norm_bound, r.sup_norm_holds);
  line("jacobian_l2", r.jacobian_l2, r.jacobian_l2_stderr, r.jacobian_bound, r.jacobian_holds);
  line("laplacian_l2", r.laplacian_l2, r.laplacian_l2_stderr, r.laplacian_bound, r.laplacian_holds);
}

void write_csv(std::ostream& out, const ConditionReport& r) {
  out << "condition,x,y,lhs,rhs,margin\n";
  const auto point = [](const Vector& v) {
    std::string s;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (i) s += ' ';
      s += format_double(v[i]);
    }
    return s;
  };
  for (const auto& v : r.violations) {
    out << to_string(v.condition) << ',' << point(v.x) << ',' << (v.y ? point(*v.y) : std::string()) << ','
        << format_double(v.lhs) << ',' << format_double(v.rhs) << ',' << format_double(v.margin()) << '\n';
  }
}

void write_text(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty() || path == "-") {
    fallback << text;
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open '" + path + "' for writing");
  file << text;
  file.flush();
  if (!file) throw std::runtime_error("failed writing '" + path + "'");
}

std::string rate_sidecar_path(const std::string& csv_path) { return csv_path + ".rate.json"; }

}  // namespace biteuler
