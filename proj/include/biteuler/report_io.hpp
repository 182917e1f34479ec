#pragma once

#include "biteuler/diagnostics.hpp"
#include "biteuler/experiments.hpp"
#include "biteuler/models.hpp"
#include "biteuler/taming.hpp"
#include "biteuler/types.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace biteuler {

using Json = nlohmann::json;

inline constexpr std::string_view kErrorCsvHeader =
    "scheme,model,r,N,M,seed,sup_error,std_error,overflow_fraction";

/// Shortest decimal that parses back to the same double; "inf", "-inf", "nan"
/// for non-finite values.
std::string format_double(double value);

/// Inverse of format_double. Throws std::invalid_argument on malformed input.
double parse_double(std::string_view text);

enum class OutputFormat { Csv, Json };

/// Accepts "csv" and "json"; throws std::invalid_argument otherwise.
OutputFormat parse_format(std::string_view name);

// ---------------------------------------------------------------------------
// Error tables

void write_error_csv(std::ostream& out, const ErrorTable& table);

/// {"slope", "intercept", "residual"}.
Json rate_fit_summary(const RateFit& fit);

/// Full report: table rows including per-gridpoint errors, plus the fit when given.
Json error_report_json(const ErrorTable& table, const std::optional<RateFit>& fit);

/// Reads a report produced by error_report_json. Throws nlohmann::json::exception
/// or std::invalid_argument on malformed documents.
ErrorTable error_table_from_json(const Json& doc);
std::optional<RateFit> rate_fit_from_json(const Json& doc);

// ---------------------------------------------------------------------------
// Other reports (write-only)

Json to_json(const DivergenceReport& report);
Json to_json(const MomentReport& report);
Json to_json(const TamingBoundsReport& report);
Json to_json(const ConditionReport& report);
Json to_json(const GrowthPreflight& report);
Json to_json(const StoppingProbability& report);
Json to_json(const ModelCatalogEntry& entry);

void write_csv(std::ostream& out, const DivergenceReport& report);
void write_csv(std::ostream& out, const MomentReport& report);
void write_csv(std::ostream& out, const TamingBoundsReport& report);
void write_csv(std::ostream& out, const ConditionReport& report);

// ---------------------------------------------------------------------------
// Files

/// Writes `text` to `path`; "-" or an empty path writes to `fallback`.
/// Throws std::runtime_error if the file cannot be written.
void write_text(const std::string& path, const std::string& text, std::ostream& fallback);

/// Path of the rate-fit sidecar next to a CSV output: "<path>.rate.json".
std::string rate_sidecar_path(const std::string& csv_path);

}  // namespace biteuler
