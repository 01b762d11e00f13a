#pragma once

#include "wtw/analytics.hpp"
#include "wtw/gravity.hpp"
#include "wtw/sampling.hpp"
#include "wtw/solver.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>

namespace wtw {

using Json = nlohmann::ordered_json;

// Fitted models: {family, parameters, residuals, iterations, converged, tolerance,
// status, diagnosis, nodes}
Json to_json(const FittedModel& fm);
FittedModel fitted_model_from_json(const Json& j);

Json to_json(const GravityFit& fit);
GravityFit gravity_fit_from_json(const Json& j);

/// Summary: model, estimator, correlations, observed_density, expected_density, seed, m,
/// metrics, gravity.
Json report_summary(const ComparisonReport& r);

/// Per-node rows `node,metric,observed,expected,defined[,gravity]`; undefined values are
/// empty fields and `defined` is 1 when both observed and expected exist.
void write_report_csv(std::ostream& out, const ComparisonReport& r);

/// Rebuilds a report from its CSV rows and JSON summary.
ComparisonReport read_report(std::istream& csv, const Json& summary);

void write_expected_csv(std::ostream& out, const std::vector<std::string>& nodes, const ExpectedMetrics& em);

/// Rows `node,metric,mean,se,defined_samples`.
void write_samples_csv(std::ostream& out, const std::vector<std::string>& nodes, const SampleSet& set);
Json samples_summary(const SampleSet& set);

/// Serializes with two-space indentation and a trailing newline.
std::string dump(const Json& j);

/// Throws IoError when the file cannot be written or read.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

} // namespace wtw
