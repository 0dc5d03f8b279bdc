#pragma once

#include "chaosmap/lyapunov.hpp"
#include "chaosmap/model.hpp"
#include "chaosmap/sampler.hpp"

#include "json.hpp"

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace chaosmap {

/// Shortest decimal text that round-trips to the same double ("nan", "inf"
/// for non-finite values).
std::string format_double(double v);

/// Parses "name=lo:hi"; state coordinates are written "ic.<state>".
BoxCoord parse_box_arg(std::string_view arg);

/// Parses "name=value".
std::pair<std::string, double> parse_assignment(std::string_view arg);

/// Applies name=value overrides to a sample ("ic.<state>" for states).
void apply_assignment(const SystemDefinition& system, SamplePoint& sample, std::string_view name,
                      double value);

nlohmann::json to_json(const SearchBox& box);
/// Accepts [{"name", "lo", "hi"}] or {"name": [lo, hi]}.
SearchBox box_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const MHConfig& cfg);
MHConfig mh_config_from_json(const nlohmann::json& doc, MHConfig base = {});

nlohmann::json to_json(const IntegrationConfig& cfg);
IntegrationConfig integration_config_from_json(const nlohmann::json& doc, IntegrationConfig base = {});

nlohmann::json to_json(const LyapunovConfig& cfg);
LyapunovConfig lyapunov_config_from_json(const nlohmann::json& doc, LyapunovConfig base = {});

nlohmann::json to_json(const SamplePoint& p);

/// Column names of the batch CSV: box coordinates then
/// divergence, mle, t_final, converged, phase, seed.
std::vector<std::string> sample_columns(const SearchBox& box);

/// One CSV line (no trailing newline) for a record.
std::string sample_csv_row(const SampleRecord& rec);
std::string sample_csv_header(const SearchBox& box);
void write_samples_csv(std::ostream& out, const SearchBox& box,
                       const std::vector<SampleRecord>& records);

/// Same fields as the CSV row as a flat JSON object (NaN -> null).
nlohmann::json sample_row_json(const SearchBox& box, const SampleRecord& rec);

}  // namespace chaosmap
