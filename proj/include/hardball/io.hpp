#pragma once

// Output formats. Every real number is written in the shortest decimal form
// that parses back to the same double.
//
//   events.jsonl  one JSON object per collision:
//                 {"k":1,"t":1.0,"i":1,"j":2,"a":[0,0],"pre":[[..],..],"post":[[..],..],
//                  "normal":[..],"residue":0.0}   ball labels i < j are 1-based
//   summary.json  a single JSON object with "schema_version"
//   *.tsv         `# key=value` metadata lines, one header line, tab-separated rows

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hardball/lyapunov.hpp"
#include "hardball/model.hpp"
#include "hardball/neutral.hpp"

namespace hardball {

inline constexpr const char* kSummarySchema = "hardball.summary/1";
inline constexpr const char* kSpectrumSchema = "hardball.spectrum/1";
inline constexpr const char* kSurveySchema = "hardball.survey/1";
inline constexpr const char* kRichnessSchema = "hardball.richness/1";

std::string format_real(double x);

nlohmann::json event_to_json(const CollisionEvent& event, int dim);
/// Throws Error{Schema} on missing or malformed fields.
CollisionEvent event_from_json(const nlohmann::json& record, int n_balls, int dim);

void write_events(std::ostream& out, const OrbitSegment& segment);
std::vector<CollisionEvent> read_events(std::istream& in, int n_balls, int dim);

nlohmann::json params_to_json(const SystemParams& params);

using Metadata = std::vector<std::pair<std::string, std::string>>;

void write_spectrum(std::ostream& out, const Spectrum& spectrum, const Metadata& metadata);

struct SpectrumTable {
  std::map<std::string, std::string> metadata;
  std::vector<double> lambda;
  std::vector<double> convergence;
};

/// Throws Error{Schema}.
SpectrumTable read_spectrum(std::istream& in);

/// One ensemble member of the sufficiency survey.
struct SurveyRow {
  std::uint64_t seed = 0;
  std::vector<double> masses;
  std::string status = "ok";  // "ok" or the error code name
  std::string message;
  std::optional<SegmentAnalysis> analysis;
  long long min_richness = 0;

  bool rich() const { return analysis && analysis->scheme.richness >= min_richness; }
};

struct SurveyAggregate {
  int seeds = 0;
  int failed = 0;
  int rich = 0;
  int rich_sufficient = 0;
  int sufficient = 0;
  long long min_richness = 0;
  bool tainted = false;  // some member had disagreeing neutral-space methods
};

SurveyAggregate aggregate_survey(const std::vector<SurveyRow>& rows, long long min_richness);
nlohmann::json aggregate_to_json(const SurveyAggregate& aggregate);

void write_survey(std::ostream& out, const std::vector<SurveyRow>& rows, const SurveyAggregate& aggregate,
                  const Metadata& metadata);

struct RichnessRow {
  std::uint64_t seed = 0;
  std::string status = "ok";
  std::string message;
  std::optional<SchemeSummary> summary;
  std::optional<PropertyAViolation> violation;
  long long requirement = 0;
};

void write_richness(std::ostream& out, const std::vector<RichnessRow>& rows, const Metadata& metadata);

/// Reads `# key=value` metadata and the rows of a tab-separated table.
struct Table {
  std::map<std::string, std::string> metadata;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
Table read_table(std::istream& in);

void write_json_file(const std::string& path, const nlohmann::json& value);

}  // namespace hardball
