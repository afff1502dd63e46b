#pragma once

#include "merkit/errors.hpp"
#include "merkit/levels.hpp"
#include "merkit/metrics.hpp"
#include "merkit/recognizer_client.hpp"

#include <optional>
#include <string>
#include <vector>

namespace merkit {

// Per-record scores as written by `merkit score`.
struct ScoreRecord {
  std::string record_id;
  SampleLevel level = SampleLevel::Line;
  std::string system;
  double ed = 1.0;
  CdmScore cdm;
  std::optional<std::string> error;
  // scoring settings, carried into report headers
  double tau = kDefaultTau;
  std::string normalization;
};

// Scores one prediction. Errored predictions score ED 1 and CDM 0. Layouts are
// raw worker output; a missing prediction layout counts as a failed render.
ScoreRecord score_record(const EvalRecord& eval, const GlyphLayout& gt_layout, const GlyphLayout* pred_layout,
                         double tau, const EdOptions& ed_options, const std::string& system = {});

// Human-readable description of the ED normalization settings.
std::string describe_normalization(const EdOptions& options);

struct MetricsSummary {
  std::string subset;
  std::size_t n = 0;
  double mean_ed = 0.0;
  double mean_cdm_f1 = 0.0;
};

inline constexpr std::string_view kAverageSubset = "Avg.";

class EmptyInput : public DataError {
 public:
  EmptyInput() : DataError("no scores to aggregate") {}
};

// One summary per level present (level order), then "Avg.": the unweighted mean
// of the per-level means, with n the total record count.
std::vector<MetricsSummary> aggregate(const std::vector<ScoreRecord>& scores);

// Joins evaluations with their scores by record_id before aggregating. Evaluations
// without a score, or with an error, count as ED 1 / CDM 0.
std::vector<MetricsSummary> aggregate(const std::vector<EvalRecord>& evals, const std::vector<ScoreRecord>& scores);

struct SystemSummary {
  std::string system;
  std::vector<MetricsSummary> summaries;
};

enum class TableFormat { Markdown, Csv };

// Fixed three-decimal rendering used in every table cell.
std::string format_score(double value);

// ED and CDM comparison tables, one row per system and one column per subset
// (level order, then Avg.). In Markdown the best value of each column is bold
// when more than one system is present. `header` lines are emitted first
// (Markdown as a comment-free preamble, CSV as '#'-prefixed lines).
std::string render_table(const std::vector<SystemSummary>& systems, TableFormat format,
                         const std::vector<std::string>& header = {});

}  // namespace merkit
