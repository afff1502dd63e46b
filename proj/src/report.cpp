#include "merkit/report.hpp"

#include <algorithm>
#include <array>
#include <iomanip>
#include <map>
#include <sstream>

namespace merkit {

namespace {

struct Accumulator {
  std::size_t n = 0;
  double ed = 0.0;
  double f1 = 0.0;
};

std::vector<std::string> subset_columns(const std::vector<SystemSummary>& systems) {
  std::vector<std::string> columns;
  for (SampleLevel level : kAllLevels) {
    const std::string title(level_title(level));
    for (const auto& s : systems) {
      const bool present = std::any_of(s.summaries.begin(), s.summaries.end(),
                                       [&](const MetricsSummary& m) { return m.subset == title; });
      if (present) {
        columns.push_back(title);
        break;
      }
    }
  }
  // subsets that are not levels (external benchmark splits), in first-seen order
  for (const auto& s : systems) {
    for (const auto& m : s.summaries) {
      if (m.subset == kAverageSubset) continue;
      if (std::find(columns.begin(), columns.end(), m.subset) == columns.end()) columns.push_back(m.subset);
    }
  }
  columns.emplace_back(kAverageSubset);
  return columns;
}

const MetricsSummary* find_subset(const SystemSummary& s, const std::string& subset) {
  for (const auto& m : s.summaries) {
    if (m.subset == subset) return &m;
  }
  return nullptr;
}

std::string csv_field(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

struct MetricSpec {
  std::string_view title;
  bool lower_is_better;
  double MetricsSummary::*field;
};

constexpr std::array<MetricSpec, 2> kMetrics = {{
    {"ED", true, &MetricsSummary::mean_ed},
    {"CDM", false, &MetricsSummary::mean_cdm_f1},
}};

void markdown_table(std::ostringstream& out, const std::vector<SystemSummary>& systems,
                    const std::vector<std::string>& columns, const MetricSpec& metric) {
  out << "### " << metric.title << " (" << (metric.lower_is_better ? "lower" : "higher") << " is better)\n\n";
  out << "| System |";
  for (const auto& c : columns) out << ' ' << c << " |";
  out << "\n|---|";
  for (std::size_t k = 0; k < columns.size(); ++k) out << "---:|";
  out << '\n';

  // best formatted value per column; ties are all marked
  std::vector<std::optional<std::string>> best(columns.size());
  if (systems.size() > 1) {
    for (std::size_t k = 0; k < columns.size(); ++k) {
      std::optional<double> winner;
      for (const auto& s : systems) {
        if (const auto* m = find_subset(s, columns[k])) {
          const double v = m->*metric.field;
          if (!winner || (metric.lower_is_better ? v < *winner : v > *winner)) winner = v;
        }
      }
      if (winner) best[k] = format_score(*winner);
    }
  }
  for (const auto& s : systems) {
    out << "| " << s.system << " |";
    for (std::size_t k = 0; k < columns.size(); ++k) {
      const auto* m = find_subset(s, columns[k]);
      if (!m) {
        out << " - |";
        continue;
      }
      const std::string cell = format_score(m->*metric.field);
      if (best[k] && *best[k] == cell) {
        out << " **" << cell << "** |";
      } else {
        out << ' ' << cell << " |";
      }
    }
    out << '\n';
  }
}

}  // namespace

std::string describe_normalization(const EdOptions& options) {
  if (!options.normalize) return "raw";
  return options.normalization.plain_left_right ? "N1-N5" : "N1-N4";
}

ScoreRecord score_record(const EvalRecord& eval, const GlyphLayout& gt_layout, const GlyphLayout* pred_layout,
                         double tau, const EdOptions& ed_options, const std::string& system) {
  ScoreRecord s;
  s.record_id = eval.record_id;
  s.level = eval.level;
  s.system = system;
  s.tau = tau;
  s.normalization = describe_normalization(ed_options);
  const GlyphLayout gt = prepare_for_scoring(gt_layout);
  if (eval.error) {
    s.error = eval.error;
    s.ed = 1.0;
    s.cdm.gt_total = gt.render_ok ? gt.glyphs.size() : 0;
    return s;
  }
  s.ed = edit_distance(eval.pred_latex, eval.gt_latex, ed_options).value;
  GlyphLayout pred;
  if (pred_layout) {
    pred = prepare_for_scoring(*pred_layout);
  } else {
    pred.record_id = eval.record_id;
    pred.render_ok = false;
    pred.error_message = "no layout for prediction";
    pred.bounds = Bounds{0.0, 0.0, 1.0, 1.0};
  }
  s.cdm = cdm(pred, gt, tau);
  return s;
}

std::vector<MetricsSummary> aggregate(const std::vector<ScoreRecord>& scores) {
  if (scores.empty()) throw EmptyInput();
  std::array<Accumulator, 3> acc{};
  for (const ScoreRecord& s : scores) {
    Accumulator& a = acc[level_index(s.level)];
    ++a.n;
    a.ed += s.error ? 1.0 : s.ed;
    a.f1 += s.error ? 0.0 : s.cdm.f1;
  }
  std::vector<MetricsSummary> out;
  MetricsSummary avg{std::string(kAverageSubset), 0, 0.0, 0.0};
  for (SampleLevel level : kAllLevels) {
    const Accumulator& a = acc[level_index(level)];
    if (a.n == 0) continue;
    const auto n = static_cast<double>(a.n);
    out.push_back({std::string(level_title(level)), a.n, a.ed / n, a.f1 / n});
    avg.n += a.n;
    avg.mean_ed += out.back().mean_ed;
    avg.mean_cdm_f1 += out.back().mean_cdm_f1;
  }
  const auto subsets = static_cast<double>(out.size());
  avg.mean_ed /= subsets;
  avg.mean_cdm_f1 /= subsets;
  out.push_back(avg);
  return out;
}

std::vector<MetricsSummary> aggregate(const std::vector<EvalRecord>& evals, const std::vector<ScoreRecord>& scores) {
  std::map<std::string, const ScoreRecord*> by_id;
  for (const auto& s : scores) by_id[s.record_id] = &s;
  std::vector<ScoreRecord> joined;
  joined.reserve(evals.size());
  for (const EvalRecord& e : evals) {
    const auto it = by_id.find(e.record_id);
    if (it != by_id.end() && !e.error) {
      joined.push_back(*it->second);
      joined.back().level = e.level;
      continue;
    }
    ScoreRecord penalty;
    penalty.record_id = e.record_id;
    penalty.level = e.level;
    penalty.error = e.error.value_or("no score for record");
    joined.push_back(std::move(penalty));
  }
  return aggregate(joined);
}

std::string format_score(double value) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(3) << value;
  return out.str();
}

std::string render_table(const std::vector<SystemSummary>& systems, TableFormat format,
                         const std::vector<std::string>& header) {
  const auto columns = subset_columns(systems);
  std::ostringstream out;
  if (format == TableFormat::Markdown) {
    for (const auto& line : header) out << line << "\n";
    if (!header.empty()) out << '\n';
    for (std::size_t k = 0; k < kMetrics.size(); ++k) {
      if (k > 0) out << '\n';
      markdown_table(out, systems, columns, kMetrics[k]);
    }
    return out.str();
  }

  for (const auto& line : header) out << "# " << line << "\r\n";
  out << "system,metric";
  for (const auto& c : columns) out << ',' << csv_field(c);
  out << "\r\n";
  for (const MetricSpec& metric : kMetrics) {
    for (const auto& s : systems) {
      out << csv_field(s.system) << ',' << metric.title;
      for (const auto& c : columns) {
        const auto* m = find_subset(s, c);
        out << ',' << (m ? format_score(m->*metric.field) : std::string());
      }
      out << "\r\n";
    }
  }
  return out.str();
}

}  // namespace merkit
