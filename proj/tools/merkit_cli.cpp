// Command-line front end for the dataset and evaluation pipeline.
//
//   merkit extract  --corpus DIR --out records.jsonl --stats stats.json
//   merkit dedup    --in records.jsonl --out kept.jsonl --stats dedup.json
//   merkit split    --in kept.jsonl --test-per-level N --seed S --out-train F --out-test F
//   merkit manifest --in test.jsonl --out manifest.jsonl
//   merkit render   --manifest manifest.jsonl (--worker CMD | --layouts FILE) --out layouts.jsonl
//   merkit predict  --test test.jsonl --images DIR --endpoint cfg.json --out preds.jsonl
//   merkit score    --gt layouts_gt.jsonl --pred-latex preds.jsonl --pred-layouts layouts_pred.jsonl --out scores.jsonl
//   merkit report   --scores scores.jsonl --format markdown --out report.md
//
// Exit status: 0 success, 2 configuration error, 3 data error.

#include "merkit/corpus_extractor.hpp"
#include "merkit/dedup_splitter.hpp"
#include "merkit/latex_lexer.hpp"
#include "merkit/metrics.hpp"
#include "merkit/recognizer_client.hpp"
#include "merkit/records_io.hpp"
#include "merkit/render_bridge.hpp"
#include "merkit/report.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace merkit;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

void require_file(const fs::path& path, const std::string& flag) {
  if (!fs::is_regular_file(path)) throw ConfigError(flag + ": no such file: " + path.string());
}

void require_dir(const fs::path& path, const std::string& flag) {
  if (!fs::is_directory(path)) throw ConfigError(flag + ": no such directory: " + path.string());
}

struct ExtractArgs {
  fs::path corpus, out, stats;
  std::size_t jobs = 1;
  std::size_t page_min_spans = 2;
  std::size_t max_inline_bytes = 2000;
};

int run_extract(const ExtractArgs& a) {
  require_dir(a.corpus, "--corpus");
  ExtractOptions options;
  options.page_min_spans = a.page_min_spans;
  options.max_inline_bytes = a.max_inline_bytes;
  const CorpusExtraction result = extract_corpus(load_corpus(a.corpus), options, a.jobs);
  write_jsonl(a.out, result.records);
  write_text_file(a.stats, to_json_document(result.stats));
  std::cerr << "extract: " << result.stats.pages << " pages, " << result.records.size() << " records, "
            << result.stats.spans_dropped_lex_error << " spans dropped\n";
  return 0;
}

struct NormalizationArgs {
  bool plain_left_right = false;

  latex::NormalizeOptions options() const { return latex::NormalizeOptions{plain_left_right}; }
};

struct DedupArgs {
  fs::path in, out, stats, quarantine;
  bool near_dup = false;
  double near_dup_threshold = 0.9;
  NormalizationArgs normalization;
};

int run_dedup(const DedupArgs& a) {
  require_file(a.in, "--in");
  DedupOptions options;
  options.normalization = a.normalization.options();
  options.near_dup.enabled = a.near_dup;
  options.near_dup.threshold = a.near_dup_threshold;
  const DedupResult result = dedup(read_jsonl<FormulaRecord>(a.in), options);
  write_jsonl(a.out, result.kept);
  write_text_file(a.stats, dedup_stats_document(result.stats));
  if (!a.quarantine.empty()) write_jsonl(a.quarantine, result.quarantined);
  std::cerr << "dedup: kept " << result.kept.size() << ", quarantined " << result.quarantined.size() << "\n";
  return 0;
}

struct SplitArgs {
  fs::path in, out_train, out_test, manifest, stats;
  std::size_t test_per_level = 1000;
  std::uint64_t seed = 0;
};

int run_split(const SplitArgs& a) {
  require_file(a.in, "--in");
  const SplitConfig config{a.test_per_level, a.seed};
  const SplitResult result = split(read_jsonl<FormulaRecord>(a.in), config);
  write_jsonl(a.out_train, result.train);
  write_jsonl(a.out_test, result.test);
  if (!a.manifest.empty()) {
    SplitManifest m{a.seed, a.test_per_level, {}};
    for (const auto& r : result.test) m.test_ids.push_back(r.record_id);
    write_text_file(a.manifest, to_json_document(m));
  }
  if (!a.stats.empty()) {
    // fills train/test into the stats written by `dedup`
    require_file(a.stats, "--stats");
    std::array<DedupStats, 3> stats{};
    for (SampleLevel level : kAllLevels) stats[level_index(level)].level = level;
    for (const DedupStats& s : parse_dedup_stats(read_text_file(a.stats))) stats[level_index(s.level)] = s;
    record_split(stats, result);
    write_text_file(a.stats, dedup_stats_document(stats));
  }
  std::cerr << "split: " << result.train.size() << " train, " << result.test.size() << " test\n";
  return 0;
}

struct ManifestArgs {
  fs::path in, out;
  bool from_predictions = false;
  double scale = 1.0;
};

int run_manifest(const ManifestArgs& a) {
  require_file(a.in, "--in");
  if (!(a.scale > 0.0)) throw ConfigError("--scale must be positive");
  std::size_t count = 0;
  if (a.from_predictions) {
    // predictions that failed or came back empty get no layout and score CDM 0
    std::vector<FormulaRecord> records;
    for (const EvalRecord& e : read_jsonl<EvalRecord>(a.in)) {
      if (e.error || e.pred_latex.empty()) continue;
      records.push_back({e.record_id, e.level, e.pred_latex, {}, std::nullopt});
    }
    if (records.empty()) throw DataError("no usable predictions in " + a.in.string());
    count = write_manifest(records, a.out, a.scale);
  } else {
    const auto records = read_jsonl<FormulaRecord>(a.in);
    if (records.empty()) throw DataError("no records in " + a.in.string());
    count = write_manifest(records, a.out, a.scale);
  }
  std::cerr << "manifest: " << count << " entries\n";
  return 0;
}

struct RenderArgs {
  fs::path manifest, layouts, out;
  std::string worker;
};

int run_render(const RenderArgs& a) {
  require_file(a.manifest, "--manifest");
  if (a.worker.empty() == a.layouts.empty()) throw ConfigError("exactly one of --worker and --layouts is required");
  const auto manifest = read_manifest(a.manifest);
  std::vector<GlyphLayout> layouts;
  if (!a.worker.empty()) {
    const int status = run_render_worker(a.worker, a.manifest, a.out);
    if (status != 0) throw DataError("render worker exited with status " + std::to_string(status));
    layouts = read_layouts(a.out);
  } else {
    require_file(a.layouts, "--layouts");
    layouts = read_layouts(a.layouts);
    write_layouts(layouts, a.out);
  }
  const CoverageReport coverage = check_coverage(manifest, layouts);
  for (const auto& id : coverage.missing) std::cerr << "render: missing layout for " << id << "\n";
  for (const auto& id : coverage.unexpected) std::cerr << "render: unexpected layout for " << id << "\n";
  for (const auto& id : coverage.duplicated) std::cerr << "render: duplicate layouts for " << id << "\n";
  if (!coverage.complete()) throw DataError("layouts do not cover the manifest one-to-one");
  std::size_t failed = 0;
  for (const auto& l : layouts) failed += l.render_ok ? 0 : 1;
  std::cerr << "render: " << layouts.size() << " layouts, " << failed << " failed renders\n";
  return 0;
}

struct PredictArgs {
  fs::path test, images, endpoint, out, cache;
};

int run_predict(const PredictArgs& a) {
  require_file(a.test, "--test");
  require_dir(a.images, "--images");
  require_file(a.endpoint, "--endpoint");
  const EndpointConfig config = load_endpoint_config(a.endpoint);
  std::vector<RecognitionItem> items;
  for (const FormulaRecord& r : read_jsonl<FormulaRecord>(a.test)) {
    const auto image = find_image(a.images, r.record_id);
    // a missing image becomes an errored record through the unsupported-format path
    items.push_back({r.record_id, r.level, r.latex, image.value_or(a.images / (r.record_id + ".missing"))});
  }
  std::optional<PredictionCache> cache;
  if (!a.cache.empty()) cache.emplace(a.cache);
  const auto results = run_batch(items, config, cache ? &*cache : nullptr);
  write_jsonl(a.out, results);
  std::size_t errors = 0;
  for (const auto& r : results) errors += r.error ? 1 : 0;
  std::cerr << "predict: " << results.size() << " records, " << errors << " errors\n";
  return 0;
}

struct ScoreArgs {
  fs::path gt, pred_latex, pred_layouts, out;
  double tau = kDefaultTau;
  std::string system;
  bool raw_ed = false;
  NormalizationArgs normalization;
};

int run_score(const ScoreArgs& a) {
  require_file(a.gt, "--gt");
  require_file(a.pred_latex, "--pred-latex");
  require_file(a.pred_layouts, "--pred-layouts");
  if (!(a.tau > 0.0)) throw ConfigError("--tau must be positive");
  EdOptions ed;
  ed.normalize = !a.raw_ed;
  ed.normalization = a.normalization.options();

  std::map<std::string, GlyphLayout> gt_layouts;
  for (auto& l : read_layouts(a.gt)) gt_layouts.insert_or_assign(l.record_id, std::move(l));
  std::map<std::string, GlyphLayout> pred_layouts;
  for (auto& l : read_layouts(a.pred_layouts)) pred_layouts.insert_or_assign(l.record_id, std::move(l));

  const std::string system = a.system.empty() ? a.pred_latex.stem().string() : a.system;
  std::vector<ScoreRecord> scores;
  for (const EvalRecord& e : read_jsonl<EvalRecord>(a.pred_latex)) {
    const auto gt = gt_layouts.find(e.record_id);
    if (gt == gt_layouts.end()) throw DataError("no ground-truth layout for " + e.record_id);
    const auto pred = pred_layouts.find(e.record_id);
    scores.push_back(score_record(e, gt->second, pred == pred_layouts.end() ? nullptr : &pred->second, a.tau, ed,
                                  system));
  }
  write_jsonl(a.out, scores);
  std::cerr << "score: " << scores.size() << " records\n";
  return 0;
}

struct ReportArgs {
  std::vector<fs::path> scores;
  std::string format = "markdown";
  fs::path out;
};

int run_report(const ReportArgs& a) {
  TableFormat format;
  if (a.format == "markdown" || a.format == "md") {
    format = TableFormat::Markdown;
  } else if (a.format == "csv") {
    format = TableFormat::Csv;
  } else {
    throw ConfigError("--format must be markdown or csv");
  }
  std::map<std::string, std::vector<ScoreRecord>> by_system;
  std::vector<std::string> order;
  std::set<std::string> settings;
  for (const fs::path& path : a.scores) {
    require_file(path, "--scores");
    for (ScoreRecord& s : read_jsonl<ScoreRecord>(path)) {
      std::string system = s.system.empty() ? path.stem().string() : s.system;
      if (!by_system.contains(system)) order.push_back(system);
      settings.insert("normalization: " + (s.normalization.empty() ? std::string("unspecified") : s.normalization) +
                      "; tau: " + format_score(s.tau));
      by_system[system].push_back(std::move(s));
    }
  }
  if (order.empty()) throw EmptyInput();
  std::vector<SystemSummary> systems;
  for (const auto& name : order) systems.push_back({name, aggregate(by_system[name])});
  const std::vector<std::string> header(settings.begin(), settings.end());
  const std::string text = render_table(systems, format, header);
  if (a.out.empty()) {
    std::cout << text;
  } else {
    write_text_file(a.out, text);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Formula-recognition dataset and evaluation toolkit"};
  app.require_subcommand(1);

  ExtractArgs extract;
  auto* cmd = app.add_subcommand("extract", "Extract formula records from a page corpus");
  cmd->add_option("--corpus", extract.corpus, "Directory of *.json / *.jsonl page files")->required();
  cmd->add_option("--out", extract.out, "Output records JSONL")->required();
  cmd->add_option("--stats", extract.stats, "Output extraction stats JSON")->required();
  cmd->add_option("--jobs", extract.jobs, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--page-min-spans", extract.page_min_spans, "Spans needed for a page-level sample");
  cmd->add_option("--max-inline-bytes", extract.max_inline_bytes, "Longest inline $...$ candidate");

  DedupArgs dedup_args;
  cmd = app.add_subcommand("dedup", "Drop records with duplicate canonical forms");
  cmd->add_option("--in", dedup_args.in, "Input records JSONL")->required();
  cmd->add_option("--out", dedup_args.out, "Kept records JSONL")->required();
  cmd->add_option("--stats", dedup_args.stats, "Per-level stats JSON")->required();
  cmd->add_option("--quarantine", dedup_args.quarantine, "Records that failed to lex");
  cmd->add_flag("--near-dup", dedup_args.near_dup, "Also drop near duplicates (MinHash over token 3-grams)");
  cmd->add_option("--near-dup-threshold", dedup_args.near_dup_threshold, "Jaccard threshold")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_flag("--plain-left-right", dedup_args.normalization.plain_left_right,
                "Rewrite \\left/\\right pairs around short content as plain delimiters");

  SplitArgs split_args;
  auto* split_cmd = app.add_subcommand("split", "Draw a fixed-size test set per level");
  split_cmd->add_option("--in", split_args.in, "Deduplicated records JSONL")->required();
  split_cmd->add_option("--test-per-level", split_args.test_per_level, "Test records per level");
  split_cmd->add_option("--seed", split_args.seed, "Sampling seed");
  split_cmd->add_option("--out-train", split_args.out_train, "Train JSONL")->required();
  split_cmd->add_option("--out-test", split_args.out_test, "Test JSONL")->required();
  split_cmd->add_option("--manifest", split_args.manifest, "Split manifest JSON");
  split_cmd->add_option("--stats", split_args.stats, "Dedup stats JSON to update with split counts");

  ManifestArgs manifest_args;
  auto* manifest_cmd = app.add_subcommand("manifest", "Write a render manifest");
  manifest_cmd->add_option("--in", manifest_args.in, "Records JSONL (or predictions with --from-predictions)")
      ->required();
  manifest_cmd->add_option("--out", manifest_args.out, "Manifest JSONL")->required();
  manifest_cmd->add_flag("--from-predictions", manifest_args.from_predictions, "Input is predictions JSONL");
  manifest_cmd->add_option("--scale", manifest_args.scale, "Render scale");

  RenderArgs render_args;
  auto* render_cmd = app.add_subcommand("render", "Run the render worker or ingest its output");
  render_cmd->add_option("--manifest", render_args.manifest, "Manifest JSONL")->required();
  auto* worker_opt = render_cmd->add_option("--worker", render_args.worker, "Worker command");
  auto* layouts_opt = render_cmd->add_option("--layouts", render_args.layouts, "Pre-rendered layouts JSONL");
  worker_opt->excludes(layouts_opt);
  render_cmd->add_option("--out", render_args.out, "Validated layouts JSONL")->required();

  PredictArgs predict_args;
  auto* predict_cmd = app.add_subcommand("predict", "Query a recognizer endpoint for every test record");
  predict_cmd->add_option("--test", predict_args.test, "Test records JSONL")->required();
  predict_cmd->add_option("--images", predict_args.images, "Directory of <record_id>.<ext> images")->required();
  predict_cmd->add_option("--endpoint", predict_args.endpoint, "Endpoint config JSON")->required();
  predict_cmd->add_option("--out", predict_args.out, "Predictions JSONL")->required();
  predict_cmd->add_option("--cache", predict_args.cache, "Prediction cache JSONL");

  ScoreArgs score_args;
  auto* score_cmd = app.add_subcommand("score", "Score predictions with ED and CDM");
  score_cmd->add_option("--gt", score_args.gt, "Ground-truth layouts JSONL")->required();
  score_cmd->add_option("--pred-latex", score_args.pred_latex, "Predictions JSONL")->required();
  score_cmd->add_option("--pred-layouts", score_args.pred_layouts, "Prediction layouts JSONL")->required();
  score_cmd->add_option("--tau", score_args.tau, "CDM match radius in unit-box coordinates");
  score_cmd->add_option("--out", score_args.out, "Scores JSONL")->required();
  score_cmd->add_option("--system", score_args.system, "System name (default: predictions file stem)");
  score_cmd->add_flag("--raw-ed", score_args.raw_ed, "Compute ED on raw strings");
  score_cmd->add_flag("--plain-left-right", score_args.normalization.plain_left_right,
                      "Rewrite \\left/\\right pairs around short content as plain delimiters");

  ReportArgs report_args;
  auto* report_cmd = app.add_subcommand("report", "Render ED and CDM tables");
  report_cmd->add_option("--scores", report_args.scores, "Scores JSONL (repeatable)")->required();
  report_cmd->add_option("--format", report_args.format, "markdown or csv");
  report_cmd->add_option("--out", report_args.out, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    for (CLI::App* sub : app.get_subcommands()) {
      const std::string name = sub->get_name();
      if (name == "extract") return run_extract(extract);
      if (name == "dedup") return run_dedup(dedup_args);
      if (name == "split") return run_split(split_args);
      if (name == "manifest") return run_manifest(manifest_args);
      if (name == "render") return run_render(render_args);
      if (name == "predict") return run_predict(predict_args);
      if (name == "score") return run_score(score_args);
      if (name == "report") return run_report(report_args);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const latex::LexError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitConfig;
}
