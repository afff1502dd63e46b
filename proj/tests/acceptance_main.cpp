// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "merkit/corpus_extractor.hpp"
#include "merkit/dedup_splitter.hpp"
#include "merkit/latex_lexer.hpp"
#include "merkit/metrics.hpp"
#include "merkit/records_io.hpp"
#include "merkit/recognizer_client.hpp"
#include "merkit/report.hpp"
#include "merkit/utf8.hpp"

#include "generators.hpp"
#include "mock_endpoint.hpp"
#include "oracles.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

using namespace merkit;
using namespace merkit::testing;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 20240601;

// Pinned thresholds.
constexpr std::size_t kEdOraclePairs = 1000;
constexpr std::size_t kEdOracleMaxLength = 200;
constexpr double kEdOracleSeconds = 10.0;
constexpr std::size_t kEdLawPairs = 10000;
constexpr double kEdSymmetryTolerance = 0.0;  // exact: same integer over the same denominator
constexpr std::size_t kLexerStrings = 10000;
constexpr std::size_t kCdmIdentityLayouts = 100;
constexpr std::size_t kCdmSymmetryPairs = 500;
constexpr std::size_t kMatchingPairs = 500;
constexpr std::size_t kMatchingMaxGlyphs = 8;
constexpr std::size_t kSplitTestPerLevel = 10;
constexpr std::string_view kExpectedAverage = "0.164";
constexpr double kAverageTolerance = 1e-12;
constexpr int kClientParallelism = 4;
constexpr std::size_t kClientRecords = 12;
constexpr int kClientRetries = 3;

const std::string kFixtures = MERKIT_FIXTURES;

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s  %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
  std::fflush(stdout);
}

Outcome ed_oracle() {
  Rng rng(kSeed);
  const auto start = std::chrono::steady_clock::now();
  std::size_t mismatches = 0;
  for (std::size_t k = 0; k < kEdOraclePairs; ++k) {
    const auto a = random_scalars(rng, uniform(rng, 0, kEdOracleMaxLength));
    const auto b = random_scalars(rng, uniform(rng, 0, kEdOracleMaxLength));
    if (levenshtein(a, b) != dp_levenshtein(a, b)) ++mismatches;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ostringstream d;
  d << kEdOraclePairs << " pairs, " << mismatches << " mismatches, " << seconds << " s (limit " << kEdOracleSeconds
    << " s)";
  return {mismatches == 0 && seconds < kEdOracleSeconds, d.str()};
}

Outcome ed_laws() {
  Rng rng(kSeed + 1);
  std::size_t violations = 0;
  const EdOptions raw{.normalize = false, .normalization = {}};
  for (std::size_t k = 0; k < kEdLawPairs; ++k) {
    std::string a;
    std::string b;
    if (k % 2 == 0) {
      a = utf8::encode(random_scalars(rng, uniform(rng, 0, 60)));
      b = utf8::encode(random_scalars(rng, uniform(rng, 0, 60)));
    } else {
      a = random_valid_latex(rng);
      b = coin(rng) ? random_valid_latex(rng) : a + random_small_alphabet(rng, 4);
    }
    const EdOptions& options = k % 4 == 3 ? EdOptions{} : raw;
    const double ab = edit_distance(a, b, options).value;
    const double ba = edit_distance(b, a, options).value;
    if (edit_distance(a, a, options).value != 0.0) ++violations;
    if (std::abs(ab - ba) > kEdSymmetryTolerance) ++violations;
    if (!(ab >= 0.0 && ab <= 1.0)) ++violations;
  }
  return {violations == 0, std::to_string(kEdLawPairs) + " pairs, " + std::to_string(violations) + " violations"};
}

Outcome lexer_roundtrip() {
  Rng rng(kSeed + 2);
  std::size_t violations = 0;
  for (std::size_t k = 0; k < kLexerStrings; ++k) {
    const std::string src = random_valid_latex(rng);
    const latex::TokenSeq first = latex::tokenize(src);
    if (!latex::tokenize(latex::detokenize(first)).token_equals(first)) ++violations;
    for (bool plain : {false, true}) {
      const latex::NormalizeOptions options{.plain_left_right = plain};
      const latex::TokenSeq once = latex::normalize(first, options);
      if (!latex::normalize(once, options).token_equals(once)) ++violations;
    }
  }
  return {violations == 0, std::to_string(kLexerStrings) + " strings, " + std::to_string(violations) + " violations"};
}

Outcome cdm_identity_symmetry() {
  Rng rng(kSeed + 3);
  std::size_t identity_failures = 0;
  for (std::size_t k = 0; k < kCdmIdentityLayouts; ++k) {
    const GlyphLayout l = random_unit_layout(rng, uniform(rng, 0, 40), "abcxy+=");
    if (cdm(l, l).f1 != 1.0) ++identity_failures;
  }
  std::size_t symmetry_failures = 0;
  for (std::size_t k = 0; k < kCdmSymmetryPairs; ++k) {
    const GlyphLayout a = random_unit_layout(rng, uniform(rng, 0, 30), "ab");
    const GlyphLayout b = coin(rng) ? jitter_layout(rng, a, 0.2, "ab") : random_unit_layout(rng, uniform(rng, 0, 30), "ab");
    if (cdm(a, b).matched != cdm(b, a).matched) ++symmetry_failures;
  }
  return {identity_failures == 0 && symmetry_failures == 0,
          std::to_string(kCdmIdentityLayouts) + " self-scores (" + std::to_string(identity_failures) + " below 1), " +
              std::to_string(kCdmSymmetryPairs) + " pairs (" + std::to_string(symmetry_failures) + " asymmetric)"};
}

Outcome matching_optimality() {
  Rng rng(kSeed + 4);
  std::size_t mismatches = 0;
  for (std::size_t k = 0; k < kMatchingPairs; ++k) {
    const GlyphLayout pred = random_unit_layout(rng, uniform(rng, 0, kMatchingMaxGlyphs), "ab");
    GlyphLayout gt = coin(rng) ? jitter_layout(rng, pred, 0.3, "ab")
                               : random_unit_layout(rng, uniform(rng, 0, kMatchingMaxGlyphs), "ab");
    if (gt.glyphs.size() > kMatchingMaxGlyphs) gt = normalize_layout([&] {
        GlyphLayout trimmed = gt;
        trimmed.glyphs.resize(kMatchingMaxGlyphs);
        return trimmed;
      }());
    const double tau = 0.1 + 0.4 * static_cast<double>(uniform(rng, 0, 4)) / 4.0;
    const auto oracle = brute_force_matching(pred, gt, tau);
    if (match_glyphs(pred, gt, tau).pairs.size() != oracle.cardinality) ++mismatches;
  }
  return {mismatches == 0, std::to_string(kMatchingPairs) + " pairs, " + std::to_string(mismatches) + " mismatches"};
}

std::string jsonl_text(const std::vector<FormulaRecord>& records) {
  std::string out;
  for (const auto& r : records) out += to_json_line(r) + "\n";
  return out;
}

Outcome dedup_split_conservation() {
  const auto pages = read_jsonl<PageDocument>(kFixtures + "/corpus60/pages.jsonl");
  const auto expected = nlohmann::json::parse(read_text_file(kFixtures + "/corpus60/expected.json"));
  const SplitConfig config{kSplitTestPerLevel, kSeed};

  const auto run_once = [&](std::vector<PageDocument> input) {
    const CorpusExtraction extraction = extract_corpus(std::move(input), {}, 2);
    DedupResult deduped = dedup(extraction.records);
    const SplitResult s = split(deduped.kept, config);
    record_split(deduped.stats, s);
    return std::make_tuple(deduped.stats, jsonl_text(s.train), jsonl_text(s.test), s);
  };
  const auto [stats, train_text, test_text, result] = run_once(pages);
  std::vector<PageDocument> reversed(pages.rbegin(), pages.rend());
  const auto [stats2, train_text2, test_text2, result2] = run_once(reversed);

  std::vector<std::string> problems;
  for (const DedupStats& s : stats) {
    const std::string tag(level_tag(s.level));
    const auto& want = expected[tag];
    if (s.before != s.kept + s.dropped) problems.push_back(tag + ": before != kept + dropped");
    if (s.kept != s.train + s.test) problems.push_back(tag + ": kept != train + test");
    if (s.before != want["before"].get<std::size_t>() || s.kept != want["kept"].get<std::size_t>() ||
        s.dropped != want["dropped"].get<std::size_t>()) {
      problems.push_back(tag + ": counts differ from the authored duplicates");
    }
  }
  std::set<Digest128> train_keys;
  for (const auto& r : result.train) train_keys.insert(*r.dedup_key);
  for (const auto& r : result.test) {
    if (train_keys.contains(*r.dedup_key)) problems.push_back("key " + r.dedup_key->hex() + " in both splits");
  }
  if (train_text != train_text2 || test_text != test_text2) problems.push_back("reruns differ");
  if (stats != stats2) problems.push_back("rerun stats differ");

  std::ostringstream d;
  for (const DedupStats& s : stats) {
    d << level_tag(s.level) << " " << s.before << "=" << s.kept << "+" << s.dropped << ", " << s.kept << "=" << s.train
      << "+" << s.test << "; ";
  }
  d << (problems.empty() ? "byte-identical reruns" : problems.front());
  return {problems.empty(), d.str()};
}

Outcome table_shape() {
  std::vector<ScoreRecord> scores(3);
  const std::array<double, 3> means = {0.121, 0.121, 0.251};
  for (std::size_t k = 0; k < 3; ++k) {
    scores[k].record_id = "r" + std::to_string(k);
    scores[k].level = kAllLevels[k];
    scores[k].ed = means[k];
  }
  const auto summary = aggregate(scores);
  const MetricsSummary& avg = summary.back();
  const double exact = (means[0] + means[1] + means[2]) / 3.0;
  const std::string table = render_table({{"system-a", summary}}, TableFormat::Markdown);
  const bool row_ok = table.find("| system-a | 0.121 | 0.121 | 0.251 | 0.164 |") != std::string::npos;
  const bool pass = avg.subset == kAverageSubset && std::abs(avg.mean_ed - exact) <= kAverageTolerance &&
                    format_score(avg.mean_ed) == kExpectedAverage && row_ok;
  return {pass, "Avg. " + format_score(avg.mean_ed) + (row_ok ? ", ED row matches" : ", ED row missing")};
}

Outcome recognizer_client() {
  const fs::path dir = fs::temp_directory_path() / "merkit_acceptance_client";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::vector<RecognitionItem> items;
  std::map<std::string, std::string> id_by_image;
  for (std::size_t k = 0; k < kClientRecords; ++k) {
    const std::string id = "rec" + std::to_string(k);
    const std::string bytes = "image-" + id;
    std::ofstream(dir / (id + ".png"), std::ios::binary) << bytes;
    items.push_back({id, SampleLevel::Line, "", dir / (id + ".png")});
    id_by_image[base64_encode({reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()})] = id;
  }
  const std::string marker = "base64,";
  MockEndpoint echo(
      [&](const std::string& body, int arrival) {
        // each answer names the record whose image it received
        const std::size_t at = body.find(marker) + marker.size();
        const auto it = id_by_image.find(body.substr(at, body.find('"', at) - at));
        std::this_thread::sleep_for(std::chrono::milliseconds(10 * (arrival % 3)));
        return MockEndpoint::Reply{200, it == id_by_image.end() ? "?" : "answer-" + it->second};
      },
      std::chrono::milliseconds(50));
  EndpointConfig config;
  config.base_url = echo.base_url();
  config.parallelism = kClientParallelism;
  config.max_retries = kClientRetries;
  config.backoff_ms = 1;
  const auto results = run_batch(items, config);
  bool ordered = results.size() == items.size();
  for (std::size_t k = 0; ordered && k < items.size(); ++k) {
    ordered = results[k].record_id == items[k].record_id && results[k].pred_latex == "answer-" + items[k].record_id;
  }
  const int peak = echo.max_in_flight();

  MockEndpoint failing([](const std::string&, int) { return MockEndpoint::Reply{500, "injected"}; });
  config.base_url = failing.base_url();
  const auto failed = run_batch({items.front()}, config);
  const bool retried = failed.size() == 1 && failed[0].error && failed[0].attempt == kClientRetries &&
                       failing.requests() == kClientRetries;
  fs::remove_all(dir);

  std::ostringstream d;
  d << "order " << (ordered ? "kept" : "broken") << ", peak in-flight " << peak << "/" << kClientParallelism
    << ", 500s -> " << failing.requests() << " attempts (expected " << kClientRetries << ")";
  return {ordered && peak == kClientParallelism && retried, d.str()};
}

}  // namespace

int main() {
  report("ED oracle equivalence", ed_oracle);
  report("ED laws", ed_laws);
  report("Lexer roundtrip and normalize idempotence", lexer_roundtrip);
  report("CDM identity and symmetry", cdm_identity_symmetry);
  report("Matching optimality", matching_optimality);
  report("Dedup/split conservation", dedup_split_conservation);
  report("Table-shape reproduction", table_shape);
  report("Recognizer client", recognizer_client);
  return failures == 0 ? 0 : 1;
}
