#pragma once

#include "merkit/corpus_extractor.hpp"
#include "merkit/dedup_splitter.hpp"
#include "merkit/errors.hpp"
#include "merkit/recognizer_client.hpp"
#include "merkit/render_bridge.hpp"
#include "merkit/report.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace merkit {

// Test-set membership written next to a split.
struct SplitManifest {
  std::uint64_t seed = 0;
  std::size_t test_per_level = 0;
  std::vector<std::string> test_ids;

  bool operator==(const SplitManifest&) const = default;
};

// JSON codecs. Specialized for PageDocument, FormulaRecord, ManifestEntry,
// GlyphLayout (validated on read), EvalRecord, EndpointConfig, ScoreRecord,
// ExtractionStats, DedupStats and SplitManifest. Parsing throws SchemaError with
// the 1-based line number and the offending field.
template <class T>
T parse_json_line(std::string_view line, std::size_t line_no);

// Compact single-line encoding, without a trailing newline.
template <class T>
std::string to_json_line(const T& value);

// Indented encoding for standalone JSON documents (stats, split manifests).
template <class T>
std::string to_json_document(const T& value);

std::vector<DedupStats> parse_dedup_stats(std::string_view document);
std::string dedup_stats_document(const std::array<DedupStats, 3>& stats);

std::string read_text_file(const std::filesystem::path& path);
// Writes through a temporary sibling and renames, so readers never see a partial file.
void write_text_file(const std::filesystem::path& path, std::string_view content);

// Blank lines are skipped; line numbers in errors count them.
template <class T>
std::vector<T> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::vector<T> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    out.push_back(parse_json_line<T>(line, line_no));
  }
  return out;
}

template <class T>
void write_jsonl(const std::filesystem::path& path, const std::vector<T>& values) {
  std::string content;
  for (const T& v : values) {
    content += to_json_line(v);
    content += '\n';
  }
  write_text_file(path, content);
}

template <class T>
void append_jsonl(const std::filesystem::path& path, const T& value) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_json_line(value) << '\n';
  out.flush();
  if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace merkit
