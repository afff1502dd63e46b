#pragma once

#include "merkit/hashing.hpp"
#include "merkit/levels.hpp"

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace merkit {

enum class PageFormat { Html, Markdown };

// One stored web page.
struct PageDocument {
  std::string page_id;
  std::string url;
  std::string body;
  PageFormat format = PageFormat::Html;

  bool operator==(const PageDocument&) const = default;
};

enum class SpanDelimiter { InlineDollar, DisplayDollar, InlineParen, DisplayBracket, Environment };

std::string_view delimiter_name(SpanDelimiter delimiter);
bool is_display(SpanDelimiter delimiter);

// A formula located in a page body. [start, end) are byte offsets into the body and
// include the delimiters. For Environment spans the \begin/\end markup is part of
// `latex`, since the environment carries alignment semantics.
struct FormulaSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  SpanDelimiter delimiter = SpanDelimiter::InlineDollar;
  std::string latex;

  bool operator==(const FormulaSpan&) const = default;
};

// One dataset sample. `latex` is a bare formula for Line records and text with
// delimited formulas for Paragraph and Page records.
struct FormulaRecord {
  std::string record_id;
  SampleLevel level = SampleLevel::Line;
  std::string latex;
  std::string source_page_id;
  std::optional<Digest128> dedup_key;

  bool operator==(const FormulaRecord&) const = default;
};

struct ExtractOptions {
  std::size_t max_inline_bytes = 2000;
  // A page becomes a Page sample when it holds at least this many spans.
  std::size_t page_min_spans = 2;
};

struct ExtractionStats {
  std::size_t pages = 0;
  std::size_t spans_found = 0;
  std::size_t spans_dropped_lex_error = 0;
  std::array<std::size_t, 3> records_per_level{};

  ExtractionStats& operator+=(const ExtractionStats& other);
};

// Finds delimited formulas. Candidates that do not lex are dropped and counted in
// `stats` (if given); the result is sorted by start and pairwise disjoint.
std::vector<FormulaSpan> extract_spans(const PageDocument& page, const ExtractOptions& options = {},
                                       ExtractionStats* stats = nullptr);

// Turns a page and its spans into Line, Paragraph and Page records.
std::vector<FormulaRecord> build_samples(const PageDocument& page, const std::vector<FormulaSpan>& spans,
                                         const ExtractOptions& options = {});

struct CorpusExtraction {
  std::vector<FormulaRecord> records;
  ExtractionStats stats;
};

// Extracts every page with up to `jobs` worker threads; output is ordered by page_id.
// Throws DataError on duplicate page ids.
CorpusExtraction extract_corpus(std::vector<PageDocument> pages, const ExtractOptions& options = {},
                                std::size_t jobs = 1);

// Reads every *.json (one page object) and *.jsonl (one page per line) file in
// `dir`, in file name order.
std::vector<PageDocument> load_corpus(const std::filesystem::path& dir);

}  // namespace merkit
