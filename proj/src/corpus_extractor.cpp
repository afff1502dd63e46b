#include "merkit/corpus_extractor.hpp"

#include "html_text.hpp"
#include "merkit/errors.hpp"
#include "merkit/latex_lexer.hpp"
#include "merkit/records_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <thread>

namespace merkit {

namespace {

constexpr std::array<std::string_view, 15> kMathEnvironments = {
    "equation", "equation*", "align",     "align*",  "gather",   "gather*",  "multline",   "multline*",
    "eqnarray", "eqnarray*", "flalign",   "flalign*", "alignat", "alignat*", "displaymath"};

bool is_math_environment(std::string_view name) {
  return std::find(kMathEnvironments.begin(), kMathEnvironments.end(), name) != kMathEnvironments.end();
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// Blank line starting at text[i]: a newline, optional horizontal space, a newline.
bool blank_line_at(std::string_view text, std::size_t i) {
  if (text[i] != '\n') return false;
  for (std::size_t j = i + 1; j < text.size(); ++j) {
    if (text[j] == '\n') return true;
    if (text[j] != ' ' && text[j] != '\t' && text[j] != '\r') return false;
  }
  return false;
}

struct Candidate {
  std::size_t begin = 0;  // view index of the opening delimiter
  std::size_t end = 0;    // one past the closing delimiter
  std::size_t inner_begin = 0;
  std::size_t inner_end = 0;
  SpanDelimiter delimiter = SpanDelimiter::InlineDollar;
};

// Index of `close` at or after `from`, stepping over backslash escapes.
std::size_t find_closing(std::string_view text, std::size_t from, std::string_view close) {
  std::size_t j = from;
  while (j < text.size()) {
    if (text.substr(j, close.size()) == close) return j;
    j += text[j] == '\\' ? 2 : 1;
  }
  return std::string_view::npos;
}

// Closing `$` of an inline formula starting at `from`. As with currency in prose,
// "$5 and $7" is not math: a closer must not follow unescaped whitespace nor be
// followed by a digit.
std::size_t find_inline_dollar(std::string_view text, std::size_t from, std::size_t max_bytes) {
  std::size_t j = from;
  bool after_space = false;
  while (j < text.size() && j - from <= max_bytes) {
    if (text[j] == '$') {
      const bool digit_next = j + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[j + 1]));
      if (!after_space && !digit_next) return j;
      after_space = false;
      ++j;
      continue;
    }
    if (blank_line_at(text, j)) return std::string_view::npos;
    after_space = is_space(text[j]);
    j += text[j] == '\\' ? 2 : 1;
  }
  return std::string_view::npos;
}

std::size_t find_environment_end(std::string_view text, std::size_t from, std::string_view name) {
  const std::string open = "\\begin{" + std::string(name) + "}";
  const std::string close = "\\end{" + std::string(name) + "}";
  int depth = 1;
  std::size_t j = from;
  while (j < text.size()) {
    if (text[j] == '\\') {
      if (text.substr(j, open.size()) == open) {
        ++depth;
        j += open.size();
        continue;
      }
      if (text.substr(j, close.size()) == close) {
        if (--depth == 0) return j;
        j += close.size();
        continue;
      }
      j += 2;
      continue;
    }
    ++j;
  }
  return std::string_view::npos;
}

// Next candidate at or after `i`, or nullopt. `resume` receives where to continue
// scanning when no candidate starts at the position examined.
std::optional<Candidate> candidate_at(std::string_view text, std::size_t i, const ExtractOptions& options,
                                      std::size_t& resume) {
  const char c = text[i];
  if (c == '\\') {
    resume = i + 2;
    if (i + 1 >= text.size()) return std::nullopt;
    const char next = text[i + 1];
    if (next == '(' || next == '[') {
      const std::string_view close = next == '(' ? "\\)" : "\\]";
      const std::size_t at = find_closing(text, i + 2, close);
      if (at == std::string_view::npos) return std::nullopt;
      return Candidate{i, at + 2, i + 2, at,
                       next == '(' ? SpanDelimiter::InlineParen : SpanDelimiter::DisplayBracket};
    }
    if (text.substr(i, 7) == "\\begin{") {
      const std::size_t name_end = text.find('}', i + 7);
      if (name_end == std::string_view::npos) return std::nullopt;
      const std::string_view name = text.substr(i + 7, name_end - i - 7);
      if (!is_math_environment(name)) return std::nullopt;
      const std::size_t at = find_environment_end(text, name_end + 1, name);
      if (at == std::string_view::npos) return std::nullopt;
      const std::size_t end = at + 6 + name.size();
      return Candidate{i, end, i, end, SpanDelimiter::Environment};
    }
    return std::nullopt;
  }
  if (c == '$') {
    if (i + 1 < text.size() && text[i + 1] == '$') {
      resume = i + 2;
      const std::size_t at = find_closing(text, i + 2, "$$");
      if (at == std::string_view::npos) return std::nullopt;
      return Candidate{i, at + 2, i + 2, at, SpanDelimiter::DisplayDollar};
    }
    resume = i + 1;
    if (i + 1 >= text.size() || is_space(text[i + 1])) return std::nullopt;
    const std::size_t at = find_inline_dollar(text, i + 1, options.max_inline_bytes);
    if (at == std::string_view::npos) return std::nullopt;
    return Candidate{i, at + 1, i + 1, at, SpanDelimiter::InlineDollar};
  }
  resume = i + 1;
  return std::nullopt;
}

// A region is a formula when it lexes, holds at least one non-space token and has
// no unescaped math shift ($ cannot appear inside math).
enum class Verdict { Formula, Empty, LexFailure };

Verdict judge(std::string_view latex) {
  if (trim(latex).empty()) return Verdict::Empty;
  const auto seq = latex::try_tokenize(latex);
  if (!seq) return Verdict::LexFailure;
  const bool math_shift = std::any_of(seq->tokens.begin(), seq->tokens.end(), [](const latex::Token& t) {
    return t.kind == latex::TokenKind::Char && t.text == "$";
  });
  if (math_shift) return Verdict::LexFailure;
  const bool content = std::any_of(seq->tokens.begin(), seq->tokens.end(),
                                    [](const latex::Token& t) { return t.kind != latex::TokenKind::Whitespace; });
  return content ? Verdict::Formula : Verdict::Empty;
}

detail::TextView make_view(const PageDocument& page) {
  return page.format == PageFormat::Html ? detail::html_text_view(page.body) : detail::markdown_text_view(page.body);
}

struct ViewSpan {
  std::size_t begin;
  std::size_t end;
};

std::vector<ViewSpan> scan(const detail::TextView& view, const ExtractOptions& options, ExtractionStats* stats,
                           std::vector<FormulaSpan>* spans) {
  std::vector<ViewSpan> found;
  const std::string_view text = view.text;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c != '\\' && c != '$') {
      ++i;
      continue;
    }
    std::size_t resume = i + 1;
    const auto cand = candidate_at(text, i, options, resume);
    if (!cand) {
      i = resume;
      continue;
    }
    const std::string_view latex = text.substr(cand->inner_begin, cand->inner_end - cand->inner_begin);
    switch (judge(latex)) {
      case Verdict::Formula:
        found.push_back({cand->begin, cand->end});
        if (spans) {
          spans->push_back({view.body_begin(cand->begin), view.body_end(cand->end), cand->delimiter,
                            std::string(latex)});
        }
        if (stats) ++stats->spans_found;
        break;
      case Verdict::LexFailure:
        if (stats) ++stats->spans_dropped_lex_error;
        break;
      case Verdict::Empty: break;
    }
    i = cand->end;
  }
  return found;
}

bool has_word(std::string_view text) {
  return std::any_of(text.begin(), text.end(), [](char ch) {
    const auto u = static_cast<unsigned char>(ch);
    return u >= 0x80 || std::isalnum(u);
  });
}

struct Block {
  std::size_t begin;
  std::size_t end;
};

// Splits the view at blank lines that lie outside every span.
std::vector<Block> split_blocks(std::string_view text, const std::vector<ViewSpan>& spans) {
  std::vector<Block> blocks;
  std::size_t block_start = 0;
  std::size_t next_span = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    while (next_span < spans.size() && spans[next_span].end <= i) ++next_span;
    if (next_span < spans.size() && spans[next_span].begin <= i) {
      i = spans[next_span].end;
      continue;
    }
    if (blank_line_at(text, i)) {
      std::size_t j = i;
      while (j < text.size() && is_space(text[j])) ++j;
      blocks.push_back({block_start, i});
      block_start = j;
      i = j;
      continue;
    }
    ++i;
  }
  blocks.push_back({block_start, text.size()});
  return blocks;
}

std::vector<FormulaRecord> build_from_view(const PageDocument& page, const detail::TextView& view,
                                           const std::vector<FormulaSpan>& spans, const ExtractOptions& options) {
  std::vector<FormulaRecord> records;
  if (spans.empty()) return records;

  std::size_t line_no = 0;
  for (const FormulaSpan& span : spans) {
    if (!is_display(span.delimiter)) continue;
    records.push_back({page.page_id + ".line." + std::to_string(line_no++), SampleLevel::Line,
                       std::string(trim(span.latex)), page.page_id, std::nullopt});
  }

  std::vector<ViewSpan> view_spans;
  view_spans.reserve(spans.size());
  for (const FormulaSpan& span : spans) {
    view_spans.push_back({view.view_index_at(span.start), view.view_index_until(span.end)});
  }

  const std::string_view text = view.text;
  std::vector<std::string> page_blocks;
  std::size_t para_no = 0;
  for (const Block& block : split_blocks(text, view_spans)) {
    const std::string_view block_text = trim(text.substr(block.begin, block.end - block.begin));
    if (block_text.empty()) continue;
    page_blocks.emplace_back(block_text);

    std::size_t inside = 0;
    std::string outside;
    std::size_t cursor = block.begin;
    for (const ViewSpan& vs : view_spans) {
      if (vs.begin < block.begin || vs.end > block.end) continue;
      ++inside;
      outside.append(text.substr(cursor, vs.begin - cursor));
      cursor = vs.end;
    }
    outside.append(text.substr(cursor, block.end - cursor));
    if (inside > 0 && has_word(outside)) {
      records.push_back({page.page_id + ".para." + std::to_string(para_no++), SampleLevel::Paragraph,
                         std::string(block_text), page.page_id, std::nullopt});
    }
  }

  if (spans.size() >= options.page_min_spans) {
    std::string markup;
    for (const std::string& b : page_blocks) {
      if (!markup.empty()) markup += "\n\n";
      markup += b;
    }
    records.push_back({page.page_id + ".page", SampleLevel::Page, std::move(markup), page.page_id, std::nullopt});
  }
  return records;
}

}  // namespace

std::string_view delimiter_name(SpanDelimiter delimiter) {
  switch (delimiter) {
    case SpanDelimiter::InlineDollar: return "InlineDollar";
    case SpanDelimiter::DisplayDollar: return "DisplayDollar";
    case SpanDelimiter::InlineParen: return "InlineParen";
    case SpanDelimiter::DisplayBracket: return "DisplayBracket";
    case SpanDelimiter::Environment: return "Environment";
  }
  return "?";
}

bool is_display(SpanDelimiter delimiter) {
  return delimiter == SpanDelimiter::DisplayDollar || delimiter == SpanDelimiter::DisplayBracket ||
         delimiter == SpanDelimiter::Environment;
}

ExtractionStats& ExtractionStats::operator+=(const ExtractionStats& other) {
  pages += other.pages;
  spans_found += other.spans_found;
  spans_dropped_lex_error += other.spans_dropped_lex_error;
  for (std::size_t k = 0; k < records_per_level.size(); ++k) records_per_level[k] += other.records_per_level[k];
  return *this;
}

std::vector<FormulaSpan> extract_spans(const PageDocument& page, const ExtractOptions& options,
                                       ExtractionStats* stats) {
  const detail::TextView view = make_view(page);
  std::vector<FormulaSpan> spans;
  scan(view, options, stats, &spans);
  return spans;
}

std::vector<FormulaRecord> build_samples(const PageDocument& page, const std::vector<FormulaSpan>& spans,
                                         const ExtractOptions& options) {
  return build_from_view(page, make_view(page), spans, options);
}

CorpusExtraction extract_corpus(std::vector<PageDocument> pages, const ExtractOptions& options, std::size_t jobs) {
  std::sort(pages.begin(), pages.end(),
            [](const PageDocument& a, const PageDocument& b) { return a.page_id < b.page_id; });
  for (std::size_t k = 0; k < pages.size(); ++k) {
    if (pages[k].page_id.empty()) throw DataError("page with empty page_id");
    if (k > 0 && pages[k].page_id == pages[k - 1].page_id) {
      throw DataError("duplicate page_id '" + pages[k].page_id + "'");
    }
  }

  struct PageResult {
    std::vector<FormulaRecord> records;
    ExtractionStats stats;
  };
  std::vector<PageResult> results(pages.size());
  auto work = [&](std::size_t worker, std::size_t workers) {
    for (std::size_t k = worker; k < pages.size(); k += workers) {
      const detail::TextView view = make_view(pages[k]);
      std::vector<FormulaSpan> spans;
      scan(view, options, &results[k].stats, &spans);
      results[k].records = build_from_view(pages[k], view, spans, options);
    }
  };
  jobs = std::max<std::size_t>(1, std::min(jobs, pages.size()));
  if (jobs == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> threads;
    for (std::size_t w = 0; w < jobs; ++w) threads.emplace_back(work, w, jobs);
  }

  CorpusExtraction out;
  out.stats.pages = pages.size();
  for (PageResult& r : results) {
    out.stats += r.stats;
    for (FormulaRecord& rec : r.records) {
      ++out.stats.records_per_level[level_index(rec.level)];
      out.records.push_back(std::move(rec));
    }
  }
  return out;
}

std::vector<PageDocument> load_corpus(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw ConfigError("corpus directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension();
    if (ext == ".json" || ext == ".jsonl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<PageDocument> pages;
  for (const fs::path& file : files) {
    if (file.extension() == ".jsonl") {
      auto chunk = read_jsonl<PageDocument>(file);
      pages.insert(pages.end(), std::make_move_iterator(chunk.begin()), std::make_move_iterator(chunk.end()));
    } else {
      std::ifstream in(file);
      std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      pages.push_back(parse_json_line<PageDocument>(content, 1));
    }
  }
  return pages;
}

}  // namespace merkit
