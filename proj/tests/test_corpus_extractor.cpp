#include "merkit/corpus_extractor.hpp"
#include "merkit/errors.hpp"
#include "merkit/latex_lexer.hpp"
#include "merkit/records_io.hpp"

#include "generators.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace merkit;

namespace {

PageDocument html(std::string body, std::string id = "p") { return {std::move(id), "", std::move(body), PageFormat::Html}; }
PageDocument md(std::string body, std::string id = "p") {
  return {std::move(id), "", std::move(body), PageFormat::Markdown};
}

std::size_t count_level(const std::vector<FormulaRecord>& records, SampleLevel level) {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [&](const FormulaRecord& r) { return r.level == level; }));
}

}  // namespace

TEST_CASE("inline dollar inside html") {
  const auto spans = extract_spans(html("<p>Let $x$ grow.</p>"));
  REQUIRE(spans.size() == 1);
  CHECK(spans[0].delimiter == SpanDelimiter::InlineDollar);
  CHECK(spans[0].latex == "x");
  CHECK(spans[0].start == 7);
  CHECK(spans[0].end == 10);
}

TEST_CASE("display dollar") {
  const auto spans = extract_spans(md("$$E=mc^2$$"));
  REQUIRE(spans.size() == 1);
  CHECK(spans[0] == FormulaSpan{0, 10, SpanDelimiter::DisplayDollar, "E=mc^2"});
}

TEST_CASE("paren, bracket and environment delimiters") {
  const auto spans = extract_spans(md("a \\(x\\) b \\[y\\] c \\begin{equation*}z\\end{equation*}"));
  REQUIRE(spans.size() == 3);
  CHECK(spans[0] == FormulaSpan{2, 7, SpanDelimiter::InlineParen, "x"});
  CHECK(spans[1] == FormulaSpan{10, 15, SpanDelimiter::DisplayBracket, "y"});
  CHECK(spans[2] ==
        FormulaSpan{18, 51, SpanDelimiter::Environment, "\\begin{equation*}z\\end{equation*}"});
}

TEST_CASE("fixture page with two inline, one display and one align span") {
  std::ifstream in(std::string(MERKIT_FIXTURES) + "/page_mixed.html", std::ios::binary);
  const std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  REQUIRE(body.size() == 275);
  ExtractionStats stats;
  const auto spans = extract_spans(html(body, "mixed"), {}, &stats);
  // offsets counted by hand on the fixture bytes
  REQUIRE(spans.size() == 4);
  CHECK(spans[0] == FormulaSpan{96, 99, SpanDelimiter::InlineDollar, "x"});
  CHECK(spans[1] == FormulaSpan{117, 125, SpanDelimiter::InlineDollar, "E=mc^2"});
  CHECK(spans[2] == FormulaSpan{145, 166, SpanDelimiter::DisplayDollar, "\\int_0^1 f(t)\\,dt"});
  CHECK(spans[3] == FormulaSpan{176, 226, SpanDelimiter::Environment,
                                "\\begin{align} a &= b \\\\ c &= d \\end{align}"});
  CHECK(stats.spans_found == 4);
  CHECK(stats.spans_dropped_lex_error == 0);

  const auto records = build_samples(html(body, "mixed"), spans);
  REQUIRE(records.size() == 4);
  CHECK(records[0] == FormulaRecord{"mixed.line.0", SampleLevel::Line, "\\int_0^1 f(t)\\,dt", "mixed", std::nullopt});
  CHECK(records[1].record_id == "mixed.line.1");
  CHECK(records[1].latex == "\\begin{align} a &= b \\\\ c &= d \\end{align}");
  CHECK(records[2] == FormulaRecord{"mixed.para.0", SampleLevel::Paragraph,
                                    "Let $x$ be the speed and $E=mc^2$ the energy.", "mixed", std::nullopt});
  CHECK(records[3].record_id == "mixed.page");
  CHECK(records[3].level == SampleLevel::Page);
  CHECK(extract_spans(md(records[3].latex)).size() == 4);
}

TEST_CASE("script and style content is ignored") {
  CHECK(extract_spans(html("<script>let a = '$x$';</script><style>p{}</style>text")).empty());
}

TEST_CASE("entities decode inside formulas") {
  const auto spans = extract_spans(html("<p>$a &lt; b$</p>"));
  REQUIRE(spans.size() == 1);
  CHECK(spans[0].latex == "a < b");
  CHECK(spans[0].start == 3);
  CHECK(spans[0].end == 13);
}

TEST_CASE("currency is not math") {
  CHECK(extract_spans(md("It costs $5 and $7 today.")).empty());
  CHECK(extract_spans(md("Prices: $ 5 or 6$")).empty());
  CHECK(extract_spans(md("From $10 to $20.")).empty());
  const auto spans = extract_spans(md("Both $a$ and $b$."));
  CHECK(spans.size() == 2);
}

TEST_CASE("escaped dollars and code are skipped") {
  CHECK(extract_spans(md("Pay \\$5 and \\$6 now.")).empty());
  CHECK(extract_spans(md("Use `$x$` in code.")).empty());
  CHECK(extract_spans(md("```\n$$a$$\n```\n")).empty());
  const auto spans = extract_spans(md("```\n$a$\n```\n\nreal $b$"));
  REQUIRE(spans.size() == 1);
  CHECK(spans[0].latex == "b");
}

TEST_CASE("inline math stops at a blank line and at the length limit") {
  CHECK(extract_spans(md("$a\n\nb$")).empty());
  ExtractOptions tight;
  tight.max_inline_bytes = 3;
  CHECK(extract_spans(md("$abcdef$"), tight).empty());
  CHECK(extract_spans(md("$abc$"), tight).size() == 1);
}

TEST_CASE("spans that do not lex are dropped and counted") {
  ExtractionStats stats;
  const auto spans = extract_spans(md("bad $\\frac{a$ then good $b$"), {}, &stats);
  REQUIRE(spans.size() == 1);
  CHECK(spans[0].latex == "b");
  CHECK(stats.spans_dropped_lex_error == 1);
  CHECK(stats.spans_found == 1);
}

TEST_CASE("nested environments inside display math stay one span") {
  const auto spans = extract_spans(md("$$\\begin{aligned}a&=b\\\\c&=d\\end{aligned}$$ and \\begin{equation}"
                                      "\\begin{equation}x\\end{equation}\\end{equation}"));
  REQUIRE(spans.size() == 2);
  CHECK(spans[0].delimiter == SpanDelimiter::DisplayDollar);
  CHECK(spans[1].delimiter == SpanDelimiter::Environment);
  CHECK(spans[1].end == 108);
}

TEST_CASE("a lone display formula is one line sample") {
  const PageDocument page = md("$$\\sum_i x_i$$", "solo");
  const auto records = build_samples(page, extract_spans(page));
  REQUIRE(records.size() == 1);
  CHECK(records[0].level == SampleLevel::Line);
  CHECK(records[0].record_id == "solo.line.0");
  CHECK(records[0].latex == "\\sum_i x_i");
  CHECK(records[0].source_page_id == "solo");
}

TEST_CASE("paragraph keeps the interleaved text") {
  const PageDocument page = md("the energy $E=mc^2$ follows", "e");
  const auto records = build_samples(page, extract_spans(page));
  REQUIRE(records.size() == 1);
  CHECK(records[0].level == SampleLevel::Paragraph);
  CHECK(records[0].latex == "the energy $E=mc^2$ follows");
}

TEST_CASE("empty page has no records") {
  const PageDocument page = html("", "empty");
  CHECK(build_samples(page, extract_spans(page)).empty());
}

TEST_CASE("page threshold is configurable") {
  const PageDocument page = md("one $a$ here\n\nand $b$ there", "t");
  const auto spans = extract_spans(page);
  CHECK(count_level(build_samples(page, spans), SampleLevel::Page) == 1);
  CHECK(count_level(build_samples(page, spans), SampleLevel::Paragraph) == 2);
  ExtractOptions strict;
  strict.page_min_spans = 3;
  CHECK(count_level(build_samples(page, spans, strict), SampleLevel::Page) == 0);
}

TEST_CASE("line records re-extract to themselves") {
  testing::Rng rng(21);
  for (int i = 0; i < 500; ++i) {
    const PageDocument page = testing::random_page(rng, "r" + std::to_string(i));
    for (const FormulaRecord& r : build_samples(page, extract_spans(page))) {
      if (r.level != SampleLevel::Line) continue;
      const auto again = extract_spans(md("$$" + r.latex + "$$"));
      if (r.latex.find("$$") != std::string::npos) continue;
      INFO(r.latex);
      REQUIRE(again.size() == 1);
      CHECK(again[0].latex == r.latex);
    }
  }
}

TEST_CASE("fuzzed pages give sorted, disjoint, lexable spans") {
  testing::Rng rng(22);
  for (int i = 0; i < 2000; ++i) {
    const PageDocument page = testing::random_page(rng, "f");
    const auto spans = extract_spans(page);
    for (std::size_t k = 0; k < spans.size(); ++k) {
      CHECK(spans[k].start < spans[k].end);
      CHECK(spans[k].end <= page.body.size());
      CHECK(latex::try_tokenize(spans[k].latex));
      if (k > 0) CHECK(spans[k - 1].end <= spans[k].start);
    }
  }
}

TEST_CASE("corpus extraction is ordered by page id and independent of jobs") {
  testing::Rng rng(23);
  std::vector<PageDocument> pages;
  for (int i = 0; i < 50; ++i) pages.push_back(testing::random_page(rng, "pg" + std::to_string(49 - i)));
  const auto serial = extract_corpus(pages, {}, 1);
  const auto parallel = extract_corpus(pages, {}, 4);
  CHECK(serial.records == parallel.records);
  CHECK(serial.stats.spans_found == parallel.stats.spans_found);
  CHECK(serial.stats.pages == 50);
  for (std::size_t k = 1; k < serial.records.size(); ++k) {
    CHECK(serial.records[k - 1].source_page_id <= serial.records[k].source_page_id);
  }
  std::size_t lines = 0;
  std::size_t display = 0;
  for (const auto& p : pages) {
    for (const auto& s : extract_spans(p)) display += is_display(s.delimiter) ? 1 : 0;
  }
  for (const auto& r : serial.records) lines += r.level == SampleLevel::Line ? 1 : 0;
  CHECK(lines == display);
  CHECK(serial.stats.records_per_level[0] == lines);
}

TEST_CASE("duplicate or empty page ids are data errors") {
  CHECK_THROWS_AS(extract_corpus({md("$a$", "x"), md("$b$", "x")}), DataError);
  CHECK_THROWS_AS(extract_corpus({md("$a$", "")}), DataError);
}

TEST_CASE("load corpus from json and jsonl files") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "merkit_corpus_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "a.json") << R"({"page_id":"one","url":"u","format":"markdown","body":"$$x$$"})";
  std::ofstream(dir / "b.jsonl") << R"({"page_id":"two","url":"","format":"html","body":"<p>$y$ z</p>"})" << "\n\n"
                                 << R"({"page_id":"three","url":"","format":"html","body":""})" << "\n";
  std::ofstream(dir / "ignored.txt") << "nothing";
  const auto pages = load_corpus(dir);
  REQUIRE(pages.size() == 3);
  CHECK(pages[0].page_id == "one");
  CHECK(pages[0].format == PageFormat::Markdown);
  CHECK(pages[2].page_id == "three");
  std::ofstream(dir / "c.jsonl") << R"({"page_id":"four","format":"pdf","body":""})" << "\n";
  try {
    load_corpus(dir);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.line_no() == 1);
    CHECK(e.field() == "format");
  }
  CHECK_THROWS_AS(load_corpus(dir / "missing"), ConfigError);
  fs::remove_all(dir);
}
