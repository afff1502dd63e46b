#include "merkit/errors.hpp"
#include "merkit/records_io.hpp"
#include "merkit/render_bridge.hpp"

#include "generators.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace merkit;
namespace fs = std::filesystem;

namespace {

const std::string kFixtures = MERKIT_FIXTURES;

fs::path temp_file(const std::string& name) { return fs::temp_directory_path() / ("merkit_render_" + name); }

std::size_t line_count(const fs::path& path) {
  std::ifstream in(path);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

GlyphLayout layout_of(std::vector<GlyphBox> glyphs, Bounds bounds) {
  GlyphLayout l;
  l.record_id = "t";
  l.glyphs = std::move(glyphs);
  l.bounds = bounds;
  return l;
}

}  // namespace

TEST_CASE("manifest from records") {
  const std::vector<FormulaRecord> records = {
      {"a", SampleLevel::Line, "\\frac{a}{b}", "p", std::nullopt},
      {"b", SampleLevel::Paragraph, "text $x$", "p", std::nullopt},
      {"c", SampleLevel::Page, "page $y$ and $z$", "p", std::nullopt},
  };
  const fs::path path = temp_file("manifest.jsonl");
  CHECK(write_manifest(records, path) == 3);
  CHECK(line_count(path) == 3);
  const auto entries = read_manifest(path);
  REQUIRE(entries.size() == 3);
  CHECK(entries[0] == ManifestEntry{"a", "\\frac{a}{b}", true, 1.0});
  CHECK_FALSE(entries[1].display_mode);
  CHECK_FALSE(entries[2].display_mode);
  fs::remove(path);

  CHECK_THROWS_AS(make_manifest({}), std::invalid_argument);
  CHECK_THROWS_AS(make_manifest({records[0], records[0]}), std::invalid_argument);
  CHECK_THROWS_AS(make_manifest({{"e", SampleLevel::Line, "", "p", std::nullopt}}), std::invalid_argument);
  CHECK_THROWS_AS(make_manifest(records, 0.0), std::invalid_argument);
  CHECK(make_manifest(records, 2.5)[0].scale == 2.5);
}

TEST_CASE("frozen worker output ingests") {
  const auto layouts = read_layouts(kFixtures + "/layouts_worker.jsonl");
  REQUIRE(layouts.size() == 3);
  CHECK(layouts[0].record_id == "x");
  REQUIRE(layouts[0].glyphs.size() == 1);
  CHECK(layouts[0].glyphs[0].ch == "x");

  const GlyphLayout& frac = layouts[1];
  REQUIRE(frac.glyphs.size() == 3);
  const auto find = [&](std::string_view ch) {
    return *std::find_if(frac.glyphs.begin(), frac.glyphs.end(), [&](const GlyphBox& g) { return g.ch == ch; });
  };
  CHECK(find("a").y < find("b").y);
  CHECK(find(kRuleGlyph).w > find("a").w);

  CHECK_FALSE(layouts[2].render_ok);
  CHECK_FALSE(layouts[2].error_message.empty());

  const auto manifest = read_manifest(kFixtures + "/manifest_worker.jsonl");
  CHECK(check_coverage(manifest, layouts).complete());
}

TEST_CASE("missing glyphs is a schema error at its line") {
  try {
    read_layouts(kFixtures + "/layouts_missing_glyphs.jsonl");
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.line_no() == 2);
    CHECK(e.field() == "glyphs");
  }
}

TEST_CASE("layout validation names the field") {
  const auto field_of = [](const std::string& line) -> std::string {
    try {
      parse_json_line<GlyphLayout>(line, 7);
    } catch (const SchemaError& e) {
      CHECK(e.line_no() == 7);
      return e.field();
    }
    return "";
  };
  const std::string bounds = R"("bounds":{"min_x":0,"min_y":0,"max_x":10,"max_y":10})";
  CHECK(field_of(R"({"render_ok":true,)" + bounds + R"(,"glyphs":[]})") == "record_id");
  CHECK(field_of(R"({"record_id":"a","render_ok":true,"glyphs":[]})") == "bounds");
  CHECK(field_of(R"({"record_id":"a","render_ok":true,)" + bounds +
                 R"(,"glyphs":[{"ch":"ab","x":1,"y":1,"w":1,"h":1}]})") == "glyphs.ch");
  CHECK(field_of(R"({"record_id":"a","render_ok":true,)" + bounds +
                 R"(,"glyphs":[{"ch":"a","x":1,"y":1,"w":0,"h":1}]})") == "glyphs.w");
  CHECK(field_of(R"({"record_id":"a","render_ok":true,)" + bounds +
                 R"(,"glyphs":[{"ch":"a","x":1,"y":1,"w":1,"h":-2}]})") == "glyphs.h");
  CHECK(field_of(R"({"record_id":"a","render_ok":true,)" + bounds +
                 R"(,"glyphs":[{"ch":"a","x":"1","y":1,"w":1,"h":1}]})") == "glyphs.x");
  CHECK(field_of(R"({"record_id":"a","render_ok":true,)" + bounds +
                 R"(,"glyphs":[{"ch":"a","x":11,"y":1,"w":1,"h":1}]})") == "bounds");
  CHECK(field_of(R"({"record_id":"a","render_ok":false,"glyphs":[]})") == "error_message");
  CHECK(field_of(R"({"record_id":"a","render_ok":true,)" + bounds + R"(,"glyphs":[]} trailing)") == "<root>");
  CHECK(field_of(R"({"record_id":"a","render_ok":"yes",)" + bounds + R"(,"glyphs":[]})") == "render_ok");
}

TEST_CASE("coverage reports missing, unexpected and duplicated ids") {
  const std::vector<ManifestEntry> manifest = {{"a", "x", true, 1}, {"b", "y", true, 1}, {"c", "z", true, 1}};
  GlyphLayout la, lb, ld;
  la.record_id = "a";
  lb.record_id = "a";
  ld.record_id = "d";
  const CoverageReport report = check_coverage(manifest, {la, lb, ld});
  CHECK(report.missing == std::vector<std::string>{"b", "c"});
  CHECK(report.unexpected == std::vector<std::string>{"d"});
  CHECK(report.duplicated == std::vector<std::string>{"a"});
  CHECK_FALSE(report.complete());
}

TEST_CASE("normalization of a single glyph") {
  const GlyphLayout l = layout_of({{"x", 286, -215.5, 572, 453}}, {0, -442, 572, 11});
  const GlyphLayout n = normalize_layout(l);
  CHECK(n.glyphs[0].x == 0.5);
  CHECK(n.glyphs[0].y == 0.5);
  CHECK(n.glyphs[0].w == doctest::Approx(1.0));
  CHECK(n.glyphs[0].h == doctest::Approx(453.0 / 572.0));
  CHECK(is_unit_box(n.bounds));
}

TEST_CASE("normalization of two glyphs on a line") {
  const GlyphLayout l = layout_of({{"a", 10, 5, 2, 2}, {"b", 30, 5, 2, 2}}, {0, 0, 40, 10});
  const GlyphLayout n = normalize_layout(l);
  CHECK(n.glyphs[0].x == 0.0);
  CHECK(n.glyphs[1].x == 1.0);
  CHECK(n.glyphs[0].y == 0.5);
  CHECK(n.glyphs[0].w == doctest::Approx(0.1));
  CHECK(normalize_layout(n) == n);
}

TEST_CASE("normalization errors") {
  CHECK_THROWS_AS(normalize_layout(layout_of({{"a", 1, 1, 1, 1}}, {1, 1, 1, 1})), DegenerateBounds);
  GlyphLayout failed;
  failed.render_ok = false;
  CHECK_THROWS_AS(normalize_layout(failed), std::invalid_argument);
  const GlyphLayout prepared = prepare_for_scoring(failed);
  CHECK_FALSE(prepared.render_ok);
  CHECK(prepared.glyphs.empty());
  CHECK(is_unit_box(prepared.bounds));
  // an empty rendered layout normalizes to an empty unit box
  const GlyphLayout empty = normalize_layout(layout_of({}, {0, 0, 5, 5}));
  CHECK(empty.glyphs.empty());
  CHECK(is_unit_box(empty.bounds));
}

TEST_CASE("property: normalization ignores translation and uniform scale") {
  testing::Rng rng(41);
  std::uniform_real_distribution<double> scale(0.01, 100.0), shift(-1000.0, 1000.0);
  for (int i = 0; i < 500; ++i) {
    const GlyphLayout l = testing::random_raw_layout(rng, testing::uniform(rng, 1, 12), "abcxy");
    const double s = scale(rng), dx = shift(rng), dy = shift(rng);
    GlyphLayout moved = l;
    for (GlyphBox& g : moved.glyphs) {
      g.x = g.x * s + dx;
      g.y = g.y * s + dy;
      g.w *= s;
      g.h *= s;
    }
    moved.bounds = {l.bounds.min_x * s + dx, l.bounds.min_y * s + dy, l.bounds.max_x * s + dx,
                    l.bounds.max_y * s + dy};
    const GlyphLayout a = normalize_layout(l);
    const GlyphLayout b = normalize_layout(moved);
    REQUIRE(a.glyphs.size() == b.glyphs.size());
    for (std::size_t k = 0; k < a.glyphs.size(); ++k) {
      CHECK(std::abs(a.glyphs[k].x - b.glyphs[k].x) <= 1e-9);
      CHECK(std::abs(a.glyphs[k].y - b.glyphs[k].y) <= 1e-9);
      CHECK(std::abs(a.glyphs[k].w - b.glyphs[k].w) <= 1e-9);
      CHECK(std::abs(a.glyphs[k].h - b.glyphs[k].h) <= 1e-9);
      CHECK(a.glyphs[k].x >= 0.0);
      CHECK(a.glyphs[k].x <= 1.0);
      CHECK(a.glyphs[k].y >= 0.0);
      CHECK(a.glyphs[k].y <= 1.0);
    }
  }
}

TEST_CASE("layouts round trip through jsonl") {
  testing::Rng rng(42);
  std::vector<GlyphLayout> layouts;
  for (int i = 0; i < 20; ++i) layouts.push_back(testing::random_raw_layout(rng, 5, "ab√∑", "id" + std::to_string(i)));
  GlyphLayout failed;
  failed.record_id = "bad";
  failed.render_ok = false;
  failed.error_message = "Undefined control sequence";
  layouts.push_back(failed);
  const fs::path path = temp_file("layouts.jsonl");
  write_layouts(layouts, path);
  CHECK(read_layouts(path) == layouts);
  fs::remove(path);
}

TEST_CASE("worker subprocess") {
  const fs::path manifest = fs::path(kFixtures) / "manifest_worker.jsonl";
  const fs::path out = temp_file("worker_out.jsonl");
  fs::remove(out);
  // receives: --input MANIFEST --output LAYOUTS
  const int status = run_render_worker("sh -c 'cp " + kFixtures + "/layouts_worker.jsonl \"$4\"' worker", manifest, out);
  CHECK(status == 0);
  CHECK(read_layouts(out).size() == 3);
  CHECK(run_render_worker("false", manifest, out) != 0);
  fs::remove(out);
}
