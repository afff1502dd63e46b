#include "merkit/render_bridge.hpp"

#include "merkit/records_io.hpp"
#include "merkit/utf8.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <unordered_set>

namespace merkit {

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

}  // namespace

std::vector<ManifestEntry> make_manifest(const std::vector<FormulaRecord>& records, double scale) {
  if (records.empty()) throw std::invalid_argument("cannot build a render manifest from zero records");
  if (!(scale > 0.0)) throw std::invalid_argument("render scale must be positive");
  std::unordered_set<std::string> ids;
  std::vector<ManifestEntry> entries;
  entries.reserve(records.size());
  for (const FormulaRecord& r : records) {
    if (!ids.insert(r.record_id).second) throw std::invalid_argument("duplicate record_id '" + r.record_id + "'");
    if (r.latex.empty()) throw std::invalid_argument("record '" + r.record_id + "' has empty latex");
    entries.push_back({r.record_id, r.latex, r.level == SampleLevel::Line, scale});
  }
  return entries;
}

std::size_t write_manifest(const std::vector<FormulaRecord>& records, const std::filesystem::path& path,
                           double scale) {
  const auto entries = make_manifest(records, scale);
  write_manifest_entries(entries, path);
  return entries.size();
}

void write_manifest_entries(const std::vector<ManifestEntry>& entries, const std::filesystem::path& path) {
  write_jsonl(path, entries);
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  return read_jsonl<ManifestEntry>(path);
}

void validate_layout(const GlyphLayout& layout, std::size_t line_no) {
  if (layout.record_id.empty()) throw SchemaError(line_no, "record_id", "must be nonempty");
  for (const GlyphBox& g : layout.glyphs) {
    if (g.ch.empty() || utf8::count_scalars(g.ch) != 1) {
      throw SchemaError(line_no, "glyphs.ch", "must be exactly one character");
    }
    if (!std::isfinite(g.x) || !std::isfinite(g.y)) throw SchemaError(line_no, "glyphs.x", "non-finite center");
    if (!(g.w > 0.0) || !std::isfinite(g.w)) throw SchemaError(line_no, "glyphs.w", "must be positive");
    if (!(g.h > 0.0) || !std::isfinite(g.h)) throw SchemaError(line_no, "glyphs.h", "must be positive");
  }
  if (!layout.render_ok) return;
  const Bounds& b = layout.bounds;
  if (!(b.max_x >= b.min_x) || !(b.max_y >= b.min_y)) throw SchemaError(line_no, "bounds", "inverted bounds");
  for (const GlyphBox& g : layout.glyphs) {
    if (!(g.x > b.min_x && g.x < b.max_x && g.y > b.min_y && g.y < b.max_y)) {
      throw SchemaError(line_no, "bounds", "glyph center outside bounds");
    }
  }
}

std::vector<GlyphLayout> read_layouts(const std::filesystem::path& path) {
  return read_jsonl<GlyphLayout>(path);
}

void write_layouts(const std::vector<GlyphLayout>& layouts, const std::filesystem::path& path) {
  write_jsonl(path, layouts);
}

CoverageReport check_coverage(const std::vector<ManifestEntry>& manifest, const std::vector<GlyphLayout>& layouts) {
  CoverageReport report;
  std::set<std::string> expected;
  for (const auto& e : manifest) expected.insert(e.record_id);
  std::map<std::string, std::size_t> seen;
  for (const auto& l : layouts) ++seen[l.record_id];
  for (const auto& id : expected) {
    if (!seen.contains(id)) report.missing.push_back(id);
  }
  for (const auto& [id, count] : seen) {
    if (!expected.contains(id)) report.unexpected.push_back(id);
    if (count > 1) report.duplicated.push_back(id);
  }
  return report;
}

GlyphLayout normalize_layout(const GlyphLayout& layout) {
  if (!layout.render_ok) throw std::invalid_argument("cannot normalize a failed render");
  GlyphLayout out = layout;
  out.bounds = Bounds{0.0, 0.0, 1.0, 1.0};
  if (layout.glyphs.empty()) return out;

  const Bounds& b = layout.bounds;
  if (b.width() <= 0.0 && b.height() <= 0.0) {
    throw DegenerateBounds("layout '" + layout.record_id + "' has zero-area bounds");
  }

  double lo_x = layout.glyphs.front().x;
  double hi_x = lo_x;
  double lo_y = layout.glyphs.front().y;
  double hi_y = lo_y;
  for (const GlyphBox& g : layout.glyphs) {
    lo_x = std::min(lo_x, g.x);
    hi_x = std::max(hi_x, g.x);
    lo_y = std::min(lo_y, g.y);
    hi_y = std::max(hi_y, g.y);
  }
  const double spread_x = hi_x - lo_x;
  const double spread_y = hi_y - lo_y;
  const double longest = std::max(spread_x, spread_y);

  if (longest <= 0.0) {
    const double extent = std::max(b.width(), b.height());
    for (GlyphBox& g : out.glyphs) {
      g.x = 0.5;
      g.y = 0.5;
      g.w /= extent;
      g.h /= extent;
    }
    return out;
  }

  const double pad_x = (1.0 - spread_x / longest) / 2.0;
  const double pad_y = (1.0 - spread_y / longest) / 2.0;
  for (GlyphBox& g : out.glyphs) {
    g.x = pad_x + (g.x - lo_x) / longest;
    g.y = pad_y + (g.y - lo_y) / longest;
    g.w /= longest;
    g.h /= longest;
  }
  return out;
}

bool is_unit_box(const Bounds& bounds, double tolerance) {
  return std::abs(bounds.min_x) <= tolerance && std::abs(bounds.min_y) <= tolerance &&
         std::abs(bounds.max_x - 1.0) <= tolerance && std::abs(bounds.max_y - 1.0) <= tolerance;
}

GlyphLayout prepare_for_scoring(const GlyphLayout& layout) {
  if (layout.render_ok) return normalize_layout(layout);
  GlyphLayout out;
  out.record_id = layout.record_id;
  out.render_ok = false;
  out.error_message = layout.error_message;
  out.bounds = Bounds{0.0, 0.0, 1.0, 1.0};
  return out;
}

int run_render_worker(const std::string& command, const std::filesystem::path& manifest,
                      const std::filesystem::path& layouts) {
  const std::string line =
      command + " --input " + shell_quote(manifest.string()) + " --output " + shell_quote(layouts.string());
  const int status = std::system(line.c_str());
  if (status == -1) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace merkit
