#pragma once

#include "merkit/corpus_extractor.hpp"
#include "merkit/errors.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace merkit {

// One formula handed to the render worker.
struct ManifestEntry {
  std::string record_id;
  std::string latex;
  bool display_mode = true;
  double scale = 1.0;

  bool operator==(const ManifestEntry&) const = default;
};

// Axis-aligned box; y grows downward.
struct Bounds {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
  bool operator==(const Bounds&) const = default;
};

// One rendered character: identity plus center and extent in render units.
// Horizontal rules (fraction bars, overlines) carry ch = "—".
struct GlyphBox {
  std::string ch;
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  bool operator==(const GlyphBox&) const = default;
};

struct GlyphLayout {
  std::string record_id;
  std::vector<GlyphBox> glyphs;
  Bounds bounds;
  bool render_ok = true;
  std::string error_message;

  bool operator==(const GlyphLayout&) const = default;
};

inline constexpr std::string_view kRuleGlyph = "—";

// Line records render in display mode; Paragraph and Page records as text with
// inline math. Throws std::invalid_argument on an empty list, a duplicate id, or
// empty latex.
std::vector<ManifestEntry> make_manifest(const std::vector<FormulaRecord>& records, double scale = 1.0);

// Writes make_manifest(records) as JSONL and returns the entry count.
std::size_t write_manifest(const std::vector<FormulaRecord>& records, const std::filesystem::path& path,
                           double scale = 1.0);
void write_manifest_entries(const std::vector<ManifestEntry>& entries, const std::filesystem::path& path);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

// Checks GlyphLayout invariants; throws SchemaError naming the offending field.
void validate_layout(const GlyphLayout& layout, std::size_t line_no);

// Parses and validates worker output. Layouts with render_ok = false are kept.
std::vector<GlyphLayout> read_layouts(const std::filesystem::path& path);
void write_layouts(const std::vector<GlyphLayout>& layouts, const std::filesystem::path& path);

struct CoverageReport {
  std::vector<std::string> missing;     // in the manifest, not in the layouts
  std::vector<std::string> unexpected;  // in the layouts, not in the manifest
  std::vector<std::string> duplicated;  // more than one layout line

  bool complete() const { return missing.empty() && unexpected.empty() && duplicated.empty(); }
};

CoverageReport check_coverage(const std::vector<ManifestEntry>& manifest, const std::vector<GlyphLayout>& layouts);

class DegenerateBounds : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Maps glyph centers into the unit box: the longer axis of the center spread is
// scaled to [0, 1], the shorter one is centered, aspect ratio is kept. Extents
// scale by the same factor. A layout whose centers coincide maps them to
// (0.5, 0.5) and scales extents by the longer side of its bounds. The result has
// bounds [0,1]x[0,1]. Throws DegenerateBounds when glyphs exist but the bounds
// have neither width nor height, std::invalid_argument when render_ok is false.
GlyphLayout normalize_layout(const GlyphLayout& layout);

bool is_unit_box(const Bounds& bounds, double tolerance = 1e-9);

// The layout CDM scores: normalized when rendered, otherwise an empty unit-box
// layout that keeps render_ok = false.
GlyphLayout prepare_for_scoring(const GlyphLayout& layout);

// Runs `command --input MANIFEST --output LAYOUTS` through the shell and returns
// its exit status.
int run_render_worker(const std::string& command, const std::filesystem::path& manifest,
                      const std::filesystem::path& layouts);

}  // namespace merkit
