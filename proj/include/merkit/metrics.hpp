#pragma once

#include "merkit/latex_lexer.hpp"
#include "merkit/render_bridge.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace merkit {

inline constexpr double kDefaultTau = 0.25;

// Normalized edit distance in [0, 1]; lower is better.
struct EdScore {
  double value = 0.0;
};

struct EdOptions {
  // Compare canonical forms (tokenize, normalize, detokenize) rather than raw text.
  bool normalize = true;
  latex::NormalizeOptions normalization;
};

// Levenshtein distance over Unicode scalars (unit costs), bit-parallel.
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);

// The string an ED input is compared as: its canonical form when `options.normalize`
// is set and it lexes, the raw input otherwise.
std::string ed_text(std::string_view latex, const EdOptions& options = {});

// levenshtein / max length over the scalars of ed_text(pred), ed_text(gt);
// 0 when both are empty.
EdScore edit_distance(std::string_view pred, std::string_view gt, const EdOptions& options = {});

// Character Detection Matching score.
struct CdmScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t matched = 0;
  std::size_t pred_total = 0;
  std::size_t gt_total = 0;
};

// (pred glyph index, gt glyph index) pairs, sorted by pred index.
struct Matching {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

class UnnormalizedLayout : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Maximum-cardinality matching between glyphs of equal character identity whose
// normalized centers lie within `tau`; among maximum matchings the one with the
// least total center distance. Both layouts must have unit-box bounds.
Matching match_glyphs(const GlyphLayout& pred, const GlyphLayout& gt, double tau = kDefaultTau);

// Precision/recall/F1 of match_glyphs. A layout with render_ok = false counts as
// zero glyphs; two empty layouts score 1.
CdmScore cdm(const GlyphLayout& pred, const GlyphLayout& gt, double tau = kDefaultTau);

}  // namespace merkit
