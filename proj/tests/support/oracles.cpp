#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace merkit::testing {

std::size_t dp_levenshtein(std::u32string_view a, std::u32string_view b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, sub});
    }
  }
  return d[a.size()][b.size()];
}

namespace {

struct Search {
  const std::vector<GlyphBox>& pred;
  const std::vector<GlyphBox>& gt;
  double tau;
  std::size_t best_count = 0;
  double best_cost = 0.0;

  // Tries every choice for pred glyph i: unmatched, or any free compatible gt glyph.
  void visit(std::size_t i, std::vector<bool>& used, std::size_t count, double cost) {
    if (i == pred.size()) {
      if (count > best_count || (count == best_count && cost < best_cost)) {
        best_count = count;
        best_cost = cost;
      }
      return;
    }
    visit(i + 1, used, count, cost);
    for (std::size_t j = 0; j < gt.size(); ++j) {
      if (used[j] || pred[i].ch != gt[j].ch) continue;
      const double d = std::hypot(pred[i].x - gt[j].x, pred[i].y - gt[j].y);
      if (d > tau) continue;
      used[j] = true;
      visit(i + 1, used, count + 1, cost + d);
      used[j] = false;
    }
  }
};

}  // namespace

BruteForceMatching brute_force_matching(const GlyphLayout& pred, const GlyphLayout& gt, double tau) {
  static const std::vector<GlyphBox> kNone;
  const auto& p = pred.render_ok ? pred.glyphs : kNone;
  const auto& g = gt.render_ok ? gt.glyphs : kNone;
  if (p.size() > 10 || g.size() > 10) throw std::invalid_argument("brute force is limited to 10 glyphs per side");
  Search search{p, g, tau};
  std::vector<bool> used(g.size(), false);
  search.visit(0, used, 0, 0.0);
  return {search.best_count, search.best_cost};
}

}  // namespace merkit::testing
