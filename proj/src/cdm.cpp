#include "merkit/bipartite_matching.hpp"
#include "merkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace merkit {

namespace {

// Breaks exact distance ties toward pairs with close indices (identity first).
constexpr double kIndexTieBreak = 1e-12;

const std::vector<GlyphBox>& scored_glyphs(const GlyphLayout& layout) {
  static const std::vector<GlyphBox> kNone;
  return layout.render_ok ? layout.glyphs : kNone;
}

double center_distance(const GlyphBox& a, const GlyphBox& b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct Edge {
  std::size_t pred;  // local index into the component's pred list
  std::size_t gt;
  double cost;
};

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

// Matches one connected component of the compatibility graph. Cardinality comes
// from augmenting paths; an assignment over the same component then picks the
// cheapest matching of that cardinality.
void match_component(const std::vector<std::size_t>& pred_ids, const std::vector<std::size_t>& gt_ids,
                     const std::vector<Edge>& edges, double tau, Matching& out) {
  BipartiteGraph graph(pred_ids.size(), gt_ids.size());
  for (const Edge& e : edges) graph.add_edge(e.pred, e.gt);
  const BipartiteMatching maximum = hopcroft_karp(graph);

  const bool pred_rows = pred_ids.size() <= gt_ids.size();
  const std::size_t rows = pred_rows ? pred_ids.size() : gt_ids.size();
  const std::size_t cols = pred_rows ? gt_ids.size() : pred_ids.size();
  // any assignment with one more real edge is cheaper than every one with fewer
  const double missing = static_cast<double>(rows) * (tau + 1.0) + 1.0;
  std::vector<std::vector<double>> cost(rows, std::vector<double>(cols, missing));
  std::vector<std::vector<bool>> real(rows, std::vector<bool>(cols, false));
  for (const Edge& e : edges) {
    const std::size_t r = pred_rows ? e.pred : e.gt;
    const std::size_t c = pred_rows ? e.gt : e.pred;
    cost[r][c] = e.cost;
    real[r][c] = true;
  }
  const auto assignment = min_cost_assignment(cost);

  std::vector<std::pair<std::size_t, std::size_t>> refined;
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t c = assignment[r];
    if (!real[r][c]) continue;
    const std::size_t p = pred_rows ? r : c;
    const std::size_t g = pred_rows ? c : r;
    refined.emplace_back(pred_ids[p], gt_ids[g]);
  }
  if (refined.size() == maximum.size) {
    out.pairs.insert(out.pairs.end(), refined.begin(), refined.end());
    return;
  }
  // numerically unreachable; keep the cardinality-correct matching
  for (std::size_t p = 0; p < pred_ids.size(); ++p) {
    if (const auto g = maximum.left_to_right[p]) out.pairs.emplace_back(pred_ids[p], gt_ids[*g]);
  }
}

void match_identity_class(const std::vector<GlyphBox>& pred, const std::vector<GlyphBox>& gt,
                          const std::vector<std::size_t>& pred_idx, const std::vector<std::size_t>& gt_idx, double tau,
                          Matching& out) {
  const std::size_t np = pred_idx.size();
  std::vector<Edge> edges;
  DisjointSets sets(np + gt_idx.size());
  for (std::size_t a = 0; a < np; ++a) {
    for (std::size_t b = 0; b < gt_idx.size(); ++b) {
      const double d = center_distance(pred[pred_idx[a]], gt[gt_idx[b]]);
      if (d > tau) continue;
      const double spread = static_cast<double>(pred_idx[a] > gt_idx[b] ? pred_idx[a] - gt_idx[b]
                                                                          : gt_idx[b] - pred_idx[a]);
      edges.push_back({a, b, d + kIndexTieBreak * spread});
      sets.unite(a, np + b);
    }
  }
  if (edges.empty()) return;

  std::map<std::size_t, std::vector<Edge>> by_component;
  for (const Edge& e : edges) by_component[sets.find(e.pred)].push_back(e);
  for (auto& [root, comp_edges] : by_component) {
    std::vector<std::size_t> local_pred;
    std::vector<std::size_t> local_gt;
    std::map<std::size_t, std::size_t> pred_slot;
    std::map<std::size_t, std::size_t> gt_slot;
    for (const Edge& e : comp_edges) {
      pred_slot.try_emplace(e.pred, 0);
      gt_slot.try_emplace(e.gt, 0);
    }
    for (auto& [idx, slot] : pred_slot) {
      slot = local_pred.size();
      local_pred.push_back(pred_idx[idx]);
    }
    for (auto& [idx, slot] : gt_slot) {
      slot = local_gt.size();
      local_gt.push_back(gt_idx[idx]);
    }
    for (Edge& e : comp_edges) {
      e.pred = pred_slot[e.pred];
      e.gt = gt_slot[e.gt];
    }
    match_component(local_pred, local_gt, comp_edges, tau, out);
  }
}

}  // namespace

Matching match_glyphs(const GlyphLayout& pred, const GlyphLayout& gt, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  if (!is_unit_box(pred.bounds)) throw UnnormalizedLayout("prediction layout is not normalized to the unit box");
  if (!is_unit_box(gt.bounds)) throw UnnormalizedLayout("ground-truth layout is not normalized to the unit box");

  const auto& pg = scored_glyphs(pred);
  const auto& gg = scored_glyphs(gt);
  std::map<std::string, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> classes;
  for (std::size_t i = 0; i < pg.size(); ++i) classes[pg[i].ch].first.push_back(i);
  for (std::size_t j = 0; j < gg.size(); ++j) classes[gg[j].ch].second.push_back(j);

  Matching out;
  for (const auto& [ch, members] : classes) {
    if (members.first.empty() || members.second.empty()) continue;
    match_identity_class(pg, gg, members.first, members.second, tau, out);
  }
  std::sort(out.pairs.begin(), out.pairs.end());
  return out;
}

CdmScore cdm(const GlyphLayout& pred, const GlyphLayout& gt, double tau) {
  const Matching matching = match_glyphs(pred, gt, tau);
  CdmScore s;
  s.matched = matching.pairs.size();
  s.pred_total = scored_glyphs(pred).size();
  s.gt_total = scored_glyphs(gt).size();
  const auto m = static_cast<double>(s.matched);
  const bool both_empty = s.pred_total == 0 && s.gt_total == 0;
  s.precision = s.pred_total > 0 ? m / static_cast<double>(s.pred_total) : (both_empty ? 1.0 : 0.0);
  s.recall = s.gt_total > 0 ? m / static_cast<double>(s.gt_total) : (both_empty ? 1.0 : 0.0);
  s.f1 = both_empty ? 1.0 : 2.0 * m / static_cast<double>(s.pred_total + s.gt_total);
  return s;
}

}  // namespace merkit
