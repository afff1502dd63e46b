#include "merkit/bipartite_matching.hpp"

#include <limits>
#include <queue>
#include <stdexcept>

namespace merkit {

void BipartiteGraph::add_edge(std::size_t u, std::size_t v) {
  if (u >= adjacency_.size() || v >= right_) throw std::out_of_range("bipartite edge endpoint out of range");
  adjacency_[u].push_back(v);
}

namespace {

constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max();

class HopcroftKarp {
 public:
  explicit HopcroftKarp(const BipartiteGraph& g)
      : g_(g), match_left_(g.left_size(), kInf), match_right_(g.right_size(), kInf), dist_(g.left_size()) {}

  BipartiteMatching run() {
    std::size_t size = 0;
    while (layer()) {
      for (std::size_t u = 0; u < g_.left_size(); ++u) {
        if (match_left_[u] == kInf && augment(u)) ++size;
      }
    }
    BipartiteMatching out;
    out.size = size;
    out.left_to_right.resize(g_.left_size());
    for (std::size_t u = 0; u < g_.left_size(); ++u) {
      if (match_left_[u] != kInf) out.left_to_right[u] = match_left_[u];
    }
    return out;
  }

 private:
  // BFS from free left vertices; true when some free right vertex is reachable.
  bool layer() {
    std::queue<std::size_t> queue;
    for (std::size_t u = 0; u < g_.left_size(); ++u) {
      if (match_left_[u] == kInf) {
        dist_[u] = 0;
        queue.push(u);
      } else {
        dist_[u] = kInf;
      }
    }
    bool found = false;
    while (!queue.empty()) {
      const std::size_t u = queue.front();
      queue.pop();
      for (std::size_t v : g_.neighbors(u)) {
        const std::size_t w = match_right_[v];
        if (w == kInf) {
          found = true;
        } else if (dist_[w] == kInf) {
          dist_[w] = dist_[u] + 1;
          queue.push(w);
        }
      }
    }
    return found;
  }

  // NOLINTNEXTLINE(misc-no-recursion)
  bool augment(std::size_t u) {
    for (std::size_t v : g_.neighbors(u)) {
      const std::size_t w = match_right_[v];
      if (w == kInf || (dist_[w] == dist_[u] + 1 && augment(w))) {
        match_left_[u] = v;
        match_right_[v] = u;
        return true;
      }
    }
    dist_[u] = kInf;
    return false;
  }

  const BipartiteGraph& g_;
  std::vector<std::size_t> match_left_;
  std::vector<std::size_t> match_right_;
  std::vector<std::size_t> dist_;
};

}  // namespace

BipartiteMatching hopcroft_karp(const BipartiteGraph& graph) { return HopcroftKarp(graph).run(); }

std::vector<std::size_t> min_cost_assignment(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  if (n == 0) return {};
  const std::size_t m = cost.front().size();
  if (m < n) throw std::invalid_argument("min_cost_assignment needs rows <= columns");
  constexpr double inf = std::numeric_limits<double>::infinity();

  // 1-based potentials; column 0 is the virtual start.
  std::vector<double> u(n + 1, 0.0);
  std::vector<double> v(m + 1, 0.0);
  std::vector<std::size_t> row_of(m + 1, 0);
  std::vector<std::size_t> way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    row_of[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = row_of[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[row_of[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (row_of[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      row_of[j0] = row_of[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assignment(n, 0);
  for (std::size_t j = 1; j <= m; ++j) {
    if (row_of[j] != 0) assignment[row_of[j] - 1] = j - 1;
  }
  return assignment;
}

}  // namespace merkit
