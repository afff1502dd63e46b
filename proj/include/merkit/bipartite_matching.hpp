#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace merkit {

// Bipartite graph with `left` and `right` vertex sets numbered from 0.
class BipartiteGraph {
 public:
  BipartiteGraph(std::size_t left, std::size_t right) : adjacency_(left), right_(right) {}

  void add_edge(std::size_t u, std::size_t v);

  std::size_t left_size() const { return adjacency_.size(); }
  std::size_t right_size() const { return right_; }
  const std::vector<std::size_t>& neighbors(std::size_t u) const { return adjacency_[u]; }

 private:
  std::vector<std::vector<std::size_t>> adjacency_;
  std::size_t right_;
};

struct BipartiteMatching {
  std::vector<std::optional<std::size_t>> left_to_right;
  std::size_t size = 0;
};

// Maximum-cardinality matching by shortest augmenting paths (Hopcroft-Karp).
BipartiteMatching hopcroft_karp(const BipartiteGraph& graph);

// Minimum-cost assignment of every row to a distinct column (rows <= columns),
// Hungarian method with potentials. Returns the column of each row.
std::vector<std::size_t> min_cost_assignment(const std::vector<std::vector<double>>& cost);

}  // namespace merkit
