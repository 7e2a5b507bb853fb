#pragma once

// Shared individualization-refinement machinery behind isomorphism testing
// and the symmetry engine.

#include <cstddef>
#include <optional>
#include <vector>

#include "ordvi/graph.hpp"
#include "ordvi/symmetry.hpp"

namespace ordvi::detail {

using AdjacencyLists = std::vector<std::vector<NodeId>>;

AdjacencyLists adjacencyLists(const Graph& g);

/// Canonical refinement to the coarsest equitable partition finer than `colors`.
std::vector<int> refine(const AdjacencyLists& adj, std::vector<int> colors);

class BudgetCounter {
 public:
  explicit BudgetCounter(SearchBudget b) : limit_(b.maxNodes) {}
  void tick();
  std::size_t used() const { return used_; }

 private:
  std::size_t limit_;
  std::size_t used_ = 0;
};

/// Colour-preserving isomorphism a -> b, where colorsA and colorsB use a shared
/// colour vocabulary. Returns the node map or nullopt.
std::optional<std::vector<NodeId>> findColoredIsomorphism(const Graph& a, const std::vector<int>& colorsA,
                                                          const Graph& b, const std::vector<int>& colorsB,
                                                          BudgetCounter& budget);

/// Colour-preserving automorphism of g (under `colors`) sending u to v.
std::optional<std::vector<NodeId>> findAutomorphismMapping(const Graph& g, const std::vector<int>& colors,
                                                           NodeId u, NodeId v, BudgetCounter& budget);

}  // namespace ordvi::detail
