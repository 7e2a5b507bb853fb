#include "refinement.hpp"

#include <algorithm>
#include <numeric>

#include "ordvi/errors.hpp"

namespace ordvi::detail {

AdjacencyLists adjacencyLists(const Graph& g) {
  AdjacencyLists adj(g.nodeCount());
  for (std::size_t v = 0; v < g.nodeCount(); ++v) adj[v] = g.neighbors(static_cast<NodeId>(v));
  return adj;
}

namespace {

std::size_t distinctCount(const std::vector<int>& colors) {
  std::vector<int> c = colors;
  std::sort(c.begin(), c.end());
  return static_cast<std::size_t>(std::unique(c.begin(), c.end()) - c.begin());
}

// Dense ids in increasing order of the original values.
std::vector<int> densify(const std::vector<int>& colors) {
  std::vector<int> vals = colors;
  std::sort(vals.begin(), vals.end());
  vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
  std::vector<int> out(colors.size());
  for (std::size_t i = 0; i < colors.size(); ++i) {
    out[i] = static_cast<int>(std::lower_bound(vals.begin(), vals.end(), colors[i]) - vals.begin());
  }
  return out;
}

}  // namespace

std::vector<int> refine(const AdjacencyLists& adj, std::vector<int> colors) {
  const std::size_t n = adj.size();
  colors = densify(colors);
  std::size_t classes = distinctCount(colors);
  std::vector<std::vector<int>> sig(n);
  std::vector<std::size_t> order(n);
  while (true) {
    for (std::size_t v = 0; v < n; ++v) {
      auto& s = sig[v];
      s.clear();
      s.reserve(adj[v].size() + 1);
      for (NodeId u : adj[v]) s.push_back(colors[static_cast<std::size_t>(u)]);
      std::sort(s.begin(), s.end());
      s.insert(s.begin(), colors[v]);
    }
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sig[a] < sig[b]; });
    std::vector<int> next(n);
    int id = -1;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == 0 || sig[order[k]] != sig[order[k - 1]]) ++id;
      next[order[k]] = id;
    }
    const auto nextClasses = static_cast<std::size_t>(id + 1);
    colors = std::move(next);
    if (nextClasses == classes) return colors;
    classes = nextClasses;
  }
}

void BudgetCounter::tick() {
  if (++used_ > limit_) {
    throw ResourceError("symmetry search exceeded its budget of " + std::to_string(limit_) + " nodes");
  }
}

namespace {

struct UnionSearch {
  const Graph& a;
  const Graph& b;
  AdjacencyLists adj;  // disjoint union, a's nodes first
  std::size_t n;
  BudgetCounter& budget;

  std::optional<std::vector<NodeId>> run(std::vector<int> colors) {
    budget.tick();
    colors = refine(adj, std::move(colors));
    const int k = *std::max_element(colors.begin(), colors.end()) + 1;
    std::vector<std::size_t> left(static_cast<std::size_t>(k), 0), right(static_cast<std::size_t>(k), 0);
    for (std::size_t v = 0; v < n; ++v) ++left[static_cast<std::size_t>(colors[v])];
    for (std::size_t v = n; v < 2 * n; ++v) ++right[static_cast<std::size_t>(colors[v])];
    if (left != right) return std::nullopt;

    int target = -1;
    for (int c = 0; c < k; ++c) {
      if (left[static_cast<std::size_t>(c)] >= 2) {
        target = c;
        break;
      }
    }
    if (target < 0) return extract(colors, k);

    NodeId u = -1;
    for (std::size_t v = 0; v < n; ++v) {
      if (colors[v] == target) {
        u = static_cast<NodeId>(v);
        break;
      }
    }
    for (std::size_t v = n; v < 2 * n; ++v) {
      if (colors[v] != target) continue;
      std::vector<int> next = colors;
      next[static_cast<std::size_t>(u)] = k;
      next[v] = k;
      if (auto found = run(std::move(next))) return found;
    }
    return std::nullopt;
  }

  std::optional<std::vector<NodeId>> extract(const std::vector<int>& colors, int k) {
    std::vector<NodeId> rightOf(static_cast<std::size_t>(k), -1);
    for (std::size_t v = n; v < 2 * n; ++v) rightOf[static_cast<std::size_t>(colors[v])] = static_cast<NodeId>(v - n);
    std::vector<NodeId> map(n);
    for (std::size_t v = 0; v < n; ++v) map[v] = rightOf[static_cast<std::size_t>(colors[v])];
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (a.hasEdge(static_cast<NodeId>(i), static_cast<NodeId>(j)) != b.hasEdge(map[i], map[j])) {
          return std::nullopt;
        }
      }
    }
    return map;
  }
};

}  // namespace

std::optional<std::vector<NodeId>> findColoredIsomorphism(const Graph& a, const std::vector<int>& colorsA,
                                                          const Graph& b, const std::vector<int>& colorsB,
                                                          BudgetCounter& budget) {
  const std::size_t n = a.nodeCount();
  if (b.nodeCount() != n || colorsA.size() != n || colorsB.size() != n) return std::nullopt;
  if (n == 0) return std::vector<NodeId>{};
  UnionSearch s{a, b, AdjacencyLists(2 * n), n, budget};
  for (std::size_t v = 0; v < n; ++v) {
    s.adj[v] = a.neighbors(static_cast<NodeId>(v));
    for (NodeId u : b.neighbors(static_cast<NodeId>(v))) s.adj[n + v].push_back(static_cast<NodeId>(n) + u);
  }
  std::vector<int> colors(2 * n);
  std::copy(colorsA.begin(), colorsA.end(), colors.begin());
  std::copy(colorsB.begin(), colorsB.end(), colors.begin() + static_cast<std::ptrdiff_t>(n));
  return s.run(std::move(colors));
}

std::optional<std::vector<NodeId>> findAutomorphismMapping(const Graph& g, const std::vector<int>& colors,
                                                           NodeId u, NodeId v, BudgetCounter& budget) {
  const auto su = static_cast<std::size_t>(u);
  const auto sv = static_cast<std::size_t>(v);
  if (colors[su] != colors[sv]) return std::nullopt;
  const int fresh = *std::max_element(colors.begin(), colors.end()) + 1;
  std::vector<int> left = colors;
  std::vector<int> right = colors;
  left[su] = fresh;
  right[sv] = fresh;
  return findColoredIsomorphism(g, left, g, right, budget);
}

}  // namespace ordvi::detail

namespace ordvi {

std::optional<std::vector<NodeId>> findIsomorphism(const Graph& a, const Graph& b) {
  if (a.nodeCount() != b.nodeCount() || a.edgeCount() != b.edgeCount()) return std::nullopt;
  if (degreeSequence(a) != degreeSequence(b)) return std::nullopt;
  detail::BudgetCounter budget(SearchBudget{});
  std::vector<int> zeros(a.nodeCount(), 0);
  return detail::findColoredIsomorphism(a, zeros, b, zeros, budget);
}

bool isomorphic(const Graph& a, const Graph& b) { return findIsomorphism(a, b).has_value(); }

}  // namespace ordvi
