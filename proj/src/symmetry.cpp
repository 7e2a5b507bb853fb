#include "ordvi/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ordvi/errors.hpp"
#include "refinement.hpp"

namespace ordvi {

double logOf(const BigInt& x) {
  if (x <= 0) throw InputError("logOf requires a positive integer");
  const std::size_t bits = boost::multiprecision::msb(x) + 1;
  if (bits <= 62) return std::log(static_cast<double>(x.convert_to<std::uint64_t>()));
  const std::size_t shift = bits - 62;
  const BigInt top = x >> shift;
  return std::log(static_cast<double>(top.convert_to<std::uint64_t>())) +
         static_cast<double>(shift) * std::log(2.0);
}

std::size_t Coloring::classCount() const {
  if (colors.empty()) return 0;
  return static_cast<std::size_t>(*std::max_element(colors.begin(), colors.end()) + 1);
}

std::vector<NodeId> Coloring::classOf(int color) const {
  std::vector<NodeId> out;
  for (std::size_t v = 0; v < colors.size(); ++v)
    if (colors[v] == color) out.push_back(static_cast<NodeId>(v));
  return out;
}

std::size_t Coloring::classSize(int color) const {
  return static_cast<std::size_t>(std::count(colors.begin(), colors.end(), color));
}

Coloring uniformColoring(std::size_t n) { return Coloring{std::vector<int>(n, 0)}; }

Coloring colorRefinement(const Graph& g, const Coloring& initial) {
  if (initial.colors.size() != g.nodeCount()) {
    throw InputError("initial coloring covers " + std::to_string(initial.colors.size()) + " of " +
                     std::to_string(g.nodeCount()) + " nodes");
  }
  if (g.nodeCount() == 0) return {};
  return Coloring{detail::refine(detail::adjacencyLists(g), initial.colors)};
}

Coloring colorRefinement(const Graph& g) { return colorRefinement(g, uniformColoring(g.nodeCount())); }

std::vector<std::size_t> OrbitPartition::cellIndex(std::size_t n) const {
  std::vector<std::size_t> idx(n, 0);
  for (std::size_t c = 0; c < cells.size(); ++c)
    for (NodeId v : cells[c]) idx[static_cast<std::size_t>(v)] = c;
  return idx;
}

namespace {

using Perm = std::vector<NodeId>;

// Orbit of `u` under the group generated by `gens`.
std::vector<bool> closure(std::size_t n, NodeId u, const std::vector<Perm>& gens) {
  std::vector<bool> in(n, false);
  std::vector<NodeId> frontier{u};
  in[static_cast<std::size_t>(u)] = true;
  while (!frontier.empty()) {
    NodeId x = frontier.back();
    frontier.pop_back();
    for (const Perm& p : gens) {
      NodeId y = p[static_cast<std::size_t>(x)];
      if (!in[static_cast<std::size_t>(y)]) {
        in[static_cast<std::size_t>(y)] = true;
        frontier.push_back(y);
      }
    }
  }
  return in;
}

// Size of u's orbit under colour-preserving automorphisms of (g, colors);
// colors must already be equitable.
std::size_t coloredOrbitSize(const Graph& g, const std::vector<int>& colors, NodeId u,
                             detail::BudgetCounter& budget) {
  const std::size_t n = g.nodeCount();
  std::vector<Perm> gens;
  std::vector<bool> orbit(n, false);
  orbit[static_cast<std::size_t>(u)] = true;
  for (std::size_t v = 0; v < n; ++v) {
    if (colors[v] != colors[static_cast<std::size_t>(u)] || orbit[v]) continue;
    if (auto p = detail::findAutomorphismMapping(g, colors, u, static_cast<NodeId>(v), budget)) {
      gens.push_back(std::move(*p));
      orbit = closure(n, u, gens);
    }
  }
  return static_cast<std::size_t>(std::count(orbit.begin(), orbit.end(), true));
}

BigInt countAutomorphisms(const Graph& g, const detail::AdjacencyLists& adj, std::vector<int> colors,
                          detail::BudgetCounter& budget) {
  BigInt total = 1;
  // Iterative descent along the stabilizer chain.
  while (true) {
    budget.tick();
    colors = detail::refine(adj, std::move(colors));
    const int k = *std::max_element(colors.begin(), colors.end()) + 1;
    std::vector<std::size_t> size(static_cast<std::size_t>(k), 0);
    for (int c : colors) ++size[static_cast<std::size_t>(c)];
    int target = -1;
    for (int c = 0; c < k; ++c) {
      if (size[static_cast<std::size_t>(c)] >= 2) {
        target = c;
        break;
      }
    }
    if (target < 0) return total;
    const auto u = static_cast<NodeId>(std::find(colors.begin(), colors.end(), target) - colors.begin());
    total *= coloredOrbitSize(g, colors, u, budget);
    colors[static_cast<std::size_t>(u)] = k;
  }
}

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent[b] = a;
  }
};

}  // namespace

BigInt automorphismCount(const Graph& g, SearchBudget budget) {
  if (g.nodeCount() <= 1) return 1;
  detail::BudgetCounter counter(budget);
  return countAutomorphisms(g, detail::adjacencyLists(g), std::vector<int>(g.nodeCount(), 0), counter);
}

OrbitPartition orbitPartition(const Graph& g, SearchBudget budget) {
  const std::size_t n = g.nodeCount();
  OrbitPartition out;
  if (n == 0) return out;
  detail::BudgetCounter counter(budget);
  const Coloring cr = colorRefinement(g);
  DisjointSets sets(n);
  for (std::size_t v = 0; v < n; ++v) {
    if (sets.find(v) != v) continue;  // v's orbit was completed by an earlier representative
    for (std::size_t w = v + 1; w < n; ++w) {
      if (cr.colors[w] != cr.colors[v] || sets.find(w) == sets.find(v)) continue;
      if (auto p = detail::findAutomorphismMapping(g, cr.colors, static_cast<NodeId>(v), static_cast<NodeId>(w),
                                                   counter)) {
        for (std::size_t i = 0; i < n; ++i) sets.unite(i, static_cast<std::size_t>((*p)[i]));
      }
    }
  }
  std::vector<std::vector<NodeId>> byRoot(n);
  for (std::size_t v = 0; v < n; ++v) byRoot[sets.find(v)].push_back(static_cast<NodeId>(v));
  for (auto& cell : byRoot)
    if (!cell.empty()) out.cells.push_back(std::move(cell));
  return out;
}

std::size_t orbitSize(const Graph& g, NodeId u, SearchBudget budget) {
  if (u < 0 || static_cast<std::size_t>(u) >= g.nodeCount()) throw InputError("node out of range");
  if (g.nodeCount() == 1) return 1;
  detail::BudgetCounter counter(budget);
  const Coloring cr = colorRefinement(g);
  return coloredOrbitSize(g, cr.colors, u, counter);
}

bool sameOrbit(const Graph& g, NodeId u, NodeId v, SearchBudget budget) {
  const auto n = g.nodeCount();
  if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= n || static_cast<std::size_t>(v) >= n) {
    throw InputError("node out of range");
  }
  if (u == v) return true;
  const Coloring cr = colorRefinement(g);
  detail::BudgetCounter counter(budget);
  return detail::findAutomorphismMapping(g, cr.colors, u, v, counter).has_value();
}

BigInt sequenceMultiplicityExact(const Graph& g, const NodeOrdering& pi, SearchBudget budget) {
  if (pi.size() != g.nodeCount()) throw InputError("ordering length does not match graph");
  BigInt total = 1;
  for (std::size_t t = 2; t <= pi.size(); ++t) {
    const Graph prefix = inducedSubgraph(g, pi.prefix(t));
    total *= orbitSize(prefix, static_cast<NodeId>(t - 1), budget);
  }
  return total;
}

namespace {

template <typename F>
void forEachCrClassSize(const Graph& g, const NodeOrdering& pi, F&& f) {
  if (pi.size() != g.nodeCount()) throw InputError("ordering length does not match graph");
  for (std::size_t t = 2; t <= pi.size(); ++t) {
    const Coloring c = colorRefinement(inducedSubgraph(g, pi.prefix(t)));
    f(c.classSize(c.colors[t - 1]));
  }
}

}  // namespace

BigInt sequenceMultiplicityCR(const Graph& g, const NodeOrdering& pi) {
  BigInt total = 1;
  forEachCrClassSize(g, pi, [&](std::size_t s) { total *= s; });
  return total;
}

double logSequenceMultiplicityCR(const Graph& g, const NodeOrdering& pi) {
  double total = 0.0;
  forEachCrClassSize(g, pi, [&](std::size_t s) { total += std::log(static_cast<double>(s)); });
  return total;
}

std::pair<bool, bool> lemma1Check(const Graph& g, NodeId u, NodeId v, SearchBudget budget) {
  if (u == v) throw InputError("lemma1Check needs two distinct nodes");
  const bool orbit = sameOrbit(g, u, v, budget);
  const bool iso = isomorphic(removeNode(g, u), removeNode(g, v));
  return {orbit, iso};
}

SymmetryReport analyzeSymmetry(const Graph& g, SearchBudget budget) {
  return SymmetryReport{automorphismCount(g, budget), orbitPartition(g, budget), colorRefinement(g)};
}

}  // namespace ordvi
