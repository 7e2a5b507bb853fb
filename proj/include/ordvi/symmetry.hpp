#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ordvi/graph.hpp"

namespace ordvi {

using BigInt = boost::multiprecision::cpp_int;

/// Natural log of a positive big integer, accurate far beyond double range.
double logOf(const BigInt& x);

/// Node colors with dense ids 0..k-1.
struct Coloring {
  std::vector<int> colors;

  std::size_t classCount() const;
  /// Nodes carrying `color`, ascending.
  std::vector<NodeId> classOf(int color) const;
  std::size_t classSize(int color) const;
  friend bool operator==(const Coloring&, const Coloring&) = default;
};

Coloring uniformColoring(std::size_t n);

/// 1-WL colour refinement to a fixed point. Each round recolours v by the pair
/// (old colour, sorted multiset of neighbour colours); distinct pairs are sorted
/// lexicographically and numbered densely in that order, so the result only
/// depends on the isomorphism type of (g, initial). Throws InputError if
/// `initial` does not cover every node.
Coloring colorRefinement(const Graph& g, const Coloring& initial);
Coloring colorRefinement(const Graph& g);

/// Orbit cells, each sorted ascending, ordered by their smallest node.
struct OrbitPartition {
  std::vector<std::vector<NodeId>> cells;

  /// cell index for every node
  std::vector<std::size_t> cellIndex(std::size_t n) const;
};

/// Caps the number of individualization-refinement search nodes a single call
/// may visit. Exceeding it raises ResourceError.
struct SearchBudget {
  std::size_t maxNodes = 5'000'000;
};

/// |Aut(g)| by recursive orbit-stabilizer: |Aut| = |orbit(u)| * |Stab(u)|, with u
/// the lowest node of the first non-singleton refined cell.
BigInt automorphismCount(const Graph& g, SearchBudget budget = {});

OrbitPartition orbitPartition(const Graph& g, SearchBudget budget = {});

std::size_t orbitSize(const Graph& g, NodeId u, SearchBudget budget = {});
bool sameOrbit(const Graph& g, NodeId u, NodeId v, SearchBudget budget = {});

/// |Pi[A]|: the number of orderings producing the same adjacency matrix.
inline BigInt adjacencyMultiplicity(const Graph& g, SearchBudget budget = {}) {
  return automorphismCount(g, budget);
}

/// |Pi[G_{1:n}]| = prod_t |r(G_t, pi_t)| with exact orbits in each prefix graph.
BigInt sequenceMultiplicityExact(const Graph& g, const NodeOrdering& pi, SearchBudget budget = {});

/// beta(G_{1:n}) = prod_t |r_CR(G_t, pi_t)|, an upper bound on the exact count.
BigInt sequenceMultiplicityCR(const Graph& g, const NodeOrdering& pi);

/// log of sequenceMultiplicityCR without forming the big integer.
double logSequenceMultiplicityCR(const Graph& g, const NodeOrdering& pi);

/// (u and v share an orbit, g-u is isomorphic to g-v). Both entries always agree.
std::pair<bool, bool> lemma1Check(const Graph& g, NodeId u, NodeId v, SearchBudget budget = {});

struct SymmetryReport {
  BigInt autCount;
  OrbitPartition orbits;
  Coloring stableColoring;
};

SymmetryReport analyzeSymmetry(const Graph& g, SearchBudget budget = {});

}  // namespace ordvi
