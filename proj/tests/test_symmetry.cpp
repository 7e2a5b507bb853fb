#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "ordvi/errors.hpp"
#include "ordvi/symmetry.hpp"

using namespace ordvi;

namespace {

std::vector<NodeOrdering> allOrderings(std::size_t n) {
  std::vector<NodeId> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::vector<NodeOrdering> out;
  do out.emplace_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  return out;
}

}  // namespace

TEST_SUITE("symmetry") {
  TEST_CASE("colour refinement examples") {
    Coloring p4 = colorRefinement(pathGraph(4));
    CHECK(p4.classCount() == 2);
    CHECK(p4.colors[0] == p4.colors[3]);
    CHECK(p4.colors[1] == p4.colors[2]);
    CHECK(p4.colors[0] != p4.colors[1]);
    CHECK(colorRefinement(completeGraph(5)).classCount() == 1);
    Coloring s = colorRefinement(starGraph(3));
    CHECK(s.classCount() == 2);
    CHECK(s.classOf(s.colors[1]) == std::vector<NodeId>{1, 2, 3});
    CHECK_THROWS_AS(colorRefinement(pathGraph(3), Coloring{{0, 0}}), InputError);
  }

  TEST_CASE("colour refinement is a fixed point and label invariant") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
      Graph g = oracle::randomGraph(8, 0.3, rng);
      Coloring c = colorRefinement(g);
      CHECK(colorRefinement(g, c).classCount() == c.classCount());
      // orbit cells refine colour classes
      for (const auto& cell : orbitPartition(g).cells)
        for (NodeId v : cell) CHECK(c.colors[v] == c.colors[cell.front()]);
    }
  }

  TEST_CASE("automorphism counts") {
    CHECK(automorphismCount(completeGraph(4)) == 24);
    CHECK(automorphismCount(cycleGraph(5)) == 10);
    CHECK(automorphismCount(petersenGraph()) == 120);
    CHECK(automorphismCount(Graph(4)) == 24);
    CHECK(automorphismCount(completeGraph(25)).str() == "15511210043330985984000000");
    CHECK(logOf(automorphismCount(completeGraph(25))) == doctest::Approx(std::lgamma(26.0)).epsilon(1e-12));
  }

  TEST_CASE("automorphism counts match brute force, n <= 7") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 60; ++trial) {
      Graph g = oracle::randomGraph(2 + trial % 6, trial % 2 ? 0.3 : 0.6, rng);
      CHECK(automorphismCount(g) == oracle::automorphismCount(g));
    }
  }

  TEST_CASE("search budget raises a resource error") {
    CHECK_THROWS_AS(automorphismCount(petersenGraph(), SearchBudget{3}), ResourceError);
  }

  TEST_CASE("orbit partitions") {
    auto cells = orbitPartition(starGraph(3)).cells;
    CHECK(cells == std::vector<std::vector<NodeId>>{{0}, {1, 2, 3}});
    CHECK(orbitPartition(cycleGraph(6)).cells.size() == 1);
    CHECK(orbitPartition(pathGraph(3)).cells == std::vector<std::vector<NodeId>>{{0, 2}, {1}});
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 40; ++trial) {
      Graph g = oracle::randomGraph(6, 0.4, rng);
      auto brute = oracle::orbits(g);
      auto part = orbitPartition(g);
      auto idx = part.cellIndex(g.nodeCount());
      for (NodeId u = 0; u < 6; ++u) {
        CHECK(part.cells[idx[u]] == brute[u]);
        CHECK(orbitSize(g, u) == brute[u].size());
      }
    }
  }

  TEST_CASE("adjacency multiplicity examples") {
    CHECK(adjacencyMultiplicity(completeGraph(3)) == 6);
    CHECK(adjacencyMultiplicity(pathGraph(3)) == 2);
    CHECK(adjacencyMultiplicity(Graph(4)) == 24);
  }

  TEST_CASE("sequence multiplicity examples") {
    for (const auto& pi : allOrderings(4)) CHECK(sequenceMultiplicityExact(completeGraph(4), pi) == 24);
    CHECK(sequenceMultiplicityExact(pathGraph(3), NodeOrdering({1, 0, 2})) == 4);
    CHECK(sequenceMultiplicityExact(pathGraph(3), NodeOrdering({0, 2, 1})) == 2);
    for (const auto& pi : allOrderings(3)) CHECK(sequenceMultiplicityCR(completeGraph(3), pi) == 6);
    CHECK(sequenceMultiplicityCR(pathGraph(3), NodeOrdering({1, 0, 2})) == 4);
    CHECK(logSequenceMultiplicityCR(pathGraph(3), NodeOrdering({1, 0, 2})) == doctest::Approx(std::log(4.0)));
  }

  TEST_CASE("sequence multiplicity matches the prefix-class oracle, n <= 6") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 20; ++trial) {
      Graph g = oracle::randomGraph(3 + trial % 4, 0.5, rng);
      auto brute = oracle::sequenceClassSizes(g);
      // each ordering's class has `count` members, so sum of 1/count is the class count
      double classes = 0.0;
      for (const auto& [perm, count] : brute) {
        NodeOrdering pi(perm);
        BigInt exact = sequenceMultiplicityExact(g, pi);
        CHECK(exact == count);
        CHECK(sequenceMultiplicityCR(g, pi) >= exact);
        classes += 1.0 / static_cast<double>(count);
      }
      CHECK(classes == doctest::Approx(std::round(classes)));
    }
  }

  TEST_CASE("same orbit iff isomorphic vertex-deleted subgraphs") {
    CHECK(lemma1Check(pathGraph(3), 0, 2) == std::make_pair(true, true));
    CHECK(lemma1Check(pathGraph(3), 0, 1) == std::make_pair(false, false));
    for (NodeId u = 0; u < 4; ++u)
      for (NodeId v = u + 1; v < 4; ++v) CHECK(lemma1Check(cycleGraph(4), u, v) == std::make_pair(true, true));
    CHECK_THROWS_AS(lemma1Check(pathGraph(3), 1, 1), InputError);
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 30; ++trial) {
      Graph g = oracle::randomGraph(6, 0.5, rng);
      for (NodeId u = 0; u < 6; ++u)
        for (NodeId v = u + 1; v < 6; ++v) {
          auto [orb, iso] = lemma1Check(g, u, v);
          CHECK(orb == iso);
        }
    }
  }

  TEST_CASE("symmetry report") {
    SymmetryReport r = analyzeSymmetry(starGraph(4));
    CHECK(r.autCount == 24);
    CHECK(r.orbits.cells.size() == 2);
    CHECK(r.stableColoring.classCount() == 2);
  }
}
