#include <doctest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "ordvi/errors.hpp"
#include "ordvi/genmodels.hpp"

using namespace ordvi;

namespace {

AdjModel fairCoin(std::size_t n) {
  AdjModelConfig cfg;
  cfg.maxNodes = n;
  cfg.fixedLength = n;
  cfg.stateSize = 4;
  cfg.embedSize = 4;
  Rng init(1);
  AdjModel m(cfg, init);
  m.params().zeroValues();
  return m;
}

AdjModel smallAdj(std::size_t maxNodes, std::uint64_t seed, std::size_t fixed = 0) {
  AdjModelConfig cfg;
  cfg.maxNodes = maxNodes;
  cfg.stateSize = 6;
  cfg.embedSize = 5;
  cfg.fixedLength = fixed;
  Rng init(seed);
  return AdjModel(cfg, init);
}

SeqModel smallSeq(std::size_t maxNodes, std::uint64_t seed) {
  SeqModelConfig cfg;
  cfg.maxNodes = maxNodes;
  cfg.nodeSize = 5;
  cfg.rounds = 2;
  Rng init(seed);
  return SeqModel(cfg, init);
}

}  // namespace

TEST_SUITE("genmodels") {
  TEST_CASE("fair coin adjacency model on small graphs") {
    AdjModel m = fairCoin(3);
    const Graph k3 = completeGraph(3);
    const auto id = NodeOrdering::identity(3);
    CHECK(m.traceLogProb(k3, id) == doctest::Approx(std::log(1.0 / 8.0)).epsilon(1e-12));
    CHECK(jointLogProb(m, k3, id, MultiplicityMode::exact) == doctest::Approx(std::log(1.0 / 48.0)).epsilon(1e-12));
    CHECK(exactMarginalLogProb(m, pathGraph(3)) == doctest::Approx(std::log(3.0 / 8.0)).epsilon(1e-12));
    CHECK(exactMarginalLogProb(m, k3) == doctest::Approx(std::log(1.0 / 8.0)).epsilon(1e-12));
    CHECK_THROWS_AS(m.traceLogProb(pathGraph(2), NodeOrdering::identity(2)), InputError);
  }

  TEST_CASE("saturated edge logits") {
    for (double bias : {60.0, -60.0}) {
      AdjModel m = fairCoin(3);
      m.params().value(AdjModel::kEdgeBias).setConstant(bias);
      Rng rng(7);
      for (int i = 0; i < 20; ++i) {
        Graph g = m.sample(rng);
        CHECK(g.nodeCount() == 3);
        CHECK(g.edgeCount() == (bias > 0 ? 3U : 0U));
      }
    }
  }

  TEST_CASE("fair coin sampling frequencies") {
    AdjModel m = fairCoin(3);
    Rng rng(11);
    const int draws = 8000;
    int full = 0, edges = 0;
    for (int i = 0; i < draws; ++i) {
      Graph g = m.sample(rng);
      full += g.edgeCount() == 3;
      edges += static_cast<int>(g.edgeCount());
    }
    const double p = 1.0 / 8.0;
    CHECK(std::abs(full - draws * p) <= 3.0 * std::sqrt(draws * p * (1 - p)));
    CHECK(std::abs(edges - draws * 1.5) <= 3.0 * std::sqrt(draws * 3 * 0.25));
  }

  TEST_CASE("adjacency model sums to one over all encodings") {
    for (std::uint64_t seed : {1, 2}) {
      AdjModel m = smallAdj(4, seed);
      std::vector<double> lp;
      for (std::size_t n = 1; n <= 4; ++n)
        for (const Graph& g : oracle::allLabeledGraphs(n)) lp.push_back(m.traceLogProb(g, NodeOrdering::identity(n)));
      CHECK(lp.size() == 75);
      CHECK(std::abs(oracle::logSumExp(lp)) < 1e-10);
    }
  }

  TEST_CASE("adjacency marginals sum to one over unlabeled graphs") {
    AdjModel m = smallAdj(4, 3);
    std::vector<double> lp;
    for (std::size_t n = 1; n <= 4; ++n)
      for (const Graph& g : oracle::allUnlabeledGraphs(n)) lp.push_back(exactMarginalLogProb(m, g));
    CHECK(lp.size() == 1 + 2 + 4 + 11);
    CHECK(std::abs(oracle::logSumExp(lp)) < 1e-10);
  }

  TEST_CASE("sequence model sums to one over all labeled sequences") {
    SeqModel m = smallSeq(4, 5);
    std::vector<double> lp;
    for (std::size_t n = 1; n <= 4; ++n)
      for (const Graph& g : oracle::allLabeledGraphs(n)) lp.push_back(m.traceLogProb(g, NodeOrdering::identity(n)));
    CHECK(std::abs(oracle::logSumExp(lp)) < 1e-10);
  }

  TEST_CASE("sequence model is invariant to relabeling of a fixed trace") {
    SeqModel m = smallSeq(6, 6);
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
      Graph g = oracle::randomGraph(6, 0.5, rng);
      std::vector<NodeId> p(6);
      std::iota(p.begin(), p.end(), 0);
      std::shuffle(p.begin(), p.end(), rng);
      NodeOrdering pi(p);
      // relabel g so that pi becomes the identity; the trace is unchanged
      std::vector<std::pair<NodeId, NodeId>> e;
      for (std::size_t s = 0; s < 6; ++s)
        for (std::size_t t = s + 1; t < 6; ++t)
          if (g.hasEdge(p[s], p[t])) e.emplace_back(static_cast<NodeId>(s), static_cast<NodeId>(t));
      Graph h = Graph::fromEdges(6, e);
      CHECK(m.traceLogProb(g, pi) == doctest::Approx(m.traceLogProb(h, NodeOrdering::identity(6))).epsilon(1e-12));
    }
  }

  TEST_CASE("sequence model rejects inconsistent traces") {
    SeqModel m = smallSeq(4, 1);
    GraphSequence gs = orderingToSequence(pathGraph(3), NodeOrdering::identity(3));
    std::vector<std::vector<std::uint8_t>> trace = {{1}, {0, 1}};
    nn::Tape tape(false);
    CHECK(std::isfinite(m.logProb(tape, gs, trace).item()));
    std::vector<std::vector<std::uint8_t>> wrong = {{1}, {1, 1}};
    CHECK_THROWS_AS(m.logProb(tape, gs, wrong), InputError);
    std::vector<std::vector<std::uint8_t>> shortTrace = {{1}};
    CHECK_THROWS_AS(m.logProb(tape, gs, shortTrace), InputError);
    CHECK_THROWS_AS(m.traceLogProb(pathGraph(5), NodeOrdering::identity(5)), InputError);
  }

  TEST_CASE("samples respect size limits") {
    AdjModel a = smallAdj(5, 9);
    SeqModel s = smallSeq(5, 9);
    Rng rng(2);
    for (int i = 0; i < 50; ++i) {
      Graph g = a.sample(rng);
      CHECK(g.nodeCount() >= 1);
      CHECK(g.nodeCount() <= 5);
      Graph h = s.sample(rng);
      CHECK(h.nodeCount() >= 1);
      CHECK(h.nodeCount() <= 5);
    }
    AdjModel fixed = smallAdj(6, 4, 6);
    CHECK(fixed.sample(rng).nodeCount() == 6);
  }

  TEST_CASE("multiplicity modes") {
    const Graph c4 = cycleGraph(4);
    const auto id = NodeOrdering::identity(4);
    CHECK(logMultiplicity(ModelKind::adjacency, c4, id, MultiplicityMode::exact) == doctest::Approx(std::log(8.0)));
    CHECK(logMultiplicity(ModelKind::adjacency, c4, id, MultiplicityMode::cr) == doctest::Approx(std::log(8.0)));
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
      Graph g = oracle::randomGraph(6, 0.4, rng);
      const double ex = logMultiplicity(ModelKind::sequence, g, NodeOrdering::identity(6), MultiplicityMode::exact);
      const double cr = logMultiplicity(ModelKind::sequence, g, NodeOrdering::identity(6), MultiplicityMode::cr);
      CHECK(cr >= ex - 1e-12);
    }
  }

  TEST_CASE("exact marginal enforces its size limit") {
    AdjModel m = smallAdj(10, 1);
    CHECK_THROWS_AS(exactMarginalLogProb(m, pathGraph(9)), ResourceError);
  }

  TEST_CASE("checkpoint round trip") {
    AdjModel a = smallAdj(5, 12);
    SeqModel s = smallSeq(5, 13);
    const Graph g = cycleGraph(5);
    const NodeOrdering pi(std::vector<NodeId>{2, 0, 4, 1, 3});
    for (const GraphModel* m : {static_cast<const GraphModel*>(&a), static_cast<const GraphModel*>(&s)}) {
      auto ck = saveModel(*m, {{"note", "x"}});
      CHECK(ck["metadata"]["note"] == "x");
      auto back = loadModel(nlohmann::json::parse(ck.dump()));
      CHECK((back->kind() == m->kind()));
      CHECK(back->traceLogProb(g, pi) == m->traceLogProb(g, pi));
    }
    CHECK_THROWS_AS(loadModel(nlohmann::json{{"modelKind", "nope"}}), InputError);
    CHECK((parseModelKind("adj") == ModelKind::adjacency));
    CHECK((parseModelKind("sequence") == ModelKind::sequence));
    CHECK_THROWS_AS(parseModelKind("rnn"), InputError);
    CHECK((parseMultiplicityMode("cr") == MultiplicityMode::cr));
  }

  TEST_CASE("trace gradients are finite and tape matches the plain path") {
    AdjModel a = smallAdj(5, 3);
    const Graph g = starGraph(4);
    const auto pi = NodeOrdering::identity(5);
    nn::Tape tape;
    nn::Var lp = a.traceLogProb(tape, g, pi);
    tape.backward(lp);
    CHECK(lp.item() == a.traceLogProb(g, pi));
    for (double v : tape.flatGradient(a.params())) CHECK(std::isfinite(v));
  }
}
