#include <doctest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "ordvi/errors.hpp"
#include "ordvi/numerics.hpp"
#include "ordvi/posterior.hpp"

using namespace ordvi;

namespace {

OrderPosterior smallPosterior(std::uint64_t seed) {
  PosteriorConfig cfg;
  cfg.layers = 2;
  cfg.heads = 2;
  cfg.headWidth = 3;
  Rng init(seed);
  return OrderPosterior(cfg, init);
}

std::vector<NodeOrdering> allOrderings(std::size_t n) {
  std::vector<NodeId> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::vector<NodeOrdering> out;
  do out.emplace_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  return out;
}

}  // namespace

TEST_SUITE("posterior") {
  TEST_CASE("uniform orderings") {
    UniformOrdering u;
    const Graph g = pathGraph(4);
    CHECK(u.logProb(g, NodeOrdering::identity(4)) == doctest::Approx(-std::log(24.0)));
    CHECK_THROWS_AS(u.logProb(g, NodeOrdering::identity(3)), InputError);
    Rng rng(1);
    std::map<NodeOrdering, int> counts;
    const int draws = 6000;
    for (int i = 0; i < draws; ++i) {
      auto s = u.sample(pathGraph(3), rng);
      CHECK(s.logQ == doctest::Approx(-std::log(6.0)));
      ++counts[s.pi];
    }
    CHECK(counts.size() == 6);
    const double p = 1.0 / 6.0;
    for (auto& [pi, c] : counts) CHECK(std::abs(c - draws * p) <= 3.5 * std::sqrt(draws * p * (1 - p)));
  }

  TEST_CASE("tabulated orderings") {
    const NodeOrdering a(std::vector<NodeId>{0, 1, 2}), b(std::vector<NodeId>{2, 1, 0}),
        c(std::vector<NodeId>{1, 0, 2});
    TabulatedOrdering q({{a, 3.0}, {b, 1.0}, {c, 0.0}});
    const Graph g = pathGraph(3);
    CHECK(q.logProb(g, a) == doctest::Approx(std::log(0.75)));
    CHECK(q.logProb(g, b) == doctest::Approx(std::log(0.25)));
    CHECK(std::isinf(q.logProb(g, c)));
    Rng rng(3);
    int na = 0;
    const int draws = 4000;
    for (int i = 0; i < draws; ++i) {
      auto s = q.sample(g, rng);
      CHECK(s.pi != c);
      na += s.pi == a;
    }
    CHECK(std::abs(na - draws * 0.75) <= 3.0 * std::sqrt(draws * 0.75 * 0.25));
    CHECK_THROWS_AS(TabulatedOrdering({{a, 0.0}}), InputError);
    CHECK_THROWS_AS(TabulatedOrdering({{a, -1.0}}), InputError);
  }

  TEST_CASE("positional embedding values") {
    auto pe = positionalEmbedding(2, 6);
    CHECK(pe(0, 0) == doctest::Approx(std::sin(2.0)));
    CHECK(pe(0, 1) == doctest::Approx(std::cos(2.0)));
    CHECK(pe(0, 2) == doctest::Approx(std::sin(2.0 * std::pow(10000.0, -2.0 / 6.0))));
    CHECK(positionalEmbedding(1, 4) != positionalEmbedding(2, 4));
  }

  TEST_CASE("learned posterior is normalized over all orderings") {
    OrderPosterior q = smallPosterior(4);
    std::mt19937_64 rng(9);
    for (std::size_t n = 1; n <= 5; ++n) {
      for (int trial = 0; trial < 3; ++trial) {
        Graph g = oracle::randomGraph(n, 0.5, rng);
        std::vector<double> lp;
        for (const auto& pi : allOrderings(n)) lp.push_back(q.logProb(g, pi));
        CHECK(std::abs(oracle::logSumExp(lp)) < 1e-10);
      }
    }
  }

  TEST_CASE("sampled log q agrees with teacher forcing") {
    OrderPosterior q = smallPosterior(5);
    Rng rng(2);
    const Graph g = petersenGraph();
    for (int i = 0; i < 5; ++i) {
      auto s = q.sample(g, rng);
      CHECK(s.pi.size() == 10);
      CHECK(s.stepLogProbs.size() == 10);
      CHECK(s.stepLogProbs.back() == 0.0);
      CHECK(s.logQ == doctest::Approx(q.logProb(g, s.pi)).epsilon(1e-12));
      CHECK(std::accumulate(s.stepLogProbs.begin(), s.stepLogProbs.end(), 0.0) == doctest::Approx(s.logQ));
    }
  }

  TEST_CASE("sample frequencies follow the posterior") {
    OrderPosterior q = smallPosterior(6);
    q.params().value(OrderPosterior::kHeadWeight) *= 20.0;
    const Graph g = starGraph(2);
    Rng rng(8);
    std::map<NodeOrdering, int> counts;
    const int draws = 6000;
    for (int i = 0; i < draws; ++i) ++counts[q.sample(g, rng).pi];
    for (const auto& pi : allOrderings(3)) {
      const double p = std::exp(q.logProb(g, pi));
      CHECK(std::abs(counts[pi] - draws * p) <= 3.5 * std::sqrt(draws * p * (1 - p)) + 1.0);
    }
  }

  TEST_CASE("zero head gives the uniform distribution") {
    OrderPosterior q = smallPosterior(7);
    q.params().value(OrderPosterior::kHeadWeight).setZero();
    const Graph g = cycleGraph(5);
    for (const auto& pi : allOrderings(5)) CHECK(q.logProb(g, pi) == doctest::Approx(-logFactorial(5)));
  }

  TEST_CASE("posterior is equivariant under relabeling") {
    OrderPosterior q = smallPosterior(8);
    std::mt19937_64 rng(4);
    const Graph g = oracle::randomGraph(6, 0.5, rng);
    std::vector<NodeId> sigma = {4, 2, 0, 5, 1, 3};
    std::vector<std::pair<NodeId, NodeId>> e;
    for (auto [u, v] : g.edges()) e.emplace_back(std::min(sigma[u], sigma[v]), std::max(sigma[u], sigma[v]));
    const Graph h = Graph::fromEdges(6, e);
    for (const auto& pi : {NodeOrdering::identity(6), NodeOrdering(std::vector<NodeId>{3, 1, 5, 0, 2, 4})}) {
      std::vector<NodeId> mapped;
      for (NodeId v : pi.perm()) mapped.push_back(sigma[v]);
      CHECK(q.logProb(g, pi) == doctest::Approx(q.logProb(h, NodeOrdering(mapped))).epsilon(1e-12));
    }
  }

  TEST_CASE("prefix validation and checkpoints") {
    OrderPosterior q = smallPosterior(9);
    const Graph g = pathGraph(4);
    nn::Tape tape(false);
    std::vector<NodeId> bad = {1, 1};
    CHECK_THROWS_AS(q.stepLogits(tape, g, bad), InputError);
    std::vector<NodeId> full = {0, 1, 2, 3};
    CHECK_THROWS_AS(q.stepLogits(tape, g, full), InputError);
    CHECK(q.stepLogits(tape, g, std::vector<NodeId>{2}).rows() == 4);

    auto ck = savePosterior(q);
    OrderPosterior back = loadPosterior(nlohmann::json::parse(ck.dump()));
    CHECK(back.width() == q.width());
    const NodeOrdering pi(std::vector<NodeId>{2, 3, 0, 1});
    CHECK(back.logProb(g, pi) == q.logProb(g, pi));
    CHECK_THROWS_AS(loadPosterior(nlohmann::json{{"modelKind", "adjacency"}}), InputError);
  }
}
