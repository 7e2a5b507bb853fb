#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "oracles.hpp"
#include "ordvi/errors.hpp"
#include "ordvi/evaluation.hpp"
#include "ordvi/training.hpp"

using namespace ordvi;

namespace {

AdjModel tinyAdj(std::size_t maxNodes, std::uint64_t seed) {
  AdjModelConfig cfg;
  cfg.maxNodes = maxNodes;
  cfg.stateSize = 6;
  cfg.embedSize = 4;
  Rng init(seed);
  return AdjModel(cfg, init);
}

OrderPosterior tinyPosterior(std::uint64_t seed) {
  PosteriorConfig cfg;
  cfg.layers = 1;
  cfg.heads = 1;
  cfg.headWidth = 4;
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

std::vector<Graph> tinyDataset() {
  return {completeGraph(3), pathGraph(4), cycleGraph(4), starGraph(3), pathGraph(3)};
}

}  // namespace

TEST_SUITE("training") {
  TEST_CASE("elbo of the fair coin model under uniform orderings") {
    AdjModelConfig cfg;
    cfg.maxNodes = 3;
    cfg.fixedLength = 3;
    cfg.stateSize = 2;
    cfg.embedSize = 2;
    Rng init(0);
    AdjModel m(cfg, init);
    m.params().zeroValues();
    UniformOrdering u;
    // every ordering of K3 gives log(1/48) + log 6
    CHECK(elboEstimate(m, u, completeGraph(3), 5, Rng(1)) == doctest::Approx(std::log(1.0 / 8.0)).epsilon(1e-12));
  }

  TEST_CASE("elbo lower-bounds the exact log-likelihood") {
    AdjModel m = tinyAdj(5, 2);
    OrderPosterior q = tinyPosterior(3);
    for (const Graph& g : tinyDataset()) {
      const double exact = exactLogLik(m, g);
      // the exact ELBO under q
      double elbo = 0.0;
      for (const auto& pi : allOrderings(g.nodeCount())) {
        const double lq = q.logProb(g, pi);
        elbo += std::exp(lq) * (jointLogProb(m, g, pi, MultiplicityMode::exact) - lq);
      }
      CHECK(elbo <= exact + 1e-12);
      CHECK(std::isfinite(elboEstimate(m, q, g, 4, Rng(5))));
    }
  }

  TEST_CASE("theta gradient under a point-mass posterior is the trace gradient") {
    AdjModel m = tinyAdj(5, 4);
    const Graph g = pathGraph(4);
    const NodeOrdering pi(std::vector<NodeId>{1, 3, 0, 2});
    TabulatedOrdering q({{pi, 1.0}});
    auto est = gradTheta(m, q, g, 3, Rng(1));
    nn::Tape tape;
    tape.backward(m.traceLogProb(tape, g, pi));
    auto ref = tape.flatGradient(m.params());
    REQUIRE(est.size() == ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(est[i] == doctest::Approx(ref[i]).epsilon(1e-12));
  }

  TEST_CASE("phi gradient estimator is unbiased on a small graph") {
    AdjModel m = tinyAdj(3, 6);
    OrderPosterior q = tinyPosterior(7);
    q.params().value(OrderPosterior::kHeadWeight) *= 5.0;
    const Graph g = pathGraph(3);
    const auto dim = q.params().scalarCount();
    std::vector<double> exact(dim, 0.0);
    for (const auto& pi : allOrderings(3)) {
      nn::Tape tape;
      nn::Var lq = q.logProbOnTape(tape, g, pi);
      tape.backward(lq);
      auto grad = tape.flatGradient(q.params());
      const double signal = jointLogProb(m, g, pi, MultiplicityMode::cr) - lq.item();
      for (std::size_t i = 0; i < dim; ++i) exact[i] += std::exp(lq.item()) * signal * grad[i];
    }
    std::mt19937_64 dirs(3);
    std::normal_distribution<double> normal;
    std::vector<double> dir(dim);
    for (auto& d : dir) d = normal(dirs);
    const double target = std::inner_product(dir.begin(), dir.end(), exact.begin(), 0.0);
    const int trials = 3000;
    double mean = 0.0, sq = 0.0;
    Rng root(11);
    for (int t = 0; t < trials; ++t) {
      auto est = gradPhi(m, q, g, 1, root.split(static_cast<std::uint64_t>(t)));
      const double v = std::inner_product(dir.begin(), dir.end(), est.begin(), 0.0);
      mean += v;
      sq += v * v;
    }
    mean /= trials;
    const double se = std::sqrt((sq / trials - mean * mean) / trials);
    CHECK(std::abs(mean - target) <= 4.0 * se + 1e-12);
  }

  TEST_CASE("constant learning signal gives a zero-mean phi gradient") {
    AdjModelConfig cfg;
    cfg.maxNodes = 3;
    cfg.fixedLength = 3;
    cfg.stateSize = 2;
    cfg.embedSize = 2;
    Rng init(0);
    AdjModel m(cfg, init);
    m.params().zeroValues();
    OrderPosterior q = tinyPosterior(8);
    q.params().value(OrderPosterior::kHeadWeight).setZero();
    const Graph k3 = completeGraph(3);
    const auto dim = q.params().scalarCount();
    std::vector<double> mean(dim, 0.0), sq(dim, 0.0);
    const int trials = 2000;
    Rng root(4);
    for (int t = 0; t < trials; ++t) {
      auto est = gradPhi(m, q, k3, 1, root.split(static_cast<std::uint64_t>(t)));
      for (std::size_t i = 0; i < dim; ++i) {
        mean[i] += est[i] / trials;
        sq[i] += est[i] * est[i] / trials;
      }
    }
    std::size_t outside = 0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double se = std::sqrt(std::max(0.0, sq[i] - mean[i] * mean[i]) / trials);
      outside += std::abs(mean[i]) > 3.0 * se + 1e-12;
    }
    // a few coordinates may fall outside 3 se by chance
    CHECK(outside <= dim / 50 + 1);
  }

  TEST_CASE("estimators are deterministic in the seed") {
    AdjModel m = tinyAdj(5, 1);
    OrderPosterior q = tinyPosterior(2);
    const Graph g = cycleGraph(5);
    CHECK(gradPhi(m, q, g, 4, Rng(3)) == gradPhi(m, q, g, 4, Rng(3)));
    CHECK(elboEstimate(m, q, g, 4, Rng(3)) == elboEstimate(m, q, g, 4, Rng(3)));
    CHECK(elboEstimate(m, q, g, 4, Rng(3)) != elboEstimate(m, q, g, 4, Rng(4)));
  }

  TEST_CASE("estimator variance shrinks with more samples") {
    AdjModel m = tinyAdj(5, 3);
    OrderPosterior q = tinyPosterior(4);
    const std::vector<std::size_t> sizes = {1, 16};
    auto v = varianceTrace(m, q, starGraph(4), sizes, 40, Rng(9));
    REQUIRE(v.size() == 2);
    CHECK(v[1] < v[0]);
    CHECK_THROWS_AS(varianceTrace(m, q, starGraph(4), sizes, 1, Rng(9)), InputError);
  }

  TEST_CASE("training raises the elbo and is reproducible") {
    auto data = tinyDataset();
    TrainConfig cfg;
    cfg.samples = 4;
    cfg.epochs = 15;
    cfg.lrTheta = 0.02;
    cfg.lrPhi = 0.01;
    cfg.seed = 5;
    auto run = [&](std::size_t threads) {
      AdjModel m = tinyAdj(5, 1);
      OrderPosterior q = tinyPosterior(2);
      TrainConfig c = cfg;
      c.threads = threads;
      return train(m, &q, data, c);
    };
    TrainReport a = run(1);
    REQUIRE(a.epochs.size() == 15);
    CHECK(a.epochs.back().meanElbo > a.epochs.front().meanElbo);
    CHECK(a.thetaSteps == 15 * data.size());
    CHECK(a.phiSteps == 15 * data.size());
    CHECK(a.epochs.front().thetaGradVariance.has_value());
    CHECK(a.sameResults(run(1)));
    CHECK(a.sameResults(run(2)));
    CHECK(a.toJson()["epochs"].size() == 15);
  }

  TEST_CASE("uniform-ordering training leaves no posterior to update") {
    auto data = tinyDataset();
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.trainPosterior = false;
    cfg.batchGraphs = 2;
    AdjModel m = tinyAdj(5, 1);
    const auto before = m.params().flatValues();
    std::ostringstream log;
    int calls = 0;
    TrainReport r = train(m, nullptr, data, cfg, &log, [&](const EpochRecord&) { ++calls; });
    CHECK(calls == 2);
    CHECK(r.phiSteps == 0);
    CHECK(r.thetaSteps == 2 * 3);
    CHECK(!r.epochs.front().phiGradVariance.has_value());
    CHECK(m.params().flatValues() != before);
    CHECK(log.str().find("epoch 1 elbo") != std::string::npos);
  }

  TEST_CASE("configuration errors") {
    AdjModel m = tinyAdj(4, 1);
    auto data = tinyDataset();
    TrainConfig cfg;
    CHECK_THROWS_AS(train(m, nullptr, data, cfg), InputError);
    cfg.trainPosterior = false;
    auto big = std::vector<Graph>{pathGraph(6)};
    CHECK_THROWS_AS(train(m, nullptr, big, cfg), InputError);
    TrainConfig bad;
    bad.samples = 0;
    CHECK_THROWS_AS(bad.validate(), InputError);
    bad = {};
    bad.baselineDecay = 1.0;
    CHECK_THROWS_AS(bad.validate(), InputError);
  }
}
