#include "ordvi/training.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "ordvi/errors.hpp"
#include "ordvi/parallel.hpp"

namespace ordvi {

using nn::Tape;
using nlohmann::json;

void TrainConfig::validate() const {
  if (samples == 0) throw InputError("samples must be >= 1");
  if (!(lrTheta > 0.0) || !(lrPhi > 0.0)) throw InputError("learning rates must be > 0");
  if (batchGraphs == 0) throw InputError("batchGraphs must be >= 1");
  if (threads == 0) throw InputError("threads must be >= 1");
  if (!(baselineDecay >= 0.0 && baselineDecay < 1.0)) throw InputError("baselineDecay must lie in [0, 1)");
}

json TrainConfig::toJson() const {
  return {{"samples", samples},
          {"multiplicity", std::string(toString(multiplicity))},
          {"lrTheta", lrTheta},
          {"lrPhi", lrPhi},
          {"epochs", epochs},
          {"seed", seed},
          {"baseline", baseline},
          {"baselineDecay", baselineDecay},
          {"batchGraphs", batchGraphs},
          {"threads", threads},
          {"trainPosterior", trainPosterior}};
}

json TrainReport::toJson() const {
  json recs = json::array();
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  for (const auto& r : epochs) {
    recs.push_back({{"epoch", r.epoch},
                    {"meanElbo", r.meanElbo},
                    {"thetaGradVariance", opt(r.thetaGradVariance)},
                    {"phiGradVariance", opt(r.phiGradVariance)},
                    {"wallSeconds", r.wallSeconds}});
  }
  return {{"epochs", recs}, {"config", config}, {"thetaSteps", thetaSteps}, {"phiSteps", phiSteps}};
}

bool TrainReport::sameResults(const TrainReport& o) const {
  // the worker count does not change results
  auto a = config, b = o.config;
  if (a.is_object()) a.erase("threads");
  if (b.is_object()) b.erase("threads");
  if (epochs.size() != o.epochs.size() || a != b || thetaSteps != o.thetaSteps || phiSteps != o.phiSteps) {
    return false;
  }
  for (std::size_t i = 0; i < epochs.size(); ++i) {
    const auto& a = epochs[i];
    const auto& b = o.epochs[i];
    if (a.epoch != b.epoch || a.meanElbo != b.meanElbo || a.thetaGradVariance != b.thetaGradVariance ||
        a.phiGradVariance != b.phiGradVariance) {
      return false;
    }
  }
  return true;
}

namespace {

struct SampleResult {
  double logJoint = 0.0;
  double logQ = 0.0;
  std::vector<double> gradTheta;
  std::vector<double> gradLogQ;
};

/// Draws one ordering and evaluates both log-densities, optionally with
/// gradients. `logAut` is used for adjacency models when given.
SampleResult drawSample(const GraphModel& model, const OrderingDistribution& q, const OrderPosterior* learned,
                        const Graph& g, Rng rng, MultiplicityMode mode, std::optional<double> logAut,
                        bool wantTheta, bool wantPhi) {
  SampleResult r;
  NodeOrdering pi;
  if (learned != nullptr && wantPhi) {
    Tape tq(true);
    auto s = learned->sampleOnTape(tq, g, rng);
    r.logQ = s.logQ.item();
    tq.backward(s.logQ);
    r.gradLogQ = tq.flatGradient(learned->params());
    pi = std::move(s.pi);
  } else {
    OrderingSample s = q.sample(g, rng);
    r.logQ = s.logQ;
    pi = std::move(s.pi);
  }
  const double lm = (model.kind() == ModelKind::adjacency && logAut) ? *logAut
                                                                      : logMultiplicity(model.kind(), g, pi, mode);
  Tape tp(wantTheta);
  nn::Var lp = jointLogProb(tp, model, g, pi, lm);
  r.logJoint = lp.item();
  if (wantTheta) {
    tp.backward(lp);
    r.gradTheta = tp.flatGradient(model.params());
  }
  return r;
}

std::vector<SampleResult> drawSamples(const GraphModel& model, const OrderingDistribution& q,
                                      const OrderPosterior* learned, const Graph& g, std::size_t samples,
                                      const Rng& rng, MultiplicityMode mode, std::optional<double> logAut,
                                      bool wantTheta, bool wantPhi, std::size_t threads) {
  if (samples == 0) throw InputError("sample count must be >= 1");
  if (model.kind() == ModelKind::adjacency && !logAut) logAut = logOf(automorphismCount(g));
  std::vector<SampleResult> out(samples);
  parallelFor(samples, threads, [&](std::size_t s) {
    out[s] = drawSample(model, q, learned, g, rng.split(s), mode, logAut, wantTheta, wantPhi);
  });
  return out;
}

/// Mean over rows and, when rows >= 2, the parameter-averaged variance of that mean.
std::pair<std::vector<double>, std::optional<double>> meanAndVariance(const std::vector<std::vector<double>>& rows) {
  const std::size_t k = rows.size();
  const std::size_t p = rows.front().size();
  std::vector<double> mean(p, 0.0);
  for (const auto& r : rows)
    for (std::size_t j = 0; j < p; ++j) mean[j] += r[j];
  for (auto& m : mean) m /= static_cast<double>(k);
  if (k < 2 || p == 0) return {mean, std::nullopt};
  double acc = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    double ss = 0.0;
    for (const auto& r : rows) ss += (r[j] - mean[j]) * (r[j] - mean[j]);
    acc += ss / static_cast<double>(k - 1);
  }
  return {mean, acc / static_cast<double>(p) / static_cast<double>(k)};
}

std::vector<std::vector<double>> phiContributions(std::vector<SampleResult>& rs, double baseline) {
  std::vector<std::vector<double>> rows;
  rows.reserve(rs.size());
  for (auto& r : rs) {
    const double signal = r.logJoint - r.logQ - baseline;
    for (auto& v : r.gradLogQ) v *= signal;
    rows.push_back(std::move(r.gradLogQ));
  }
  return rows;
}

}  // namespace

double elboEstimate(const GraphModel& model, const OrderingDistribution& q, const Graph& g, std::size_t samples,
                    const Rng& rng, MultiplicityMode mode) {
  auto rs = drawSamples(model, q, nullptr, g, samples, rng, mode, std::nullopt, false, false, 1);
  double total = 0.0;
  for (const auto& r : rs) total += r.logJoint - r.logQ;
  return total / static_cast<double>(samples);
}

std::vector<double> gradTheta(const GraphModel& model, const OrderingDistribution& q, const Graph& g,
                              std::size_t samples, const Rng& rng, MultiplicityMode mode) {
  auto rs = drawSamples(model, q, nullptr, g, samples, rng, mode, std::nullopt, true, false, 1);
  std::vector<std::vector<double>> rows;
  for (auto& r : rs) rows.push_back(std::move(r.gradTheta));
  return meanAndVariance(rows).first;
}

std::vector<double> gradPhi(const GraphModel& model, const OrderPosterior& q, const Graph& g, std::size_t samples,
                            const Rng& rng, MultiplicityMode mode) {
  auto rs = drawSamples(model, q, &q, g, samples, rng, mode, std::nullopt, false, true, 1);
  return meanAndVariance(phiContributions(rs, 0.0)).first;
}

std::vector<double> varianceTrace(const GraphModel& model, const OrderPosterior& q, const Graph& g,
                                  std::span<const std::size_t> sampleSizes, std::size_t trials, const Rng& rng,
                                  MultiplicityMode mode) {
  if (trials < 2) throw InputError("varianceTrace needs at least two trials");
  std::vector<double> out;
  for (std::size_t k = 0; k < sampleSizes.size(); ++k) {
    std::vector<std::vector<double>> estimates;
    for (std::size_t t = 0; t < trials; ++t) {
      estimates.push_back(gradPhi(model, q, g, sampleSizes[k], rng.split(k, t), mode));
    }
    // variance of the mean times the number of rows = variance of one estimate
    out.push_back(*meanAndVariance(estimates).second * static_cast<double>(trials));
  }
  return out;
}

TrainReport train(GraphModel& model, OrderPosterior* posterior, std::span<const Graph> graphs, const TrainConfig& cfg,
                  std::ostream* progress, const std::function<void(const EpochRecord&)>& onEpoch) {
  cfg.validate();
  if (cfg.trainPosterior && posterior == nullptr) throw InputError("training the posterior requires a posterior");
  for (const Graph& g : graphs) {
    if (g.nodeCount() == 0 || g.nodeCount() > model.maxNodes()) {
      throw InputError("dataset graph with " + std::to_string(g.nodeCount()) + " nodes does not fit the model");
    }
  }
  TrainReport report;
  report.config = cfg.toJson();
  const Rng root(cfg.seed);
  const UniformOrdering uniform;
  const OrderPosterior* learned = cfg.trainPosterior ? posterior : nullptr;
  const OrderingDistribution& q = learned ? static_cast<const OrderingDistribution&>(*learned) : uniform;
  std::vector<std::optional<double>> logAut(graphs.size());
  std::optional<double> baseline;

  nn::AdamConfig thetaOpt;
  thetaOpt.learningRate = cfg.lrTheta;
  thetaOpt.maximize = true;
  nn::AdamConfig phiOpt = thetaOpt;
  phiOpt.learningRate = cfg.lrPhi;

  auto step = [&] {
    if (learned) {
      nn::adamStep(posterior->params(), phiOpt);
      ++report.phiSteps;
    }
    nn::adamStep(model.params(), thetaOpt);
    ++report.thetaSteps;
  };

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    double elboSum = 0.0;
    double thetaVar = 0.0, phiVar = 0.0;
    bool haveVar = false;
    std::size_t pending = 0;
    for (std::size_t i = 0; i < graphs.size(); ++i) {
      const Graph& g = graphs[i];
      if (model.kind() == ModelKind::adjacency && !logAut[i]) logAut[i] = logOf(automorphismCount(g));
      std::vector<SampleResult> rs;
      try {
        rs = drawSamples(model, q, learned, g, cfg.samples, root.split(epoch, i), cfg.multiplicity, logAut[i], true,
                         learned != nullptr, cfg.threads);
      } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(epoch + 1) + ", graph " + std::to_string(i) + ": " + e.what());
      }
      double elbo = 0.0;
      for (const auto& r : rs) elbo += r.logJoint - r.logQ;
      elbo /= static_cast<double>(rs.size());
      if (!std::isfinite(elbo)) {
        throw NumericError("epoch " + std::to_string(epoch + 1) + ", graph " + std::to_string(i) +
                           ": non-finite ELBO");
      }
      elboSum += elbo;

      std::vector<std::vector<double>> thetaRows;
      for (auto& r : rs) thetaRows.push_back(std::move(r.gradTheta));
      auto [gTheta, vTheta] = meanAndVariance(thetaRows);
      model.params().addFlatGradient(gTheta);
      if (vTheta) thetaVar += *vTheta;
      if (learned) {
        const double b = cfg.baseline && baseline ? *baseline : 0.0;
        auto [gPhi, vPhi] = meanAndVariance(phiContributions(rs, b));
        posterior->params().addFlatGradient(gPhi);
        if (vPhi) phiVar += *vPhi;
      }
      if (cfg.baseline) {
        baseline = baseline ? cfg.baselineDecay * *baseline + (1.0 - cfg.baselineDecay) * elbo : elbo;
      }
      haveVar = haveVar || vTheta.has_value();
      if (++pending == cfg.batchGraphs) {
        step();
        pending = 0;
      }
    }
    if (pending > 0) step();

    EpochRecord rec;
    rec.epoch = epoch + 1;
    const double count = static_cast<double>(std::max<std::size_t>(graphs.size(), 1));
    rec.meanElbo = elboSum / count;
    if (haveVar) {
      rec.thetaGradVariance = thetaVar / count;
      if (learned) rec.phiGradVariance = phiVar / count;
    }
    rec.wallSeconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (progress) *progress << "epoch " << rec.epoch << " elbo " << rec.meanElbo << " sec " << rec.wallSeconds << '\n';
    report.epochs.push_back(rec);
    if (onEpoch) onEpoch(rec);
  }
  return report;
}

}  // namespace ordvi
