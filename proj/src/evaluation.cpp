#include "ordvi/evaluation.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ordvi/errors.hpp"
#include "ordvi/numerics.hpp"
#include "ordvi/parallel.hpp"

namespace ordvi {

ImportanceEstimate importanceLogLik(const GraphModel& model, const OrderingDistribution& proposal, const Graph& g,
                                    std::size_t samples, const Rng& rng, MultiplicityMode mode, std::size_t threads) {
  if (samples == 0) throw InputError("importance sampling needs at least one sample");
  const bool adjacency = model.kind() == ModelKind::adjacency;
  const double logAut = adjacency ? logOf(automorphismCount(g)) : 0.0;
  std::vector<double> logRatio(samples);
  parallelFor(samples, threads, [&](std::size_t l) {
    Rng r = rng.split(l);
    OrderingSample s = proposal.sample(g, r);
    const double lm = adjacency ? logAut : logMultiplicity(model.kind(), g, s.pi, mode);
    logRatio[l] = model.traceLogProb(g, s.pi) - lm - s.logQ;
  });
  for (std::size_t l = 0; l < samples; ++l) {
    if (!std::isfinite(logRatio[l])) {
      throw NumericError("importance sample " + std::to_string(l) + " has a non-finite log-ratio");
    }
  }
  ImportanceEstimate est;
  est.samples = samples;
  est.estimate = logMeanExp(logRatio);
  if (samples < 2) {
    est.standardError = std::numeric_limits<double>::quiet_NaN();
    return est;
  }
  // Leave-one-out estimates via the shifted weight total.
  double m = logRatio.front();
  for (double v : logRatio) m = std::max(m, v);
  double total = 0.0;
  std::vector<double> w(samples);
  for (std::size_t l = 0; l < samples; ++l) total += (w[l] = std::exp(logRatio[l] - m));
  const double Ld = static_cast<double>(samples);
  std::vector<double> loo(samples);
  double looMean = 0.0;
  for (std::size_t l = 0; l < samples; ++l) {
    const double rest = std::max(total - w[l], std::numeric_limits<double>::min());
    loo[l] = m + std::log(rest / (Ld - 1.0));
    looMean += loo[l];
  }
  looMean /= Ld;
  double ss = 0.0;
  for (double v : loo) ss += (v - looMean) * (v - looMean);
  est.standardError = std::sqrt((Ld - 1.0) / Ld * ss);
  return est;
}

double exactLogLik(const GraphModel& model, const Graph& g, std::size_t maxNodes, MultiplicityMode mode) {
  return exactMarginalLogProb(model, g, mode, maxNodes);
}

nn::Matrix averagedAdjacency(const OrderingDistribution& q, const Graph& g, std::size_t samples, const Rng& rng) {
  if (samples == 0) throw InputError("averagedAdjacency needs at least one sample");
  const auto n = static_cast<Eigen::Index>(g.nodeCount());
  nn::Matrix acc = nn::Matrix::Zero(n, n);
  for (std::size_t s = 0; s < samples; ++s) {
    Rng r = rng.split(s);
    OrderingSample draw = q.sample(g, r);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (i != j && g.hasEdge(draw.pi[static_cast<std::size_t>(i)], draw.pi[static_cast<std::size_t>(j)])) {
          acc(i, j) += 1.0;
        }
  }
  return acc / static_cast<double>(samples);
}

void writeCsv(std::ostream& out, const nn::Matrix& m) {
  const auto old = out.precision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << m(i, j);
    }
    out << '\n';
  }
  out.precision(old);
}

}  // namespace ordvi
