#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "ordvi/genmodels.hpp"
#include "ordvi/posterior.hpp"

namespace ordvi {

struct TrainConfig {
  std::size_t samples = 8;
  MultiplicityMode multiplicity = MultiplicityMode::cr;
  double lrTheta = 1e-3;
  double lrPhi = 1e-3;
  std::size_t epochs = 10;
  std::uint64_t seed = 0;
  /// Subtract a moving average of the learning signal in the score-function term.
  bool baseline = false;
  double baselineDecay = 0.9;
  /// Graphs whose gradients are summed before one optimizer step (1 = per graph).
  std::size_t batchGraphs = 1;
  std::size_t threads = 1;
  /// false: orderings come from the uniform distribution and phi is untouched.
  bool trainPosterior = true;

  void validate() const;
  nlohmann::json toJson() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double meanElbo = 0.0;
  /// Per-parameter variance of the S-sample gradient estimators, averaged over
  /// parameters and graphs; empty when S < 2 (or phi is not trained).
  std::optional<double> thetaGradVariance;
  std::optional<double> phiGradVariance;
  double wallSeconds = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  nlohmann::json config;
  std::size_t thetaSteps = 0;
  std::size_t phiSteps = 0;

  nlohmann::json toJson() const;
  /// Equality of everything except wall-clock times.
  bool sameResults(const TrainReport& other) const;
};

/// One Monte Carlo ELBO term per sample.
struct SampleTerm {
  NodeOrdering pi;
  double logJoint = 0.0;
  double logQ = 0.0;
};

/// (1/S) sum_s [log p(G, pi_s) - log q(pi_s | G)], pi_s ~ q, sample s drawing
/// from rng.split(s).
double elboEstimate(const GraphModel& model, const OrderingDistribution& q, const Graph& g, std::size_t samples,
                    const Rng& rng, MultiplicityMode mode = MultiplicityMode::cr);

/// (1/S) sum_s grad_theta log p(G, pi_s), flattened in store order.
std::vector<double> gradTheta(const GraphModel& model, const OrderingDistribution& q, const Graph& g,
                              std::size_t samples, const Rng& rng, MultiplicityMode mode = MultiplicityMode::cr);

/// (1/S) sum_s [log p(G, pi_s) - log q(pi_s | G)] grad_phi log q(pi_s | G).
std::vector<double> gradPhi(const GraphModel& model, const OrderPosterior& q, const Graph& g, std::size_t samples,
                            const Rng& rng, MultiplicityMode mode = MultiplicityMode::cr);

/// Empirical variance of the gradPhi estimator for each sample size over
/// `trials` independent repetitions, averaged over parameters.
std::vector<double> varianceTrace(const GraphModel& model, const OrderPosterior& q, const Graph& g,
                                  std::span<const std::size_t> sampleSizes, std::size_t trials, const Rng& rng,
                                  MultiplicityMode mode = MultiplicityMode::cr);

/// Variational training loop. `posterior` may be null when cfg.trainPosterior
/// is false. Progress lines go to `progress` when given; `onEpoch` runs after
/// every epoch (checkpointing).
TrainReport train(GraphModel& model, OrderPosterior* posterior, std::span<const Graph> graphs,
                  const TrainConfig& cfg, std::ostream* progress = nullptr,
                  const std::function<void(const EpochRecord&)>& onEpoch = {});

}  // namespace ordvi
