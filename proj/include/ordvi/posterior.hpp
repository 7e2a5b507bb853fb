#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "ordvi/graph.hpp"
#include "ordvi/layers.hpp"
#include "ordvi/params.hpp"
#include "ordvi/rng.hpp"
#include "ordvi/tensor.hpp"

namespace ordvi {

struct OrderingSample {
  NodeOrdering pi;
  double logQ = 0.0;
  /// log q(pi_t | G, pi_{<t}) for every step
  std::vector<double> stepLogProbs;
};

/// A distribution over node orderings of a given graph.
class OrderingDistribution {
 public:
  virtual ~OrderingDistribution() = default;
  virtual OrderingSample sample(const Graph& g, Rng& rng) const = 0;
  /// Throws InputError unless pi orders exactly the nodes of g.
  virtual double logProb(const Graph& g, const NodeOrdering& pi) const = 0;
};

/// Fisher-Yates orderings, log q = -log n!.
class UniformOrdering final : public OrderingDistribution {
 public:
  OrderingSample sample(const Graph& g, Rng& rng) const override;
  double logProb(const Graph& g, const NodeOrdering& pi) const override;
};

OrderingSample uniformOrdering(const Graph& g, Rng& rng);

/// Explicit probability table over orderings of one graph size. Orderings
/// missing from the table have probability zero.
class TabulatedOrdering final : public OrderingDistribution {
 public:
  /// Weights need not be normalized; they must be nonnegative with a positive sum.
  explicit TabulatedOrdering(std::map<NodeOrdering, double> weights);
  OrderingSample sample(const Graph& g, Rng& rng) const override;
  double logProb(const Graph& g, const NodeOrdering& pi) const override;

 private:
  std::vector<NodeOrdering> support_;
  std::vector<double> cumulative_;
  std::vector<double> logProb_;
};

struct PosteriorConfig {
  std::size_t layers = 3;
  std::size_t heads = 6;
  std::size_t headWidth = 32;
};

/// Sinusoidal position embedding of a 1-based position t, width `dim`.
nn::Matrix positionalEmbedding(std::size_t t, std::size_t dim);

/// Learned ordering posterior q(pi | G). At step t every node starts from the
/// shared vector h0, plus PE(s) if it was chosen at position s < t; a stack of
/// residual attention layers over the graph (self loops included) and a linear
/// head give one logit per node, and the step distribution is the softmax over
/// the nodes not chosen yet.
class OrderPosterior final : public OrderingDistribution {
 public:
  OrderPosterior(const PosteriorConfig& cfg, Rng& init);

  const PosteriorConfig& config() const noexcept { return cfg_; }
  std::size_t width() const noexcept { return cfg_.heads * cfg_.headWidth; }
  nn::ParameterStore& params() { return store_; }
  const nn::ParameterStore& params() const { return store_; }

  /// n x 1 logits for the next step given the chosen prefix.
  nn::Var stepLogits(nn::Tape& tape, const Graph& g, std::span<const NodeId> prefix) const;

  struct TapeSample {
    NodeOrdering pi;
    nn::Var logQ;
    std::vector<double> stepLogProbs;
  };
  /// Ancestral sample with log q recorded on `tape`.
  TapeSample sampleOnTape(nn::Tape& tape, const Graph& g, Rng& rng) const;
  /// Teacher-forced log q(pi | G) recorded on `tape`.
  nn::Var logProbOnTape(nn::Tape& tape, const Graph& g, const NodeOrdering& pi) const;

  OrderingSample sample(const Graph& g, Rng& rng) const override;
  double logProb(const Graph& g, const NodeOrdering& pi) const override;

  nlohmann::json architecture() const;

  /// Parameter name of the logit head weight.
  static constexpr std::string_view kHeadWeight = "head.weight";

 private:
  nn::Mask neighbourhood(const Graph& g) const;
  nn::Var logitsWithMask(nn::Tape& tape, std::span<const NodeId> prefix, const nn::Mask& nb) const;

  PosteriorConfig cfg_;
  nn::ParameterStore store_;
  std::size_t h0_ = 0;
  std::vector<nn::GraphAttentionLayer> layers_;
  nn::Linear head_;
};

/// Checkpoint with modelKind "posterior".
nlohmann::json savePosterior(const OrderPosterior& q, const nlohmann::json& extraMetadata = nlohmann::json::object());
OrderPosterior loadPosterior(const nlohmann::json& checkpoint);

}  // namespace ordvi
