#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ordvi/graph.hpp"
#include "ordvi/layers.hpp"
#include "ordvi/params.hpp"
#include "ordvi/rng.hpp"
#include "ordvi/symmetry.hpp"
#include "ordvi/tensor.hpp"

namespace ordvi {

enum class ModelKind { adjacency, sequence };
enum class MultiplicityMode { exact, cr };

std::string_view toString(ModelKind k);
std::string_view toString(MultiplicityMode m);
/// InputError on unknown names.
ModelKind parseModelKind(std::string_view s);
MultiplicityMode parseMultiplicityMode(std::string_view s);

/// An autoregressive generator of either adjacency rows or graph sequences.
class GraphModel {
 public:
  virtual ~GraphModel() = default;

  virtual ModelKind kind() const = 0;
  virtual std::size_t maxNodes() const = 0;
  virtual nn::ParameterStore& params() = 0;
  virtual const nn::ParameterStore& params() const = 0;

  /// log p(A) for adjacency models or log p(G_{1:n}) for sequence models,
  /// where A / G_{1:n} is what (g, pi) determines.
  virtual nn::Var traceLogProb(nn::Tape& tape, const Graph& g, const NodeOrdering& pi) const = 0;
  double traceLogProb(const Graph& g, const NodeOrdering& pi) const;

  virtual Graph sample(Rng& rng) const = 0;

  /// Hyperparameters needed to rebuild the architecture.
  virtual nlohmann::json architecture() const = 0;
};

struct AdjModelConfig {
  std::size_t maxNodes = 20;
  std::size_t stateSize = 64;
  std::size_t embedSize = 32;
  /// Nonzero: generation always runs exactly this many nodes and the stop head
  /// is unused. Zero: learned continue/stop after every node.
  std::size_t fixedLength = 0;
};

/// Row-by-row generator of the lower-triangular matrix L. A recurrent state
/// reads each generated row (zero-padded to maxNodes-1) and emits Bernoulli
/// logits for the next row and a stop logit.
class AdjModel final : public GraphModel {
 public:
  AdjModel(const AdjModelConfig& cfg, Rng& init);

  const AdjModelConfig& config() const noexcept { return cfg_; }
  ModelKind kind() const override { return ModelKind::adjacency; }
  std::size_t maxNodes() const override { return cfg_.maxNodes; }
  nn::ParameterStore& params() override { return store_; }
  const nn::ParameterStore& params() const override { return store_; }

  /// sum_t [log p(continue) + log p(L_t | L_{<t})] + log p(stop). Throws
  /// InputError past maxNodes or off the fixed length.
  nn::Var logProb(nn::Tape& tape, const LowerTriangularEncoding& enc) const;
  double logProb(const LowerTriangularEncoding& enc) const;

  nn::Var traceLogProb(nn::Tape& tape, const Graph& g, const NodeOrdering& pi) const override;
  using GraphModel::traceLogProb;
  Graph sample(Rng& rng) const override;
  LowerTriangularEncoding sampleEncoding(Rng& rng) const;
  nlohmann::json architecture() const override;

  /// Parameter names of the output heads, for tests that pin logits.
  static constexpr std::string_view kEdgeBias = "edge.out.bias";
  static constexpr std::string_view kStopBias = "stop.bias";

 private:
  nn::Var stepState(nn::Tape& tape, nn::Var h, const std::vector<std::uint8_t>& row) const;
  nn::Var edgeLogits(nn::Tape& tape, nn::Var h) const;

  AdjModelConfig cfg_;
  nn::ParameterStore store_;
  nn::Linear rowEncoder_;
  nn::GruCell gru_;
  nn::Linear edgeHidden_;
  nn::Linear edgeOut_;
  nn::Linear stop_;
};

struct SeqModelConfig {
  std::size_t maxNodes = 20;
  std::size_t nodeSize = 32;
  std::size_t rounds = 2;
  std::size_t fixedLength = 0;
};

/// Node-by-node generator of G_1, ..., G_n. Node states come from summed
/// message passing with a gated update over the current graph; the new node
/// picks each edge independently from (node state, new-node embedding, mean
/// readout), and the readout drives the stop decision.
class SeqModel final : public GraphModel {
 public:
  SeqModel(const SeqModelConfig& cfg, Rng& init);

  const SeqModelConfig& config() const noexcept { return cfg_; }
  ModelKind kind() const override { return ModelKind::sequence; }
  std::size_t maxNodes() const override { return cfg_.maxNodes; }
  nn::ParameterStore& params() override { return store_; }
  const nn::ParameterStore& params() const override { return store_; }

  /// traceEdges[t-1][j] = edge between node t and node j of steps[t]
  /// (0-based). Throws InputError if the trace and the sequence disagree.
  nn::Var logProb(nn::Tape& tape, const GraphSequence& gs,
                  std::span<const std::vector<std::uint8_t>> traceEdges) const;

  nn::Var traceLogProb(nn::Tape& tape, const Graph& g, const NodeOrdering& pi) const override;
  using GraphModel::traceLogProb;
  Graph sample(Rng& rng) const override;
  nlohmann::json architecture() const override;

  /// Node states after propagation over g (n x nodeSize).
  nn::Var nodeStates(nn::Tape& tape, const Graph& g) const;

  static constexpr std::string_view kEdgeBias = "edge.out.bias";
  static constexpr std::string_view kStopBias = "stop.bias";

 private:
  struct StepHeads {
    nn::Var edgeLogits;  // t x 1
    nn::Var stopLogit;   // 1 x 1
  };
  StepHeads heads(nn::Tape& tape, const Graph& current) const;

  SeqModelConfig cfg_;
  nn::ParameterStore store_;
  std::size_t initEmbedding_ = 0;
  std::size_t newNodeEmbedding_ = 0;
  nn::Linear message_;
  nn::GruCell update_;
  nn::Linear edgeHidden_;
  nn::Linear edgeOut_;
  nn::Linear stop_;
};

/// log |Pi[A]| for adjacency models; log |Pi[G_{1:n}]| (exact) or
/// log beta(G_{1:n}) (cr) for sequence models.
double logMultiplicity(ModelKind kind, const Graph& g, const NodeOrdering& pi, MultiplicityMode mode,
                       SearchBudget budget = {});

/// log p(G, pi) = trace term - log multiplicity, with the multiplicity supplied.
nn::Var jointLogProb(nn::Tape& tape, const GraphModel& model, const Graph& g, const NodeOrdering& pi,
                     double logMult);
double jointLogProb(const GraphModel& model, const Graph& g, const NodeOrdering& pi, MultiplicityMode mode);

/// log sum_pi p(G, pi) over all n! orderings. ResourceError past maxNodes.
double exactMarginalLogProb(const GraphModel& model, const Graph& g, MultiplicityMode mode = MultiplicityMode::exact,
                            std::size_t maxNodes = 8);

/// Checkpoint JSON: {modelKind, metadata: {architecture, ...extra}, parameters}.
nlohmann::json saveModel(const GraphModel& model, const nlohmann::json& extraMetadata = nlohmann::json::object());
std::unique_ptr<GraphModel> loadModel(const nlohmann::json& checkpoint);
std::unique_ptr<GraphModel> makeModel(ModelKind kind, const nlohmann::json& architecture, Rng& init);

}  // namespace ordvi
