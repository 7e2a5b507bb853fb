#include "ordvi/genmodels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ordvi/errors.hpp"
#include "ordvi/numerics.hpp"

namespace ordvi {

using nn::Matrix;
using nn::Tape;
using nn::Var;
using nlohmann::json;

std::string_view toString(ModelKind k) { return k == ModelKind::adjacency ? "adjacency" : "sequence"; }
std::string_view toString(MultiplicityMode m) { return m == MultiplicityMode::exact ? "exact" : "cr"; }

ModelKind parseModelKind(std::string_view s) {
  if (s == "adjacency" || s == "adj") return ModelKind::adjacency;
  if (s == "sequence" || s == "seq") return ModelKind::sequence;
  throw InputError("unknown model kind '" + std::string(s) + "' (expected adjacency or sequence)");
}

MultiplicityMode parseMultiplicityMode(std::string_view s) {
  if (s == "exact") return MultiplicityMode::exact;
  if (s == "cr") return MultiplicityMode::cr;
  throw InputError("unknown multiplicity mode '" + std::string(s) + "' (expected exact or cr)");
}

double GraphModel::traceLogProb(const Graph& g, const NodeOrdering& pi) const {
  Tape tape(false);
  return traceLogProb(tape, g, pi).item();
}

namespace {

void checkLength(std::size_t n, std::size_t maxNodes, std::size_t fixedLength) {
  if (n == 0) throw InputError("empty graph");
  if (n > maxNodes) {
    throw InputError("graph has " + std::to_string(n) + " nodes, model supports at most " + std::to_string(maxNodes));
  }
  if (fixedLength != 0 && n != fixedLength) {
    throw InputError("graph has " + std::to_string(n) + " nodes, model has fixed length " +
                     std::to_string(fixedLength));
  }
}

Var sumTerms(Tape& tape, const std::vector<Var>& terms) {
  if (terms.empty()) return tape.scalar(0.0);
  Var total = terms.front();
  for (std::size_t i = 1; i < terms.size(); ++i) total = nn::add(total, terms[i]);
  return total;
}

Matrix rowVector(const std::vector<std::uint8_t>& bits, Eigen::Index width) {
  Matrix m = Matrix::Zero(1, width);
  for (std::size_t j = 0; j < bits.size(); ++j) m(0, static_cast<Eigen::Index>(j)) = bits[j];
  return m;
}

double sigmoidOf(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

// ---------------------------------------------------------------- AdjModel

AdjModel::AdjModel(const AdjModelConfig& cfg, Rng& init) : cfg_(cfg) {
  if (cfg.maxNodes < 2) throw InputError("AdjModel needs maxNodes >= 2");
  if (cfg.fixedLength > cfg.maxNodes) throw InputError("fixedLength exceeds maxNodes");
  const auto w = static_cast<Eigen::Index>(cfg.maxNodes - 1);
  const auto h = static_cast<Eigen::Index>(cfg.stateSize);
  const auto e = static_cast<Eigen::Index>(cfg.embedSize);
  rowEncoder_ = nn::Linear(store_, "row", w, e, init);
  gru_ = nn::GruCell(store_, "gru", e, h, init);
  edgeHidden_ = nn::Linear(store_, "edge.hidden", h, e, init);
  edgeOut_ = nn::Linear(store_, "edge.out", e, w, init);
  stop_ = nn::Linear(store_, "stop", h, 1, init);
}

Var AdjModel::stepState(Tape& tape, Var h, const std::vector<std::uint8_t>& row) const {
  Var x = tape.constant(rowVector(row, static_cast<Eigen::Index>(cfg_.maxNodes - 1)));
  return gru_.apply(tape, store_, h, nn::relu(rowEncoder_.apply(tape, store_, x)));
}

Var AdjModel::edgeLogits(Tape& tape, Var h) const {
  return edgeOut_.apply(tape, store_, nn::relu(edgeHidden_.apply(tape, store_, h)));
}

Var AdjModel::logProb(Tape& tape, const LowerTriangularEncoding& enc) const {
  const std::size_t n = enc.nodeCount();
  checkLength(n, cfg_.maxNodes, cfg_.fixedLength);
  const bool learnedStop = cfg_.fixedLength == 0;
  std::vector<Var> terms;
  Var h = tape.constant(Matrix::Zero(1, static_cast<Eigen::Index>(cfg_.stateSize)));
  const std::vector<std::uint8_t> firstRow;
  for (std::size_t t = 1; t <= n; ++t) {
    h = stepState(tape, h, t == 1 ? firstRow : enc.rows[t - 2]);
    const bool canStop = learnedStop && t < cfg_.maxNodes;
    if (t == n) {
      if (canStop) terms.push_back(nn::logSigmoid(stop_.apply(tape, store_, h)));
      break;
    }
    if (canStop) terms.push_back(nn::logSigmoid(nn::scale(stop_.apply(tape, store_, h), -1.0)));
    const auto& next = enc.rows[t - 1];
    Var logits = nn::sliceCols(edgeLogits(tape, h), 0, static_cast<Eigen::Index>(t));
    terms.push_back(nn::bernoulliLogLik(logits, rowVector(next, static_cast<Eigen::Index>(t))));
  }
  return sumTerms(tape, terms);
}

double AdjModel::logProb(const LowerTriangularEncoding& enc) const {
  Tape tape(false);
  return logProb(tape, enc).item();
}

Var AdjModel::traceLogProb(Tape& tape, const Graph& g, const NodeOrdering& pi) const {
  return logProb(tape, encodeAdjacency(g, pi));
}

LowerTriangularEncoding AdjModel::sampleEncoding(Rng& rng) const {
  Tape tape(false);
  LowerTriangularEncoding enc;
  Var h = tape.constant(Matrix::Zero(1, static_cast<Eigen::Index>(cfg_.stateSize)));
  const std::vector<std::uint8_t> firstRow;
  for (std::size_t t = 1;; ++t) {
    h = stepState(tape, h, t == 1 ? firstRow : enc.rows.back());
    if (cfg_.fixedLength != 0) {
      if (t == cfg_.fixedLength) break;
    } else {
      if (t == cfg_.maxNodes) break;
      if (rng.bernoulli(sigmoidOf(stop_.apply(tape, store_, h).item()))) break;
    }
    const Matrix& logits = edgeLogits(tape, h).value();
    std::vector<std::uint8_t> row(t);
    for (std::size_t j = 0; j < t; ++j) row[j] = rng.bernoulli(sigmoidOf(logits(0, static_cast<Eigen::Index>(j))));
    enc.rows.push_back(std::move(row));
  }
  return enc;
}

Graph AdjModel::sample(Rng& rng) const { return decodeAdjacency(sampleEncoding(rng)); }

json AdjModel::architecture() const {
  return {{"maxNodes", cfg_.maxNodes},
          {"stateSize", cfg_.stateSize},
          {"embedSize", cfg_.embedSize},
          {"fixedLength", cfg_.fixedLength}};
}

// ---------------------------------------------------------------- SeqModel

SeqModel::SeqModel(const SeqModelConfig& cfg, Rng& init) : cfg_(cfg) {
  if (cfg.maxNodes < 1) throw InputError("SeqModel needs maxNodes >= 1");
  if (cfg.fixedLength > cfg.maxNodes) throw InputError("fixedLength exceeds maxNodes");
  const auto d = static_cast<Eigen::Index>(cfg.nodeSize);
  initEmbedding_ = store_.add("node.init", nn::glorotUniform(1, d, init));
  newNodeEmbedding_ = store_.add("node.new", nn::glorotUniform(1, d, init));
  message_ = nn::Linear(store_, "message", d, d, init);
  update_ = nn::GruCell(store_, "update", d, d, init);
  edgeHidden_ = nn::Linear(store_, "edge.hidden", 3 * d, d, init);
  edgeOut_ = nn::Linear(store_, "edge.out", d, 1, init);
  stop_ = nn::Linear(store_, "stop", d, 1, init);
}

Var SeqModel::nodeStates(Tape& tape, const Graph& g) const {
  const auto n = static_cast<Eigen::Index>(g.nodeCount());
  Var h = nn::broadcastRows(tape.parameter(store_, initEmbedding_), n);
  if (cfg_.rounds == 0) return h;
  Matrix adj = Matrix::Zero(n, n);
  for (auto [u, v] : g.edges()) adj(u, v) = adj(v, u) = 1.0;
  Var a = tape.constant(std::move(adj));
  for (std::size_t r = 0; r < cfg_.rounds; ++r) {
    Var m = nn::matmul(a, message_.apply(tape, store_, h));
    h = update_.apply(tape, store_, h, m);
  }
  return h;
}

SeqModel::StepHeads SeqModel::heads(Tape& tape, const Graph& current) const {
  const auto t = static_cast<Eigen::Index>(current.nodeCount());
  Var h = nodeStates(tape, current);
  Var readout = nn::meanRows(h);
  Var stop = stop_.apply(tape, store_, readout);
  Var parts[] = {h, nn::broadcastRows(tape.parameter(store_, newNodeEmbedding_), t), nn::broadcastRows(readout, t)};
  Var x = nn::concatCols(parts);
  Var logits = edgeOut_.apply(tape, store_, nn::relu(edgeHidden_.apply(tape, store_, x)));
  return {logits, stop};
}

Var SeqModel::logProb(Tape& tape, const GraphSequence& gs, std::span<const std::vector<std::uint8_t>> traceEdges) const {
  const std::size_t n = gs.steps.size();
  checkLength(n, cfg_.maxNodes, cfg_.fixedLength);
  if (traceEdges.size() + 1 != n) throw InputError("edge trace length does not match the sequence");
  for (std::size_t t = 0; t < n; ++t) {
    if (gs.steps[t].nodeCount() != t + 1) throw InputError("sequence step " + std::to_string(t) + " has wrong size");
    if (t == 0) continue;
    const auto& trace = traceEdges[t - 1];
    const Graph& cur = gs.steps[t];
    const Graph& prev = gs.steps[t - 1];
    if (trace.size() != t) throw InputError("edge trace row has wrong length");
    const auto newNode = static_cast<NodeId>(t);
    for (NodeId j = 0; j < newNode; ++j) {
      if (cur.hasEdge(newNode, j) != (trace[static_cast<std::size_t>(j)] != 0)) {
        throw InputError("edge trace disagrees with the sequence at step " + std::to_string(t));
      }
      for (NodeId k = 0; k < j; ++k) {
        if (cur.hasEdge(j, k) != prev.hasEdge(j, k)) {
          throw InputError("sequence step " + std::to_string(t) + " does not extend its predecessor");
        }
      }
    }
  }
  const bool learnedStop = cfg_.fixedLength == 0;
  std::vector<Var> terms;
  for (std::size_t t = 1; t <= n; ++t) {
    StepHeads hd = heads(tape, gs.steps[t - 1]);
    const bool canStop = learnedStop && t < cfg_.maxNodes;
    if (t == n) {
      if (canStop) terms.push_back(nn::logSigmoid(hd.stopLogit));
      break;
    }
    if (canStop) terms.push_back(nn::logSigmoid(nn::scale(hd.stopLogit, -1.0)));
    const auto& trace = traceEdges[t - 1];
    Matrix y(static_cast<Eigen::Index>(t), 1);
    for (std::size_t j = 0; j < t; ++j) y(static_cast<Eigen::Index>(j), 0) = trace[j];
    terms.push_back(nn::bernoulliLogLik(hd.edgeLogits, y));
  }
  return sumTerms(tape, terms);
}

Var SeqModel::traceLogProb(Tape& tape, const Graph& g, const NodeOrdering& pi) const {
  if (pi.size() != g.nodeCount()) throw InputError("ordering size does not match the graph");
  GraphSequence gs = orderingToSequence(g, pi);
  LowerTriangularEncoding enc = encodeAdjacency(g, pi);
  return logProb(tape, gs, enc.rows);
}

Graph SeqModel::sample(Rng& rng) const {
  Tape tape(false);
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (std::size_t t = 1;; ++t) {
    Graph g = Graph::fromEdges(t, edges);
    if (cfg_.fixedLength != 0) {
      if (t == cfg_.fixedLength) return g;
    } else if (t == cfg_.maxNodes) {
      return g;
    }
    StepHeads hd = heads(tape, g);
    if (cfg_.fixedLength == 0 && rng.bernoulli(sigmoidOf(hd.stopLogit.item()))) return g;
    const Matrix& logits = hd.edgeLogits.value();
    for (std::size_t j = 0; j < t; ++j) {
      if (rng.bernoulli(sigmoidOf(logits(static_cast<Eigen::Index>(j), 0)))) {
        edges.emplace_back(static_cast<NodeId>(j), static_cast<NodeId>(t));
      }
    }
  }
}

json SeqModel::architecture() const {
  return {{"maxNodes", cfg_.maxNodes},
          {"nodeSize", cfg_.nodeSize},
          {"rounds", cfg_.rounds},
          {"fixedLength", cfg_.fixedLength}};
}

// ---------------------------------------------------------------- joint / marginal

double logMultiplicity(ModelKind kind, const Graph& g, const NodeOrdering& pi, MultiplicityMode mode,
                       SearchBudget budget) {
  if (kind == ModelKind::adjacency) return logOf(automorphismCount(g, budget));
  if (mode == MultiplicityMode::exact) return logOf(sequenceMultiplicityExact(g, pi, budget));
  return logSequenceMultiplicityCR(g, pi);
}

Var jointLogProb(Tape& tape, const GraphModel& model, const Graph& g, const NodeOrdering& pi, double logMult) {
  return nn::addScalar(model.traceLogProb(tape, g, pi), -logMult);
}

double jointLogProb(const GraphModel& model, const Graph& g, const NodeOrdering& pi, MultiplicityMode mode) {
  return model.traceLogProb(g, pi) - logMultiplicity(model.kind(), g, pi, mode);
}

double exactMarginalLogProb(const GraphModel& model, const Graph& g, MultiplicityMode mode, std::size_t maxNodes) {
  const std::size_t n = g.nodeCount();
  if (n > maxNodes) {
    throw ResourceError("exact marginal over " + std::to_string(n) + "! orderings exceeds the limit of " +
                        std::to_string(maxNodes) + " nodes");
  }
  const bool adjacency = model.kind() == ModelKind::adjacency;
  const double logAut = adjacency ? logOf(automorphismCount(g)) : 0.0;
  std::vector<NodeId> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<double> terms;
  do {
    NodeOrdering pi(perm);
    double lm = adjacency ? logAut : logMultiplicity(model.kind(), g, pi, mode);
    terms.push_back(model.traceLogProb(g, pi) - lm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return logSumExp(terms);
}

// ---------------------------------------------------------------- checkpoints

json saveModel(const GraphModel& model, const json& extraMetadata) {
  json meta = extraMetadata.is_object() ? extraMetadata : json::object();
  meta["architecture"] = model.architecture();
  return nn::makeCheckpoint(model.params(), toString(model.kind()), meta);
}

std::unique_ptr<GraphModel> makeModel(ModelKind kind, const json& arch, Rng& init) {
  try {
    if (kind == ModelKind::adjacency) {
      AdjModelConfig c;
      c.maxNodes = arch.value("maxNodes", c.maxNodes);
      c.stateSize = arch.value("stateSize", c.stateSize);
      c.embedSize = arch.value("embedSize", c.embedSize);
      c.fixedLength = arch.value("fixedLength", c.fixedLength);
      return std::make_unique<AdjModel>(c, init);
    }
    SeqModelConfig c;
    c.maxNodes = arch.value("maxNodes", c.maxNodes);
    c.nodeSize = arch.value("nodeSize", c.nodeSize);
    c.rounds = arch.value("rounds", c.rounds);
    c.fixedLength = arch.value("fixedLength", c.fixedLength);
    return std::make_unique<SeqModel>(c, init);
  } catch (const json::exception& e) {
    throw InputError(std::string("bad model architecture: ") + e.what());
  }
}

std::unique_ptr<GraphModel> loadModel(const json& checkpoint) {
  if (!checkpoint.is_object() || !checkpoint.contains("modelKind") || !checkpoint.contains("parameters")) {
    throw InputError("checkpoint lacks modelKind or parameters");
  }
  ModelKind kind;
  try {
    kind = parseModelKind(checkpoint.at("modelKind").get<std::string>());
  } catch (const json::exception&) {
    throw InputError("checkpoint modelKind is not a string");
  }
  json arch = json::object();
  if (checkpoint.contains("metadata") && checkpoint["metadata"].contains("architecture")) {
    arch = checkpoint["metadata"]["architecture"];
  }
  Rng init(0);
  auto model = makeModel(kind, arch, init);
  model->params().loadJson(checkpoint.at("parameters"));
  return model;
}

}  // namespace ordvi
