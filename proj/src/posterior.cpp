#include "ordvi/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "ordvi/errors.hpp"
#include "ordvi/numerics.hpp"

namespace ordvi {

using nn::Matrix;
using nn::Tape;
using nn::Var;
using nlohmann::json;

namespace {

void checkOrdering(const Graph& g, const NodeOrdering& pi) {
  if (pi.size() != g.nodeCount()) {
    throw InputError("ordering has " + std::to_string(pi.size()) + " entries for a graph with " +
                     std::to_string(g.nodeCount()) + " nodes");
  }
}

}  // namespace

OrderingSample uniformOrdering(const Graph& g, Rng& rng) {
  std::vector<NodeId> perm(g.nodeCount());
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(std::span<NodeId>(perm));
  OrderingSample s;
  s.pi = NodeOrdering(std::move(perm));
  s.logQ = -logFactorial(g.nodeCount());
  s.stepLogProbs.resize(g.nodeCount());
  for (std::size_t t = 0; t < g.nodeCount(); ++t) s.stepLogProbs[t] = -std::log(static_cast<double>(g.nodeCount() - t));
  return s;
}

OrderingSample UniformOrdering::sample(const Graph& g, Rng& rng) const { return uniformOrdering(g, rng); }

double UniformOrdering::logProb(const Graph& g, const NodeOrdering& pi) const {
  checkOrdering(g, pi);
  return -logFactorial(g.nodeCount());
}

TabulatedOrdering::TabulatedOrdering(std::map<NodeOrdering, double> weights) {
  double total = 0.0;
  for (const auto& [pi, w] : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InputError("ordering weights must be finite and nonnegative");
    if (!support_.empty() && pi.size() != support_.front().size()) {
      throw InputError("tabulated orderings must share one size");
    }
    if (w == 0.0) continue;
    total += w;
    support_.push_back(pi);
    cumulative_.push_back(total);
    logProb_.push_back(w);
  }
  if (total <= 0.0) throw InputError("ordering weights sum to zero");
  for (auto& c : cumulative_) c /= total;
  for (auto& l : logProb_) l = std::log(l / total);
}

OrderingSample TabulatedOrdering::sample(const Graph& g, Rng& rng) const {
  if (support_.front().size() != g.nodeCount()) throw InputError("tabulated ordering size does not match the graph");
  const double u = rng.uniform();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), support_.size() - 1);
  return {support_[k], logProb_[k], {}};
}

double TabulatedOrdering::logProb(const Graph& g, const NodeOrdering& pi) const {
  checkOrdering(g, pi);
  auto it = std::lower_bound(support_.begin(), support_.end(), pi);
  if (it == support_.end() || *it != pi) return -std::numeric_limits<double>::infinity();
  return logProb_[static_cast<std::size_t>(it - support_.begin())];
}

// ---------------------------------------------------------------- learned posterior

Matrix positionalEmbedding(std::size_t t, std::size_t dim) {
  Matrix pe(1, static_cast<Eigen::Index>(dim));
  const double pos = static_cast<double>(t);
  for (std::size_t i = 0; i < dim; ++i) {
    const double freq = std::pow(10000.0, -static_cast<double>(i - i % 2) / static_cast<double>(dim));
    pe(0, static_cast<Eigen::Index>(i)) = i % 2 == 0 ? std::sin(pos * freq) : std::cos(pos * freq);
  }
  return pe;
}

OrderPosterior::OrderPosterior(const PosteriorConfig& cfg, Rng& init) : cfg_(cfg) {
  if (cfg.heads == 0 || cfg.headWidth == 0) throw InputError("posterior needs heads >= 1 and headWidth >= 1");
  const auto d = static_cast<Eigen::Index>(width());
  h0_ = store_.add("h0", nn::glorotUniform(1, d, init));
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    layers_.emplace_back(store_, "gat" + std::to_string(l), static_cast<Eigen::Index>(cfg.heads),
                         static_cast<Eigen::Index>(cfg.headWidth), init);
  }
  head_ = nn::Linear(store_, "head", d, 1, init);
}

nn::Mask OrderPosterior::neighbourhood(const Graph& g) const {
  const auto n = static_cast<Eigen::Index>(g.nodeCount());
  nn::Mask m = Matrix::Identity(n, n);
  for (auto [u, v] : g.edges()) m(u, v) = m(v, u) = 1.0;
  return m;
}

Var OrderPosterior::logitsWithMask(Tape& tape, std::span<const NodeId> prefix, const nn::Mask& nb) const {
  const Eigen::Index n = nb.rows();
  const std::size_t d = width();
  Matrix pe = Matrix::Zero(n, static_cast<Eigen::Index>(d));
  for (std::size_t s = 0; s < prefix.size(); ++s) pe.row(prefix[s]) = positionalEmbedding(s + 1, d);
  Var x = nn::add(nn::broadcastRows(tape.parameter(store_, h0_), n), tape.constant(std::move(pe)));
  for (const auto& layer : layers_) x = layer.apply(tape, store_, x, nb);
  return head_.apply(tape, store_, x);
}

Var OrderPosterior::stepLogits(Tape& tape, const Graph& g, std::span<const NodeId> prefix) const {
  const std::size_t n = g.nodeCount();
  if (prefix.size() >= n) throw InputError("prefix must be shorter than the node count");
  std::vector<char> seen(n, 0);
  for (NodeId v : prefix) {
    if (v < 0 || static_cast<std::size_t>(v) >= n || seen[static_cast<std::size_t>(v)]) {
      throw InputError("prefix has an invalid or repeated node id");
    }
    seen[static_cast<std::size_t>(v)] = 1;
  }
  return logitsWithMask(tape, prefix, neighbourhood(g));
}

OrderPosterior::TapeSample OrderPosterior::sampleOnTape(Tape& tape, const Graph& g, Rng& rng) const {
  const std::size_t n = g.nodeCount();
  if (n == 0) throw InputError("empty graph");
  const nn::Mask nb = neighbourhood(g);
  std::vector<NodeId> chosen;
  chosen.reserve(n);
  Matrix avail = Matrix::Ones(static_cast<Eigen::Index>(n), 1);
  std::vector<Var> terms;
  std::vector<double> steps;
  for (std::size_t t = 0; t + 1 < n; ++t) {
    Var logits = logitsWithMask(tape, chosen, nb);
    const Matrix& x = logits.value();
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < x.rows(); ++j)
      if (avail(j, 0) != 0.0) mx = std::max(mx, x(j, 0));
    double z = 0.0;
    for (Eigen::Index j = 0; j < x.rows(); ++j)
      if (avail(j, 0) != 0.0) z += std::exp(x(j, 0) - mx);
    double u = rng.uniform() * z;
    Eigen::Index pick = -1;
    for (Eigen::Index j = 0; j < x.rows(); ++j) {
      if (avail(j, 0) == 0.0) continue;
      pick = j;
      u -= std::exp(x(j, 0) - mx);
      if (u < 0.0) break;
    }
    Var lp = nn::maskedLogSoftmaxAt(logits, avail, pick);
    terms.push_back(lp);
    steps.push_back(lp.item());
    avail(pick, 0) = 0.0;
    chosen.push_back(static_cast<NodeId>(pick));
  }
  for (Eigen::Index j = 0; j < avail.rows(); ++j) {
    if (avail(j, 0) != 0.0) chosen.push_back(static_cast<NodeId>(j));
  }
  steps.push_back(0.0);
  Var total = terms.empty() ? tape.scalar(0.0) : terms.front();
  for (std::size_t i = 1; i < terms.size(); ++i) total = nn::add(total, terms[i]);
  return {NodeOrdering(std::move(chosen)), total, std::move(steps)};
}

Var OrderPosterior::logProbOnTape(Tape& tape, const Graph& g, const NodeOrdering& pi) const {
  checkOrdering(g, pi);
  const std::size_t n = g.nodeCount();
  const nn::Mask nb = neighbourhood(g);
  Matrix avail = Matrix::Ones(static_cast<Eigen::Index>(n), 1);
  std::vector<Var> terms;
  for (std::size_t t = 0; t + 1 < n; ++t) {
    Var logits = logitsWithMask(tape, pi.prefix(t), nb);
    terms.push_back(nn::maskedLogSoftmaxAt(logits, avail, pi[t]));
    avail(pi[t], 0) = 0.0;
  }
  Var total = terms.empty() ? tape.scalar(0.0) : terms.front();
  for (std::size_t i = 1; i < terms.size(); ++i) total = nn::add(total, terms[i]);
  return total;
}

OrderingSample OrderPosterior::sample(const Graph& g, Rng& rng) const {
  Tape tape(false);
  TapeSample s = sampleOnTape(tape, g, rng);
  return {std::move(s.pi), s.logQ.item(), std::move(s.stepLogProbs)};
}

double OrderPosterior::logProb(const Graph& g, const NodeOrdering& pi) const {
  Tape tape(false);
  return logProbOnTape(tape, g, pi).item();
}

json OrderPosterior::architecture() const {
  return {{"layers", cfg_.layers}, {"heads", cfg_.heads}, {"headWidth", cfg_.headWidth}};
}

json savePosterior(const OrderPosterior& q, const json& extraMetadata) {
  json meta = extraMetadata.is_object() ? extraMetadata : json::object();
  meta["architecture"] = q.architecture();
  return nn::makeCheckpoint(q.params(), "posterior", meta);
}

OrderPosterior loadPosterior(const json& checkpoint) {
  if (!checkpoint.is_object() || checkpoint.value("modelKind", std::string()) != "posterior" ||
      !checkpoint.contains("parameters")) {
    throw InputError("not a posterior checkpoint");
  }
  PosteriorConfig cfg;
  try {
    if (checkpoint.contains("metadata") && checkpoint["metadata"].contains("architecture")) {
      const json& a = checkpoint["metadata"]["architecture"];
      cfg.layers = a.value("layers", cfg.layers);
      cfg.heads = a.value("heads", cfg.heads);
      cfg.headWidth = a.value("headWidth", cfg.headWidth);
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("bad posterior architecture: ") + e.what());
  }
  Rng init(0);
  OrderPosterior q(cfg, init);
  q.params().loadJson(checkpoint.at("parameters"));
  return q;
}

}  // namespace ordvi
