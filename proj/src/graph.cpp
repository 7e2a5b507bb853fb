#include "ordvi/graph.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <string>

#include "ordvi/errors.hpp"

namespace ordvi {

namespace {

void checkNode(std::size_t n, NodeId u) {
  if (u < 0 || static_cast<std::size_t>(u) >= n) {
    throw InputError("node id " + std::to_string(u) + " out of range for " + std::to_string(n) +
                     "-node graph");
  }
}

void checkOrdering(const Graph& g, const NodeOrdering& pi) {
  if (pi.size() != g.nodeCount()) {
    throw InputError("ordering has " + std::to_string(pi.size()) + " entries but graph has " +
                     std::to_string(g.nodeCount()) + " nodes");
  }
}

}  // namespace

Graph::Graph(std::size_t n) : n_(n), words_((n + 63) / 64), bits_(n * ((n + 63) / 64), 0) {}

Graph Graph::fromEdges(std::size_t n, std::span<const std::pair<NodeId, NodeId>> edges) {
  GraphBuilder b(n);
  for (auto [u, v] : edges) {
    checkNode(n, u);
    checkNode(n, v);
    if (b.hasEdge(u, v)) {
      throw InputError("duplicate edge (" + std::to_string(u) + ", " + std::to_string(v) + ")");
    }
    b.addEdge(u, v);
  }
  return std::move(b).build();
}

std::size_t Graph::edgeCount() const noexcept {
  std::size_t total = 0;
  for (auto w : bits_) total += static_cast<std::size_t>(std::popcount(w));
  return total / 2;
}

std::size_t Graph::degree(NodeId u) const noexcept {
  std::size_t d = 0;
  for (auto w : row(u)) d += static_cast<std::size_t>(std::popcount(w));
  return d;
}

std::vector<NodeId> Graph::neighbors(NodeId u) const {
  std::vector<NodeId> out;
  auto r = row(u);
  for (std::size_t w = 0; w < r.size(); ++w) {
    std::uint64_t word = r[w];
    while (word != 0) {
      int bit = std::countr_zero(word);
      out.push_back(static_cast<NodeId>(w * 64 + static_cast<std::size_t>(bit)));
      word &= word - 1;
    }
  }
  return out;
}

std::vector<std::pair<NodeId, NodeId>> Graph::edges() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  for (std::size_t u = 0; u < n_; ++u) {
    for (NodeId v : neighbors(static_cast<NodeId>(u))) {
      if (static_cast<std::size_t>(v) > u) out.emplace_back(static_cast<NodeId>(u), v);
    }
  }
  return out;
}

GraphBuilder& GraphBuilder::addEdge(NodeId u, NodeId v) {
  checkNode(g_.n_, u);
  checkNode(g_.n_, v);
  if (u == v) throw InputError("self-loop at node " + std::to_string(u));
  auto su = static_cast<std::size_t>(u);
  auto sv = static_cast<std::size_t>(v);
  g_.bits_[su * g_.words_ + (sv >> 6)] |= std::uint64_t{1} << (sv & 63);
  g_.bits_[sv * g_.words_ + (su >> 6)] |= std::uint64_t{1} << (su & 63);
  return *this;
}

NodeOrdering::NodeOrdering(std::vector<NodeId> perm) : perm_(std::move(perm)) {
  std::vector<bool> seen(perm_.size(), false);
  for (NodeId v : perm_) {
    if (v < 0 || static_cast<std::size_t>(v) >= perm_.size() || seen[static_cast<std::size_t>(v)]) {
      throw InputError("ordering is not a permutation of 0.." + std::to_string(perm_.size()));
    }
    seen[static_cast<std::size_t>(v)] = true;
  }
}

NodeOrdering NodeOrdering::identity(std::size_t n) {
  std::vector<NodeId> p(n);
  std::iota(p.begin(), p.end(), 0);
  return NodeOrdering(std::move(p));
}

Graph inducedSubgraph(const Graph& g, std::span<const NodeId> nodes) {
  std::vector<bool> seen(g.nodeCount(), false);
  for (NodeId v : nodes) {
    checkNode(g.nodeCount(), v);
    if (seen[static_cast<std::size_t>(v)]) {
      throw InputError("duplicate node " + std::to_string(v) + " in induced subgraph");
    }
    seen[static_cast<std::size_t>(v)] = true;
  }
  GraphBuilder b(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      if (g.hasEdge(nodes[i], nodes[j])) b.addEdge(static_cast<NodeId>(i), static_cast<NodeId>(j));
    }
  }
  return std::move(b).build();
}

Graph removeNode(const Graph& g, NodeId u) {
  checkNode(g.nodeCount(), u);
  std::vector<NodeId> keep;
  keep.reserve(g.nodeCount() - 1);
  for (std::size_t v = 0; v < g.nodeCount(); ++v) {
    if (static_cast<NodeId>(v) != u) keep.push_back(static_cast<NodeId>(v));
  }
  return inducedSubgraph(g, keep);
}

LowerTriangularEncoding encodeAdjacency(const Graph& g, const NodeOrdering& pi) {
  checkOrdering(g, pi);
  LowerTriangularEncoding enc;
  const std::size_t n = pi.size();
  if (n > 0) enc.rows.reserve(n - 1);
  for (std::size_t t = 1; t < n; ++t) {
    std::vector<std::uint8_t> r(t);
    for (std::size_t j = 0; j < t; ++j) r[j] = g.hasEdge(pi[t], pi[j]) ? 1 : 0;
    enc.rows.push_back(std::move(r));
  }
  return enc;
}

Graph decodeAdjacency(const LowerTriangularEncoding& enc) {
  GraphBuilder b(enc.nodeCount());
  for (std::size_t k = 0; k < enc.rows.size(); ++k) {
    if (enc.rows[k].size() != k + 1) {
      throw InputError("encoding row " + std::to_string(k + 2) + " has length " +
                       std::to_string(enc.rows[k].size()) + ", expected " + std::to_string(k + 1));
    }
    for (std::size_t j = 0; j <= k; ++j) {
      if (enc.rows[k][j] > 1) throw InputError("encoding entries must be 0 or 1");
      if (enc.rows[k][j] != 0) b.addEdge(static_cast<NodeId>(k + 1), static_cast<NodeId>(j));
    }
  }
  return std::move(b).build();
}

GraphSequence orderingToSequence(const Graph& g, const NodeOrdering& pi) {
  checkOrdering(g, pi);
  GraphSequence seq;
  seq.steps.reserve(pi.size());
  for (std::size_t t = 1; t <= pi.size(); ++t) seq.steps.push_back(inducedSubgraph(g, pi.prefix(t)));
  return seq;
}

std::vector<std::uint8_t> permutedAdjacency(const Graph& g, const NodeOrdering& pi) {
  checkOrdering(g, pi);
  const std::size_t n = pi.size();
  std::vector<std::uint8_t> m(n * n, 0);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = 0; t < n; ++t) m[s * n + t] = g.hasEdge(pi[s], pi[t]) ? 1 : 0;
  }
  return m;
}

std::vector<std::size_t> degreeSequence(const Graph& g) {
  std::vector<std::size_t> d(g.nodeCount());
  for (std::size_t v = 0; v < g.nodeCount(); ++v) d[v] = g.degree(static_cast<NodeId>(v));
  std::sort(d.begin(), d.end());
  return d;
}

bool isConnected(const Graph& g) {
  const std::size_t n = g.nodeCount();
  if (n == 0) return true;
  std::vector<bool> seen(n, false);
  std::vector<NodeId> stack{0};
  seen[0] = true;
  std::size_t reached = 1;
  while (!stack.empty()) {
    NodeId u = stack.back();
    stack.pop_back();
    for (NodeId v : g.neighbors(u)) {
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = true;
        ++reached;
        stack.push_back(v);
      }
    }
  }
  return reached == n;
}

Graph completeGraph(std::size_t n) {
  GraphBuilder b(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) b.addEdge(static_cast<NodeId>(i), static_cast<NodeId>(j));
  return std::move(b).build();
}

Graph pathGraph(std::size_t n) {
  GraphBuilder b(n);
  for (std::size_t i = 0; i + 1 < n; ++i) b.addEdge(static_cast<NodeId>(i), static_cast<NodeId>(i + 1));
  return std::move(b).build();
}

Graph cycleGraph(std::size_t n) {
  if (n < 3) throw InputError("cycle needs at least 3 nodes");
  GraphBuilder b(n);
  for (std::size_t i = 0; i < n; ++i) b.addEdge(static_cast<NodeId>(i), static_cast<NodeId>((i + 1) % n));
  return std::move(b).build();
}

Graph starGraph(std::size_t leaves) {
  GraphBuilder b(leaves + 1);
  for (std::size_t i = 1; i <= leaves; ++i) b.addEdge(0, static_cast<NodeId>(i));
  return std::move(b).build();
}

Graph petersenGraph() {
  GraphBuilder b(10);
  for (NodeId i = 0; i < 5; ++i) {
    b.addEdge(i, (i + 1) % 5);          // outer cycle
    b.addEdge(i, i + 5);                // spokes
    b.addEdge(5 + i, 5 + (i + 2) % 5);  // inner pentagram
  }
  return std::move(b).build();
}

}  // namespace ordvi
