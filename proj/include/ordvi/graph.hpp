#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace ordvi {

using NodeId = int;

/// Immutable simple undirected graph on nodes 0..n-1. Each node's neighborhood
/// is a word-packed bitset; the adjacency is symmetric with an empty diagonal.
class Graph {
 public:
  Graph() = default;

  /// Graph with `n` nodes and no edges.
  explicit Graph(std::size_t n);

  /// Throws InputError on self-loops, out-of-range endpoints or duplicate edges.
  static Graph fromEdges(std::size_t n, std::span<const std::pair<NodeId, NodeId>> edges);

  std::size_t nodeCount() const noexcept { return n_; }
  std::size_t edgeCount() const noexcept;
  bool hasEdge(NodeId u, NodeId v) const noexcept {
    return (row(u)[static_cast<std::size_t>(v) >> 6] >> (static_cast<std::size_t>(v) & 63)) & 1U;
  }
  std::size_t degree(NodeId u) const noexcept;
  std::vector<NodeId> neighbors(NodeId u) const;

  /// Edges (u, v) with u < v, in lexicographic order.
  std::vector<std::pair<NodeId, NodeId>> edges() const;

  std::span<const std::uint64_t> row(NodeId u) const noexcept {
    return {bits_.data() + static_cast<std::size_t>(u) * words_, words_};
  }
  std::size_t wordsPerRow() const noexcept { return words_; }

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  friend class GraphBuilder;
  std::size_t n_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> bits_;
};

/// Mutable staging area for a Graph.
class GraphBuilder {
 public:
  explicit GraphBuilder(std::size_t n) : g_(n) {}
  /// Idempotent; throws InputError on self-loops or out-of-range ids.
  GraphBuilder& addEdge(NodeId u, NodeId v);
  bool hasEdge(NodeId u, NodeId v) const noexcept { return g_.hasEdge(u, v); }
  std::size_t nodeCount() const noexcept { return g_.nodeCount(); }
  Graph build() && { return std::move(g_); }
  Graph build() const& { return g_; }

 private:
  Graph g_;
};

/// A permutation of 0..n-1; entry t is the node generated at step t.
class NodeOrdering {
 public:
  NodeOrdering() = default;
  /// Throws InputError unless `perm` is a bijection on 0..perm.size()-1.
  explicit NodeOrdering(std::vector<NodeId> perm);
  static NodeOrdering identity(std::size_t n);

  std::size_t size() const noexcept { return perm_.size(); }
  NodeId operator[](std::size_t t) const noexcept { return perm_[t]; }
  std::span<const NodeId> perm() const noexcept { return perm_; }
  std::span<const NodeId> prefix(std::size_t t) const noexcept { return {perm_.data(), t}; }

  friend bool operator==(const NodeOrdering&, const NodeOrdering&) = default;
  friend auto operator<=>(const NodeOrdering&, const NodeOrdering&) = default;

 private:
  std::vector<NodeId> perm_;
};

/// Rows 2..n of the strictly lower-triangular matrix L under some ordering;
/// rows[k] describes sequence position k+1 (0-based) and has k+1 entries.
struct LowerTriangularEncoding {
  std::vector<std::vector<std::uint8_t>> rows;

  std::size_t nodeCount() const noexcept { return rows.size() + 1; }
  friend bool operator==(const LowerTriangularEncoding&, const LowerTriangularEncoding&) = default;
  friend auto operator<=>(const LowerTriangularEncoding&, const LowerTriangularEncoding&) = default;
};

/// G_1, ..., G_n; steps[t] has t+1 nodes and steps[t-1] is its prefix subgraph.
struct GraphSequence {
  std::vector<Graph> steps;
};

/// Subgraph induced by `nodes`, relabeled so that nodes[i] becomes i.
Graph inducedSubgraph(const Graph& g, std::span<const NodeId> nodes);

/// g with node `u` removed; remaining nodes keep their relative order.
Graph removeNode(const Graph& g, NodeId u);

LowerTriangularEncoding encodeAdjacency(const Graph& g, const NodeOrdering& pi);
Graph decodeAdjacency(const LowerTriangularEncoding& enc);
GraphSequence orderingToSequence(const Graph& g, const NodeOrdering& pi);

/// Symmetric 0/1 matrix entry (s, t) = edge between pi[s] and pi[t], row-major n*n.
std::vector<std::uint8_t> permutedAdjacency(const Graph& g, const NodeOrdering& pi);

std::vector<std::size_t> degreeSequence(const Graph& g);

/// Exact isomorphism test by individualization-refinement backtracking.
bool isomorphic(const Graph& a, const Graph& b);

/// An isomorphism a -> b as a node map, if one exists.
std::optional<std::vector<NodeId>> findIsomorphism(const Graph& a, const Graph& b);

bool isConnected(const Graph& g);

// Named families, mostly for tests and examples.
Graph completeGraph(std::size_t n);
Graph pathGraph(std::size_t n);
Graph cycleGraph(std::size_t n);
Graph starGraph(std::size_t leaves);
Graph petersenGraph();

}  // namespace ordvi
