#include "ordvi/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "ordvi/errors.hpp"

namespace ordvi {

namespace {

std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::size_t number(std::string_view tok, std::size_t lineNo, const char* what) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size()) {
    throw ParseError(lineNo, std::string("expected a nonnegative integer for ") + what + ", got '" +
                                 std::string(tok) + "'");
  }
  return v;
}

}  // namespace

GraphDataset parseDataset(std::string_view text, std::string name) {
  GraphDataset ds;
  ds.name = std::move(name);
  std::size_t lineNo = 0;
  std::size_t pos = 0;

  std::size_t n = 0, m = 0, seen = 0;
  bool inBlock = false;
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::set<std::pair<NodeId, NodeId>> unique;
  std::size_t headerLine = 0;

  auto finish = [&] {
    ds.graphs.push_back(Graph::fromEdges(n, edges));
    edges.clear();
    unique.clear();
    inBlock = false;
  };

  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    auto tok = tokens(line);
    if (tok.empty()) {
      if (inBlock) {
        throw ParseError(lineNo, "blank line inside a graph block (header on line " + std::to_string(headerLine) +
                                     " promised " + std::to_string(m) + " edges, found " + std::to_string(seen) +
                                     ")");
      }
      continue;
    }
    if (tok.size() != 2) throw ParseError(lineNo, "expected two integers, got " + std::to_string(tok.size()));
    if (!inBlock) {
      n = number(tok[0], lineNo, "node count");
      m = number(tok[1], lineNo, "edge count");
      if (n == 0) throw ParseError(lineNo, "graph with zero nodes");
      if (m > n * (n - 1) / 2) throw ParseError(lineNo, "edge count exceeds n(n-1)/2");
      headerLine = lineNo;
      seen = 0;
      inBlock = true;
      if (m == 0) finish();
      continue;
    }
    const std::size_t u = number(tok[0], lineNo, "edge endpoint");
    const std::size_t v = number(tok[1], lineNo, "edge endpoint");
    if (u == v) throw ParseError(lineNo, "self-loop on node " + std::to_string(u));
    if (u >= n || v >= n) {
      throw ParseError(lineNo, "endpoint out of range for a graph with " + std::to_string(n) + " nodes");
    }
    if (u > v) throw ParseError(lineNo, "edge endpoints must be written as u < v");
    auto e = std::make_pair(static_cast<NodeId>(u), static_cast<NodeId>(v));
    if (!unique.insert(e).second) throw ParseError(lineNo, "duplicate edge " + std::to_string(u) + " " + std::to_string(v));
    edges.push_back(e);
    if (++seen == m) finish();
  }
  if (inBlock) {
    throw ParseError(lineNo + 1, "unexpected end of input: header on line " + std::to_string(headerLine) +
                                     " promised " + std::to_string(m) + " edges, found " + std::to_string(seen));
  }
  return ds;
}

std::string formatDataset(const GraphDataset& ds) {
  std::ostringstream out;
  for (std::size_t i = 0; i < ds.graphs.size(); ++i) {
    if (i) out << '\n';
    const Graph& g = ds.graphs[i];
    auto edges = g.edges();
    out << g.nodeCount() << ' ' << edges.size() << '\n';
    for (auto [u, v] : edges) out << u << ' ' << v << '\n';
  }
  return out.str();
}

GraphDataset loadDataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open dataset '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  GraphDataset ds = parseDataset(buf.str(), path.stem().string());
  ds.provenance = {{"source", path.string()}};
  return ds;
}

void saveDataset(const GraphDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write dataset '" + path.string() + "'");
  out << formatDataset(ds);
  if (!out) throw InputError("write to '" + path.string() + "' failed");
}

namespace {

/// Connected ER graph on `size` nodes, nodes shifted by `offset`.
void connectedCommunity(std::size_t size, std::size_t offset, double p, std::size_t retries, Rng& rng,
                        std::vector<std::pair<NodeId, NodeId>>& out) {
  for (std::size_t attempt = 0; attempt < retries; ++attempt) {
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (std::size_t u = 0; u < size; ++u)
      for (std::size_t v = u + 1; v < size; ++v)
        if (rng.bernoulli(p)) edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
    if (isConnected(Graph::fromEdges(size, edges))) {
      for (auto [u, v] : edges) out.emplace_back(u + static_cast<NodeId>(offset), v + static_cast<NodeId>(offset));
      return;
    }
  }
  throw Error("could not draw a connected community of " + std::to_string(size) + " nodes in " +
              std::to_string(retries) + " attempts");
}

}  // namespace

GraphDataset genCommunitySmall(const CommunityConfig& cfg, const Rng& rng) {
  if (cfg.minNodes < 4 || cfg.maxNodes < cfg.minNodes) throw InputError("community node range must satisfy 4 <= min <= max");
  if (!(cfg.pIntra >= 0.0 && cfg.pIntra <= 1.0)) throw InputError("pIntra must lie in [0, 1]");
  GraphDataset ds;
  ds.name = "community-small";
  ds.provenance = {{"generator", "community"},
                   {"count", cfg.count},
                   {"minNodes", cfg.minNodes},
                   {"maxNodes", cfg.maxNodes},
                   {"pIntra", cfg.pIntra},
                   {"seed", rng.key()}};
  for (std::size_t i = 0; i < cfg.count; ++i) {
    Rng r = rng.split(i);
    const std::size_t n = cfg.minNodes + static_cast<std::size_t>(r.below(cfg.maxNodes - cfg.minNodes + 1));
    const std::size_t a = (n + 1) / 2;
    const std::size_t b = n - a;
    std::vector<std::pair<NodeId, NodeId>> edges;
    connectedCommunity(a, 0, cfg.pIntra, cfg.retries, r, edges);
    connectedCommunity(b, a, cfg.pIntra, cfg.retries, r, edges);
    const auto u = static_cast<NodeId>(r.below(a));
    const auto v = static_cast<NodeId>(a + r.below(b));
    edges.emplace_back(u, v);
    std::sort(edges.begin(), edges.end());
    ds.graphs.push_back(Graph::fromEdges(n, edges));
    std::vector<int> labels(n, 1);
    std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(a), 0);
    ds.communities.push_back(std::move(labels));
  }
  return ds;
}

GraphDataset genER(std::size_t count, std::size_t n, double p, const Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw InputError("edge probability must lie in [0, 1]");
  if (n == 0) throw InputError("graphs need at least one node");
  GraphDataset ds;
  ds.name = "erdos-renyi";
  ds.provenance = {{"generator", "er"}, {"count", count}, {"n", n}, {"p", p}, {"seed", rng.key()}};
  for (std::size_t i = 0; i < count; ++i) {
    Rng r = rng.split(i);
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t v = u + 1; v < n; ++v)
        if (r.bernoulli(p)) edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
    ds.graphs.push_back(Graph::fromEdges(n, edges));
  }
  return ds;
}

std::pair<GraphDataset, GraphDataset> splitDataset(const GraphDataset& ds, double trainFraction, const Rng& rng) {
  if (!(trainFraction > 0.0 && trainFraction < 1.0)) throw InputError("train fraction must lie in (0, 1)");
  std::vector<std::size_t> idx(ds.graphs.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng r = rng;
  r.shuffle(std::span<std::size_t>(idx));
  const auto cut = std::min(idx.size(), static_cast<std::size_t>(std::ceil(trainFraction * static_cast<double>(idx.size()) - 1e-9)));
  GraphDataset train, test;
  train.name = ds.name + "-train";
  test.name = ds.name + "-test";
  train.provenance = test.provenance = {{"splitOf", ds.name}, {"trainFraction", trainFraction}, {"seed", rng.key()}};
  for (std::size_t k = 0; k < idx.size(); ++k) {
    GraphDataset& dst = k < cut ? train : test;
    dst.graphs.push_back(ds.graphs[idx[k]]);
    if (!ds.communities.empty()) dst.communities.push_back(ds.communities[idx[k]]);
  }
  return {std::move(train), std::move(test)};
}

}  // namespace ordvi
