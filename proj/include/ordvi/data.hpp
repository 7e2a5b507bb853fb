#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ordvi/graph.hpp"
#include "ordvi/rng.hpp"

namespace ordvi {

struct GraphDataset {
  std::string name;
  std::vector<Graph> graphs;
  /// Generator parameters or source path.
  nlohmann::json provenance = nlohmann::json::object();
  /// Planted community label per node, per graph (generators only; may be empty).
  std::vector<std::vector<int>> communities;

  std::size_t size() const noexcept { return graphs.size(); }
};

/// Text format: per graph a header "n m" then m lines "u v" with 0 <= u < v < n;
/// graphs separated by one blank line. ParseError carries the line number.
GraphDataset parseDataset(std::string_view text, std::string name = "dataset");
std::string formatDataset(const GraphDataset& ds);
/// Unreadable or unwritable files raise InputError.
GraphDataset loadDataset(const std::filesystem::path& path);
void saveDataset(const GraphDataset& ds, const std::filesystem::path& path);

struct CommunityConfig {
  std::size_t count = 100;
  std::size_t minNodes = 12;
  std::size_t maxNodes = 16;
  double pIntra = 0.7;
  /// Resampling attempts per community before giving up.
  std::size_t retries = 10000;
};

/// Two Erdos-Renyi communities of sizes ceil(n/2) and floor(n/2), each redrawn
/// until connected, joined by one uniformly chosen bridge. Community A holds
/// nodes [0, ceil(n/2)). Graph i uses rng.split(i).
GraphDataset genCommunitySmall(const CommunityConfig& cfg, const Rng& rng);

/// Each pair independently an edge with probability p; graph i uses rng.split(i).
GraphDataset genER(std::size_t count, std::size_t n, double p, const Rng& rng);

/// Seeded shuffle, then the first ceil(f * N) graphs train and the rest test.
std::pair<GraphDataset, GraphDataset> splitDataset(const GraphDataset& ds, double trainFraction, const Rng& rng);

}  // namespace ordvi
