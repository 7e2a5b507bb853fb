#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

#include "ordvi/genmodels.hpp"
#include "ordvi/posterior.hpp"

namespace ordvi {

struct ImportanceEstimate {
  double estimate = 0.0;
  /// Jackknife standard error; NaN for a single sample.
  double standardError = 0.0;
  std::size_t samples = 0;
};

/// log (1/L) sum_l p(G, pi_l) / q(pi_l | G), pi_l ~ q, sample l drawing from
/// rng.split(l). NumericError if any log-ratio is non-finite.
ImportanceEstimate importanceLogLik(const GraphModel& model, const OrderingDistribution& proposal, const Graph& g,
                                    std::size_t samples, const Rng& rng,
                                    MultiplicityMode mode = MultiplicityMode::exact, std::size_t threads = 1);

/// log p(G) by enumerating all n! orderings (ResourceError past maxNodes).
double exactLogLik(const GraphModel& model, const Graph& g, std::size_t maxNodes = 8,
                   MultiplicityMode mode = MultiplicityMode::exact);

inline constexpr std::size_t kOrbitCount = 11;
inline constexpr std::size_t kClusteringBins = 100;

/// Orbit numbering of connected 4-node graphlets:
///  0 path end, 1 path middle, 2 star leaf, 3 star centre, 4 cycle,
///  5 paw pendant, 6 paw triangle side, 7 paw centre,
///  8 diamond degree-2, 9 diamond degree-3, 10 clique.
struct GraphStatistics {
  std::vector<double> degreeHistogram;      // entries for degree 0..maxDegree, sums to 1
  std::vector<double> clustering;           // per node
  std::vector<double> clusteringHistogram;  // kClusteringBins bins on [0, 1], sums to 1
  std::vector<std::array<std::uint64_t, kOrbitCount>> orbitCounts;  // per node
};

GraphStatistics computeStatistics(const Graph& g);

enum class Statistic { degree, clustering, orbit };
std::string_view toString(Statistic s);
inline constexpr std::array<Statistic, 3> kAllStatistics = {Statistic::degree, Statistic::clustering,
                                                            Statistic::orbit};

/// Normalized histogram a graph contributes for a statistic, with its bin width.
/// For orbits: per-orbit totals over nodes, normalized (all zeros if none).
std::vector<double> statisticHistogram(const GraphStatistics& s, Statistic which);
double statisticBinWidth(Statistic which);

/// First Wasserstein distance between two histograms on a shared grid.
double wasserstein1(std::span<const double> a, std::span<const double> b, double binWidth);

/// Biased squared MMD with k(x, y) = exp(-W1(x, y)^2 / (2 sigma^2)).
double mmd(std::span<const Graph> a, std::span<const Graph> b, Statistic which, double sigma = 1.0);
/// Same on precomputed statistics.
double mmd(std::span<const GraphStatistics> a, std::span<const GraphStatistics> b, Statistic which,
           double sigma = 1.0);

/// Mean over `samples` orderings drawn from q of the permuted adjacency matrix.
nn::Matrix averagedAdjacency(const OrderingDistribution& q, const Graph& g, std::size_t samples, const Rng& rng);

/// n rows of n comma-separated values.
void writeCsv(std::ostream& out, const nn::Matrix& m);

}  // namespace ordvi
