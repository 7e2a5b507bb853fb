#include "ordvi/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "ordvi/errors.hpp"

namespace ordvi {

std::string_view toString(Statistic s) {
  switch (s) {
    case Statistic::degree:
      return "degree";
    case Statistic::clustering:
      return "clustering";
    case Statistic::orbit:
      return "orbit";
  }
  return "?";
}

namespace {

/// Adds the orbit memberships of the induced subgraph on {a, b, c, d}.
void classifyQuad(const Graph& g, const NodeId (&q)[4], std::vector<std::array<std::uint64_t, kOrbitCount>>& counts) {
  int deg[4] = {0, 0, 0, 0};
  int edges = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (g.hasEdge(q[i], q[j])) {
        ++deg[i];
        ++deg[j];
        ++edges;
      }
  if (edges < 3) return;
  int minDeg = *std::min_element(deg, deg + 4);
  int maxDeg = *std::max_element(deg, deg + 4);
  if (minDeg == 0) return;  // triangle plus an isolated node
  auto bump = [&](int i, std::size_t orbit) { ++counts[static_cast<std::size_t>(q[i])][orbit]; };
  for (int i = 0; i < 4; ++i) {
    switch (edges) {
      case 3:
        if (maxDeg == 3) bump(i, deg[i] == 3 ? 3 : 2);
        else bump(i, deg[i] == 1 ? 0 : 1);
        break;
      case 4:
        if (maxDeg == 2) bump(i, 4);
        else bump(i, deg[i] == 1 ? 5 : deg[i] == 2 ? 6 : 7);
        break;
      case 5:
        bump(i, deg[i] == 2 ? 8 : 9);
        break;
      default:
        bump(i, 10);
    }
  }
}

}  // namespace

GraphStatistics computeStatistics(const Graph& g) {
  const std::size_t n = g.nodeCount();
  GraphStatistics s;
  std::size_t maxDeg = 0;
  for (NodeId u = 0; u < static_cast<NodeId>(n); ++u) maxDeg = std::max(maxDeg, g.degree(u));
  s.degreeHistogram.assign(maxDeg + 1, 0.0);
  s.clusteringHistogram.assign(kClusteringBins, 0.0);
  s.clustering.assign(n, 0.0);
  for (NodeId u = 0; u < static_cast<NodeId>(n); ++u) {
    const std::size_t d = g.degree(u);
    s.degreeHistogram[d] += 1.0;
    if (d >= 2) {
      auto nb = g.neighbors(u);
      std::size_t tri = 0;
      for (std::size_t i = 0; i < nb.size(); ++i)
        for (std::size_t j = i + 1; j < nb.size(); ++j) tri += g.hasEdge(nb[i], nb[j]);
      s.clustering[static_cast<std::size_t>(u)] =
          static_cast<double>(tri) / (static_cast<double>(d) * static_cast<double>(d - 1) / 2.0);
    }
    const double c = s.clustering[static_cast<std::size_t>(u)];
    auto bin = std::min<std::size_t>(kClusteringBins - 1, static_cast<std::size_t>(c * kClusteringBins));
    s.clusteringHistogram[bin] += 1.0;
  }
  if (n > 0) {
    for (auto& v : s.degreeHistogram) v /= static_cast<double>(n);
    for (auto& v : s.clusteringHistogram) v /= static_cast<double>(n);
  }
  s.orbitCounts.assign(n, {});
  const auto m = static_cast<NodeId>(n);
  for (NodeId a = 0; a < m; ++a)
    for (NodeId b = a + 1; b < m; ++b)
      for (NodeId c = b + 1; c < m; ++c)
        for (NodeId d = c + 1; d < m; ++d) {
          const NodeId quad[4] = {a, b, c, d};
          classifyQuad(g, quad, s.orbitCounts);
        }
  return s;
}

std::vector<double> statisticHistogram(const GraphStatistics& s, Statistic which) {
  switch (which) {
    case Statistic::degree:
      return s.degreeHistogram;
    case Statistic::clustering:
      return s.clusteringHistogram;
    case Statistic::orbit: {
      std::vector<double> h(kOrbitCount, 0.0);
      double total = 0.0;
      for (const auto& row : s.orbitCounts)
        for (std::size_t k = 0; k < kOrbitCount; ++k) {
          h[k] += static_cast<double>(row[k]);
          total += static_cast<double>(row[k]);
        }
      if (total > 0.0)
        for (auto& v : h) v /= total;
      return h;
    }
  }
  return {};
}

double statisticBinWidth(Statistic which) {
  return which == Statistic::clustering ? 1.0 / static_cast<double>(kClusteringBins) : 1.0;
}

double wasserstein1(std::span<const double> a, std::span<const double> b, double binWidth) {
  const std::size_t len = std::max(a.size(), b.size());
  double cum = 0.0, total = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    cum += (i < a.size() ? a[i] : 0.0) - (i < b.size() ? b[i] : 0.0);
    total += std::abs(cum);
  }
  return total * binWidth;
}

namespace {

/// Mean kernel value over all pairs, summed in sorted order so that the result
/// does not depend on which set comes first.
double meanKernel(const std::vector<std::vector<double>>& x, const std::vector<std::vector<double>>& y, double width,
                  double sigma) {
  std::vector<double> k;
  k.reserve(x.size() * y.size());
  for (const auto& a : x)
    for (const auto& b : y) {
      const double w = wasserstein1(a, b, width);
      k.push_back(std::exp(-w * w / (2.0 * sigma * sigma)));
    }
  std::sort(k.begin(), k.end());
  double total = 0.0;
  for (double v : k) total += v;
  return total / static_cast<double>(k.size());
}

}  // namespace

double mmd(std::span<const GraphStatistics> a, std::span<const GraphStatistics> b, Statistic which, double sigma) {
  if (a.empty() || b.empty()) throw InputError("mmd needs two nonempty graph sets");
  if (!(sigma > 0.0)) throw InputError("mmd bandwidth must be > 0");
  std::vector<std::vector<double>> ha, hb;
  for (const auto& s : a) ha.push_back(statisticHistogram(s, which));
  for (const auto& s : b) hb.push_back(statisticHistogram(s, which));
  const double width = statisticBinWidth(which);
  return meanKernel(ha, ha, width, sigma) + meanKernel(hb, hb, width, sigma) - 2.0 * meanKernel(ha, hb, width, sigma);
}

double mmd(std::span<const Graph> a, std::span<const Graph> b, Statistic which, double sigma) {
  std::vector<GraphStatistics> sa, sb;
  for (const auto& g : a) sa.push_back(computeStatistics(g));
  for (const auto& g : b) sb.push_back(computeStatistics(g));
  return mmd(sa, sb, which, sigma);
}

}  // namespace ordvi
