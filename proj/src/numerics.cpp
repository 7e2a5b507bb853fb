#include "ordvi/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ordvi {

double logSumExp(std::span<const double> x) {
  if (x.empty()) return -std::numeric_limits<double>::infinity();
  double m = *std::max_element(x.begin(), x.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

double logMeanExp(std::span<const double> x) {
  return logSumExp(x) - std::log(static_cast<double>(x.size()));
}

double logFactorial(std::size_t n) { return std::lgamma(static_cast<double>(n) + 1.0); }

}  // namespace ordvi
