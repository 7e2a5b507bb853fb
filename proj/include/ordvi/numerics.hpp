#pragma once

#include <cstddef>
#include <span>

namespace ordvi {

/// log(sum_i exp(x_i)) with max shifting; -inf for an empty span.
double logSumExp(std::span<const double> x);

/// log((1/n) sum_i exp(x_i)).
double logMeanExp(std::span<const double> x);

/// log(n!)
double logFactorial(std::size_t n);

}  // namespace ordvi
