#pragma once

// Central finite-difference check of tape gradients.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ordvi/params.hpp"
#include "ordvi/tensor.hpp"

namespace fd {

using ordvi::nn::Matrix;
using ordvi::nn::Tape;
using ordvi::nn::Var;

using Fn = std::function<Var(Tape&, const std::vector<Var>&)>;

/// Largest |analytic - numeric| / max(|analytic|, |numeric|, floor) over every
/// input entry. Non-scalar outputs are reduced with fixed random weights.
inline double maxRelativeError(const std::vector<Matrix>& inputs, const Fn& f, double h = 1e-6, double floor = 1e-3) {
  ordvi::nn::ParameterStore store;
  for (std::size_t i = 0; i < inputs.size(); ++i) store.add("x" + std::to_string(i), inputs[i]);
  Matrix weights;
  auto evaluate = [&](Tape& t) {
    std::vector<Var> vars;
    for (std::size_t i = 0; i < inputs.size(); ++i) vars.push_back(t.parameter(store, i));
    Var out = f(t, vars);
    if (out.rows() == 1 && out.cols() == 1) return out;
    if (weights.size() == 0) {
      std::mt19937_64 rng(out.rows() * 1000 + out.cols());
      std::uniform_real_distribution<double> u(0.5, 1.5);
      weights = Matrix(out.rows(), out.cols());
      for (Eigen::Index k = 0; k < weights.size(); ++k) weights.data()[k] = u(rng);
    }
    return ordvi::nn::sum(ordvi::nn::mul(out, t.constant(weights)));
  };
  Tape tape;
  Var root = evaluate(tape);
  tape.backward(root);
  const std::vector<double> analytic = tape.flatGradient(store);
  std::vector<double> x = store.flatValues();
  double worst = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    auto at = [&](double delta) {
      std::vector<double> y = x;
      y[k] += delta;
      store.setFlatValues(y);
      Tape t(false);
      return evaluate(t).item();
    };
    const double numeric = (at(h) - at(-h)) / (2.0 * h);
    const double denom = std::max({std::abs(analytic[k]), std::abs(numeric), floor});
    worst = std::max(worst, std::abs(analytic[k] - numeric) / denom);
  }
  store.setFlatValues(x);
  return worst;
}

inline Matrix randomMatrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(r, c);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = u(rng);
  return m;
}

/// Entries bounded away from zero, for ops with a kink at the origin.
inline Matrix awayFromZero(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  Matrix m = randomMatrix(r, c, rng, 0.1, 1.0);
  std::bernoulli_distribution sign(0.5);
  for (Eigen::Index k = 0; k < m.size(); ++k)
    if (sign(rng)) m.data()[k] = -m.data()[k];
  return m;
}

}  // namespace fd
