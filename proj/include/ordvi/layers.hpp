#pragma once

// Neural building blocks shared by the generative models and the ordering
// posterior. Each block registers its parameters in a ParameterStore under a
// name prefix and remembers their indices.

#include <cstddef>
#include <string>

#include "ordvi/params.hpp"
#include "ordvi/rng.hpp"
#include "ordvi/tensor.hpp"

namespace ordvi::nn {

/// y = x W + b
class Linear {
 public:
  Linear() = default;
  Linear(ParameterStore& store, const std::string& prefix, Eigen::Index in, Eigen::Index out, Rng& rng);
  Var apply(Tape& tape, const ParameterStore& store, Var x) const;
  Eigen::Index inputSize() const noexcept { return in_; }
  Eigen::Index outputSize() const noexcept { return out_; }

 private:
  std::size_t weight_ = 0;
  std::size_t bias_ = 0;
  Eigen::Index in_ = 0;
  Eigen::Index out_ = 0;
};

/// Gated recurrent unit applied row-wise:
///   z = sigmoid(x Wz + h Uz + bz), r = sigmoid(x Wr + h Ur + br),
///   c = tanh(x Wc + (r * h) Uc + bc), h' = (1 - z) * c + z * h.
class GruCell {
 public:
  GruCell() = default;
  GruCell(ParameterStore& store, const std::string& prefix, Eigen::Index inputSize, Eigen::Index stateSize, Rng& rng);
  Var apply(Tape& tape, const ParameterStore& store, Var h, Var x) const;
  Eigen::Index stateSize() const noexcept { return state_; }

 private:
  std::size_t wz_ = 0, uz_ = 0, bz_ = 0;
  std::size_t wr_ = 0, ur_ = 0, br_ = 0;
  std::size_t wc_ = 0, uc_ = 0, bc_ = 0;
  Eigen::Index input_ = 0;
  Eigen::Index state_ = 0;
};

/// One multi-head graph attention layer with a residual connection:
///   out = x + relu(concat_k attention_k(x W) + b).
/// Neighbourhoods include the node itself; width = heads * headWidth.
class GraphAttentionLayer {
 public:
  static constexpr double kLeakySlope = 0.2;

  GraphAttentionLayer() = default;
  GraphAttentionLayer(ParameterStore& store, const std::string& prefix, Eigen::Index heads, Eigen::Index headWidth,
                      Rng& rng);
  /// `mask` is the n x n neighbourhood indicator including the diagonal.
  Var apply(Tape& tape, const ParameterStore& store, Var x, const Mask& mask) const;
  Eigen::Index width() const noexcept { return heads_ * headWidth_; }

 private:
  std::size_t weight_ = 0, attnSrc_ = 0, attnDst_ = 0, bias_ = 0;
  Eigen::Index heads_ = 0;
  Eigen::Index headWidth_ = 0;
};

}  // namespace ordvi::nn
