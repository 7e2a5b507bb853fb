#include "ordvi/layers.hpp"

#include "ordvi/errors.hpp"

namespace ordvi::nn {

Linear::Linear(ParameterStore& store, const std::string& prefix, Eigen::Index in, Eigen::Index out, Rng& rng)
    : in_(in), out_(out) {
  weight_ = store.add(prefix + ".weight", glorotUniform(in, out, rng));
  bias_ = store.add(prefix + ".bias", Matrix::Zero(1, out));
}

Var Linear::apply(Tape& tape, const ParameterStore& store, Var x) const {
  if (x.cols() != in_) throw InputError("Linear: expected " + std::to_string(in_) + " input columns");
  return addRowBroadcast(matmul(x, tape.parameter(store, weight_)), tape.parameter(store, bias_));
}

GruCell::GruCell(ParameterStore& store, const std::string& prefix, Eigen::Index inputSize, Eigen::Index stateSize,
                 Rng& rng)
    : input_(inputSize), state_(stateSize) {
  auto gate = [&](const char* tag, std::size_t& w, std::size_t& u, std::size_t& b) {
    w = store.add(prefix + ".W" + tag, glorotUniform(inputSize, stateSize, rng));
    u = store.add(prefix + ".U" + tag, glorotUniform(stateSize, stateSize, rng));
    b = store.add(prefix + ".b" + tag, Matrix::Zero(1, stateSize));
  };
  gate("z", wz_, uz_, bz_);
  gate("r", wr_, ur_, br_);
  gate("c", wc_, uc_, bc_);
}

Var GruCell::apply(Tape& tape, const ParameterStore& store, Var h, Var x) const {
  if (x.cols() != input_ || h.cols() != state_ || x.rows() != h.rows()) {
    throw InputError("GruCell: state/input shapes do not match the cell");
  }
  auto p = [&](std::size_t i) { return tape.parameter(store, i); };
  Var z = sigmoid(addRowBroadcast(add(matmul(x, p(wz_)), matmul(h, p(uz_))), p(bz_)));
  Var r = sigmoid(addRowBroadcast(add(matmul(x, p(wr_)), matmul(h, p(ur_))), p(br_)));
  Var c = tanh(addRowBroadcast(add(matmul(x, p(wc_)), matmul(mul(r, h), p(uc_))), p(bc_)));
  // (1 - z) * c + z * h  ==  c + z * (h - c)
  return add(c, mul(z, sub(h, c)));
}

GraphAttentionLayer::GraphAttentionLayer(ParameterStore& store, const std::string& prefix, Eigen::Index heads,
                                         Eigen::Index headWidth, Rng& rng)
    : heads_(heads), headWidth_(headWidth) {
  const Eigen::Index w = heads * headWidth;
  weight_ = store.add(prefix + ".weight", glorotUniform(w, w, rng));
  attnSrc_ = store.add(prefix + ".attnSrc", glorotUniform(headWidth, heads, rng));
  attnDst_ = store.add(prefix + ".attnDst", glorotUniform(headWidth, heads, rng));
  bias_ = store.add(prefix + ".bias", Matrix::Zero(1, w));
}

Var GraphAttentionLayer::apply(Tape& tape, const ParameterStore& store, Var x, const Mask& mask) const {
  if (x.cols() != width()) throw InputError("GraphAttentionLayer: feature width mismatch");
  Var z = matmul(x, tape.parameter(store, weight_));
  Var att = graphAttention(z, tape.parameter(store, attnSrc_), tape.parameter(store, attnDst_), mask, heads_,
                           kLeakySlope);
  return add(x, relu(addRowBroadcast(att, tape.parameter(store, bias_))));
}

}  // namespace ordvi::nn
