#include "ordvi/errors.hpp"
#include "ordvi/params.hpp"
#include "ordvi/tensor.hpp"

namespace ordvi::nn {

const Matrix& Var::value() const { return tape_->value(id_); }

double Var::item() const {
  const Matrix& v = value();
  if (v.size() != 1) throw InputError("item() needs a 1x1 value");
  return v(0, 0);
}

Var Tape::constant(Matrix value) { return record("constant", std::move(value), std::span<const Var>{}, nullptr); }

Var Tape::scalar(double v) { return constant(Matrix::Constant(1, 1, v)); }

Var Tape::parameter(const ParameterStore& store, std::size_t index) {
  if (store_ == nullptr) {
    store_ = &store;
  } else if (store_ != &store) {
    throw InputError("a tape holds parameters of a single store");
  }
  if (paramNode_.size() < store.size()) paramNode_.resize(store.size(), -1);
  if (paramNode_[index] >= 0) return Var(this, paramNode_[index]);
  Node n;
  n.value = store.value(index);
  n.paramIndex = static_cast<long>(index);
  n.requiresGrad = record_;
  nodes_.push_back(std::move(n));
  paramNode_[index] = static_cast<int>(nodes_.size() - 1);
  return Var(this, paramNode_[index]);
}

Var Tape::record(const char* op, Matrix value, std::span<const Var> inputs, Backward backward) {
  if (!value.allFinite()) throw NumericError(std::string("non-finite value produced by ") + op);
  Node n;
  n.value = std::move(value);
  if (record_) {
    for (const Var& in : inputs) {
      if (in.tape() != this) throw InputError(std::string(op) + ": input from a different tape");
      if (nodes_[static_cast<std::size_t>(in.id())].requiresGrad) n.requiresGrad = true;
    }
    if (n.requiresGrad) n.backward = std::move(backward);
  }
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Matrix& Tape::grad(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.grad.size() == 0) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

Matrix Tape::gradOf(Var v) const {
  const Node& n = nodes_[static_cast<std::size_t>(v.id())];
  if (n.grad.size() == 0) return Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::backward(Var root, double seed) {
  if (root.tape() != this) throw InputError("backward: root belongs to a different tape");
  if (root.value().size() != 1) throw InputError("backward needs a scalar (1x1) root");
  if (!record_) throw InputError("backward on a tape that does not record gradients");
  for (Node& n : nodes_) n.grad.resize(0, 0);
  grad(root.id())(0, 0) = seed;
  for (int i = root.id(); i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.requiresGrad || n.grad.size() == 0 || !n.backward) continue;
    n.backward(*this, i);
  }
}

void Tape::accumulateGradients(ParameterStore& store, double scale) const {
  if (store_ != &store) return;
  for (std::size_t p = 0; p < paramNode_.size(); ++p) {
    if (paramNode_[p] < 0) continue;
    const Node& n = nodes_[static_cast<std::size_t>(paramNode_[p])];
    if (n.grad.size() == 0) continue;
    store.grad(p) += scale * n.grad;
  }
}

std::vector<double> Tape::flatGradient(const ParameterStore& store) const {
  std::vector<double> flat(store.scalarCount(), 0.0);
  if (store_ != &store) return flat;
  std::size_t offset = 0;
  for (std::size_t p = 0; p < store.size(); ++p) {
    const auto count = static_cast<std::size_t>(store.value(p).size());
    if (p < paramNode_.size() && paramNode_[p] >= 0) {
      const Node& n = nodes_[static_cast<std::size_t>(paramNode_[p])];
      if (n.grad.size() != 0) std::copy(n.grad.data(), n.grad.data() + count, flat.begin() + static_cast<std::ptrdiff_t>(offset));
    }
    offset += count;
  }
  return flat;
}

}  // namespace ordvi::nn
