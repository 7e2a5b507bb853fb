#pragma once

// Dense 2-D arrays with a reverse-mode gradient tape.

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace ordvi::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class Tape;
class ParameterStore;

/// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  /// The single entry of a 1x1 value.
  double item() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  int id() const noexcept { return id_; }
  Tape* tape() const noexcept { return tape_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) noexcept : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  int id_ = -1;
};

/// Records primitive operations in topological order. With recording off the
/// tape only holds values (inference mode).
class Tape {
 public:
  using Backward = std::function<void(Tape&, int self)>;

  explicit Tape(bool recordGradients = true) : record_(recordGradients) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const noexcept { return record_; }

  Var constant(Matrix value);
  Var scalar(double v);
  /// Leaf for store parameter `index`. Repeated requests return the same node.
  Var parameter(const ParameterStore& store, std::size_t index);

  /// Appends an operation. Throws NumericError on non-finite values; `op` names
  /// the primitive in that message.
  Var record(const char* op, Matrix value, std::span<const Var> inputs, Backward backward);
  Var record(const char* op, Matrix value, std::initializer_list<Var> inputs, Backward backward) {
    return record(op, std::move(value), std::span<const Var>(inputs.begin(), inputs.size()), std::move(backward));
  }

  /// Reverse sweep from a 1x1 root with d(root)/d(root) = seed. Clears any
  /// previous gradients first. Throws InputError for a non-scalar root.
  void backward(Var root, double seed = 1.0);

  const Matrix& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  bool requiresGrad(int id) const { return nodes_[static_cast<std::size_t>(id)].requiresGrad; }
  /// Gradient buffer of node `id`, zero-initialised on first access.
  Matrix& grad(int id);
  /// Gradient of a node after backward (zero matrix if it received none).
  Matrix gradOf(Var v) const;

  /// store.grad += scale * d(root)/d(param) for every parameter on this tape.
  void accumulateGradients(ParameterStore& store, double scale = 1.0) const;
  /// d(root)/d(theta) flattened in store order (store.scalarCount() entries).
  std::vector<double> flatGradient(const ParameterStore& store) const;

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    Backward backward;
    long paramIndex = -1;
    bool requiresGrad = false;
  };
  std::vector<Node> nodes_;
  std::vector<int> paramNode_;
  const ParameterStore* store_ = nullptr;
  bool record_;
};

/// 0/1 matrix; nonzero entries are active.
using Mask = Matrix;

// Primitives. All shapes are checked; mismatches throw InputError.
Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
Var addScalar(Var a, double s);
/// m (r x c) + row (1 x c) added to every row.
Var addRowBroadcast(Var m, Var row);
/// n copies of a 1 x c row.
Var broadcastRows(Var row, Eigen::Index n);
Var sigmoid(Var a);
Var tanh(Var a);
Var relu(Var a);
Var leakyRelu(Var a, double slope);
Var log(Var a);
Var exp(Var a);
/// log(sigmoid(a)), stable for large |a|.
Var logSigmoid(Var a);
/// Sum of all entries, 1x1.
Var sum(Var a);
/// Column means, 1 x c.
Var meanRows(Var a);
Var concatCols(std::span<const Var> parts);
Var sliceCols(Var a, Eigen::Index start, Eigen::Index count);
Var gatherRows(Var a, std::span<const int> rows);
Var transpose(Var a);
/// Entry (r, c) as a 1x1 value.
Var element(Var a, Eigen::Index r, Eigen::Index c);
/// e_ij = a_i + b_j for column vectors a (n x 1), b (m x 1).
Var outerSum(Var a, Var b);
/// Row-wise softmax restricted to active mask entries; inactive entries are
/// exactly 0. Every row needs an active entry (NumericError otherwise).
Var rowMaskedSoftmax(Var logits, const Mask& mask);
/// Softmax over the active entries of a vector (n x 1 or 1 x n).
Var maskedSoftmax(Var logits, const Mask& mask);
/// log softmax of entry `index` of a vector among its active entries, 1x1.
Var maskedLogSoftmaxAt(Var logits, const Mask& mask, Eigen::Index index);
/// sum_i [y_i log sigmoid(x_i) + (1 - y_i) log sigmoid(-x_i)] for 0/1 targets.
Var bernoulliLogLik(Var logits, const Matrix& targets);
/// Multi-head additive graph attention. z is n x (heads * width); head k uses
/// columns [k*width, (k+1)*width), scores e_ij = LeakyReLU(z_i a_k + z_j b_k)
/// with a = attnSrc.col(k), b = attnDst.col(k), softmax over active mask(i, j),
/// output_i = sum_j alpha_ij z_j per head, concatenated.
Var graphAttention(Var z, Var attnSrc, Var attnDst, const Mask& mask, Eigen::Index heads, double slope);

}  // namespace ordvi::nn
