#include <algorithm>
#include <cmath>
#include <string>

#include "ordvi/errors.hpp"
#include "ordvi/tensor.hpp"

namespace ordvi::nn {

namespace {

std::string shapeOf(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void requireSameShape(const char* op, const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InputError(std::string(op) + ": shape mismatch " + shapeOf(a) + " vs " + shapeOf(b));
  }
}

Tape& tapeOf(const char* op, Var a) {
  if (!a.valid()) throw InputError(std::string(op) + ": invalid variable");
  return *a.tape();
}

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoidOf(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

bool isVector(const Matrix& m) { return m.rows() == 1 || m.cols() == 1; }

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = tapeOf("matmul", a);
  if (a.cols() != b.rows()) {
    throw InputError("matmul: inner dimensions differ " + shapeOf(a.value()) + " * " + shapeOf(b.value()));
  }
  const int ia = a.id(), ib = b.id();
  return t.record("matmul", a.value() * b.value(), {a, b}, [ia, ib](Tape& tp, int self) {
    const Matrix& g = tp.grad(self);
    if (tp.requiresGrad(ia)) tp.grad(ia).noalias() += g * tp.value(ib).transpose();
    if (tp.requiresGrad(ib)) tp.grad(ib).noalias() += tp.value(ia).transpose() * g;
  });
}

Var add(Var a, Var b) {
  Tape& t = tapeOf("add", a);
  requireSameShape("add", a.value(), b.value());
  const int ia = a.id(), ib = b.id();
  return t.record("add", a.value() + b.value(), {a, b}, [ia, ib](Tape& tp, int self) {
    const Matrix& g = tp.grad(self);
    if (tp.requiresGrad(ia)) tp.grad(ia) += g;
    if (tp.requiresGrad(ib)) tp.grad(ib) += g;
  });
}

Var sub(Var a, Var b) {
  Tape& t = tapeOf("sub", a);
  requireSameShape("sub", a.value(), b.value());
  const int ia = a.id(), ib = b.id();
  return t.record("sub", a.value() - b.value(), {a, b}, [ia, ib](Tape& tp, int self) {
    const Matrix& g = tp.grad(self);
    if (tp.requiresGrad(ia)) tp.grad(ia) += g;
    if (tp.requiresGrad(ib)) tp.grad(ib) -= g;
  });
}

Var mul(Var a, Var b) {
  Tape& t = tapeOf("mul", a);
  requireSameShape("mul", a.value(), b.value());
  const int ia = a.id(), ib = b.id();
  return t.record("mul", a.value().cwiseProduct(b.value()), {a, b}, [ia, ib](Tape& tp, int self) {
    const Matrix& g = tp.grad(self);
    if (tp.requiresGrad(ia)) tp.grad(ia) += g.cwiseProduct(tp.value(ib));
    if (tp.requiresGrad(ib)) tp.grad(ib) += g.cwiseProduct(tp.value(ia));
  });
}

Var scale(Var a, double s) {
  Tape& t = tapeOf("scale", a);
  const int ia = a.id();
  return t.record("scale", a.value() * s, {a}, [ia, s](Tape& tp, int self) { tp.grad(ia) += s * tp.grad(self); });
}

Var addScalar(Var a, double s) {
  Tape& t = tapeOf("addScalar", a);
  const int ia = a.id();
  return t.record("addScalar", a.value().array() + s, {a}, [ia](Tape& tp, int self) { tp.grad(ia) += tp.grad(self); });
}

Var addRowBroadcast(Var m, Var row) {
  Tape& t = tapeOf("addRowBroadcast", m);
  if (row.rows() != 1 || row.cols() != m.cols()) {
    throw InputError("addRowBroadcast: row " + shapeOf(row.value()) + " does not fit " + shapeOf(m.value()));
  }
  const int im = m.id(), ir = row.id();
  Matrix out = m.value();
  out.rowwise() += row.value().row(0);
  return t.record("addRowBroadcast", std::move(out), {m, row}, [im, ir](Tape& tp, int self) {
    const Matrix& g = tp.grad(self);
    if (tp.requiresGrad(im)) tp.grad(im) += g;
    if (tp.requiresGrad(ir)) tp.grad(ir) += g.colwise().sum();
  });
}

Var broadcastRows(Var row, Eigen::Index n) {
  Tape& t = tapeOf("broadcastRows", row);
  if (row.rows() != 1) throw InputError("broadcastRows: expected a 1 x c row, got " + shapeOf(row.value()));
  const int ir = row.id();
  return t.record("broadcastRows", row.value().replicate(n, 1), {row}, [ir](Tape& tp, int self) {
    tp.grad(ir) += tp.grad(self).colwise().sum();
  });
}

Var sigmoid(Var a) {
  Tape& t = tapeOf("sigmoid", a);
  const int ia = a.id();
  Matrix y = a.value().unaryExpr([](double x) { return sigmoidOf(x); });
  return t.record("sigmoid", std::move(y), {a}, [ia](Tape& tp, int self) {
    const Matrix& y = tp.value(self);
    tp.grad(ia).array() += tp.grad(self).array() * y.array() * (1.0 - y.array());
  });
}

Var tanh(Var a) {
  Tape& t = tapeOf("tanh", a);
  const int ia = a.id();
  return t.record("tanh", a.value().array().tanh().matrix(), {a}, [ia](Tape& tp, int self) {
    const Matrix& y = tp.value(self);
    tp.grad(ia).array() += tp.grad(self).array() * (1.0 - y.array().square());
  });
}

Var relu(Var a) {
  Tape& t = tapeOf("relu", a);
  const int ia = a.id();
  return t.record("relu", a.value().cwiseMax(0.0), {a}, [ia](Tape& tp, int self) {
    tp.grad(ia).array() += (tp.value(ia).array() > 0.0).select(tp.grad(self).array(), 0.0);
  });
}

Var leakyRelu(Var a, double slope) {
  Tape& t = tapeOf("leakyRelu", a);
  const int ia = a.id();
  Matrix y = a.value().unaryExpr([slope](double x) { return x > 0 ? x : slope * x; });
  return t.record("leakyRelu", std::move(y), {a}, [ia, slope](Tape& tp, int self) {
    tp.grad(ia).array() += (tp.value(ia).array() > 0.0).select(tp.grad(self).array(), slope * tp.grad(self).array());
  });
}

Var log(Var a) {
  Tape& t = tapeOf("log", a);
  const int ia = a.id();
  return t.record("log", a.value().array().log().matrix(), {a}, [ia](Tape& tp, int self) {
    tp.grad(ia).array() += tp.grad(self).array() / tp.value(ia).array();
  });
}

Var exp(Var a) {
  Tape& t = tapeOf("exp", a);
  const int ia = a.id();
  return t.record("exp", a.value().array().exp().matrix(), {a}, [ia](Tape& tp, int self) {
    tp.grad(ia).array() += tp.grad(self).array() * tp.value(self).array();
  });
}

Var logSigmoid(Var a) {
  Tape& t = tapeOf("logSigmoid", a);
  const int ia = a.id();
  Matrix y = a.value().unaryExpr([](double x) { return -softplus(-x); });
  return t.record("logSigmoid", std::move(y), {a}, [ia](Tape& tp, int self) {
    tp.grad(ia).array() +=
        tp.grad(self).array() * tp.value(ia).unaryExpr([](double x) { return sigmoidOf(-x); }).array();
  });
}

Var sum(Var a) {
  Tape& t = tapeOf("sum", a);
  const int ia = a.id();
  return t.record("sum", Matrix::Constant(1, 1, a.value().sum()), {a}, [ia](Tape& tp, int self) {
    tp.grad(ia).array() += tp.grad(self)(0, 0);
  });
}

Var meanRows(Var a) {
  Tape& t = tapeOf("meanRows", a);
  if (a.rows() == 0) throw InputError("meanRows: empty input");
  const int ia = a.id();
  const double inv = 1.0 / static_cast<double>(a.rows());
  return t.record("meanRows", a.value().colwise().mean(), {a}, [ia, inv](Tape& tp, int self) {
    tp.grad(ia).rowwise() += inv * tp.grad(self).row(0);
  });
}

Var concatCols(std::span<const Var> parts) {
  if (parts.empty()) throw InputError("concatCols: no inputs");
  Tape& t = tapeOf("concatCols", parts[0]);
  const Eigen::Index rows = parts[0].rows();
  Eigen::Index cols = 0;
  for (const Var& p : parts) {
    if (p.rows() != rows) throw InputError("concatCols: row counts differ");
    cols += p.cols();
  }
  Matrix out(rows, cols);
  std::vector<int> ids;
  std::vector<Eigen::Index> widths;
  Eigen::Index c = 0;
  for (const Var& p : parts) {
    out.middleCols(c, p.cols()) = p.value();
    c += p.cols();
    ids.push_back(p.id());
    widths.push_back(p.cols());
  }
  return t.record("concatCols", std::move(out), parts,
                  [ids = std::move(ids), widths = std::move(widths)](Tape& tp, int self) {
                    const Matrix& g = tp.grad(self);
                    Eigen::Index off = 0;
                    for (std::size_t k = 0; k < ids.size(); ++k) {
                      if (tp.requiresGrad(ids[k])) tp.grad(ids[k]) += g.middleCols(off, widths[k]);
                      off += widths[k];
                    }
                  });
}

Var sliceCols(Var a, Eigen::Index start, Eigen::Index count) {
  Tape& t = tapeOf("sliceCols", a);
  if (start < 0 || count < 0 || start + count > a.cols()) throw InputError("sliceCols: range out of bounds");
  const int ia = a.id();
  return t.record("sliceCols", a.value().middleCols(start, count), {a}, [ia, start, count](Tape& tp, int self) {
    tp.grad(ia).middleCols(start, count) += tp.grad(self);
  });
}

Var gatherRows(Var a, std::span<const int> rows) {
  Tape& t = tapeOf("gatherRows", a);
  Matrix out(static_cast<Eigen::Index>(rows.size()), a.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= a.rows()) throw InputError("gatherRows: row index out of range");
    out.row(static_cast<Eigen::Index>(i)) = a.value().row(rows[i]);
  }
  const int ia = a.id();
  return t.record("gatherRows", std::move(out), {a}, [ia, idx = std::vector<int>(rows.begin(), rows.end())](Tape& tp, int self) {
    const Matrix& g = tp.grad(self);
    Matrix& ga = tp.grad(ia);
    for (std::size_t i = 0; i < idx.size(); ++i) ga.row(idx[i]) += g.row(static_cast<Eigen::Index>(i));
  });
}

Var transpose(Var a) {
  Tape& t = tapeOf("transpose", a);
  const int ia = a.id();
  return t.record("transpose", a.value().transpose(), {a}, [ia](Tape& tp, int self) {
    tp.grad(ia) += tp.grad(self).transpose();
  });
}

Var element(Var a, Eigen::Index r, Eigen::Index c) {
  Tape& t = tapeOf("element", a);
  if (r < 0 || c < 0 || r >= a.rows() || c >= a.cols()) throw InputError("element: index out of range");
  const int ia = a.id();
  return t.record("element", Matrix::Constant(1, 1, a.value()(r, c)), {a}, [ia, r, c](Tape& tp, int self) {
    tp.grad(ia)(r, c) += tp.grad(self)(0, 0);
  });
}

Var outerSum(Var a, Var b) {
  Tape& t = tapeOf("outerSum", a);
  if (a.cols() != 1 || b.cols() != 1) throw InputError("outerSum: expects column vectors");
  const int ia = a.id(), ib = b.id();
  Matrix out = a.value().replicate(1, b.rows());
  out.rowwise() += b.value().col(0).transpose();
  return t.record("outerSum", std::move(out), {a, b}, [ia, ib](Tape& tp, int self) {
    const Matrix& g = tp.grad(self);
    if (tp.requiresGrad(ia)) tp.grad(ia) += g.rowwise().sum();
    if (tp.requiresGrad(ib)) tp.grad(ib) += g.colwise().sum().transpose();
  });
}

namespace {

Matrix maskedSoftmaxRows(const Matrix& x, const Mask& mask) {
  Matrix p = Matrix::Zero(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      if (mask(i, j) != 0.0) mx = std::max(mx, x(i, j));
    if (!std::isfinite(mx)) throw NumericError("masked softmax: row " + std::to_string(i) + " has no active entry");
    double z = 0.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (mask(i, j) != 0.0) {
        p(i, j) = std::exp(x(i, j) - mx);
        z += p(i, j);
      }
    }
    p.row(i) /= z;
  }
  return p;
}

}  // namespace

Var rowMaskedSoftmax(Var logits, const Mask& mask) {
  Tape& t = tapeOf("rowMaskedSoftmax", logits);
  requireSameShape("rowMaskedSoftmax", logits.value(), mask);
  const int ia = logits.id();
  return t.record("rowMaskedSoftmax", maskedSoftmaxRows(logits.value(), mask), {logits}, [ia](Tape& tp, int self) {
    const Matrix& p = tp.value(self);
    const Matrix& g = tp.grad(self);
    Eigen::VectorXd dots = p.cwiseProduct(g).rowwise().sum();
    Matrix d = p.cwiseProduct(g);
    d -= (p.array().colwise() * dots.array()).matrix();
    tp.grad(ia) += d;
  });
}

Var maskedSoftmax(Var logits, const Mask& mask) {
  if (!isVector(logits.value())) throw InputError("maskedSoftmax: expects a vector");
  if (logits.cols() == 1) return transpose(rowMaskedSoftmax(transpose(logits), mask.transpose()));
  return rowMaskedSoftmax(logits, mask);
}

Var maskedLogSoftmaxAt(Var logits, const Mask& mask, Eigen::Index index) {
  Tape& t = tapeOf("maskedLogSoftmaxAt", logits);
  const Matrix& x = logits.value();
  if (!isVector(x)) throw InputError("maskedLogSoftmaxAt: expects a vector");
  requireSameShape("maskedLogSoftmaxAt", x, mask);
  const Eigen::Index n = x.size();
  if (index < 0 || index >= n) throw InputError("maskedLogSoftmaxAt: index out of range");
  const double* xv = x.data();
  const double* mv = mask.data();
  if (mv[index] == 0.0) throw InputError("maskedLogSoftmaxAt: chosen entry is masked out");
  double mx = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < n; ++j)
    if (mv[j] != 0.0) mx = std::max(mx, xv[j]);
  double z = 0.0;
  for (Eigen::Index j = 0; j < n; ++j)
    if (mv[j] != 0.0) z += std::exp(xv[j] - mx);
  const double logZ = mx + std::log(z);
  const int ia = logits.id();
  return t.record("maskedLogSoftmaxAt", Matrix::Constant(1, 1, xv[index] - logZ), {logits},
                  [ia, index, logZ, mask](Tape& tp, int self) {
                    const double g = tp.grad(self)(0, 0);
                    const Matrix& xs = tp.value(ia);
                    Matrix& gx = tp.grad(ia);
                    const Eigen::Index n = xs.size();
                    for (Eigen::Index j = 0; j < n; ++j) {
                      if (mask.data()[j] == 0.0) continue;
                      gx.data()[j] -= g * std::exp(xs.data()[j] - logZ);
                    }
                    gx.data()[index] += g;
                  });
}

Var bernoulliLogLik(Var logits, const Matrix& targets) {
  Tape& t = tapeOf("bernoulliLogLik", logits);
  requireSameShape("bernoulliLogLik", logits.value(), targets);
  const Matrix& x = logits.value();
  double total = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double y = targets.data()[k];
    const double xv = x.data()[k];
    total += -(y * softplus(-xv) + (1.0 - y) * softplus(xv));
  }
  const int ia = logits.id();
  return t.record("bernoulliLogLik", Matrix::Constant(1, 1, total), {logits}, [ia, targets](Tape& tp, int self) {
    const double g = tp.grad(self)(0, 0);
    const Matrix& xs = tp.value(ia);
    tp.grad(ia) += g * (targets - xs.unaryExpr([](double v) { return sigmoidOf(v); }));
  });
}

Var graphAttention(Var z, Var attnSrc, Var attnDst, const Mask& mask, Eigen::Index heads, double slope) {
  Tape& t = tapeOf("graphAttention", z);
  const Eigen::Index n = z.rows();
  if (heads <= 0 || z.cols() % heads != 0) throw InputError("graphAttention: columns not divisible by heads");
  const Eigen::Index width = z.cols() / heads;
  if (attnSrc.rows() != width || attnSrc.cols() != heads || attnDst.rows() != width || attnDst.cols() != heads) {
    throw InputError("graphAttention: attention vectors must be width x heads");
  }
  if (mask.rows() != n || mask.cols() != n) throw InputError("graphAttention: mask must be n x n");

  const Matrix& zv = z.value();
  std::vector<Matrix> alpha(static_cast<std::size_t>(heads));
  std::vector<Matrix> pre(static_cast<std::size_t>(heads));
  Matrix out(n, z.cols());
  for (Eigen::Index k = 0; k < heads; ++k) {
    const auto zk = zv.middleCols(k * width, width);
    const Eigen::VectorXd s = zk * attnSrc.value().col(k);
    const Eigen::VectorXd r = zk * attnDst.value().col(k);
    Matrix e = s.replicate(1, n);
    e.rowwise() += r.transpose();
    Matrix l = e.unaryExpr([slope](double v) { return v > 0 ? v : slope * v; });
    alpha[static_cast<std::size_t>(k)] = maskedSoftmaxRows(l, mask);
    out.middleCols(k * width, width).noalias() = alpha[static_cast<std::size_t>(k)] * zk;
    pre[static_cast<std::size_t>(k)] = std::move(e);
  }
  const int iz = z.id(), is = attnSrc.id(), id = attnDst.id();
  return t.record("graphAttention", std::move(out), {z, attnSrc, attnDst},
                  [iz, is, id, heads, width, slope, alpha = std::move(alpha), pre = std::move(pre)](Tape& tp, int self) {
                    const Matrix& g = tp.grad(self);
                    const Matrix& zv = tp.value(iz);
                    const Matrix& av = tp.value(is);
                    const Matrix& bv = tp.value(id);
                    Matrix dz = Matrix::Zero(zv.rows(), zv.cols());
                    Matrix da = Matrix::Zero(av.rows(), av.cols());
                    Matrix db = Matrix::Zero(bv.rows(), bv.cols());
                    for (Eigen::Index k = 0; k < heads; ++k) {
                      const Matrix& p = alpha[static_cast<std::size_t>(k)];
                      const Matrix& e = pre[static_cast<std::size_t>(k)];
                      const auto zk = zv.middleCols(k * width, width);
                      const auto gk = g.middleCols(k * width, width);
                      dz.middleCols(k * width, width).noalias() += p.transpose() * gk;
                      Matrix dp = gk * zk.transpose();
                      Eigen::VectorXd dots = p.cwiseProduct(dp).rowwise().sum();
                      Matrix dl = p.cwiseProduct(dp);
                      dl -= (p.array().colwise() * dots.array()).matrix();
                      Matrix de = (e.array() > 0.0).select(dl.array(), slope * dl.array());
                      const Eigen::VectorXd ds = de.rowwise().sum();
                      const Eigen::VectorXd dr = de.colwise().sum().transpose();
                      dz.middleCols(k * width, width).noalias() += ds * av.col(k).transpose();
                      dz.middleCols(k * width, width).noalias() += dr * bv.col(k).transpose();
                      da.col(k).noalias() += zk.transpose() * ds;
                      db.col(k).noalias() += zk.transpose() * dr;
                    }
                    if (tp.requiresGrad(iz)) tp.grad(iz) += dz;
                    if (tp.requiresGrad(is)) tp.grad(is) += da;
                    if (tp.requiresGrad(id)) tp.grad(id) += db;
                  });
}

}  // namespace ordvi::nn
