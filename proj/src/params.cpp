#include "ordvi/params.hpp"

#include <cmath>

#include "ordvi/errors.hpp"

namespace ordvi::nn {

std::size_t ParameterStore::add(std::string name, Matrix init) {
  if (byName_.count(name) != 0) throw InputError("duplicate parameter name '" + name + "'");
  if (!init.allFinite()) throw NumericError("parameter '" + name + "' initialised with non-finite values");
  Entry e;
  e.name = name;
  e.grad = Matrix::Zero(init.rows(), init.cols());
  e.m = Matrix::Zero(init.rows(), init.cols());
  e.v = Matrix::Zero(init.rows(), init.cols());
  e.value = std::move(init);
  entries_.push_back(std::move(e));
  byName_.emplace(std::move(name), entries_.size() - 1);
  return entries_.size() - 1;
}

std::size_t ParameterStore::index(std::string_view name) const {
  auto it = byName_.find(std::string(name));
  if (it == byName_.end()) throw InputError("unknown parameter '" + std::string(name) + "'");
  return it->second;
}

std::size_t ParameterStore::scalarCount() const noexcept {
  std::size_t total = 0;
  for (const auto& e : entries_) total += static_cast<std::size_t>(e.value.size());
  return total;
}

void ParameterStore::zeroGrad() {
  for (auto& e : entries_) e.grad.setZero();
}

void ParameterStore::zeroValues() {
  for (auto& e : entries_) e.value.setZero();
}

std::vector<double> ParameterStore::flatValues() const {
  std::vector<double> out;
  out.reserve(scalarCount());
  for (const auto& e : entries_) out.insert(out.end(), e.value.data(), e.value.data() + e.value.size());
  return out;
}

std::vector<double> ParameterStore::flatGradients() const {
  std::vector<double> out;
  out.reserve(scalarCount());
  for (const auto& e : entries_) out.insert(out.end(), e.grad.data(), e.grad.data() + e.grad.size());
  return out;
}

void ParameterStore::setFlatValues(std::span<const double> flat) {
  if (flat.size() != scalarCount()) throw InputError("setFlatValues: size mismatch");
  std::size_t off = 0;
  for (auto& e : entries_) {
    std::copy(flat.begin() + static_cast<std::ptrdiff_t>(off),
              flat.begin() + static_cast<std::ptrdiff_t>(off + static_cast<std::size_t>(e.value.size())), e.value.data());
    off += static_cast<std::size_t>(e.value.size());
  }
}

void ParameterStore::addFlatGradient(std::span<const double> flat, double scale) {
  if (flat.size() != scalarCount()) throw InputError("addFlatGradient: size mismatch");
  std::size_t off = 0;
  for (auto& e : entries_) {
    for (Eigen::Index k = 0; k < e.grad.size(); ++k) e.grad.data()[k] += scale * flat[off + static_cast<std::size_t>(k)];
    off += static_cast<std::size_t>(e.grad.size());
  }
}

nlohmann::json ParameterStore::toJson() const {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& e : entries_) {
    out[e.name] = {{"shape", {e.value.rows(), e.value.cols()}},
                   {"values", std::vector<double>(e.value.data(), e.value.data() + e.value.size())}};
  }
  return out;
}

void ParameterStore::loadJson(const nlohmann::json& params) {
  for (auto& e : entries_) {
    if (!params.contains(e.name)) throw InputError("checkpoint is missing parameter '" + e.name + "'");
    const auto& p = params.at(e.name);
    const auto shape = p.at("shape").get<std::vector<Eigen::Index>>();
    const auto values = p.at("values").get<std::vector<double>>();
    if (shape.size() != 2 || shape[0] != e.value.rows() || shape[1] != e.value.cols() ||
        static_cast<Eigen::Index>(values.size()) != e.value.size()) {
      throw InputError("checkpoint parameter '" + e.name + "' has the wrong shape");
    }
    std::copy(values.begin(), values.end(), e.value.data());
    if (!e.value.allFinite()) throw NumericError("checkpoint parameter '" + e.name + "' is not finite");
    e.grad.setZero();
    e.m.setZero();
    e.v.setZero();
  }
  if (params.size() != entries_.size()) throw InputError("checkpoint has parameters this model does not define");
  step_ = 0;
}

void adamStep(ParameterStore& store, const AdamConfig& cfg) {
  ++store.step_;
  const double t = static_cast<double>(store.step_);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  const double sign = cfg.maximize ? 1.0 : -1.0;
  for (auto& e : store.entries_) {
    for (Eigen::Index k = 0; k < e.value.size(); ++k) {
      const double g = e.grad.data()[k];
      if (g == 0.0) continue;
      double& m = e.m.data()[k];
      double& v = e.v.data()[k];
      m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
      v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
      e.value.data()[k] += sign * cfg.learningRate * (m / c1) / (std::sqrt(v / c2) + cfg.epsilon);
    }
    e.grad.setZero();
  }
}

Matrix glorotUniform(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = (2.0 * rng.uniform() - 1.0) * limit;
  return m;
}

nlohmann::json makeCheckpoint(const ParameterStore& store, std::string_view modelKind, const nlohmann::json& metadata) {
  return {{"modelKind", std::string(modelKind)}, {"metadata", metadata}, {"parameters", store.toJson()}};
}

}  // namespace ordvi::nn
