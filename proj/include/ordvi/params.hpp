#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "ordvi/rng.hpp"
#include "ordvi/tensor.hpp"

namespace ordvi::nn {

struct AdamConfig;

/// Named parameter arrays with gradient accumulators and Adam moments.
class ParameterStore {
 public:
  /// Registers a parameter; names must be unique (InputError otherwise).
  std::size_t add(std::string name, Matrix init);
  std::size_t index(std::string_view name) const;
  bool contains(std::string_view name) const { return byName_.count(std::string(name)) != 0; }

  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t scalarCount() const noexcept;
  const std::string& name(std::size_t i) const { return entries_[i].name; }

  const Matrix& value(std::size_t i) const { return entries_[i].value; }
  Matrix& value(std::size_t i) { return entries_[i].value; }
  const Matrix& value(std::string_view name) const { return value(index(name)); }
  Matrix& value(std::string_view name) { return value(index(name)); }
  const Matrix& grad(std::size_t i) const { return entries_[i].grad; }
  Matrix& grad(std::size_t i) { return entries_[i].grad; }

  void zeroGrad();
  /// Sets every parameter to zero.
  void zeroValues();

  std::vector<double> flatValues() const;
  std::vector<double> flatGradients() const;
  void setFlatValues(std::span<const double> flat);
  /// grad += scale * flat
  void addFlatGradient(std::span<const double> flat, double scale = 1.0);

  std::uint64_t adamStepCount() const noexcept { return step_; }

  /// {name: {shape: [r, c], values: [...]}}
  nlohmann::json toJson() const;
  /// Overwrites values of existing parameters; every stored name must appear
  /// with a matching shape (InputError otherwise).
  void loadJson(const nlohmann::json& params);

 private:
  friend void adamStep(ParameterStore&, const AdamConfig&);
  struct Entry {
    std::string name;
    Matrix value;
    Matrix grad;
    Matrix m;
    Matrix v;
  };
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> byName_;
  std::uint64_t step_ = 0;
};

struct AdamConfig {
  double learningRate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Ascend the accumulated gradient instead of descending it.
  bool maximize = false;
};

/// Bias-corrected Adam update, then clears gradients. Entries whose gradient is
/// exactly zero keep their value and moments.
void adamStep(ParameterStore& store, const AdamConfig& cfg);

/// Uniform in +-sqrt(6 / (fanIn + fanOut)).
Matrix glorotUniform(Eigen::Index rows, Eigen::Index cols, Rng& rng);

/// Serialized parameters plus a metadata block and the model kind tag.
nlohmann::json makeCheckpoint(const ParameterStore& store, std::string_view modelKind,
                              const nlohmann::json& metadata);

}  // namespace ordvi::nn
