#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "nbe2e/linalg.hpp"

namespace nbe2e::train {

using ParamId = int;

struct ParamBlock {
  std::string name;
  std::vector<int> shape;
  AlignedVector value;
  bool trainable = true;

  std::size_t size() const { return value.size(); }
};

// Flat registry of named parameter blocks. Layers keep ParamIds and read the
// values through the store; the version counter moves whenever values change
// so stale forward caches can be detected.
class ParamStore {
 public:
  ParamId add(const std::string& name, std::vector<int> shape, bool trainable = true);

  int size() const { return static_cast<int>(blocks_.size()); }
  const ParamBlock& block(ParamId id) const { return blocks_.at(id); }
  ParamBlock& block(ParamId id) { return blocks_.at(id); }
  std::span<double> value(ParamId id) { return blocks_.at(id).value; }
  std::span<const double> value(ParamId id) const { return blocks_.at(id).value; }

  std::optional<ParamId> find(const std::string& name) const;
  ParamId id(const std::string& name) const;  // throws if absent

  std::uint64_t version() const { return version_; }
  void touch() { ++version_; }
  std::size_t total_size() const;

 private:
  std::vector<ParamBlock> blocks_;
  std::map<std::string, ParamId> index_;
  std::uint64_t version_ = 0;
};

// Gradient buffers laid out like a ParamStore. One instance per worker; the
// training loop reduces them in a fixed order.
class Gradients {
 public:
  Gradients() = default;
  explicit Gradients(const ParamStore& store);

  std::span<double> operator[](ParamId id) { return g_.at(id); }
  std::span<const double> operator[](ParamId id) const { return g_.at(id); }
  int size() const { return static_cast<int>(g_.size()); }

  void zero();
  void accumulate(const Gradients& other);
  void scale(double s);
  double squared_norm() const;

 private:
  std::vector<AlignedVector> g_;
};

inline MatMap as_mat(std::span<double> s, Eigen::Index rows, Eigen::Index cols) {
  return MatMap(s.data(), rows, cols);
}
inline ConstMatMap as_mat(std::span<const double> s, Eigen::Index rows, Eigen::Index cols) {
  return ConstMatMap(s.data(), rows, cols);
}
// Interleaved (re, im) pairs viewed as a complex row-major matrix.
inline Eigen::Map<CMat> as_cmat(std::span<double> s, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<CMat>(reinterpret_cast<cdouble*>(s.data()), rows, cols);
}
inline Eigen::Map<const CMat> as_cmat(std::span<const double> s, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const CMat>(reinterpret_cast<const cdouble*>(s.data()), rows, cols);
}

void fill_normal(std::span<double> v, double stddev, std::mt19937_64& rng);
// Normal with stddev sqrt(2 / (fan_in + fan_out)).
void fill_glorot(std::span<double> v, int fan_in, int fan_out, std::mt19937_64& rng);

}  // namespace nbe2e::train
