#include "nbe2e/train/param_store.hpp"

#include <cmath>
#include <stdexcept>

namespace nbe2e::train {

ParamId ParamStore::add(const std::string& name, std::vector<int> shape, bool trainable) {
  if (index_.count(name)) throw std::invalid_argument("duplicate parameter block " + name);
  std::size_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw std::invalid_argument("non-positive dimension in block " + name);
    n *= static_cast<std::size_t>(d);
  }
  const ParamId id = static_cast<ParamId>(blocks_.size());
  blocks_.push_back({name, std::move(shape), AlignedVector(n, 0.0), trainable});
  index_[name] = id;
  ++version_;
  return id;
}

std::optional<ParamId> ParamStore::find(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

ParamId ParamStore::id(const std::string& name) const {
  auto found = find(name);
  if (!found) throw std::out_of_range("no parameter block named " + name);
  return *found;
}

std::size_t ParamStore::total_size() const {
  std::size_t n = 0;
  for (const auto& b : blocks_) n += b.size();
  return n;
}

Gradients::Gradients(const ParamStore& store) {
  g_.resize(store.size());
  for (int i = 0; i < store.size(); ++i) g_[i].assign(store.block(i).size(), 0.0);
}

void Gradients::zero() {
  for (auto& g : g_) std::fill(g.begin(), g.end(), 0.0);
}

void Gradients::accumulate(const Gradients& other) {
  if (other.g_.size() != g_.size()) throw std::invalid_argument("gradient layout mismatch");
  for (std::size_t b = 0; b < g_.size(); ++b)
    for (std::size_t i = 0; i < g_[b].size(); ++i) g_[b][i] += other.g_[b][i];
}

void Gradients::scale(double s) {
  for (auto& g : g_)
    for (double& v : g) v *= s;
}

double Gradients::squared_norm() const {
  double n = 0.0;
  for (const auto& g : g_)
    for (double v : g) n += v * v;
  return n;
}

void fill_normal(std::span<double> v, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, stddev);
  for (double& x : v) x = d(rng);
}

void fill_glorot(std::span<double> v, int fan_in, int fan_out, std::mt19937_64& rng) {
  fill_normal(v, std::sqrt(2.0 / (fan_in + fan_out)), rng);
}

}  // namespace nbe2e::train
