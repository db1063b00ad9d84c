#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "abmix/nd/tensor.hpp"
#include "abmix/rng.hpp"

namespace abmix::nd {

/// Named collection of learnable weights. Each entry carries a gradient slot of
/// identical shape plus lazily-created Adam moment buffers. Addresses of
/// entries are stable (node-based map), so tapes may hold Entry pointers.
class ParamStore {
 public:
  struct Entry {
    Tensor w;
    Tensor g;
    Tensor m;  // Adam first moment (empty until first step)
    Tensor v;  // Adam second moment
  };

  Entry& create(const std::string& name, Tensor init) {
    if (entries_.count(name)) throw ContractError("ParamStore: duplicate name " + name);
    Entry e;
    e.g = Tensor::zeros(init.shape());
    e.w = std::move(init);
    auto [it, ok] = entries_.emplace(name, std::move(e));
    (void)ok;
    return it->second;
  }

  /// Glorot-uniform initialized matrix [fan_in x fan_out].
  Entry& create_dense(const std::string& name, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Tensor w({fan_in, fan_out});
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = rng.uniform(-bound, bound);
    return create(name, std::move(w));
  }

  Entry& create_zeros(const std::string& name, std::vector<std::size_t> shape) {
    return create(name, Tensor::zeros(std::move(shape)));
  }

  bool has(const std::string& name) const { return entries_.count(name) != 0; }

  Entry& at(const std::string& name) {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw ContractError("ParamStore: unknown name " + name);
    return it->second;
  }
  const Entry& at(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw ContractError("ParamStore: unknown name " + name);
    return it->second;
  }

  void zero_grad() {
    for (auto& [name, e] : entries_)
      for (double& g : e.g.vec()) g = 0.0;
  }

  std::size_t size() const { return entries_.size(); }
  std::uint64_t step_count() const { return step_count_; }
  void set_step_count(std::uint64_t c) { step_count_ = c; }
  std::uint64_t& step_count_ref() { return step_count_; }

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

 private:
  std::map<std::string, Entry> entries_;  // ordered => deterministic iteration
  std::uint64_t step_count_ = 0;
};

}  // namespace abmix::nd
