#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lalnet/config.hpp"
#include "lalnet/tape.hpp"

namespace lalnet {

enum class InitKind {
  fan_in_uniform,  // U(-1/sqrt(fan_in), 1/sqrt(fan_in))
  constant,        // every entry = value
  a_log,           // row d: log(1), log(2), ..., log(N), so A = -exp(a_log) = -(1..N)
  dt_bias,         // inverse softplus of log-uniform samples in [0.01, 0.1]
};

struct ParamSpec {
  std::string name;
  Shape shape;
  InitKind init = InitKind::constant;
  double value = 0.0;
  int64_t fan_in = 0;
};

template <class T>
struct AdamState {
  std::map<std::string, Tensor<T>> m;
  std::map<std::string, Tensor<T>> v;
  int64_t step = 0;

  bool operator==(const AdamState&) const = default;
};

template <class T>
class ParamStore {
 public:
  void insert(const std::string& name, Tensor<T> value);
  bool contains(const std::string& name) const { return tensors_.count(name) != 0; }
  const Tensor<T>& at(const std::string& name) const;
  Tensor<T>& at(const std::string& name);
  const std::map<std::string, Tensor<T>>& tensors() const { return tensors_; }
  std::map<std::string, Tensor<T>>& tensors() { return tensors_; }
  int64_t count() const;

  AdamState<T>& adam() { return adam_; }
  const AdamState<T>& adam() const { return adam_; }

  template <class U>
  ParamStore<U> cast() const {
    ParamStore<U> out;
    for (const auto& [k, t] : tensors_) out.insert(k, t.template cast<U>());
    auto& a = out.adam();
    for (const auto& [k, t] : adam_.m) a.m[k] = t.template cast<U>();
    for (const auto& [k, t] : adam_.v) a.v[k] = t.template cast<U>();
    a.step = adam_.step;
    return out;
  }

  bool operator==(const ParamStore& other) const = default;

 private:
  std::map<std::string, Tensor<T>> tensors_;
  AdamState<T> adam_;
};

/// Materializes specs deterministically; each tensor draws from its own stream seeded by (seed, name).
template <class T>
ParamStore<T> init_from_specs(const std::vector<ParamSpec>& specs, uint64_t seed);

int64_t count_specs(const std::vector<ParamSpec>& specs);

// Lazily exposes store entries as tape leaves. Lookups of absent names fail with the name.
template <class T>
class ParamBinding {
 public:
  ParamBinding(Tape<T>& tape, const ParamStore<T>& store, bool trainable = true)
      : tape_(tape), store_(store), trainable_(trainable) {}

  Var<T> operator()(const std::string& name);
  /// Routes lookups of `name` to an existing tape value (e.g. a grad-check leaf).
  void bind(const std::string& name, const Var<T>& value);
  Tape<T>& tape() { return tape_; }
  const std::map<std::string, Var<T>>& used() const { return used_; }
  std::vector<std::string> unused() const;
  /// Gradient per store entry after backward; entries the forward never touched get zeros.
  std::map<std::string, Tensor<T>> grads() const;

 private:
  Tape<T>& tape_;
  const ParamStore<T>& store_;
  bool trainable_;
  std::map<std::string, Var<T>> used_;
};

}  // namespace lalnet
