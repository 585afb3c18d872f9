#include "lalnet/params.hpp"

#include <cmath>
#include <random>

namespace lalnet {

template <class T>
void ParamStore<T>::insert(const std::string& name, Tensor<T> value) {
  if (!tensors_.emplace(name, std::move(value)).second) throw ConfigError("duplicate parameter: " + name);
}

template <class T>
const Tensor<T>& ParamStore<T>::at(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw ConfigError("missing parameter: " + name);
  return it->second;
}

template <class T>
Tensor<T>& ParamStore<T>::at(const std::string& name) {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw ConfigError("missing parameter: " + name);
  return it->second;
}

template <class T>
int64_t ParamStore<T>::count() const {
  int64_t n = 0;
  for (const auto& [k, t] : tensors_) n += t.size();
  return n;
}

namespace {

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::vector<double> draw(const ParamSpec& spec, uint64_t seed) {
  const int64_t n = numel(spec.shape);
  std::vector<double> out(static_cast<size_t>(n), spec.value);
  const uint64_t h = fnv1a(spec.name);
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32), static_cast<uint32_t>(h),
                    static_cast<uint32_t>(h >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  switch (spec.init) {
    case InitKind::constant:
      break;
    case InitKind::fan_in_uniform: {
      if (spec.fan_in <= 0) throw ConfigError("parameter " + spec.name + " has no fan-in");
      const double bound = 1.0 / std::sqrt(static_cast<double>(spec.fan_in));
      for (auto& v : out) v = (2.0 * unit(rng) - 1.0) * bound;
      break;
    }
    case InitKind::a_log: {
      if (spec.shape.size() != 2) throw ConfigError("parameter " + spec.name + " must be [D,N]");
      const int64_t N = spec.shape[1];
      for (int64_t i = 0; i < n; ++i) out[static_cast<size_t>(i)] = std::log(static_cast<double>(i % N + 1));
      break;
    }
    case InitKind::dt_bias: {
      const double lo = std::log(0.01), hi = std::log(0.1);
      for (auto& v : out) {
        const double dt = std::exp(lo + unit(rng) * (hi - lo));
        v = dt + std::log(-std::expm1(-dt));
      }
      break;
    }
  }
  return out;
}

}  // namespace

template <class T>
ParamStore<T> init_from_specs(const std::vector<ParamSpec>& specs, uint64_t seed) {
  ParamStore<T> store;
  for (const auto& spec : specs) {
    auto values = draw(spec, seed);
    store.insert(spec.name, Tensor<T>(spec.shape, std::vector<T>(values.begin(), values.end())));
  }
  return store;
}

int64_t count_specs(const std::vector<ParamSpec>& specs) {
  int64_t n = 0;
  for (const auto& s : specs) n += numel(s.shape);
  return n;
}

template <class T>
Var<T> ParamBinding<T>::operator()(const std::string& name) {
  if (auto it = used_.find(name); it != used_.end()) return it->second;
  const Tensor<T>& value = store_.at(name);
  Var<T> v = trainable_ ? tape_.parameter(value) : tape_.constant(value);
  used_.emplace(name, v);
  return v;
}

template <class T>
void ParamBinding<T>::bind(const std::string& name, const Var<T>& value) {
  const Tensor<T>& expected = store_.at(name);
  if (expected.shape() != value.shape()) {
    throw ShapeError("bind " + name + ": expected " + shape_str(expected.shape()) + ", got " + shape_str(value.shape()));
  }
  used_[name] = value;
}

template <class T>
std::vector<std::string> ParamBinding<T>::unused() const {
  std::vector<std::string> out;
  for (const auto& [k, t] : store_.tensors()) {
    if (!used_.count(k)) out.push_back(k);
  }
  return out;
}

template <class T>
std::map<std::string, Tensor<T>> ParamBinding<T>::grads() const {
  std::map<std::string, Tensor<T>> out;
  for (const auto& [k, t] : store_.tensors()) {
    auto it = used_.find(k);
    out.emplace(k, it == used_.end() ? Tensor<T>(t.shape()) : it->second.grad());
  }
  return out;
}

template class ParamStore<float>;
template class ParamStore<double>;
template class ParamBinding<float>;
template class ParamBinding<double>;
template ParamStore<float> init_from_specs<float>(const std::vector<ParamSpec>&, uint64_t);
template ParamStore<double> init_from_specs<double>(const std::vector<ParamSpec>&, uint64_t);

}  // namespace lalnet
