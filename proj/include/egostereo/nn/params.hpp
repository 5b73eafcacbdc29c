#pragma once

#include <map>
#include <string>

#include "egostereo/nn/tape.hpp"
#include "egostereo/rng.hpp"

namespace egostereo::nn {

// Named parameters plus their Adam moments. std::map keeps iteration order
// stable, which the deterministic-training guarantee depends on.
template <class S>
class ParamStore {
 public:
  struct Entry {
    Tensor<S> value;
    Tensor<S> m;
    Tensor<S> v;
  };

  Tensor<S>& add(const std::string& name, Tensor<S> init) {
    auto [it, fresh] = entries_.emplace(name, Entry{});
    if (!fresh) throw ConfigError("ParamStore: duplicate parameter " + name);
    it->second.value = std::move(init);
    it->second.m = Tensor<S>(it->second.value.shape);
    it->second.v = Tensor<S>(it->second.value.shape);
    return it->second.value;
  }

  Tensor<S>& at(const std::string& name) {
    auto it = entries_.find(name);
    if (it == entries_.end()) {
      throw ConfigError("ParamStore: unknown parameter " + name);
    }
    return it->second.value;
  }
  const Tensor<S>& at(const std::string& name) const {
    return const_cast<ParamStore*>(this)->at(name);
  }
  bool contains(const std::string& name) const {
    return entries_.count(name) != 0;
  }

  std::map<std::string, Entry>& entries() { return entries_; }
  const std::map<std::string, Entry>& entries() const { return entries_; }

  std::int64_t total_size() const {
    std::int64_t n = 0;
    for (const auto& [k, e] : entries_) n += e.value.size();
    return n;
  }

  template <class T>
  ParamStore<T> cast() const {
    ParamStore<T> out;
    for (const auto& [k, e] : entries_) {
      out.add(k, e.value.template cast<T>());
    }
    return out;
  }

 private:
  std::map<std::string, Entry> entries_;
};

// Parameter name -> tape node for one forward/backward pass.
template <class S>
struct BoundParams {
  std::map<std::string, int> node;
  int at(const std::string& name) const {
    auto it = node.find(name);
    if (it == node.end()) {
      throw ConfigError("BoundParams: parameter not bound: " + name);
    }
    return it->second;
  }
};

template <class S>
BoundParams<S> bind_params(Tape<S>& t, const ParamStore<S>& ps,
                           bool trainable) {
  BoundParams<S> out;
  for (const auto& [name, e] : ps.entries()) {
    out.node[name] = t.input(e.value, trainable);
  }
  return out;
}

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One Adam update from the gradients accumulated on the tape. Parameters
// whose node never received a gradient are left untouched (their moments
// still decay toward zero to keep the update history well defined).
template <class S>
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  void step(ParamStore<S>& ps, Tape<S>& t, const BoundParams<S>& bound,
            S lr) {
    ++t_;
    const S b1 = static_cast<S>(cfg_.beta1);
    const S b2 = static_cast<S>(cfg_.beta2);
    const S eps = static_cast<S>(cfg_.eps);
    const S bc1 = S(1) - std::pow(b1, static_cast<S>(t_));
    const S bc2 = S(1) - std::pow(b2, static_cast<S>(t_));
    for (auto& [name, e] : ps.entries()) {
      const int node = bound.at(name);
      const bool has = t.grad_ready(node);
      e.m.data *= b1;
      e.v.data *= b2;
      if (has) {
        const auto& g = t.grad(node).data;
        e.m.data += (S(1) - b1) * g;
        e.v.data += (S(1) - b2) * g.cwiseProduct(g);
      }
      e.value.data.array() -=
          lr * (e.m.data.array() / bc1) /
          ((e.v.data.array() / bc2).sqrt() + eps);
    }
  }

  std::int64_t steps_taken() const { return t_; }

 private:
  AdamConfig cfg_;
  std::int64_t t_ = 0;
};

// Initializers. All randomness flows through the caller's Rng so a seed
// fully determines the parameter bytes.
template <class S>
Tensor<S> normal_init(Rng& rng, std::vector<int> shape, double stddev) {
  Tensor<S> t(std::move(shape));
  for (std::int64_t i = 0; i < t.size(); ++i) {
    t.data[i] = static_cast<S>(rng.normal(0.0, stddev));
  }
  return t;
}

// He initialization for relu stacks. fan_in: Cin*KH*KW for conv, in for
// linear.
template <class S>
Tensor<S> he_init(Rng& rng, std::vector<int> shape, std::int64_t fan_in) {
  return normal_init<S>(rng, std::move(shape),
                        std::sqrt(2.0 / static_cast<double>(fan_in)));
}

}  // namespace egostereo::nn
