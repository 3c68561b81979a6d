#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "hcn/grad/graph.hpp"

namespace hcn::grad {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const {
    if (!(lr > 0.0)) throw ConfigError("adam: learning rate must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("adam: beta1 must lie in [0, 1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("adam: beta2 must lie in [0, 1)");
    if (!(eps > 0.0)) throw ConfigError("adam: epsilon must be positive");
  }
};

/// Adam with bias-corrected moments:
///   m ← β1·m + (1−β1)·g,  v ← β2·v + (1−β2)·g²
///   p ← p − lr · m̂ / (√v̂ + ε),  m̂ = m/(1−β1ᵗ), v̂ = v/(1−β2ᵗ)
template <typename T>
class Adam {
 public:
  Adam(const ParameterSet<T>& params, AdamConfig config) : config_(config) {
    config_.validate();
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_.emplace_back(params[i].value.shape());
      v_.emplace_back(params[i].value.shape());
    }
  }

  void step(ParameterSet<T>& params, const GradientBuffer<T>& grads) {
    if (params.size() != m_.size() || grads.size() != m_.size()) {
      throw DimensionError("adam: parameter/gradient count mismatch");
    }
    ++t_;
    const double b1 = config_.beta1, b2 = config_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto p = params[i].value.data();
      auto g = grads[i].data();
      auto m = m_[i].data();
      auto v = v_[i].data();
      if (g.size() != p.size()) throw DimensionError("adam: gradient shape mismatch for " + params[i].name);
      for (std::size_t k = 0; k < p.size(); ++k) {
        const double gk = static_cast<double>(g[k]);
        const double mk = b1 * static_cast<double>(m[k]) + (1.0 - b1) * gk;
        const double vk = b2 * static_cast<double>(v[k]) + (1.0 - b2) * gk * gk;
        m[k] = static_cast<T>(mk);
        v[k] = static_cast<T>(vk);
        const double update = config_.lr * (mk / c1) / (std::sqrt(vk / c2) + config_.eps);
        p[k] = static_cast<T>(static_cast<double>(p[k]) - update);
      }
    }
  }

  std::uint64_t steps() const { return t_; }
  const AdamConfig& config() const { return config_; }
  const Tensor<T>& first_moment(std::size_t i) const { return m_[i]; }
  const Tensor<T>& second_moment(std::size_t i) const { return v_[i]; }

 private:
  AdamConfig config_;
  std::uint64_t t_ = 0;
  std::vector<Tensor<T>> m_;
  std::vector<Tensor<T>> v_;
};

}  // namespace hcn::grad
