#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include "hcn/common/error.hpp"

namespace hcn::grad {

enum class Activation { identity, relu, tanh, sigmoid };

inline std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
  }
  return "identity";
}

inline Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "identity") return Activation::identity;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

template <typename T>
T sigmoid(T x) {
  // Split by sign so exp never overflows.
  if (x >= T{0}) return T{1} / (T{1} + std::exp(-x));
  const T e = std::exp(x);
  return e / (T{1} + e);
}

template <typename T>
T apply(Activation a, T x) {
  switch (a) {
    case Activation::identity: return x;
    case Activation::relu: return x > T{0} ? x : T{0};
    case Activation::tanh: return std::tanh(x);
    case Activation::sigmoid: return sigmoid(x);
  }
  return x;
}

/// Derivative expressed through the pre-activation `x` and output `y`.
/// relu'(0) is 0.
template <typename T>
T derivative(Activation a, T x, T y) {
  switch (a) {
    case Activation::identity: return T{1};
    case Activation::relu: return x > T{0} ? T{1} : T{0};
    case Activation::tanh: return T{1} - y * y;
    case Activation::sigmoid: return y * (T{1} - y);
  }
  return T{1};
}

}  // namespace hcn::grad
