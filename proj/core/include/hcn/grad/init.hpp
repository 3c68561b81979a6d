#pragma once

#include <cmath>

#include "hcn/common/random.hpp"
#include "hcn/grad/tensor.hpp"

namespace hcn::grad {

/// Uniform in ±sqrt(6 / (fan_in + fan_out)).
template <typename T>
Tensor<T> glorot_uniform(Shape shape, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  Tensor<T> t(std::move(shape));
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (T& v : t.data()) v = static_cast<T>(rng.uniform(-bound, bound));
  return t;
}

/// LSTM weights and bias for the given sizes; the forget-gate bias starts at 1.
template <typename T>
void init_lstm(Tensor<T>& wx, Tensor<T>& wh, Tensor<T>& b, std::size_t d_in, std::size_t hidden, Rng& rng) {
  wx = glorot_uniform<T>(Shape{d_in, 4 * hidden}, d_in, 4 * hidden, rng);
  wh = glorot_uniform<T>(Shape{hidden, 4 * hidden}, hidden, 4 * hidden, rng);
  b = Tensor<T>(Shape{4 * hidden});
  for (std::size_t i = hidden; i < 2 * hidden; ++i) b[i] = T{1};
}

}  // namespace hcn::grad
