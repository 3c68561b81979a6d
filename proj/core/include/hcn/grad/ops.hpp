#pragma once

#include <span>
#include <vector>

#include "hcn/common/random.hpp"
#include "hcn/grad/activation.hpp"
#include "hcn/grad/graph.hpp"

namespace hcn::grad {

/// Matrix product. A rank-1 left operand of length k is treated as a 1×k row
/// vector and the result is rank-1 of length n.
template <typename T>
Var matmul(Graph<T>& g, Var a, Var b);

/// Elementwise sum of two tensors of identical shape.
template <typename T>
Var add(Graph<T>& g, Var a, Var b);

/// Elementwise (Hadamard) product of two tensors of identical shape.
template <typename T>
Var mul(Graph<T>& g, Var a, Var b);

template <typename T>
Var add_n(Graph<T>& g, std::span<const Var> terms);

template <typename T>
Var scale(Graph<T>& g, Var x, T factor);

/// Sum of all elements, as a scalar.
template <typename T>
Var sum(Graph<T>& g, Var x);

/// Concatenation of rank-1 tensors.
template <typename T>
Var concat(Graph<T>& g, std::span<const Var> parts);

/// Row `r` of a rank-2 tensor, as a rank-1 tensor.
template <typename T>
Var row(Graph<T>& g, Var x, std::size_t r);

template <typename T>
Var activation(Graph<T>& g, Activation kind, Var x);

/// Window convolution followed by max-over-time pooling.
///   seq:     [T×d] (zero-padded on the right to max(T, w) rows)
///   filters: [w×d×F]
///   bias:    [F]
/// out[f] = max_p act(sum_{k,j} seq[p+k][j]·filters[k][j][f] + bias[f]).
/// The gradient flows only through the first position attaining the maximum.
template <typename T>
Var conv1d_maxpool(Graph<T>& g, Var seq, Var filters, Var bias, Activation act = Activation::relu);

struct LstmWeights {
  Var wx;  // [d_in × 4h], gate blocks ordered input, forget, candidate, output
  Var wh;  // [h × 4h]
  Var b;   // [4h]
};

struct LstmState {
  Var h;
  Var c;
};

template <typename T>
LstmState lstm_step(Graph<T>& g, Var x, LstmState prev, const LstmWeights& w);

/// Inverted dropout; identity in eval mode or when keep_prob == 1.
template <typename T>
Var dropout(Graph<T>& g, Var x, double keep_prob, Mode mode, Rng& rng);

template <typename T>
struct SoftmaxXent {
  Var loss;
  Tensor<T> probs;
};

/// Cross-entropy of softmax(logits) against `gold`. Entries with mask false
/// receive probability zero; an empty mask permits everything.
template <typename T>
SoftmaxXent<T> softmax_xent(Graph<T>& g, Var logits, std::size_t gold, std::span<const bool> mask = {});

/// Numerically stable softmax restricted to permitted entries.
template <typename T>
std::vector<T> masked_softmax(std::span<const T> logits, std::span<const bool> mask = {});

}  // namespace hcn::grad
