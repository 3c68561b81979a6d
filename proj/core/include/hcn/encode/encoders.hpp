#pragma once

#include <span>
#include <string>
#include <vector>

#include "hcn/common/random.hpp"
#include "hcn/embed/embedding_table.hpp"
#include "hcn/grad/activation.hpp"
#include "hcn/grad/graph.hpp"
#include "hcn/grad/ops.hpp"
#include "hcn/grad/tensor.hpp"
#include "hcn/text/vocabulary.hpp"

namespace hcn::encode {

using grad::Binding;
using grad::Graph;
using grad::Mode;
using grad::ParameterSet;
using grad::Tensor;
using grad::Var;

/// Token vectors stacked as rows, [max(n, 1) × dim]. An empty utterance gives
/// a single zero row so that window convolutions still see one position.
template <typename T>
Tensor<T> embed_tokens(std::span<const std::string> tokens, const embed::EmbeddingTable& table);

/// Mean token embedding (zeros for an empty utterance) followed by the binary
/// bag-of-words, length dim + |vocab|.
template <typename T>
Tensor<T> encode_baseline(std::span<const std::string> tokens, const embed::EmbeddingTable& table,
                          const text::Vocabulary& vocab);

/// Sentence CNN: one bank of `filters` window filters per width, relu inside,
/// max-over-time pooling, concatenated.
template <typename T>
class CnnEncoder {
 public:
  CnnEncoder() = default;
  /// Registers `cnn.w<width>.filters` [w×dim×F] and `cnn.w<width>.bias` [F].
  CnnEncoder(ParameterSet<T>& params, std::size_t dim, std::size_t filters, std::vector<std::size_t> widths,
             Rng& init);

  std::size_t output_dim() const { return filters_ * widths_.size(); }
  const std::vector<std::size_t>& widths() const { return widths_; }

  /// `seq` is an embedded utterance [T×dim]; dropout applies in train mode.
  Var encode(Binding<T>& bound, Var seq, double keep, Mode mode, Rng& rng) const;

 private:
  std::size_t filters_ = 0;
  std::vector<std::size_t> widths_;
  std::vector<std::size_t> filter_index_, bias_index_;
};

/// Input LSTM over the token vectors from a zero state; the final hidden state
/// passes through `act` and then dropout.
template <typename T>
class RnnEncoder {
 public:
  RnnEncoder() = default;
  /// Registers `rnn.wx` [dim×4h], `rnn.wh` [h×4h] and `rnn.b` [4h].
  RnnEncoder(ParameterSet<T>& params, std::size_t dim, std::size_t hidden, grad::Activation act, Rng& init);

  std::size_t output_dim() const { return hidden_; }

  /// `tokens` is the number of real rows of `seq`; zero means an empty
  /// utterance, which yields act(0).
  Var encode(Binding<T>& bound, Var seq, std::size_t tokens, double keep, Mode mode, Rng& rng) const;

 private:
  std::size_t hidden_ = 0;
  grad::Activation act_ = grad::Activation::tanh;
  std::size_t wx_ = 0, wh_ = 0, b_ = 0;
};

}  // namespace hcn::encode
