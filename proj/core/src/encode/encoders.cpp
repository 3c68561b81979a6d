#include "hcn/encode/encoders.hpp"

#include "hcn/common/error.hpp"
#include "hcn/grad/init.hpp"

namespace hcn::encode {

template <typename T>
Tensor<T> embed_tokens(std::span<const std::string> tokens, const embed::EmbeddingTable& table) {
  const std::size_t d = table.dim();
  Tensor<T> out(grad::Shape{std::max<std::size_t>(tokens.size(), 1), d});
  std::vector<float> buf(d);
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    table.lookup(tokens[t], buf);
    for (std::size_t j = 0; j < d; ++j) out.at(t, j) = static_cast<T>(buf[j]);
  }
  return out;
}

template <typename T>
Tensor<T> encode_baseline(std::span<const std::string> tokens, const embed::EmbeddingTable& table,
                          const text::Vocabulary& vocab) {
  const std::size_t d = table.dim();
  Tensor<T> out(grad::Shape{d + vocab.size()});
  if (!tokens.empty()) {
    std::vector<double> mean(d, 0.0);
    std::vector<float> buf(d);
    for (const auto& tok : tokens) {
      table.lookup(tok, buf);
      for (std::size_t j = 0; j < d; ++j) mean[j] += buf[j];
    }
    for (std::size_t j = 0; j < d; ++j) out[j] = static_cast<T>(mean[j] / static_cast<double>(tokens.size()));
  }
  const auto bow = text::bow_vector(tokens, vocab);
  for (std::size_t i = 0; i < bow.size(); ++i) out[d + i] = static_cast<T>(bow[i]);
  return out;
}

template <typename T>
CnnEncoder<T>::CnnEncoder(ParameterSet<T>& params, std::size_t dim, std::size_t filters,
                          std::vector<std::size_t> widths, Rng& init)
    : filters_(filters), widths_(std::move(widths)) {
  if (dim == 0 || filters == 0 || widths_.empty()) throw ConfigError("CNN encoder needs dim, filters and widths");
  for (std::size_t w : widths_) {
    if (w == 0) throw ConfigError("CNN filter width must be positive");
    const std::string prefix = "cnn.w" + std::to_string(w);
    filter_index_.push_back(
        params.add(prefix + ".filters", grad::glorot_uniform<T>(grad::Shape{w, dim, filters}, w * dim, filters, init))
            .index);
    bias_index_.push_back(params.add(prefix + ".bias", Tensor<T>(grad::Shape{filters})).index);
  }
}

template <typename T>
Var CnnEncoder<T>::encode(Binding<T>& bound, Var seq, double keep, Mode mode, Rng& rng) const {
  Graph<T>& g = bound.graph();
  std::vector<Var> pooled;
  pooled.reserve(widths_.size());
  for (std::size_t i = 0; i < widths_.size(); ++i) {
    pooled.push_back(
        grad::conv1d_maxpool(g, seq, bound[filter_index_[i]], bound[bias_index_[i]], grad::Activation::relu));
  }
  const Var features = pooled.size() == 1 ? pooled[0] : grad::concat(g, std::span<const Var>(pooled));
  return grad::dropout(g, features, keep, mode, rng);
}

template <typename T>
RnnEncoder<T>::RnnEncoder(ParameterSet<T>& params, std::size_t dim, std::size_t hidden, grad::Activation act,
                          Rng& init)
    : hidden_(hidden), act_(act) {
  if (dim == 0 || hidden == 0) throw ConfigError("RNN encoder needs positive dim and hidden size");
  Tensor<T> wx, wh, b;
  grad::init_lstm(wx, wh, b, dim, hidden, init);
  wx_ = params.add("rnn.wx", std::move(wx)).index;
  wh_ = params.add("rnn.wh", std::move(wh)).index;
  b_ = params.add("rnn.b", std::move(b)).index;
}

template <typename T>
Var RnnEncoder<T>::encode(Binding<T>& bound, Var seq, std::size_t tokens, double keep, Mode mode,
                          Rng& rng) const {
  Graph<T>& g = bound.graph();
  const Tensor<T> zero(grad::Shape{hidden_});
  grad::LstmState state{g.constant(zero), g.constant(zero)};
  if (tokens > 0) {
    const grad::LstmWeights w{bound[wx_], bound[wh_], bound[b_]};
    for (std::size_t t = 0; t < tokens; ++t) state = grad::lstm_step(g, grad::row(g, seq, t), state, w);
  }
  return grad::dropout(g, grad::activation(g, act_, state.h), keep, mode, rng);
}

template Tensor<float> embed_tokens<float>(std::span<const std::string>, const embed::EmbeddingTable&);
template Tensor<double> embed_tokens<double>(std::span<const std::string>, const embed::EmbeddingTable&);
template Tensor<float> encode_baseline<float>(std::span<const std::string>, const embed::EmbeddingTable&,
                                              const text::Vocabulary&);
template Tensor<double> encode_baseline<double>(std::span<const std::string>, const embed::EmbeddingTable&,
                                                const text::Vocabulary&);
template class CnnEncoder<float>;
template class CnnEncoder<double>;
template class RnnEncoder<float>;
template class RnnEncoder<double>;

}  // namespace hcn::encode
