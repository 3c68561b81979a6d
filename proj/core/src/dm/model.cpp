#include "hcn/dm/model.hpp"

#include "hcn/common/error.hpp"
#include "hcn/grad/init.hpp"

namespace hcn::dm {

ActionMask ActionMask::allow_all(std::size_t actions) { return ActionMask(std::vector<bool>(actions, true)); }

ActionMask::ActionMask(const std::vector<bool>& permitted) : size_(permitted.size()) {
  bool any = false;
  flags_ = std::shared_ptr<bool[]>(new bool[std::max<std::size_t>(size_, 1)]);
  for (std::size_t i = 0; i < size_; ++i) {
    flags_[i] = permitted[i];
    any = any || permitted[i];
  }
  if (!any) throw ConfigError("action mask permits no action");
}

ActionMask resolve_mask(const MaskRule& rule, const MaskContext& context) {
  if (!rule) return ActionMask::allow_all(context.actions);
  ActionMask mask = rule(context);
  if (mask.size() != context.actions) {
    throw ConfigError("action mask has " + std::to_string(mask.size()) + " entries, expected " +
                      std::to_string(context.actions));
  }
  return mask;
}

HcnModel::HcnModel(ModelConfig config, std::size_t embedding_dim, std::size_t vocab_size, std::size_t actions)
    : config_(std::move(config)), embedding_dim_(embedding_dim), vocab_size_(vocab_size), actions_(actions) {
  config_.validate();
  if (embedding_dim == 0) throw ConfigError("embedding dimension must be positive");
  if (actions == 0) throw ConfigError("model needs at least one action");
  Rng init(config_.seed);
  switch (config_.featurizer) {
    case Featurizer::baseline:
      if (vocab_size == 0) throw ConfigError("baseline featurizer needs a vocabulary");
      break;
    case Featurizer::cnn:
      cnn_ = encode::CnnEncoder<float>(params_, embedding_dim, *config_.conv_filters, config_.widths(), init);
      break;
    case Featurizer::rnn:
      rnn_ = encode::RnnEncoder<float>(params_, embedding_dim, *config_.input_lstm_size, *config_.input_activation,
                                       init);
      break;
  }
  const std::size_t h = config_.lstm_size;
  const std::size_t in = feature_dim() + (config_.previous_action ? actions_ : 0);
  Tensor<float> wx, wh, b;
  grad::init_lstm(wx, wh, b, in, h, init);
  dlg_wx_ = params_.add("dlg.wx", std::move(wx)).index;
  dlg_wh_ = params_.add("dlg.wh", std::move(wh)).index;
  dlg_b_ = params_.add("dlg.b", std::move(b)).index;
  fc_w_ = params_.add("fc.w", grad::glorot_uniform<float>(grad::Shape{h, h}, h, h, init)).index;
  fc_b_ = params_.add("fc.b", Tensor<float>(grad::Shape{h})).index;
  out_w_ = params_.add("out.w", grad::glorot_uniform<float>(grad::Shape{h, actions_}, h, actions_, init)).index;
  out_b_ = params_.add("out.b", Tensor<float>(grad::Shape{actions_})).index;
}

std::size_t HcnModel::feature_dim() const {
  switch (config_.featurizer) {
    case Featurizer::baseline: return embedding_dim_ + vocab_size_;
    case Featurizer::cnn: return cnn_.output_dim();
    case Featurizer::rnn: return rnn_.output_dim();
  }
  return 0;
}

std::vector<std::string> HcnModel::encoder_parameters() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto& n = params_[i].name;
    if (n.rfind("cnn.", 0) == 0 || n.rfind("rnn.", 0) == 0) out.push_back(n);
  }
  return out;
}

TurnInput HcnModel::featurize(std::span<const std::string> tokens, const embed::EmbeddingTable& table,
                              const text::Vocabulary& vocab) const {
  if (table.dim() != embedding_dim_) {
    throw ConfigError("embedding dimension " + std::to_string(table.dim()) + " does not match the model's " +
                      std::to_string(embedding_dim_));
  }
  if (config_.featurizer == Featurizer::baseline) {
    if (vocab.size() != vocab_size_) {
      throw ConfigError("vocabulary size " + std::to_string(vocab.size()) + " does not match the model's " +
                        std::to_string(vocab_size_));
    }
    return TurnInput{encode::encode_baseline<float>(tokens, table, vocab), tokens.size()};
  }
  return TurnInput{encode::embed_tokens<float>(tokens, table), tokens.size()};
}

DialogueState HcnModel::initial_state() const {
  const Tensor<float> zero(grad::Shape{config_.lstm_size});
  return DialogueState{zero, zero, text::kUnknownAction};
}

HcnModel::GraphState HcnModel::graph_state(Graph<float>& g, const DialogueState& s) const {
  return GraphState{grad::LstmState{g.constant(s.h), g.constant(s.c)}, s.previous_action};
}

Var HcnModel::encode(Binding<float>& bound, const TurnInput& input, Mode mode, Rng& rng) const {
  Graph<float>& g = bound.graph();
  switch (config_.featurizer) {
    case Featurizer::baseline: {
      if (input.data.rank() != 1 || input.data.size() != feature_dim()) {
        throw ConfigError("turn features have shape " + grad::to_string(input.data.shape()) + ", model expects [" +
                          std::to_string(feature_dim()) + "]");
      }
      return g.constant_ref(input.data);
    }
    case Featurizer::cnn:
    case Featurizer::rnn: {
      if (input.data.rank() != 2 || input.data.dim(1) != embedding_dim_) {
        throw ConfigError("embedded utterance has shape " + grad::to_string(input.data.shape()) +
                          ", model expects rows of width " + std::to_string(embedding_dim_));
      }
      const Var seq = g.constant_ref(input.data);
      if (config_.featurizer == Featurizer::cnn) return cnn_.encode(bound, seq, *config_.conv_keep_prob, mode, rng);
      return rnn_.encode(bound, seq, input.tokens, *config_.input_lstm_keep_prob, mode, rng);
    }
  }
  throw ConfigError("unknown featurizer");
}

Var HcnModel::forward_turn(Binding<float>& bound, const TurnInput& input, GraphState& state, Mode mode,
                           Rng& rng) const {
  Graph<float>& g = bound.graph();
  Var x = encode(bound, input, mode, rng);
  if (config_.previous_action) {
    Tensor<float> onehot(grad::Shape{actions_});
    if (state.previous_action >= 0) onehot[static_cast<std::size_t>(state.previous_action)] = 1.0f;
    const Var parts[] = {x, g.constant(std::move(onehot))};
    x = grad::concat(g, std::span<const Var>(parts));
  }
  const grad::LstmWeights w{bound[dlg_wx_], bound[dlg_wh_], bound[dlg_b_]};
  state.lstm = grad::lstm_step(g, x, state.lstm, w);
  const Var h = grad::dropout(g, state.lstm.h, config_.lstm_keep_prob, mode, rng);
  Var hidden = grad::add(g, grad::matmul(g, h, bound[fc_w_]), bound[fc_b_]);
  hidden = grad::activation(g, config_.activation, hidden);
  hidden = grad::dropout(g, hidden, config_.fc_keep_prob, mode, rng);
  return grad::add(g, grad::matmul(g, hidden, bound[out_w_]), bound[out_b_]);
}

TurnPrediction HcnModel::predict_turn(const TurnInput& input, DialogueState& state, const ActionMask& mask) const {
  if (mask.size() != actions_) throw ConfigError("action mask size does not match the action set");
  Graph<float> g;
  Binding<float> bound(g, params_);
  Rng unused(0);
  GraphState gs = graph_state(g, state);
  const Var logits = forward_turn(bound, input, gs, Mode::eval, unused);
  TurnPrediction out;
  out.probs = grad::masked_softmax<float>(g.value(logits).data(), mask.flags());
  std::size_t best = 0;
  for (std::size_t k = 0; k < out.probs.size(); ++k) {
    if (mask.permitted(k) && (!mask.permitted(best) || out.probs[k] > out.probs[best])) best = k;
  }
  out.action = static_cast<ActionId>(best);
  state.h = g.value(gs.lstm.h);
  state.c = g.value(gs.lstm.c);
  state.previous_action = out.action;
  return out;
}

}  // namespace hcn::dm
