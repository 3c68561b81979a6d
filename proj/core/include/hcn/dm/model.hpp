#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hcn/common/random.hpp"
#include "hcn/dm/config.hpp"
#include "hcn/embed/embedding_table.hpp"
#include "hcn/encode/encoders.hpp"
#include "hcn/grad/graph.hpp"
#include "hcn/grad/ops.hpp"
#include "hcn/text/dialogue.hpp"
#include "hcn/text/vocabulary.hpp"

namespace hcn::dm {

using grad::Binding;
using grad::Graph;
using grad::Mode;
using grad::ParameterSet;
using grad::Tensor;
using grad::Var;
using text::ActionId;

/// Per-action permission flags; at least one action is permitted.
class ActionMask {
 public:
  static ActionMask allow_all(std::size_t actions);
  explicit ActionMask(const std::vector<bool>& permitted);

  std::size_t size() const { return size_; }
  bool permitted(std::size_t action) const { return flags_[action]; }
  std::span<const bool> flags() const { return {flags_.get(), size_}; }

 private:
  std::shared_ptr<bool[]> flags_;
  std::size_t size_ = 0;
};

/// What a domain rule sees when deciding the mask for a turn.
struct MaskContext {
  std::size_t turn = 0;
  std::span<const std::string> user_tokens;
  ActionId previous_action = text::kUnknownAction;
  std::size_t actions = 0;
};

/// Domain-rule hook. An empty function permits every action.
using MaskRule = std::function<ActionMask(const MaskContext&)>;

ActionMask resolve_mask(const MaskRule& rule, const MaskContext& context);

/// Recurrent dialogue state carried between turns.
struct DialogueState {
  Tensor<float> h, c;
  ActionId previous_action = text::kUnknownAction;

  friend bool operator==(const DialogueState&, const DialogueState&) = default;
};

/// One user utterance prepared for the model: the full feature vector for the
/// baseline featurizer, the embedded token rows for CNN and RNN.
struct TurnInput {
  Tensor<float> data;
  std::size_t tokens = 0;
};

struct TurnPrediction {
  ActionId action = text::kUnknownAction;
  std::vector<float> probs;
};

/// Turn features → dialogue LSTM → dropout → dense layer with the configured
/// activation → dropout → linear layer to one logit per action.
class HcnModel {
 public:
  /// Parameters are initialised from config.seed.
  HcnModel(ModelConfig config, std::size_t embedding_dim, std::size_t vocab_size, std::size_t actions);

  HcnModel(HcnModel&&) noexcept = default;
  HcnModel& operator=(HcnModel&&) noexcept = default;

  const ModelConfig& config() const { return config_; }
  ParameterSet<float>& parameters() { return params_; }
  const ParameterSet<float>& parameters() const { return params_; }
  std::size_t embedding_dim() const { return embedding_dim_; }
  std::size_t vocab_size() const { return vocab_size_; }
  std::size_t action_count() const { return actions_; }
  /// Width of the per-turn encoder output.
  std::size_t feature_dim() const;

  /// Names of the parameters that belong to the utterance encoder.
  std::vector<std::string> encoder_parameters() const;

  TurnInput featurize(std::span<const std::string> tokens, const embed::EmbeddingTable& table,
                      const text::Vocabulary& vocab) const;

  DialogueState initial_state() const;

  struct GraphState {
    grad::LstmState lstm;
    ActionId previous_action = text::kUnknownAction;
  };

  GraphState graph_state(Graph<float>& g, const DialogueState& s) const;

  /// Records one turn; returns the logits and advances `state`. The caller
  /// sets state.previous_action between turns (the gold action in training).
  Var forward_turn(Binding<float>& bound, const TurnInput& input, GraphState& state, Mode mode, Rng& rng) const;

  /// Eval-mode prediction of one turn. Advances `state` (the previous action
  /// becomes the prediction). Evaluation and serving both go through here.
  TurnPrediction predict_turn(const TurnInput& input, DialogueState& state, const ActionMask& mask) const;

 private:
  Var encode(Binding<float>& bound, const TurnInput& input, Mode mode, Rng& rng) const;

  ModelConfig config_;
  std::size_t embedding_dim_ = 0, vocab_size_ = 0, actions_ = 0;
  ParameterSet<float> params_;
  encode::CnnEncoder<float> cnn_;
  encode::RnnEncoder<float> rnn_;
  std::size_t dlg_wx_ = 0, dlg_wh_ = 0, dlg_b_ = 0, fc_w_ = 0, fc_b_ = 0, out_w_ = 0, out_b_ = 0;
};

}  // namespace hcn::dm
