#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hcn/grad/activation.hpp"

namespace hcn::dm {

enum class Featurizer { baseline, cnn, rnn };

std::string_view to_string(Featurizer f);
Featurizer parse_featurizer(std::string_view name);

/// One model configuration. Dropout values are keep probabilities. Fields that
/// only apply to one featurizer are optional and must be unset for the others.
///
/// Text form is one `key = value` per line, `#` starts a comment:
///
///   featurizer = cnn
///   lstm_size = 245
///   conv_filters = 21
///   lstm_keep_prob = 0.80
///   ...
struct ModelConfig {
  Featurizer featurizer = Featurizer::baseline;
  /// Label of the embedding source the config was tuned with (fasttext, word2vec).
  std::string embeddings = "fasttext";

  std::size_t lstm_size = 55;
  std::optional<std::size_t> input_lstm_size;  // rnn
  std::optional<std::size_t> conv_filters;     // cnn
  std::optional<std::vector<std::size_t>> conv_widths;  // cnn, default {3, 4, 5}

  double lstm_keep_prob = 1.0;
  std::optional<double> input_lstm_keep_prob;  // rnn
  std::optional<double> conv_keep_prob;        // cnn
  double fc_keep_prob = 1.0;

  double learning_rate = 1e-3;
  grad::Activation activation = grad::Activation::relu;
  std::optional<grad::Activation> input_activation;  // rnn
  double adam_eps = 1e-8;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;

  std::size_t batch_size = 32;
  double clip_norm = 5.0;
  /// Appends a one-hot of the previous predicted action to the turn features.
  bool previous_action = false;
  std::uint64_t seed = 1;

  std::vector<std::size_t> widths() const;

  /// Throws ConfigError naming the offending field.
  void validate() const;

  std::string serialize() const;
  static ModelConfig parse(std::string_view text);
  static ModelConfig load(const std::string& path);

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

}  // namespace hcn::dm
