#pragma once

#include <functional>
#include <vector>

#include "hcn/dm/model.hpp"
#include "hcn/embed/embedding_table.hpp"
#include "hcn/text/dialogue.hpp"
#include "hcn/text/vocabulary.hpp"

namespace hcn::dm {

/// A dialogue with every user turn already featurized.
struct EncodedDialogue {
  std::vector<TurnInput> turns;
  std::vector<std::vector<std::string>> tokens;
  std::vector<ActionId> golds;
};

std::vector<EncodedDialogue> encode_dialogues(const HcnModel& model, const std::vector<text::Dialogue>& dialogues,
                                              const embed::EmbeddingTable& table, const text::Vocabulary& vocab);

struct Evaluation {
  double turn_accuracy = 0;
  double dialogue_accuracy = 0;
  std::vector<ActionId> predictions;
  std::vector<ActionId> golds;
  std::vector<std::size_t> lengths;
};

/// Runs every dialogue from a fresh state through HcnModel::predict_turn.
Evaluation evaluate(const HcnModel& model, const std::vector<EncodedDialogue>& dialogues, const MaskRule& rule = {});

struct EpochReport {
  std::size_t epoch = 0;
  /// Mean per-dialogue loss over the epoch.
  double train_loss = 0;
  double dev_turn_accuracy = 0;
  double seconds = 0;
};

struct TrainOptions {
  std::size_t epochs = 12;
  MaskRule mask_rule;
  /// Called after each epoch; returning false stops training early.
  std::function<bool(const EpochReport&)> on_epoch;
};

struct TrainResult {
  std::vector<EpochReport> history;
  std::size_t best_epoch = 0;
  double best_dev_accuracy = 0;
};

/// Mini-batch training with Adam. Each dialogue is unrolled in full and its
/// loss is the mean cross-entropy over its turns; gradients are averaged over
/// the batch and clipped by global norm before each update. After every epoch
/// the dev turn accuracy is measured; on return the model holds the weights of
/// the best epoch (the earliest one on ties). Throws NumericError when the
/// loss or a gradient stops being finite.
TrainResult train_model(HcnModel& model, const std::vector<EncodedDialogue>& train,
                        const std::vector<EncodedDialogue>& dev, const TrainOptions& options);

/// Loss of one dialogue unrolled on a training-mode graph, used by tests.
double dialogue_loss(const HcnModel& model, const EncodedDialogue& dialogue, Rng& rng,
                     grad::GradientBuffer<float>* gradients = nullptr, const MaskRule& rule = {});

}  // namespace hcn::dm
