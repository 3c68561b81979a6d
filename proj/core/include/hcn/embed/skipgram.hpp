#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hcn/embed/embedding_table.hpp"
#include "hcn/text/dialogue.hpp"

namespace hcn::embed {

struct SkipgramConfig {
  std::size_t dim = 300;
  std::size_t epochs = 100;
  /// Maximum context distance; each centre word draws its window from [1, window].
  std::size_t window = 5;
  std::size_t negatives = 5;
  /// Initial learning rate, decayed linearly to zero over training.
  double lr = 0.05;
  std::size_t min_ngram = kMinNgram;
  std::size_t max_ngram = kMaxNgram;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SkipgramResult {
  EmbeddingTable table;
  /// Mean negative-sampling loss per (centre, context) pair, one entry per epoch.
  std::vector<double> epoch_loss;
};

using EpochCallback = std::function<void(std::size_t epoch, double loss)>;

/// Skip-gram with negative sampling over words represented as the average of
/// their own vector and their character n-gram vectors. Single-threaded and
/// deterministic given the seed. The returned table is frozen; its word
/// vectors are the composed representations and it carries the n-gram vectors
/// so that unseen words can be looked up.
SkipgramResult train_subword_skipgram(const std::vector<std::vector<std::string>>& sentences,
                                      const SkipgramConfig& config, const EpochCallback& on_epoch = {});

/// User and system utterances of the dialogues, tokenized with the shared tokenizer.
std::vector<std::vector<std::string>> embedding_corpus(const std::vector<text::Dialogue>& dialogues);

}  // namespace hcn::embed
