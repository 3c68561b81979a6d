#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "hcn/dm/checkpoint.hpp"
#include "hcn/dm/trainer.hpp"
#include "hcn/embed/skipgram.hpp"
#include "hcn/hpo/search.hpp"
#include "hcn/text/corpus.hpp"

namespace hcn::app {

struct PrepareReport {
  text::SplitStats train, dev, test;
  std::size_t templates = 0;
  std::size_t vocabulary = 0;
};

PrepareReport prepare_data(const std::filesystem::path& train, const std::filesystem::path& dev,
                           const std::filesystem::path& test, const std::filesystem::path& out);

/// Trains subword skip-gram vectors on the training split of a prepared corpus.
embed::SkipgramResult train_embeddings(const std::filesystem::path& corpus, const embed::SkipgramConfig& config,
                                       const std::filesystem::path& out, const embed::EpochCallback& on_epoch = {});

struct TrainRequest {
  dm::ModelConfig config;
  std::size_t epochs = 12;
  std::function<bool(const dm::EpochReport&)> on_epoch;
};

struct TrainedModel {
  dm::HcnModel model;
  dm::TrainResult result;
};

TrainedModel train(const TrainRequest& request, const text::PreparedCorpus& corpus,
                   const embed::EmbeddingTable& embeddings);

/// Trains and writes the best-epoch checkpoint to `out`.
dm::TrainResult train_to_checkpoint(const TrainRequest& request, const text::PreparedCorpus& corpus,
                                    const embed::EmbeddingTable& embeddings, const std::filesystem::path& out);

/// Evaluates a checkpoint on one split; throws CompatibilityError when the
/// checkpoint was trained on a different corpus.
dm::Evaluation evaluate_split(const dm::Checkpoint& checkpoint, const text::PreparedCorpus& corpus, text::Split split);

struct HpoRequest {
  hpo::SearchSpace space;
  std::size_t trials = 30;
  std::size_t epochs = 30;
  std::uint64_t seed = 1;
  bool bayesian = true;
  std::filesystem::path history;
  std::function<void(const hpo::Trial&)> on_trial;
};

/// Each trial trains on the training split and scores its best validation
/// turn accuracy.
hpo::SearchResult run_hpo(const HpoRequest& request, const text::PreparedCorpus& corpus,
                          const embed::EmbeddingTable& embeddings);

}  // namespace hcn::app
