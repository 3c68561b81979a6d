#pragma once

#include <filesystem>
#include <string>

#include "hcn/dm/model.hpp"
#include "hcn/embed/embedding_table.hpp"
#include "hcn/text/action_set.hpp"
#include "hcn/text/vocabulary.hpp"

namespace hcn::dm {

inline constexpr int kCheckpointVersion = 1;

struct CheckpointInfo {
  std::size_t epoch = 0;
  double best_dev_accuracy = 0;
};

/// Everything needed to run a trained policy.
///
/// On disk a checkpoint is a directory with manifest.json (format version,
/// config, model dimensions, tensor names/shapes/dtype/offsets/hashes, corpus
/// fingerprints and metrics), one little-endian float32 file per tensor under
/// tensors/, and copies of the vocabulary, templates and embedding vectors.
struct Checkpoint {
  HcnModel model;
  text::Vocabulary vocab;
  text::ActionSet actions;
  embed::EmbeddingTable embeddings;
  CheckpointInfo info;
  /// Hash of the manifest, which covers every tensor hash.
  std::string fingerprint;
};

void save_checkpoint(const std::filesystem::path& dir, const HcnModel& model, const text::Vocabulary& vocab,
                     const text::ActionSet& actions, const embed::EmbeddingTable& embeddings,
                     const CheckpointInfo& info);

/// Throws FormatError for missing, truncated or corrupted files and
/// CompatibilityError when the stored vocabulary, templates or embeddings do
/// not match the fingerprints recorded in the manifest.
Checkpoint load_checkpoint(const std::filesystem::path& dir);

/// Throws CompatibilityError unless the checkpoint was trained on this
/// vocabulary and action set.
void check_compatible(const Checkpoint& checkpoint, const text::Vocabulary& vocab, const text::ActionSet& actions);

}  // namespace hcn::dm
