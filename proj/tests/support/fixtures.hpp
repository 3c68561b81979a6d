#pragma once

#include <filesystem>
#include <string>

#include "hcn/dm/config.hpp"
#include "hcn/embed/embedding_table.hpp"
#include "hcn/text/corpus.hpp"

namespace hcn::testing {

/// Small synthetic corpus with locally trained 16-dimensional embeddings,
/// built once per process.
struct SmallWorld {
  text::PreparedCorpus corpus;
  embed::EmbeddingTable table;
};

const SmallWorld& small_world();

/// Reduced sizes so unit tests train in seconds.
dm::ModelConfig tiny_config(dm::Featurizer featurizer, std::uint64_t seed = 1);

/// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

}  // namespace hcn::testing
