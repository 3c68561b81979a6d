#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hcn/text/action_set.hpp"
#include "hcn/text/delexicalize.hpp"
#include "hcn/text/dialogue.hpp"
#include "hcn/text/vocabulary.hpp"

namespace hcn::text {

enum class Split { train, dev, test };

Split parse_split_name(std::string_view name);
std::string_view to_string(Split split);

struct SplitStats {
  std::size_t dialogues = 0;
  std::size_t turns = 0;
  std::size_t unknown_actions = 0;
};

/// Parsed splits with gold actions assigned, plus the vocabulary and action
/// catalogue derived from the training split.
///
/// On disk a prepared corpus is a directory holding templates.txt (one template
/// per line, id order), vocab.txt (one token per line) and train.txt, dev.txt,
/// test.txt re-serialized in bAbI dialog format. Every file is a deterministic
/// function of the input files.
class PreparedCorpus {
 public:
  static PreparedCorpus prepare(std::vector<Dialogue> train, std::vector<Dialogue> dev, std::vector<Dialogue> test);
  static PreparedCorpus load(const std::filesystem::path& dir);
  void write(const std::filesystem::path& dir) const;

  const std::vector<Dialogue>& split(Split s) const;
  const std::vector<Dialogue>& train() const { return train_; }
  const std::vector<Dialogue>& dev() const { return dev_; }
  const std::vector<Dialogue>& test() const { return test_; }
  const ActionSet& actions() const { return actions_; }
  const Vocabulary& vocab() const { return vocab_; }
  const EntityContext& lexicon() const { return lexicon_; }

  SplitStats stats(Split s) const;

 private:
  void finalize();

  std::vector<Dialogue> train_, dev_, test_;
  ActionSet actions_;
  Vocabulary vocab_;
  EntityContext lexicon_;
  std::size_t unknown_[3] = {0, 0, 0};
};

}  // namespace hcn::text
