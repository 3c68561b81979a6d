#include "hcn/text/corpus.hpp"

#include "hcn/common/error.hpp"
#include "hcn/common/io.hpp"

namespace hcn::text {

Split parse_split_name(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "dev") return Split::dev;
  if (name == "test") return Split::test;
  throw UsageError("unknown split '" + std::string(name) + "' (expected train, dev or test)");
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::dev: return "dev";
    case Split::test: return "test";
  }
  return "train";
}

PreparedCorpus PreparedCorpus::prepare(std::vector<Dialogue> train, std::vector<Dialogue> dev,
                                       std::vector<Dialogue> test) {
  PreparedCorpus c;
  c.train_ = std::move(train);
  c.dev_ = std::move(dev);
  c.test_ = std::move(test);
  c.lexicon_ = EntityContext::lexicon(c.train_);
  c.actions_ = build_action_set(c.train_, &c.lexicon_);
  c.vocab_ = Vocabulary::build(c.train_);
  c.finalize();
  return c;
}

void PreparedCorpus::finalize() {
  unknown_[0] = assign_actions(train_, actions_, &lexicon_);
  unknown_[1] = assign_actions(dev_, actions_, &lexicon_);
  unknown_[2] = assign_actions(test_, actions_, &lexicon_);
}

PreparedCorpus PreparedCorpus::load(const std::filesystem::path& dir) {
  PreparedCorpus c;
  c.train_ = parse_split(dir / "train.txt");
  c.dev_ = parse_split(dir / "dev.txt");
  c.test_ = parse_split(dir / "test.txt");
  c.lexicon_ = EntityContext::lexicon(c.train_);
  c.actions_ = ActionSet::parse(read_file(dir / "templates.txt"));
  c.vocab_ = Vocabulary::parse(read_file(dir / "vocab.txt"));
  if (c.vocab_.fingerprint() != Vocabulary::build(c.train_).fingerprint()) {
    throw CompatibilityError("vocab.txt does not match the training split in " + dir.string());
  }
  c.finalize();
  if (c.unknown_[0] != 0) {
    throw CompatibilityError("templates.txt does not cover the training split in " + dir.string());
  }
  return c;
}

void PreparedCorpus::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  write_file(dir / "templates.txt", actions_.serialize());
  write_file(dir / "vocab.txt", vocab_.serialize());
  write_file(dir / "train.txt", serialize_dialogues(train_));
  write_file(dir / "dev.txt", serialize_dialogues(dev_));
  write_file(dir / "test.txt", serialize_dialogues(test_));
}

const std::vector<Dialogue>& PreparedCorpus::split(Split s) const {
  switch (s) {
    case Split::train: return train_;
    case Split::dev: return dev_;
    case Split::test: return test_;
  }
  return train_;
}

SplitStats PreparedCorpus::stats(Split s) const {
  SplitStats st;
  const auto& ds = split(s);
  st.dialogues = ds.size();
  for (const auto& d : ds) st.turns += d.turns.size();
  st.unknown_actions = unknown_[static_cast<int>(s)];
  return st;
}

}  // namespace hcn::text
