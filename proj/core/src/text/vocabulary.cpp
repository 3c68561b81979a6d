#include "hcn/text/vocabulary.hpp"

#include <algorithm>

#include "hcn/common/error.hpp"
#include "hcn/common/hash.hpp"
#include "hcn/text/tokenize.hpp"

namespace hcn::text {

Vocabulary Vocabulary::from_words(std::vector<std::string> words) {
  std::erase_if(words, [](const std::string& w) { return w.empty() || w == kUnknownToken || w == kSilenceToken; });
  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());
  Vocabulary v;
  v.tokens_ = std::move(words);
  v.unknown_ = v.tokens_.size();
  v.tokens_.emplace_back(kUnknownToken);
  v.silence_ = v.tokens_.size();
  v.tokens_.emplace_back(kSilenceToken);
  for (std::size_t i = 0; i < v.tokens_.size(); ++i) v.index_.emplace(v.tokens_[i], i);
  return v;
}

Vocabulary Vocabulary::build(const std::vector<Dialogue>& training) {
  std::vector<std::string> words;
  for (const Dialogue& d : training) {
    for (const Turn& t : d.turns) words.insert(words.end(), t.user_tokens.begin(), t.user_tokens.end());
  }
  return from_words(std::move(words));
}

std::size_t Vocabulary::index_of(std::string_view token) const {
  const auto it = index_.find(token);
  return it == index_.end() ? unknown_ : it->second;
}

std::string Vocabulary::serialize() const {
  std::string out;
  for (const auto& t : tokens_) out += t + '\n';
  return out;
}

Vocabulary Vocabulary::parse(std::string_view contents) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < contents.size()) {
    std::size_t end = contents.find('\n', pos);
    if (end == std::string_view::npos) end = contents.size();
    lines.emplace_back(contents.substr(pos, end - pos));
    pos = end + 1;
  }
  Vocabulary v = from_words(lines);
  if (v.tokens_ != lines) throw FormatError("vocabulary file is not in canonical order");
  return v;
}

std::string Vocabulary::fingerprint() const { return hcn::fingerprint(serialize()); }

std::vector<float> bow_vector(std::span<const std::string> tokens, const Vocabulary& vocab) {
  std::vector<float> out(vocab.size(), 0.0f);
  for (const auto& t : tokens) out[vocab.index_of(t)] = 1.0f;
  return out;
}

}  // namespace hcn::text
