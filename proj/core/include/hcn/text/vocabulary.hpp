#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hcn/text/dialogue.hpp"

namespace hcn::text {

/// User-utterance vocabulary of the training split: sorted words followed by
/// the reserved unknown and silence tokens.
class Vocabulary {
 public:
  Vocabulary() = default;

  /// Reserved tokens are appended even when absent from `words`.
  static Vocabulary from_words(std::vector<std::string> words);
  static Vocabulary build(const std::vector<Dialogue>& training);

  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  /// Index of `token`, or of the unknown sentinel.
  std::size_t index_of(std::string_view token) const;
  bool contains(std::string_view token) const { return index_.find(token) != index_.end(); }
  std::size_t unknown_index() const { return unknown_; }
  std::size_t silence_index() const { return silence_; }

  std::string serialize() const;
  static Vocabulary parse(std::string_view contents);
  std::string fingerprint() const;

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::size_t unknown_ = 0;
  std::size_t silence_ = 0;
};

/// Binary presence vector over the vocabulary; unknown tokens set only the
/// unknown sentinel.
std::vector<float> bow_vector(std::span<const std::string> tokens, const Vocabulary& vocab);

}  // namespace hcn::text
