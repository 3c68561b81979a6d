#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hcn::embed {

inline constexpr std::size_t kMinNgram = 3;
inline constexpr std::size_t kMaxNgram = 6;

/// Distinct character n-grams of `<word>` for n in [min_n, max_n], in order of
/// first occurrence. Lengths count UTF-8 code points, not bytes.
std::vector<std::string> char_ngrams(std::string_view word, std::size_t min_n = kMinNgram,
                                     std::size_t max_n = kMaxNgram);

/// Fixed word vectors with optional subword n-gram vectors. Once frozen the
/// table rejects further additions.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim = 0) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return words_.size(); }
  std::size_t ngram_count() const { return ngrams_.size(); }
  bool has_subwords() const { return !ngrams_.empty(); }
  bool frozen() const { return frozen_; }

  const std::vector<std::string>& words() const { return words_; }
  const std::vector<std::string>& ngrams() const { return ngrams_; }
  bool contains(std::string_view token) const { return word_index_.find(token) != word_index_.end(); }

  /// Stored vector of a known word or n-gram; empty span when absent.
  std::span<const float> word_vector(std::string_view token) const;
  std::span<const float> ngram_vector(std::string_view ngram) const;

  /// Returns false (and keeps the existing vector) when `token` is already present.
  bool add_word(std::string token, std::span<const float> values);
  bool add_ngram(std::string ngram, std::span<const float> values);
  void freeze() { frozen_ = true; }

  /// Known token → stored vector. Unknown token → mean of the vectors of its
  /// n-grams present in the table, or zeros when none are.
  void lookup(std::string_view token, std::span<float> out) const;
  std::vector<float> lookup(std::string_view token) const;

  /// Content hash over dimension, tokens and raw vector bytes.
  std::string checksum() const;

 private:
  void check_insert(std::string_view token, std::span<const float> values) const;

  std::size_t dim_;
  bool frozen_ = false;
  std::vector<std::string> words_;
  std::map<std::string, std::size_t, std::less<>> word_index_;
  std::vector<float> word_data_;
  std::vector<std::string> ngrams_;
  std::map<std::string, std::size_t, std::less<>> ngram_index_;
  std::vector<float> ngram_data_;
};

/// Path of the n-gram vector file that accompanies a word vector file.
std::filesystem::path subword_path(const std::filesystem::path& vectors);

/// Reads "token v1 … vd" lines, optionally preceded by a "count dim" header.
/// Duplicate tokens keep the first vector and log a warning. A sibling
/// `<path>.subword` file in the same format supplies n-gram vectors. The
/// returned table is frozen.
EmbeddingTable load_text_vectors(const std::filesystem::path& path);

/// Writes word vectors with a header, and the n-gram vectors (if any) to the
/// sibling subword file. Values use shortest round-trip formatting, so
/// loading the output reproduces the table bit for bit.
void write_text_vectors(const EmbeddingTable& table, const std::filesystem::path& path);

/// Parses one vector file's contents; `source` names it in error messages.
EmbeddingTable parse_text_vectors(std::string_view contents, std::string_view source = "<memory>");

}  // namespace hcn::embed
