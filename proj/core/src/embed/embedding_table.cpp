#include "hcn/embed/embedding_table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>

#include "hcn/common/error.hpp"
#include "hcn/common/hash.hpp"
#include "hcn/common/io.hpp"
#include "hcn/common/log.hpp"
#include "hcn/text/tokenize.hpp"

namespace hcn::embed {

std::vector<std::string> char_ngrams(std::string_view word, std::size_t min_n, std::size_t max_n) {
  const std::string wrapped = "<" + std::string(word) + ">";
  // Byte offsets where code points start, plus the end.
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < wrapped.size(); ++i) {
    if ((static_cast<unsigned char>(wrapped[i]) & 0xC0) != 0x80) starts.push_back(i);
  }
  starts.push_back(wrapped.size());
  const std::size_t chars = starts.size() - 1;
  std::vector<std::string> out;
  for (std::size_t i = 0; i < chars; ++i) {
    for (std::size_t n = min_n; n <= max_n && i + n <= chars; ++n) {
      std::string gram = wrapped.substr(starts[i], starts[i + n] - starts[i]);
      if (std::find(out.begin(), out.end(), gram) == out.end()) out.push_back(std::move(gram));
    }
  }
  return out;
}

std::span<const float> EmbeddingTable::word_vector(std::string_view token) const {
  const auto it = word_index_.find(token);
  if (it == word_index_.end()) return {};
  return {word_data_.data() + it->second * dim_, dim_};
}

std::span<const float> EmbeddingTable::ngram_vector(std::string_view ngram) const {
  const auto it = ngram_index_.find(ngram);
  if (it == ngram_index_.end()) return {};
  return {ngram_data_.data() + it->second * dim_, dim_};
}

void EmbeddingTable::check_insert(std::string_view token, std::span<const float> values) const {
  if (frozen_) throw UsageError("embedding table is frozen");
  if (token.empty()) throw FormatError("empty embedding token");
  if (values.size() != dim_) {
    throw DimensionError("vector for '" + std::string(token) + "' has " + std::to_string(values.size()) +
                         " values, table dim is " + std::to_string(dim_));
  }
}

bool EmbeddingTable::add_word(std::string token, std::span<const float> values) {
  check_insert(token, values);
  if (contains(token)) return false;
  word_index_.emplace(token, words_.size());
  words_.push_back(std::move(token));
  word_data_.insert(word_data_.end(), values.begin(), values.end());
  return true;
}

bool EmbeddingTable::add_ngram(std::string ngram, std::span<const float> values) {
  check_insert(ngram, values);
  if (ngram_index_.count(ngram)) return false;
  ngram_index_.emplace(ngram, ngrams_.size());
  ngrams_.push_back(std::move(ngram));
  ngram_data_.insert(ngram_data_.end(), values.begin(), values.end());
  return true;
}

void EmbeddingTable::lookup(std::string_view token, std::span<float> out) const {
  if (out.size() != dim_) throw DimensionError("lookup buffer has wrong size");
  if (auto v = word_vector(token); !v.empty()) {
    std::copy(v.begin(), v.end(), out.begin());
    return;
  }
  std::fill(out.begin(), out.end(), 0.0f);
  if (ngrams_.empty()) return;
  std::size_t found = 0;
  for (const auto& gram : char_ngrams(token)) {
    const auto v = ngram_vector(gram);
    if (v.empty()) continue;
    for (std::size_t i = 0; i < dim_; ++i) out[i] += v[i];
    ++found;
  }
  if (found > 1) {
    const float inv = 1.0f / static_cast<float>(found);
    for (auto& x : out) x *= inv;
  }
}

std::vector<float> EmbeddingTable::lookup(std::string_view token) const {
  std::vector<float> out(dim_);
  lookup(token, out);
  return out;
}

std::string EmbeddingTable::checksum() const {
  Fnv1a h;
  h.update(std::to_string(dim_)).update("\n");
  auto add = [&](const std::vector<std::string>& names, const std::vector<float>& data) {
    for (const auto& n : names) h.update(n).update("\n");
    h.update(std::string_view(reinterpret_cast<const char*>(data.data()), data.size() * sizeof(float)));
  };
  add(words_, word_data_);
  h.update("\x1f");
  add(ngrams_, ngram_data_);
  return h.hex();
}

std::filesystem::path subword_path(const std::filesystem::path& vectors) {
  auto p = vectors;
  p += ".subword";
  return p;
}

namespace {

FormatError row_error(const std::string& where, std::size_t line, const std::string& what) {
  return FormatError(where + ": line " + std::to_string(line) + ": " + what);
}

bool parse_size(std::string_view s, std::size_t& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

void format_row(std::string& out, std::string_view token, std::span<const float> values) {
  out += token;
  char buf[32];
  for (float v : values) {
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out += ' ';
    out.append(buf, ptr);
  }
  out += '\n';
}

std::string format_table(const std::vector<std::string>& names, std::size_t dim,
                         const std::function<std::span<const float>(std::string_view)>& get) {
  std::string out = std::to_string(names.size()) + " " + std::to_string(dim) + "\n";
  for (const auto& n : names) format_row(out, n, get(n));
  return out;
}

}  // namespace

EmbeddingTable parse_text_vectors(std::string_view contents, std::string_view source) {
  const std::string where(source);
  std::size_t pos = 0, line_no = 0;
  std::size_t dim = 0, declared = 0;
  bool have_header = false;
  EmbeddingTable table;
  std::vector<float> row;
  while (pos < contents.size()) {
    std::size_t end = contents.find('\n', pos);
    if (end == std::string_view::npos) end = contents.size();
    std::string_view line = contents.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (text::trim(line).empty()) continue;
    const auto fields = text::split_whitespace(line);
    if (line_no == 1 && fields.size() == 2) {
      std::size_t count = 0, d = 0;
      if (parse_size(fields[0], count) && parse_size(fields[1], d)) {
        if (d == 0) throw row_error(where, line_no, "header declares dimension 0");
        have_header = true;
        declared = count;
        dim = d;
        table = EmbeddingTable(dim);
        continue;
      }
    }
    if (dim == 0) {
      if (fields.size() < 2) throw row_error(where, line_no, "row has no values");
      dim = fields.size() - 1;
      table = EmbeddingTable(dim);
    }
    if (fields.size() != dim + 1) {
      throw row_error(where, line_no,
                      "expected " + std::to_string(dim) + " values, found " + std::to_string(fields.size() - 1));
    }
    row.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      const auto& f = fields[i + 1];
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), row[i]);
      if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(row[i])) {
        throw row_error(where, line_no, "bad value '" + f + "'");
      }
    }
    if (!table.add_word(fields[0], row)) {
      log::warn(where + ": line " + std::to_string(line_no) + ": duplicate token '" + fields[0] +
                "', keeping the first vector");
    }
  }
  if (dim == 0) throw FormatError(where + ": no vectors");
  if (have_header && declared != table.size()) {
    log::warn(where + ": header declares " + std::to_string(declared) + " vectors, found " +
              std::to_string(table.size()));
  }
  return table;
}

EmbeddingTable load_text_vectors(const std::filesystem::path& path) {
  EmbeddingTable table = parse_text_vectors(read_file(path), path.string());
  const auto sub = subword_path(path);
  if (std::filesystem::exists(sub)) {
    const EmbeddingTable grams = parse_text_vectors(read_file(sub), sub.string());
    if (grams.dim() != table.dim()) {
      throw FormatError(sub.string() + ": dimension " + std::to_string(grams.dim()) + " differs from " +
                        std::to_string(table.dim()));
    }
    for (const auto& g : grams.words()) table.add_ngram(g, grams.word_vector(g));
  }
  table.freeze();
  return table;
}

void write_text_vectors(const EmbeddingTable& table, const std::filesystem::path& path) {
  write_file(path, format_table(table.words(), table.dim(),
                                [&](std::string_view w) { return table.word_vector(w); }));
  const auto sub = subword_path(path);
  if (table.has_subwords()) {
    write_file(sub, format_table(table.ngrams(), table.dim(),
                                 [&](std::string_view g) { return table.ngram_vector(g); }));
  } else {
    std::filesystem::remove(sub);
  }
}

}  // namespace hcn::embed
