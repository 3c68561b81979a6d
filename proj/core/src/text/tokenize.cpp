#include "hcn/text/tokenize.hpp"

#include <algorithm>
#include <cctype>

namespace hcn::text {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool strippable(char c) { return c != '\'' && std::ispunct(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_whitespace(std::string_view raw) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < raw.size()) {
    while (i < raw.size() && is_space(raw[i])) ++i;
    const std::size_t start = i;
    while (i < raw.size() && !is_space(raw[i])) ++i;
    if (i > start) out.emplace_back(raw.substr(start, i - start));
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view raw) {
  std::vector<std::string> out;
  for (std::string word : split_whitespace(raw)) {
    if (word == kSilenceMarker || word == kSilenceToken) {
      out.emplace_back(kSilenceToken);
      continue;
    }
    std::transform(word.begin(), word.end(), word.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    std::size_t b = 0, e = word.size();
    while (b < e && strippable(word[b])) ++b;
    while (e > b && strippable(word[e - 1])) --e;
    if (e > b) out.push_back(word.substr(b, e - b));
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace hcn::text
