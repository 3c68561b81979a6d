#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace hcn::text {

/// Marker the corpus uses for a user turn with no speech.
inline constexpr std::string_view kSilenceMarker = "<SILENCE>";
inline constexpr std::string_view kSilenceToken = "<silence>";
inline constexpr std::string_view kUnknownToken = "<unk>";

/// Shared by corpus preparation, embedding training and serving: lowercases,
/// splits on whitespace and strips surrounding punctuation other than
/// apostrophes. The silence marker becomes kSilenceToken.
std::vector<std::string> tokenize(std::string_view raw);

/// Whitespace split without any normalisation.
std::vector<std::string> split_whitespace(std::string_view raw);

std::string join(const std::vector<std::string>& parts, std::string_view sep = " ");

std::string_view trim(std::string_view s);

}  // namespace hcn::text
