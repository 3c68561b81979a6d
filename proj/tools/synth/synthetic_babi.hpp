#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace hcn::synth {

/// Restaurant-search dialogues in the bAbI dialog task 6 text format: a
/// greeting, slot elicitation for food/area/price, an api_call followed by KB
/// result lines, offers, attribute requests and a closing. User turns carry
/// speech-recognition style noise so the task is learnable but not trivial.
struct SyntheticOptions {
  std::size_t train = 200;
  std::size_t dev = 50;
  std::size_t test = 50;
  std::uint64_t seed = 7;
  /// Probability that a user utterance is garbled or padded with filler words.
  double noise = 0.15;
};

/// Text of `count` dialogues. Each split draws from its own RNG stream.
std::string generate_split(std::size_t count, std::uint64_t seed, double noise = 0.15);

struct SyntheticFiles {
  std::filesystem::path train, dev, test;
};

/// Writes dialog-babi-task6-dstc2-{trn,dev,tst}.txt under `dir`.
SyntheticFiles write_synthetic_babi(const std::filesystem::path& dir, const SyntheticOptions& options);

}  // namespace hcn::synth
