#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace hcn {

/// 64-bit FNV-1a, used for content fingerprints of vocabularies, action sets
/// and checkpoint manifests.
class Fnv1a {
 public:
  Fnv1a& update(std::string_view bytes) {
    for (unsigned char ch : bytes) {
      state_ ^= ch;
      state_ *= 0x100000001b3ULL;
    }
    return *this;
  }

  std::uint64_t digest() const { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string fingerprint(std::string_view bytes);

}  // namespace hcn
