#include "hcn/dm/metrics.hpp"

#include <numeric>
#include <string>

#include "hcn/common/error.hpp"

namespace hcn::dm {
namespace {

bool hit(ActionId p, ActionId g) { return g != text::kUnknownAction && p == g; }

void check_lengths(std::size_t p, std::size_t g) {
  if (p != g) {
    throw UsageError(std::to_string(p) + " predictions for " + std::to_string(g) + " gold actions");
  }
}

}  // namespace

double turn_accuracy(std::span<const ActionId> predictions, std::span<const ActionId> golds) {
  check_lengths(predictions.size(), golds.size());
  if (golds.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < golds.size(); ++i) hits += hit(predictions[i], golds[i]);
  return static_cast<double>(hits) / static_cast<double>(golds.size());
}

double dialogue_accuracy(std::span<const ActionId> predictions, std::span<const ActionId> golds,
                         std::span<const std::size_t> lengths) {
  check_lengths(predictions.size(), golds.size());
  const std::size_t total = std::accumulate(lengths.begin(), lengths.end(), std::size_t{0});
  if (total != golds.size()) {
    throw UsageError("dialogue lengths cover " + std::to_string(total) + " turns, sequences have " +
                     std::to_string(golds.size()));
  }
  if (lengths.empty()) return 0.0;
  std::size_t pos = 0, correct = 0;
  for (std::size_t len : lengths) {
    bool all = true;
    for (std::size_t i = 0; i < len; ++i) all = all && hit(predictions[pos + i], golds[pos + i]);
    correct += all;
    pos += len;
  }
  return static_cast<double>(correct) / static_cast<double>(lengths.size());
}

}  // namespace hcn::dm
