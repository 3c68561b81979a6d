#pragma once

#include <span>
#include <vector>

#include "hcn/text/dialogue.hpp"

namespace hcn::dm {

using text::ActionId;

/// Fraction of turns whose prediction equals the gold action. Gold
/// kUnknownAction never matches. Zero turns score 0.
double turn_accuracy(std::span<const ActionId> predictions, std::span<const ActionId> golds);

/// Fraction of dialogues with every turn correct. `lengths` gives the number
/// of turns of each dialogue, in order, and must sum to the sequence length.
double dialogue_accuracy(std::span<const ActionId> predictions, std::span<const ActionId> golds,
                         std::span<const std::size_t> lengths);

}  // namespace hcn::dm
