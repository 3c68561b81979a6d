#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace hcn::text {

using ActionId = std::int32_t;

/// Gold label for a system response whose template never occurs in training.
/// Predictions can never match it.
inline constexpr ActionId kUnknownAction = -1;

/// Knowledge-base result line, e.g. `prezzo R_phone prezzo_phone`.
struct KbFact {
  std::string entity;
  std::string relation;
  std::string value;
  /// Number of turns that precede this fact in the source dialogue.
  std::size_t position = 0;

  friend bool operator==(const KbFact&, const KbFact&) = default;
};

struct Turn {
  std::vector<std::string> user_tokens;
  ActionId gold_action = kUnknownAction;
  std::string raw_user;
  std::string raw_system;

  friend bool operator==(const Turn&, const Turn&) = default;
};

struct Dialogue {
  std::vector<Turn> turns;
  std::vector<KbFact> kb_facts;

  friend bool operator==(const Dialogue&, const Dialogue&) = default;
};

/// Parses bAbI dialog text: numbered lines, `user<TAB>system` for turns, tab-free
/// lines for KB results, a blank line (or numbering restart) between dialogues.
std::vector<Dialogue> parse_dialogues(std::string_view contents);

std::vector<Dialogue> parse_split(const std::filesystem::path& path);

/// Inverse of parse_dialogues up to whitespace normalisation of KB lines.
std::string serialize_dialogues(const std::vector<Dialogue>& dialogues);

/// Visits the lines of a dialogue in source order, calling on_fact for each
/// KB fact and on_turn for each turn.
template <typename OnFact, typename OnTurn>
void for_each_line(const Dialogue& d, OnFact&& on_fact, OnTurn&& on_turn) {
  std::size_t f = 0;
  for (std::size_t t = 0; t < d.turns.size(); ++t) {
    while (f < d.kb_facts.size() && d.kb_facts[f].position <= t) on_fact(d.kb_facts[f++]);
    on_turn(d.turns[t], t);
  }
  while (f < d.kb_facts.size()) on_fact(d.kb_facts[f++]);
}

}  // namespace hcn::text
