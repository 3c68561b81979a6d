#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hcn/text/dialogue.hpp"

namespace hcn::text {

/// Typed placeholder for a KB relation: R_phone → <phone>, R_post_code → <post_code>.
std::string placeholder_for_relation(std::string_view relation);

bool is_placeholder(std::string_view token);

/// Known entity values and their placeholder types. One instance tracks the
/// facts seen so far in a dialogue; another, built over the training split,
/// acts as a corpus lexicon of attribute values (cuisine, location, price).
class EntityContext {
 public:
  /// Restaurant names become <name>; the value takes the relation's type.
  void observe(const KbFact& fact);

  /// Records the slot values of an `api_call cuisine location price` response.
  void observe_system(std::string_view system_utterance);

  /// Adds only categorical attribute values (cuisine, location, price).
  void observe_attributes(const KbFact& fact);

  std::optional<std::string> type_of(std::string_view token) const;

  bool empty() const { return types_.empty(); }
  void clear() { types_.clear(); }

  /// Lexicon of attribute values over a whole split.
  static EntityContext lexicon(const std::vector<Dialogue>& dialogues);

 private:
  void set(std::string_view token, std::string placeholder);
  std::map<std::string, std::string, std::less<>> types_;
};

/// Replaces entity mentions by typed placeholders. Recognition order: the
/// dialogue's own KB context, the corpus lexicon, then lexical shape (tokens
/// ending in _phone/_address/_post_code, underscore-joined restaurant ids).
/// Idempotent on its own output.
std::string delexicalize(std::string_view system_utterance, const EntityContext& context,
                         const EntityContext* lexicon = nullptr);

/// Delexicalized templates of every turn of a dialogue, in turn order, with the
/// KB context accumulated line by line from dialogue start.
std::vector<std::string> dialogue_templates(const Dialogue& dialogue, const EntityContext* lexicon = nullptr);

}  // namespace hcn::text
