#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "hcn/text/delexicalize.hpp"
#include "hcn/text/dialogue.hpp"

namespace hcn::text {

/// Frozen, lexicographically sorted catalogue of response templates.
class ActionSet {
 public:
  ActionSet() = default;

  /// Sorts and deduplicates. Throws ConfigError when `templates` is empty.
  static ActionSet from_templates(std::vector<std::string> templates);

  std::size_t size() const { return templates_.size(); }
  const std::vector<std::string>& templates() const { return templates_; }
  const std::string& template_of(ActionId id) const;

  /// kUnknownAction when the template is not in the catalogue.
  ActionId id_of(std::string_view tmpl) const;

  /// One template per line, id order.
  std::string serialize() const;
  static ActionSet parse(std::string_view contents);

  std::string fingerprint() const;

 private:
  std::vector<std::string> templates_;
  std::map<std::string, ActionId, std::less<>> index_;
};

/// Collects the delexicalized system responses of the training dialogues.
ActionSet build_action_set(const std::vector<Dialogue>& training, const EntityContext* lexicon = nullptr);

/// Sets gold_action on every turn; templates outside the set get kUnknownAction.
/// Returns the number of turns that received kUnknownAction.
std::size_t assign_actions(std::vector<Dialogue>& dialogues, const ActionSet& actions,
                           const EntityContext* lexicon = nullptr);

}  // namespace hcn::text
