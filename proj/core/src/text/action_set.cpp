#include "hcn/text/action_set.hpp"

#include <algorithm>

#include "hcn/common/error.hpp"
#include "hcn/common/hash.hpp"

namespace hcn::text {

ActionSet ActionSet::from_templates(std::vector<std::string> templates) {
  if (templates.empty()) throw ConfigError("cannot build an action set from an empty corpus");
  std::sort(templates.begin(), templates.end());
  templates.erase(std::unique(templates.begin(), templates.end()), templates.end());
  ActionSet set;
  set.templates_ = std::move(templates);
  for (std::size_t i = 0; i < set.templates_.size(); ++i) {
    set.index_.emplace(set.templates_[i], static_cast<ActionId>(i));
  }
  return set;
}

const std::string& ActionSet::template_of(ActionId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= templates_.size()) {
    throw IndexError("action id " + std::to_string(id) + " out of range");
  }
  return templates_[static_cast<std::size_t>(id)];
}

ActionId ActionSet::id_of(std::string_view tmpl) const {
  const auto it = index_.find(tmpl);
  return it == index_.end() ? kUnknownAction : it->second;
}

std::string ActionSet::serialize() const {
  std::string out;
  for (const auto& t : templates_) out += t + '\n';
  return out;
}

ActionSet ActionSet::parse(std::string_view contents) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < contents.size()) {
    std::size_t end = contents.find('\n', pos);
    if (end == std::string_view::npos) end = contents.size();
    lines.emplace_back(contents.substr(pos, end - pos));
    pos = end + 1;
  }
  if (!std::is_sorted(lines.begin(), lines.end()) ||
      std::adjacent_find(lines.begin(), lines.end()) != lines.end()) {
    throw FormatError("templates file is not sorted and unique");
  }
  return from_templates(std::move(lines));
}

std::string ActionSet::fingerprint() const { return hcn::fingerprint(serialize()); }

ActionSet build_action_set(const std::vector<Dialogue>& training, const EntityContext* lexicon) {
  std::vector<std::string> templates;
  for (const Dialogue& d : training) {
    for (auto& t : dialogue_templates(d, lexicon)) templates.push_back(std::move(t));
  }
  return ActionSet::from_templates(std::move(templates));
}

std::size_t assign_actions(std::vector<Dialogue>& dialogues, const ActionSet& actions, const EntityContext* lexicon) {
  std::size_t unknown = 0;
  for (Dialogue& d : dialogues) {
    const auto templates = dialogue_templates(d, lexicon);
    for (std::size_t t = 0; t < d.turns.size(); ++t) {
      d.turns[t].gold_action = actions.id_of(templates[t]);
      if (d.turns[t].gold_action == kUnknownAction) ++unknown;
    }
  }
  return unknown;
}

}  // namespace hcn::text
