#include "hcn/text/delexicalize.hpp"

#include <array>
#include <cctype>

#include "hcn/text/tokenize.hpp"

namespace hcn::text {
namespace {

constexpr std::string_view kApiCall = "api_call";

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() > suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && s.substr(0, prefix.size()) == prefix;
}

bool is_categorical(std::string_view relation) {
  return relation == "R_cuisine" || relation == "R_location" || relation == "R_price";
}

std::optional<std::string> lexical_type(std::string_view token) {
  if (ends_with(token, "_post_code")) return "<post_code>";
  if (ends_with(token, "_phone")) return "<phone>";
  if (ends_with(token, "_address")) return "<address>";
  // Restaurant ids are lowercase words joined by underscores. Slot markers
  // (R_cuisine) and the api_call keyword share the underscore but not the shape.
  if (token.find('_') != std::string_view::npos && token != kApiCall && !starts_with(token, "R_") &&
      std::isalnum(static_cast<unsigned char>(token.front())) &&
      std::isalnum(static_cast<unsigned char>(token.back()))) {
    return "<name>";
  }
  return std::nullopt;
}

}  // namespace

std::string placeholder_for_relation(std::string_view relation) {
  std::string_view name = relation;
  if (starts_with(name, "R_")) name.remove_prefix(2);
  return "<" + std::string(name) + ">";
}

bool is_placeholder(std::string_view token) {
  return token.size() > 2 && token.front() == '<' && token.back() == '>';
}

void EntityContext::set(std::string_view token, std::string placeholder) {
  if (token.empty() || is_placeholder(token)) return;
  types_.insert_or_assign(std::string(token), std::move(placeholder));
}

void EntityContext::observe(const KbFact& fact) {
  set(fact.entity, "<name>");
  set(fact.value, placeholder_for_relation(fact.relation));
}

void EntityContext::observe_attributes(const KbFact& fact) {
  if (is_categorical(fact.relation)) set(fact.value, placeholder_for_relation(fact.relation));
}

void EntityContext::observe_system(std::string_view system_utterance) {
  const auto tokens = split_whitespace(system_utterance);
  if (tokens.size() != 4 || tokens[0] != kApiCall) return;
  static constexpr std::array<std::string_view, 3> slots = {"R_cuisine", "R_location", "R_price"};
  for (std::size_t i = 0; i < slots.size(); ++i) {
    // A slot marker in place of a value means "any"; it is not an entity.
    if (!starts_with(tokens[i + 1], "R_")) set(tokens[i + 1], placeholder_for_relation(slots[i]));
  }
}

std::optional<std::string> EntityContext::type_of(std::string_view token) const {
  const auto it = types_.find(token);
  if (it == types_.end()) return std::nullopt;
  return it->second;
}

EntityContext EntityContext::lexicon(const std::vector<Dialogue>& dialogues) {
  EntityContext lex;
  for (const Dialogue& d : dialogues) {
    for (const KbFact& f : d.kb_facts) lex.observe_attributes(f);
    for (const Turn& t : d.turns) {
      EntityContext call;
      call.observe_system(t.raw_system);
      for (auto& [value, type] : call.types_) lex.set(value, type);
    }
  }
  return lex;
}

std::string delexicalize(std::string_view system_utterance, const EntityContext& context,
                         const EntityContext* lexicon) {
  auto tokens = split_whitespace(system_utterance);
  const bool api_call = !tokens.empty() && tokens[0] == kApiCall;
  if (api_call && tokens.size() == 4) {
    static constexpr std::array<std::string_view, 3> slots = {"<cuisine>", "<location>", "<price>"};
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (!starts_with(tokens[i + 1], "R_") && !is_placeholder(tokens[i + 1])) tokens[i + 1] = slots[i];
    }
    return join(tokens);
  }
  for (std::string& tok : tokens) {
    if (is_placeholder(tok)) continue;
    if (auto t = context.type_of(tok)) {
      tok = *t;
    } else if (auto l = lexicon ? lexicon->type_of(tok) : std::nullopt) {
      tok = *l;
    } else if (auto s = lexical_type(tok)) {
      tok = *s;
    }
  }
  return join(tokens);
}

std::vector<std::string> dialogue_templates(const Dialogue& dialogue, const EntityContext* lexicon) {
  std::vector<std::string> out;
  out.reserve(dialogue.turns.size());
  EntityContext context;
  for_each_line(
      dialogue, [&](const KbFact& f) { context.observe(f); },
      [&](const Turn& t, std::size_t) {
        out.push_back(delexicalize(t.raw_system, context, lexicon));
        context.observe_system(t.raw_system);
      });
  return out;
}

}  // namespace hcn::text
