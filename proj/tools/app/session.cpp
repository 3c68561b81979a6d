#include "session.hpp"

#include <algorithm>
#include <charconv>
#include <random>

#include "hcn/text/tokenize.hpp"

namespace hcn::app {

std::vector<std::string> message_tokens(std::string_view text) {
  auto tokens = text::tokenize(text);
  if (tokens.empty()) tokens.emplace_back(text::kSilenceToken);
  return tokens;
}

std::string random_session_id() {
  static std::mutex mutex;
  static std::random_device device;
  std::lock_guard lock(mutex);
  static const char* hex = "0123456789abcdef";
  std::string id;
  for (int word = 0; word < 4; ++word) {
    std::uint32_t v = device();
    for (int i = 0; i < 8; ++i, v >>= 4) id.push_back(hex[v & 0xF]);
  }
  return id;
}

Session::Session(const dm::Checkpoint& checkpoint) : checkpoint_(checkpoint), state_(checkpoint.model.initial_state()) {}

void Session::add_kb_fact(const text::KbFact& fact) { facts_.push_back(fact); }

Reply Session::post(std::string_view text, std::size_t k, const dm::MaskRule& rule) {
  const auto& model = checkpoint_.model;
  const auto tokens = message_tokens(text);
  const auto input = model.featurize(tokens, checkpoint_.embeddings, checkpoint_.vocab);
  const dm::MaskContext ctx{turn_, tokens, state_.previous_action, model.action_count()};
  const auto pred = model.predict_turn(input, state_, dm::resolve_mask(rule, ctx));
  ++turn_;

  Reply r;
  r.action = pred.action;
  r.template_text = checkpoint_.actions.template_of(pred.action);
  r.text = lexicalize(r.template_text);
  std::vector<std::size_t> order(pred.probs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const std::size_t n = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return pred.probs[a] > pred.probs[b] || (pred.probs[a] == pred.probs[b] && a < b);
                    });
  for (std::size_t i = 0; i < n; ++i) {
    const auto id = static_cast<text::ActionId>(order[i]);
    r.top_k.push_back(ScoredAction{id, checkpoint_.actions.template_of(id), pred.probs[order[i]]});
  }
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  transcript_.push_back(TranscriptEntry{std::string(text), r.action, r.template_text, r.text,
                                        std::chrono::duration_cast<std::chrono::milliseconds>(now).count()});
  return r;
}

std::string Session::lexicalize(const std::string& tmpl) {
  const auto tokens = text::split_whitespace(tmpl);
  const bool names = std::find(tokens.begin(), tokens.end(), "<name>") != tokens.end();
  auto rating = [&](const std::string& entity) {
    double best = -1;
    for (const auto& f : facts_) {
      if (f.entity != entity || f.relation != "R_rating") continue;
      double v = 0;
      if (std::from_chars(f.value.data(), f.value.data() + f.value.size(), v).ec == std::errc()) best = v;
    }
    return best;
  };
  // Offers walk the known restaurants from the best rated down; other
  // placeholders refer to the most recent offer.
  std::string current = offered_.empty() ? std::string() : offered_.back();
  if (names) {
    std::string pick;
    for (const auto& f : facts_) {
      if (std::find(offered_.begin(), offered_.end(), f.entity) != offered_.end()) continue;
      if (pick.empty() || rating(f.entity) > rating(pick)) pick = f.entity;
    }
    if (!pick.empty()) {
      offered_.push_back(pick);
      current = pick;
    }
  }
  std::vector<std::string> out;
  for (const auto& t : tokens) {
    std::string filled = t;
    if (text::is_placeholder(t) && !current.empty()) {
      if (t == "<name>") {
        filled = current;
      } else {
        for (const auto& f : facts_) {
          if (f.entity == current && text::placeholder_for_relation(f.relation) == t) filled = f.value;
        }
      }
    }
    out.push_back(std::move(filled));
  }
  return text::join(out);
}

SessionStore::SessionStore(const dm::Checkpoint& checkpoint, Clock::duration idle_timeout)
    : checkpoint_(checkpoint), timeout_(idle_timeout) {}

void SessionStore::expire_locked() {
  const auto now = now_();
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    if (now - it->second->last_active > timeout_) it = sessions_.erase(it);
    else ++it;
  }
}

std::string SessionStore::create() {
  auto entry = std::make_shared<Entry>(checkpoint_);
  std::lock_guard lock(mutex_);
  expire_locked();
  entry->last_active = now_();
  std::string id = random_session_id();
  while (sessions_.count(id)) id = random_session_id();
  sessions_.emplace(id, std::move(entry));
  return id;
}

std::shared_ptr<SessionStore::Entry> SessionStore::find(const std::string& id) {
  std::lock_guard lock(mutex_);
  expire_locked();
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) return nullptr;
  it->second->last_active = now_();
  return it->second;
}

std::size_t SessionStore::size() {
  std::lock_guard lock(mutex_);
  expire_locked();
  return sessions_.size();
}

}  // namespace hcn::app
