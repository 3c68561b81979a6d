#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "hcn/dm/checkpoint.hpp"
#include "hcn/text/delexicalize.hpp"

namespace hcn::app {

using Clock = std::chrono::steady_clock;

struct ScoredAction {
  text::ActionId action = text::kUnknownAction;
  std::string template_text;
  float p = 0;
};

struct Reply {
  text::ActionId action = text::kUnknownAction;
  std::string template_text;
  /// Template with placeholders filled where the session knows a value.
  std::string text;
  std::vector<ScoredAction> top_k;
};

struct TranscriptEntry {
  std::string user;
  text::ActionId action = text::kUnknownAction;
  std::string template_text;
  std::string reply;
  std::int64_t unix_ms = 0;
};

/// Tokens a served message is encoded from. Empty input is a silence turn.
std::vector<std::string> message_tokens(std::string_view text);

/// One conversation against a shared, immutable checkpoint. Not thread-safe
/// on its own; the store serialises access per session.
class Session {
 public:
  explicit Session(const dm::Checkpoint& checkpoint);

  Reply post(std::string_view text, std::size_t k = 5, const dm::MaskRule& rule = {});
  /// KB result lines (`entity relation value`) used to fill placeholders.
  void add_kb_fact(const text::KbFact& fact);

  const dm::DialogueState& state() const { return state_; }
  const std::vector<TranscriptEntry>& transcript() const { return transcript_; }

 private:
  std::string lexicalize(const std::string& tmpl);

  const dm::Checkpoint& checkpoint_;
  dm::DialogueState state_;
  std::size_t turn_ = 0;
  std::vector<TranscriptEntry> transcript_;
  std::vector<text::KbFact> facts_;
  std::vector<std::string> offered_;
};

/// Sessions keyed by 128-bit random hex ids. Sessions idle for longer than
/// the timeout are dropped on the next store access.
class SessionStore {
 public:
  explicit SessionStore(const dm::Checkpoint& checkpoint, Clock::duration idle_timeout = std::chrono::minutes(30));

  std::string create();

  /// Runs fn on the session under its lock; false when the id is unknown.
  template <typename Fn>
  bool with_session(const std::string& id, Fn&& fn) {
    std::shared_ptr<Entry> entry = find(id);
    if (!entry) return false;
    std::lock_guard lock(entry->mutex);
    fn(entry->session);
    return true;
  }

  std::size_t size();
  void set_clock_for_testing(std::function<Clock::time_point()> now) { now_ = std::move(now); }

 private:
  struct Entry {
    explicit Entry(const dm::Checkpoint& c) : session(c) {}
    std::mutex mutex;
    Session session;
    Clock::time_point last_active;
  };

  std::shared_ptr<Entry> find(const std::string& id);
  void expire_locked();

  const dm::Checkpoint& checkpoint_;
  Clock::duration timeout_;
  std::function<Clock::time_point()> now_ = [] { return Clock::now(); };
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
};

std::string random_session_id();

}  // namespace hcn::app
