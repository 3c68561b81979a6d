#include "service.hpp"

#include "hcn/common/error.hpp"
#include "hcn/common/log.hpp"
#include "hcn/text/tokenize.hpp"
#include "httplib.h"
#include "json.hpp"

namespace hcn::app {
using nlohmann::json;

namespace {

constexpr const char* kJson = "application/json";

constexpr const char* kFallbackPage = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>hcn</title></head>
<body><h1>hcn dialogue service</h1>
<p>The JSON API is under <code>/api</code>. Start <code>serve</code> with <code>--static DIR</code> to host a chat client here.</p>
</body></html>
)";

void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void fail(httplib::Response& res, int status, const std::string& message) { send(res, status, {{"error", message}}); }

json transcript_json(const std::vector<TranscriptEntry>& entries) {
  json out = json::array();
  for (const auto& e : entries) {
    out.push_back({{"user", e.user},
                   {"action_id", e.action},
                   {"template", e.template_text},
                   {"reply", e.reply},
                   {"timestamp_ms", e.unix_ms}});
  }
  return out;
}

text::KbFact parse_fact(const std::string& line) {
  const auto parts = text::split_whitespace(line);
  if (parts.size() != 3) throw UsageError("kb lines need 'entity relation value': '" + line + "'");
  return text::KbFact{parts[0], parts[1], parts[2], 0};
}

}  // namespace

struct Service::Impl {
  std::shared_ptr<const dm::Checkpoint> checkpoint;
  ServiceOptions options;
  std::unique_ptr<SessionStore> store;
  httplib::Server server;
};

Service::Service(std::shared_ptr<const dm::Checkpoint> checkpoint, ServiceOptions options)
    : impl_(std::make_unique<Impl>()) {
  impl_->checkpoint = std::move(checkpoint);
  impl_->options = std::move(options);
  if (impl_->checkpoint) impl_->store = std::make_unique<SessionStore>(*impl_->checkpoint, impl_->options.idle_timeout);
  Impl& s = *impl_;
  auto& srv = s.server;

  auto unavailable = [&s](httplib::Response& res) {
    if (s.store) return false;
    fail(res, 503, "no checkpoint loaded");
    return true;
  };

  srv.Get("/api/health", [&s](const httplib::Request&, httplib::Response& res) {
    if (!s.checkpoint) return send(res, 503, {{"checkpoint", nullptr}});
    send(res, 200, {{"checkpoint", s.checkpoint->fingerprint}});
  });

  srv.Post("/api/session", [&s, unavailable](const httplib::Request&, httplib::Response& res) {
    if (unavailable(res)) return;
    send(res, 201, {{"session_id", s.store->create()}});
  });

  srv.Post(R"(/api/session/([^/]+)/message)", [&s, unavailable](const httplib::Request& req, httplib::Response& res) {
    if (unavailable(res)) return;
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::exception&) {
      return fail(res, 400, "body must be a JSON object");
    }
    if (!body.is_object() || !body.contains("text") || !body["text"].is_string()) {
      return fail(res, 400, "body needs a string field 'text'");
    }
    std::vector<text::KbFact> facts;
    try {
      if (body.contains("kb")) {
        for (const auto& line : body.at("kb")) facts.push_back(parse_fact(line.get<std::string>()));
      }
    } catch (const std::exception& e) {
      return fail(res, 400, e.what());
    }
    const std::string text = body["text"].get<std::string>();
    json reply;
    std::string error;
    const bool found = s.store->with_session(req.matches[1], [&](Session& session) {
      try {
        for (const auto& f : facts) session.add_kb_fact(f);
        const Reply r = session.post(text, s.options.top_k);
        json top = json::array();
        for (const auto& a : r.top_k) top.push_back({{"action_id", a.action}, {"template", a.template_text}, {"p", a.p}});
        reply = {{"reply", r.text}, {"template", r.template_text}, {"action_id", r.action}, {"top_k", top}};
      } catch (const std::exception& e) {
        error = e.what();
      }
    });
    if (!found) return fail(res, 404, "unknown session");
    if (!error.empty()) return fail(res, 500, error);
    send(res, 200, reply);
  });

  srv.Get(R"(/api/session/([^/]+)/transcript)", [&s, unavailable](const httplib::Request& req, httplib::Response& res) {
    if (unavailable(res)) return;
    json out;
    const bool found =
        s.store->with_session(req.matches[1], [&](Session& session) { out = transcript_json(session.transcript()); });
    if (!found) return fail(res, 404, "unknown session");
    send(res, 200, out);
  });

  if (!s.options.static_dir.empty()) {
    if (!srv.set_mount_point("/", s.options.static_dir.string())) {
      throw UsageError(s.options.static_dir.string() + ": static directory does not exist");
    }
  } else {
    srv.Get("/", [](const httplib::Request&, httplib::Response& res) { res.set_content(kFallbackPage, "text/html"); });
  }
}

Service::~Service() { stop(); }

int Service::bind_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }

bool Service::bind(const std::string& host, int port) { return impl_->server.bind_to_port(host, port); }

bool Service::listen_after_bind() { return impl_->server.listen_after_bind(); }

void Service::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

void Service::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace hcn::app
