#include "asmctl/logbook/collector.hpp"

#include <httplib.h>

#include "asmctl/logbook/passport.hpp"

namespace asmctl::logbook {
namespace {

constexpr const char* kJson = "application/json";

void reply(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(-1, ' ', false, Json::error_handler_t::replace), kJson);
}

void reply_error(httplib::Response& res, int status, const std::string& message) {
  reply(res, status, {{"error", message}});
}

template <typename T>
bool parse_param(const httplib::Request& req, const char* key, T& out) {
  if (!req.has_param(key)) return false;
  try {
    if constexpr (std::is_same_v<T, std::string>) {
      out = req.get_param_value(key);
    } else {
      std::size_t used = 0;
      const std::string v = req.get_param_value(key);
      out = static_cast<T>(std::stoll(v, &used));
      if (used != v.size()) return false;
    }
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

struct Collector::Impl {
  explicit Impl(EventStore& s) : store(s) {}
  EventStore& store;
  httplib::Server server;
};

Collector::Collector(EventStore& store) : impl_(std::make_unique<Impl>(store)) {
  auto& srv = impl_->server;
  EventStore& st = store;
  // SO_REUSEPORT (httplib's default) would let a second instance share the
  // port silently.
  srv.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  });

  srv.Get("/health", [](const httplib::Request&, httplib::Response& res) {
    reply(res, 200, {{"status", "ok"}});
  });

  srv.Post("/events", [&st](const httplib::Request& req, httplib::Response& res) {
    WorkEvent event;
    try {
      event = parse_json_line(req.body);
    } catch (const InvalidEvent& e) {
      return reply_error(res, 400, e.what());
    }
    try {
      const auto status = st.append(event);
      reply(res, 200, {{"status", status == AppendStatus::Stored ? "stored" : "duplicate"},
                       {"event_id", event.event_id}});
    } catch (const InvalidEvent& e) {
      reply_error(res, 400, e.what());
    } catch (const GapDetected& e) {
      reply(res, 409, {{"error", "gap"},
                       {"message", e.what()},
                       {"expected_event_id", e.expected_event_id()}});
    } catch (const EventConflict& e) {
      reply(res, 409, {{"error", "conflict"}, {"message", e.what()}});
    } catch (const StoreError& e) {
      reply_error(res, 500, e.what());
    }
  });

  srv.Get("/events/:session", [&st](const httplib::Request& req, httplib::Response& res) {
    const std::string& id = req.path_params.at("session");
    if (!st.has_session(id)) return reply_error(res, 404, "unknown session " + id);
    Json out = Json::array();
    for (const auto& e : st.events(id)) out.push_back(to_json(e));
    reply(res, 200, out);
  });

  srv.Get("/passport/:serial", [&st](const httplib::Request& req, httplib::Response& res) {
    reply(res, 200, to_json(build_passport(st, req.path_params.at("serial"))));
  });

  srv.Post("/media", [&st](const httplib::Request& req, httplib::Response& res) {
    std::string artifact_id, session_id, kind_name;
    std::int64_t captured = 0;
    if (!parse_param(req, "artifact_id", artifact_id) ||
        !parse_param(req, "session_id", session_id) || !parse_param(req, "kind", kind_name) ||
        !parse_param(req, "captured_at_ms", captured)) {
      return reply_error(res, 400, "artifact_id, session_id, kind, captured_at_ms required");
    }
    const auto kind = media_kind_from_string(kind_name);
    if (!kind) return reply_error(res, 400, "unknown media kind " + kind_name);
    try {
      const std::vector<std::uint8_t> bytes(req.body.begin(), req.body.end());
      reply(res, 200, to_json(st.add_media(artifact_id, session_id, *kind, captured, bytes)));
    } catch (const InvalidEvent& e) {
      reply_error(res, 400, e.what());
    } catch (const EventConflict& e) {
      reply_error(res, 409, e.what());
    } catch (const StoreError& e) {
      reply_error(res, 500, e.what());
    }
  });

  srv.Get("/media", [&st](const httplib::Request&, httplib::Response& res) {
    Json out = Json::array();
    for (const auto& a : st.media()) out.push_back(to_json(a));
    reply(res, 200, out);
  });

  srv.Post("/retention/sweep", [&st](const httplib::Request& req, httplib::Response& res) {
    std::int64_t now_ms = 0;
    int horizon = kRetentionHorizonDays;
    if (!parse_param(req, "now_ms", now_ms)) return reply_error(res, 400, "now_ms required");
    if (req.has_param("horizon_days") && !parse_param(req, "horizon_days", horizon)) {
      return reply_error(res, 400, "horizon_days must be an integer");
    }
    try {
      Json out = Json::array();
      for (const auto& a : st.retention_sweep(now_ms, horizon)) out.push_back(to_json(a));
      reply(res, 200, out);
    } catch (const std::invalid_argument& e) {
      reply_error(res, 400, e.what());
    }
  });
}

Collector::~Collector() { stop(); }

int Collector::bind(const std::string& host, int port) {
  auto& srv = impl_->server;
  if (port == 0) {
    const int bound = srv.bind_to_any_port(host);
    if (bound <= 0) throw ListenError("cannot bind " + host);
    return bound;
  }
  if (!srv.bind_to_port(host, port)) {
    throw ListenError("address in use or unavailable: " + host + ":" + std::to_string(port));
  }
  return port;
}

void Collector::start() {
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void Collector::run() { impl_->server.listen_after_bind(); }

void Collector::stop() {
  impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace asmctl::logbook
