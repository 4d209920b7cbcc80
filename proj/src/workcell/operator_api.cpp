#include "asmctl/workcell/operator_api.hpp"

#include <httplib.h>

#include <random>

#include "asmctl/text_format.hpp"
#include "asmctl/vision/pgm.hpp"

namespace asmctl::workcell {
namespace {

constexpr const char* kJson = "application/json";

void reply(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(-1, ' ', false, Json::error_handler_t::replace), kJson);
}

void reply_error(httplib::Response& res, int status, const std::string& message) {
  reply(res, status, {{"error", message}});
}

Json violations_json(const std::vector<ConfigViolation>& vs) {
  Json out = Json::array();
  for (const auto& v : vs) {
    out.push_back({{"code", v.code}, {"step_id", v.step_id}, {"message", v.message}});
  }
  return out;
}

std::string sse_frame(const Workcell::StreamItem& item) {
  return "id: " + std::to_string(item.seq) + "\nevent: " + item.type + "\ndata: " +
         item.data.dump(-1, ' ', false, Json::error_handler_t::replace) + "\n\n";
}

}  // namespace

struct OperatorApi::Impl {
  Impl(Workcell& c, FrameInbox* i, RunOptions d) : cell(c), inbox(i), defaults(d) {}

  Workcell& cell;
  FrameInbox* inbox;
  RunOptions defaults;
  httplib::Server server;
  std::thread listener;
  std::atomic<bool> stopping{false};

  std::mutex session_mu;
  std::thread session_thread;
  std::atomic<bool> session_running{false};
  std::uint64_t sessions_started = 0;
  std::string last_error;
};

OperatorApi::OperatorApi(Workcell& cell, FrameInbox* inbox, RunOptions defaults)
    : impl_(std::make_unique<Impl>(cell, inbox, defaults)) {
  auto& srv = impl_->server;
  Impl& im = *impl_;

  srv.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  });
  srv.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  srv.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type, Last-Event-ID");
    res.status = 204;
  });

  srv.Get("/session", [&im](const httplib::Request&, httplib::Response& res) {
    Json snap = im.cell.snapshot_json();
    std::lock_guard lock(im.session_mu);
    snap["last_error"] = im.last_error.empty() ? Json(nullptr) : Json(im.last_error);
    reply(res, 200, snap);
  });

  srv.Post("/session", [this, &im](const httplib::Request& req, httplib::Response& res) {
    const Json body = Json::parse(req.body, nullptr, false);
    if (!body.is_object()) return reply_error(res, 400, "body must be a JSON object");
    const std::string serial = body.value("product_serial", "");
    procedure::ProcedureScript script;
    try {
      if (body.contains("procedure_text")) {
        script = procedure::parse_procedure(body.at("procedure_text").get<std::string>());
      } else if (body.contains("procedure")) {
        script = procedure::load_procedure(body.at("procedure").get<std::string>());
      } else {
        return reply_error(res, 400, "procedure or procedure_text required");
      }
    } catch (const IoError& e) {
      return reply_error(res, 400, e.what());
    } catch (const std::exception& e) {
      return reply_error(res, 400, std::string("invalid procedure: ") + e.what());
    }
    std::optional<std::uint64_t> seed;
    if (auto it = body.find("seed"); it != body.end() && it->is_number_unsigned()) {
      seed = it->get<std::uint64_t>();
    }
    try {
      const std::string id = start_session(script, serial, seed);
      reply(res, 202, {{"session_id", id}});
    } catch (const SessionRejected& e) {
      reply(res, 400, {{"error", e.what()}, {"violations", violations_json(e.violations())}});
    } catch (const SessionBusy& e) {
      reply_error(res, 409, e.what());
    }
  });

  srv.Post("/steps/:id/confirm", [&im](const httplib::Request& req, httplib::Response& res) {
    const std::string& id = req.path_params.at("id");
    switch (im.cell.confirm(id)) {
      case ConfirmStatus::Accepted:
        return reply(res, 200, {{"status", "accepted"}, {"step_id", id}});
      case ConfirmStatus::AlreadyConfirmed:
        return reply(res, 200, {{"status", "already_confirmed"}, {"step_id", id}});
      case ConfirmStatus::NotActive:
        return reply_error(res, 409, "step " + id + " is not awaiting confirmation");
      case ConfirmStatus::UnknownStep:
        return reply_error(res, 404, "unknown step " + id);
      case ConfirmStatus::NoSession:
        return reply_error(res, 404, "no session");
    }
  });

  srv.Post("/alarm/ack", [&im](const httplib::Request&, httplib::Response& res) {
    if (!im.cell.acknowledge_alarm()) return reply_error(res, 409, "light is not in alarm");
    reply(res, 200, {{"light", to_string(im.cell.light())}});
  });

  srv.Post("/cameras/:id/frame", [&im](const httplib::Request& req, httplib::Response& res) {
    const std::string& id = req.path_params.at("id");
    if (!im.cell.config().find_camera(id)) return reply_error(res, 404, "unknown camera " + id);
    vision::GrayImage frame;
    try {
      const auto* data = reinterpret_cast<const std::uint8_t*>(req.body.data());
      frame = vision::decode_pgm({data, req.body.size()});
    } catch (const std::exception& e) {
      return reply_error(res, 400, std::string("bad PGM: ") + e.what());
    }
    const Json info = {{"camera_id", id}, {"width", frame.width()}, {"height", frame.height()}};
    im.cell.record_frame(id, frame);
    if (im.inbox) im.inbox->submit(id, std::move(frame));
    reply(res, 200, info);
  });

  srv.Get("/cameras/:id/frame.png", [&im](const httplib::Request& req, httplib::Response& res) {
    const std::string& id = req.path_params.at("id");
    if (!im.cell.config().find_camera(id)) return reply_error(res, 404, "unknown camera " + id);
    const auto frame = im.cell.last_frame(id);
    if (!frame) return reply_error(res, 404, "no frame yet for camera " + id);
    const auto png = vision::encode_png(*frame);
    res.status = 200;
    res.set_content(reinterpret_cast<const char*>(png.data()), png.size(), "image/png");
  });

  srv.Get("/events", [&im](const httplib::Request& req, httplib::Response& res) {
    std::uint64_t cursor = 0;
    try {
      if (req.has_header("Last-Event-ID")) {
        cursor = std::stoull(req.get_header_value("Last-Event-ID"));
      } else if (req.has_param("from")) {
        cursor = std::stoull(req.get_param_value("from"));
      }
    } catch (const std::exception&) {
      return reply_error(res, 400, "bad event cursor");
    }
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream", [&im, cursor](std::size_t, httplib::DataSink& sink) mutable {
          while (!im.stopping && sink.is_writable()) {
            const auto items = im.cell.stream_since(cursor, std::chrono::milliseconds(500));
            std::string chunk;
            for (const auto& item : items) {
              chunk += sse_frame(item);
              cursor = item.seq;
            }
            if (chunk.empty()) chunk = ": keepalive\n\n";
            if (!sink.write(chunk.data(), chunk.size())) return false;
          }
          sink.done();
          return true;
        });
  });
}

OperatorApi::~OperatorApi() { stop(); }

int OperatorApi::bind(const std::string& host, int port) {
  auto& srv = impl_->server;
  if (port == 0) {
    const int bound = srv.bind_to_any_port(host);
    if (bound <= 0) throw ApiListenError("cannot bind " + host);
    return bound;
  }
  if (!srv.bind_to_port(host, port)) {
    throw ApiListenError("address in use or unavailable: " + host + ":" + std::to_string(port));
  }
  return port;
}

void OperatorApi::start() {
  impl_->listener = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void OperatorApi::run() { impl_->server.listen_after_bind(); }

void OperatorApi::stop() {
  impl_->stopping = true;
  impl_->cell.abort();
  if (impl_->inbox) impl_->inbox->close();
  impl_->server.stop();
  if (impl_->listener.joinable()) impl_->listener.join();
  wait_session();
}

std::string OperatorApi::start_session(const procedure::ProcedureScript& script,
                                       const std::string& product_serial,
                                       std::optional<std::uint64_t> seed) {
  std::lock_guard lock(impl_->session_mu);
  if (impl_->session_running) throw SessionBusy("a session is already running");
  if (impl_->session_thread.joinable()) impl_->session_thread.join();

  if (product_serial.empty()) throw SessionRejected("product serial is empty");
  try {
    procedure::validate_script(script);
  } catch (const procedure::ValidationError& e) {
    throw SessionRejected(std::string("invalid procedure: ") + e.what());
  }
  auto violations = validate_config(impl_->cell.config(), script, &impl_->cell.templates());
  if (!violations.empty()) throw SessionRejected("equipment mismatch", std::move(violations));

  RunOptions options = impl_->defaults;
  options.seed = seed ? *seed : std::random_device{}() ^ (impl_->sessions_started << 32);
  ++impl_->sessions_started;
  const std::string id =
      make_session_id(options.seed, impl_->cell.config().workcell_id, product_serial);
  impl_->last_error.clear();
  impl_->session_running = true;
  impl_->session_thread = std::thread([this, script, product_serial, options] {
    try {
      impl_->cell.run_session(script, product_serial, options);
    } catch (const std::exception& e) {
      std::lock_guard lock(impl_->session_mu);
      impl_->last_error = e.what();
    }
    impl_->session_running = false;
  });
  return id;
}

void OperatorApi::wait_session() {
  std::thread t;
  {
    std::lock_guard lock(impl_->session_mu);
    t = std::move(impl_->session_thread);
  }
  if (t.joinable()) t.join();
}

}  // namespace asmctl::workcell
