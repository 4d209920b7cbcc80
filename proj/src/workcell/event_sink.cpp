#include "asmctl/workcell/event_sink.hpp"

#include <httplib.h>

#include <fstream>

#include "asmctl/durable_io.hpp"

namespace asmctl::workcell {

using logbook::WorkEvent;

void StoreSink::emit(const WorkEvent& event) {
  try {
    store_.append(event);
  } catch (const logbook::StoreError& e) {
    throw LogbookUnreachable(e.what());
  } catch (const std::runtime_error& e) {
    throw LogbookRejected(e.what());
  }
}

void StoreSink::put_media(const MediaUpload& m) {
  store_.add_media(m.artifact_id, m.session_id, m.kind, m.captured_at_ms, m.bytes);
}

struct HttpSink::Impl {
  explicit Impl(const std::string& url) : client(url) {}
  std::mutex mu;
  httplib::Client client;
};

HttpSink::HttpSink(std::string base_url, int timeout_ms)
    : impl_(std::make_unique<Impl>(base_url)) {
  if (!impl_->client.is_valid()) throw std::invalid_argument("bad logbook url " + base_url);
  const auto sec = timeout_ms / 1000;
  const auto usec = (timeout_ms % 1000) * 1000;
  impl_->client.set_connection_timeout(sec, usec);
  impl_->client.set_read_timeout(sec, usec);
  impl_->client.set_write_timeout(sec, usec);
}

HttpSink::~HttpSink() = default;

void HttpSink::emit(const WorkEvent& event) {
  std::lock_guard lock(impl_->mu);
  auto res = impl_->client.Post("/events", logbook::to_json_line(event), "application/json");
  if (!res) {
    throw LogbookUnreachable("logbook unreachable: " + httplib::to_string(res.error()));
  }
  if (res->status == 200) return;
  if (res->status >= 500) {
    throw LogbookUnreachable("logbook error " + std::to_string(res->status) + ": " + res->body);
  }
  throw LogbookRejected("logbook rejected event " + std::to_string(event.event_id) + " (" +
                        std::to_string(res->status) + "): " + res->body);
}

void HttpSink::put_media(const MediaUpload& m) {
  httplib::Params params{{"artifact_id", m.artifact_id},
                         {"session_id", m.session_id},
                         {"kind", logbook::to_string(m.kind)},
                         {"captured_at_ms", std::to_string(m.captured_at_ms)}};
  const std::string path = "/media?" + httplib::detail::params_to_query_str(params);
  std::lock_guard lock(impl_->mu);
  auto res = impl_->client.Post(path, reinterpret_cast<const char*>(m.bytes.data()),
                                m.bytes.size(), "application/octet-stream");
  if (!res) throw LogbookUnreachable("logbook unreachable: " + httplib::to_string(res.error()));
  if (res->status != 200) {
    throw LogbookRejected("logbook rejected media " + m.artifact_id + ": " + res->body);
  }
}

SpoolingSink::SpoolingSink(EventSink& inner, std::filesystem::path spool_dir)
    : inner_(inner), spool_file_(spool_dir / "spool.jsonl") {
  std::filesystem::create_directories(spool_dir);
  std::ifstream in(spool_file_);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      queue_.push_back(logbook::parse_json_line(line));
    } catch (const logbook::InvalidEvent&) {
      // A torn last line from a crash; the event was never acknowledged.
    }
  }
}

void SpoolingSink::persist_locked() {
  std::string text;
  for (const auto& e : queue_) text += logbook::to_json_line(e) + "\n";
  replace_durable(spool_file_, text);
}

bool SpoolingSink::drain_locked() {
  const std::size_t before = queue_.size();
  while (!queue_.empty()) {
    try {
      inner_.emit(queue_.front());
    } catch (const LogbookUnreachable&) {
      break;
    } catch (const LogbookRejected& e) {
      last_rejection_ = e.what();
      break;
    }
    queue_.pop_front();
  }
  if (queue_.size() != before) persist_locked();
  return queue_.empty();
}

void SpoolingSink::emit(const WorkEvent& event) {
  std::lock_guard lock(mu_);
  queue_.push_back(event);
  persist_locked();
  drain_locked();
}

void SpoolingSink::put_media(const MediaUpload& media) {
  try {
    inner_.put_media(media);
  } catch (const std::exception&) {
  }
}

bool SpoolingSink::flush() {
  std::lock_guard lock(mu_);
  return drain_locked();
}

std::size_t SpoolingSink::pending() const {
  std::lock_guard lock(mu_);
  return queue_.size();
}

std::string SpoolingSink::last_rejection() const {
  std::lock_guard lock(mu_);
  return last_rejection_;
}

void MemorySink::emit(const WorkEvent& event) {
  std::lock_guard lock(mu_);
  events_.push_back(event);
}

void MemorySink::put_media(const MediaUpload& media) {
  std::lock_guard lock(mu_);
  media_.push_back(media);
}

std::vector<WorkEvent> MemorySink::events() const {
  std::lock_guard lock(mu_);
  return events_;
}

std::vector<MediaUpload> MemorySink::media() const {
  std::lock_guard lock(mu_);
  return media_;
}

void TeeSink::emit(const WorkEvent& event) {
  a_.emit(event);
  b_.emit(event);
}

void TeeSink::put_media(const MediaUpload& media) {
  a_.put_media(media);
  b_.put_media(media);
}

bool TeeSink::flush() {
  const bool a = a_.flush();
  return b_.flush() && a;
}

}  // namespace asmctl::workcell
