#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "asmctl/logbook/store.hpp"
#include "asmctl/logbook/work_event.hpp"

namespace asmctl::workcell {

// Transient: the logbook could not be reached. Retrying later may succeed.
class LogbookUnreachable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Permanent: the logbook refused the event (bad request, gap, conflict).
class LogbookRejected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MediaUpload {
  std::string artifact_id;
  std::string session_id;
  logbook::MediaKind kind = logbook::MediaKind::KeyFrame;
  std::int64_t captured_at_ms = 0;
  std::vector<std::uint8_t> bytes;
};

class EventSink {
 public:
  virtual ~EventSink() = default;
  // Throws LogbookUnreachable or LogbookRejected.
  virtual void emit(const logbook::WorkEvent& event) = 0;
  virtual void put_media(const MediaUpload& media) = 0;
  // Pushes out anything held back. Returns true when nothing is pending.
  virtual bool flush() { return true; }
};

class StoreSink : public EventSink {
 public:
  explicit StoreSink(logbook::EventStore& store) : store_(store) {}
  void emit(const logbook::WorkEvent& event) override;
  void put_media(const MediaUpload& media) override;

 private:
  logbook::EventStore& store_;
};

// Collector client. `base_url` is http://host:port.
class HttpSink : public EventSink {
 public:
  explicit HttpSink(std::string base_url, int timeout_ms = 2000);
  ~HttpSink() override;
  void emit(const logbook::WorkEvent& event) override;
  void put_media(const MediaUpload& media) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Durable local queue in front of another sink. emit() first appends the
// event to <spool_dir>/spool.jsonl, then forwards everything queued, in
// order. An unreachable logbook leaves events queued for the next emit or
// flush; the spool survives restarts. Media uploads are forwarded
// best-effort and not queued.
class SpoolingSink : public EventSink {
 public:
  SpoolingSink(EventSink& inner, std::filesystem::path spool_dir);
  void emit(const logbook::WorkEvent& event) override;
  void put_media(const MediaUpload& media) override;
  bool flush() override;

  std::size_t pending() const;
  // Message of the last LogbookRejected; the queue stops at that event.
  std::string last_rejection() const;

 private:
  bool drain_locked();
  void persist_locked();

  EventSink& inner_;
  std::filesystem::path spool_file_;
  mutable std::mutex mu_;
  std::deque<logbook::WorkEvent> queue_;
  std::string last_rejection_;
};

// Keeps every event in memory. Used by tests and by run --json output.
class MemorySink : public EventSink {
 public:
  void emit(const logbook::WorkEvent& event) override;
  void put_media(const MediaUpload& media) override;
  std::vector<logbook::WorkEvent> events() const;
  std::vector<MediaUpload> media() const;

 private:
  mutable std::mutex mu_;
  std::vector<logbook::WorkEvent> events_;
  std::vector<MediaUpload> media_;
};

// Sends every event to each sink in turn.
class TeeSink : public EventSink {
 public:
  TeeSink(EventSink& a, EventSink& b) : a_(a), b_(b) {}
  void emit(const logbook::WorkEvent& event) override;
  void put_media(const MediaUpload& media) override;
  bool flush() override;

 private:
  EventSink& a_;
  EventSink& b_;
};

}  // namespace asmctl::workcell
