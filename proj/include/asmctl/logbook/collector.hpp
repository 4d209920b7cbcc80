#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <thread>

#include "asmctl/logbook/store.hpp"

namespace asmctl::logbook {

class ListenError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// HTTP/JSON front end for an EventStore.
//
//   POST /events               one WorkEvent; 200 stored|duplicate, 400, 409
//   GET  /events/{session_id}  JSON array, 404 for an unknown session
//   GET  /passport/{serial}    DigitalPassport JSON
//   POST /media?artifact_id=&session_id=&kind=&captured_at_ms=   raw bytes
//   GET  /media                artifact list
//   POST /retention/sweep?now_ms=&horizon_days=
//   GET  /health
class Collector {
 public:
  explicit Collector(EventStore& store);
  ~Collector();

  Collector(const Collector&) = delete;
  Collector& operator=(const Collector&) = delete;

  // Port 0 picks a free port. Returns the bound port. Throws ListenError.
  int bind(const std::string& host, int port);
  // Serves on a background thread until stop().
  void start();
  // Serves on the calling thread until stop() from elsewhere.
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
};

}  // namespace asmctl::logbook
