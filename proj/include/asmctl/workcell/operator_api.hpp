#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include "asmctl/workcell/scene_source.hpp"
#include "asmctl/workcell/workcell.hpp"

namespace asmctl::workcell {

class ApiListenError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// HTTP/JSON operator interface of one workcell.
//
//   GET  /session                    state snapshot
//   POST /session                    {"procedure": path | "procedure_text": text,
//                                     "product_serial": s, "seed"?: n}
//   POST /steps/{id}/confirm         200 accepted|already_confirmed, 404, 409
//   POST /alarm/ack                  200, 409 when not in alarm
//   POST /cameras/{id}/frame         PGM body
//   GET  /cameras/{id}/frame.png     last frame as PNG
//   GET  /events                     server-sent events: work_event, light
//
// Sessions started over the API run on a background thread and wait for
// operator confirmations.
class OperatorApi {
 public:
  // `inbox` receives submitted frames when the cell runs in replay mode.
  OperatorApi(Workcell& cell, FrameInbox* inbox, RunOptions defaults);
  ~OperatorApi();

  OperatorApi(const OperatorApi&) = delete;
  OperatorApi& operator=(const OperatorApi&) = delete;

  // Port 0 picks a free port. Returns the bound port. Throws ApiListenError.
  int bind(const std::string& host, int port);
  void start();
  void run();
  // Stops serving, aborts a running session and joins its thread.
  void stop();

  // Starts a session on the background thread. Throws SessionRejected or
  // SessionBusy synchronously. Returns the session id.
  std::string start_session(const procedure::ProcedureScript& script,
                            const std::string& product_serial,
                            std::optional<std::uint64_t> seed = std::nullopt);
  // Joins the session thread if it has finished or is finishing.
  void wait_session();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace asmctl::workcell
