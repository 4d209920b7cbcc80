#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace asmctl::cli {

// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitEnvironment = 2;

struct ValidateArgs {
  std::string config;
  std::string procedure;
};

struct RunArgs {
  std::string config;
  std::string procedure;
  std::string serial;
  std::string mode = "sim";  // sim | replay
  std::string frames;        // replay mode frame directory
  std::uint64_t seed = 7;
  std::string logbook_url;   // collector base URL
  std::string store;         // local store directory
  std::string spool;         // spool directory for --logbook-url
  std::string tool = "sim";  // sim | host:port
  std::uint64_t tool_seed = 0;
  bool headless = false;
  bool json = false;
  // step:dx,dy or step:absent, optionally suffixed @n for the first n attempts.
  std::vector<std::string> misplace;
  std::string listen;        // operator API while the session runs
};

struct CalibrateArgs {
  std::string samples;
  int generate = 0;
  double k = 0.3;
  double noise = 0.05;
  std::uint64_t seed = 11;
  bool fit_offset = false;
  bool json = false;
};

struct ServeArgs {
  std::string role;  // workcell | logbook | tool
  std::string listen;
  // workcell
  std::string config;
  std::string mode = "sim";
  std::string frames;
  std::uint64_t seed = 7;
  std::string logbook_url;
  std::string store;
  std::string spool;
  std::string tool = "sim";
  std::uint64_t tool_seed = 0;
  std::string procedure;  // optional session started at launch
  std::string serial;
  // tool
  double realtime = 0.0;
};

struct PassportArgs {
  std::string store;
  std::string serial;
  bool json = false;
};

int cmd_validate(const ValidateArgs& args, std::ostream& out, std::ostream& err);
int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err);
int cmd_calibrate(const CalibrateArgs& args, std::ostream& out, std::ostream& err);
// Blocks until `stop` becomes true.
int cmd_serve(const ServeArgs& args, const std::atomic<bool>& stop, std::ostream& out,
              std::ostream& err);
int cmd_passport(const PassportArgs& args, std::ostream& out, std::ostream& err);

}  // namespace asmctl::cli
