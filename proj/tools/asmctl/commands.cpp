#include "commands.hpp"

#include <chrono>
#include <filesystem>
#include <memory>
#include <thread>

#include "asmctl/logbook/collector.hpp"
#include "asmctl/logbook/passport.hpp"
#include "asmctl/logbook/store.hpp"
#include "asmctl/text_format.hpp"
#include "asmctl/tooling/calibration.hpp"
#include "asmctl/wireproto/tool_endpoint.hpp"
#include "asmctl/wireproto/transport.hpp"
#include "asmctl/workcell/operator_api.hpp"
#include "asmctl/workcell/workcell.hpp"

namespace asmctl::cli {
namespace {

namespace fs = std::filesystem;
using logbook::Json;
using namespace asmctl::workcell;

// Flags that do not combine into a runnable command.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

vision::TemplateLibrary load_templates(const WorkcellConfig& cfg) {
  if (cfg.templates_manifest.empty()) return {};
  return vision::TemplateLibrary::load(cfg.templates_manifest);
}

SimScene::Perturbation parse_misplace(const std::string& spec, std::string& step_id) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos || colon == 0) {
    throw UsageError("--misplace expects STEP:DX,DY or STEP:absent, got '" + spec + "'");
  }
  step_id = spec.substr(0, colon);
  std::string rest = spec.substr(colon + 1);
  SimScene::Perturbation p;
  if (const auto at = rest.find('@'); at != std::string::npos) {
    p.attempts = static_cast<int>(text::to_int(rest.substr(at + 1), 0));
    rest = rest.substr(0, at);
  }
  if (rest == "absent") {
    p.absent = true;
    return p;
  }
  const auto comma = rest.find(',');
  if (comma == std::string::npos) throw UsageError("--misplace offset must be DX,DY");
  p.dx = text::to_double(rest.substr(0, comma), 0);
  p.dy = text::to_double(rest.substr(comma + 1), 0);
  return p;
}

std::unique_ptr<SceneSource> make_scene(const std::string& mode, const std::string& frames,
                                        std::uint64_t seed, const WorkcellConfig& cfg) {
  if (mode == "sim") return std::make_unique<SimScene>(seed, cfg.sim_noise_sigma);
  if (mode == "replay") {
    if (frames.empty()) throw UsageError("--mode replay needs --frames DIR");
    if (!fs::is_directory(frames)) throw IoError("frame directory not found: " + frames);
    return std::make_unique<DirectoryScene>(frames);
  }
  throw UsageError("unknown --mode '" + mode + "' (sim or replay)");
}

std::unique_ptr<ToolLink> make_tool(const std::string& tool, std::uint64_t tool_seed,
                                    const WorkcellConfig& cfg) {
  if (!cfg.has_tool) return nullptr;
  const std::string where = tool.empty() ? cfg.tool_endpoint : tool;
  if (where.empty() || where == "sim") {
    wireproto::ToolProfile profile;
    profile.tool.seed = tool_seed;
    return std::make_unique<SimulatedToolLink>(profile);
  }
  const auto [host, port] = wireproto::parse_host_port(where);
  return std::make_unique<TcpToolLink>(host, port);
}

// The event sink chain of one workcell process: a local store, or a remote
// collector behind a durable spool, or memory only.
struct SinkChain {
  std::unique_ptr<logbook::EventStore> store;
  std::unique_ptr<EventSink> remote;
  std::unique_ptr<SpoolingSink> spool;
  EventSink* primary = nullptr;

  SinkChain(const std::string& store_dir, const std::string& url, const std::string& spool_dir,
            const WorkcellConfig& cfg) {
    const std::string logbook = url.empty() ? cfg.logbook_url : url;
    if (!store_dir.empty()) {
      store = std::make_unique<logbook::EventStore>(store_dir);
      remote = std::make_unique<StoreSink>(*store);
      primary = remote.get();
    } else if (!logbook.empty()) {
      remote = std::make_unique<HttpSink>(logbook);
      const fs::path dir = spool_dir.empty() ? fs::path(".asmctl-spool") / cfg.workcell_id
                                             : fs::path(spool_dir);
      spool = std::make_unique<SpoolingSink>(*remote, dir);
      primary = spool.get();
    }
  }
};

Json session_json(const Session& s) {
  Json steps = Json::array();
  for (const auto& st : s.states) {
    steps.push_back({{"step_id", st.step_id},
                     {"status", std::string(procedure::to_string(st.status))},
                     {"attempts", st.attempts}});
  }
  return {{"session_id", s.session_id},
          {"workcell_id", s.workcell_id},
          {"product_serial", s.product_serial},
          {"procedure_id", s.script.procedure_id},
          {"outcome", to_string(s.phase)},
          {"failed_step_id", s.failed_step_id.empty() ? Json(nullptr) : Json(s.failed_step_id)},
          {"started_at_ms", s.started_at_ms},
          {"ended_at_ms", s.ended_at_ms ? Json(*s.ended_at_ms) : Json(nullptr)},
          {"light", to_string(s.light)},
          {"steps", std::move(steps)}};
}

void print_violations(const std::vector<ConfigViolation>& vs, std::ostream& out) {
  for (const auto& v : vs) {
    out << "violation " << v.code;
    if (!v.step_id.empty()) out << " step " << v.step_id;
    out << ": " << v.message << "\n";
  }
}

// Runs a command body with the shared exception-to-exit-code mapping.
template <typename Fn>
int guarded(std::ostream& err, Fn&& body) {
  try {
    return body();
  } catch (const UsageError& e) {
    err << "usage: " << e.what() << "\n";
    return kExitEnvironment;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitEnvironment;
  } catch (const wireproto::AddressInUse& e) {
    err << "error: " << e.what() << "\n";
    return kExitEnvironment;
  } catch (const logbook::ListenError& e) {
    err << "error: " << e.what() << "\n";
    return kExitEnvironment;
  } catch (const ApiListenError& e) {
    err << "error: " << e.what() << "\n";
    return kExitEnvironment;
  } catch (const logbook::StoreError& e) {
    err << "error: " << e.what() << "\n";
    return kExitEnvironment;
  } catch (const LogbookUnreachable& e) {
    err << "error: logbook unreachable: " << e.what() << "\n";
    return kExitEnvironment;
  } catch (const SessionRejected& e) {
    err << "rejected: " << e.what() << "\n";
    print_violations(e.violations(), err);
    return kExitDomain;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  }
}

}  // namespace

int cmd_validate(const ValidateArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto cfg = load_config(args.config);
    const auto templates = load_templates(cfg);
    const auto script = procedure::load_procedure(args.procedure);
    try {
      procedure::validate_script(script);
    } catch (const procedure::ValidationError& e) {
      out << "violation invalid_procedure";
      if (!e.step_id().empty()) out << " step " << e.step_id();
      out << ": " << e.what() << "\n";
      return kExitDomain;
    }
    const auto violations = validate_config(cfg, script, &templates);
    if (!violations.empty()) {
      print_violations(violations, out);
      return kExitDomain;
    }
    out << "ok: workcell " << cfg.workcell_id << " can run " << script.procedure_id
        << " revision " << script.revision << " (" << script.steps.size() << " steps)\n";
    return kExitOk;
  });
}

int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    if (!args.headless && args.listen.empty()) {
      throw UsageError("run needs --headless, or --listen for operator confirmations");
    }
    if (!args.store.empty() && !args.logbook_url.empty()) {
      throw UsageError("--store and --logbook-url are exclusive");
    }
    const auto cfg = load_config(args.config);
    auto templates = load_templates(cfg);
    const auto script = procedure::load_procedure(args.procedure);

    auto scene = make_scene(args.mode, args.frames, args.seed, cfg);
    for (const auto& m : args.misplace) {
      auto* sim = dynamic_cast<SimScene*>(scene.get());
      if (!sim) throw UsageError("--misplace needs --mode sim");
      std::string step;
      const auto p = parse_misplace(m, step);
      sim->perturb(step, p);
    }
    auto tool = make_tool(args.tool, args.tool_seed, cfg);
    SinkChain chain(args.store, args.logbook_url, args.spool, cfg);
    MemorySink memory;
    std::unique_ptr<TeeSink> tee;
    EventSink* sink = &memory;
    if (chain.primary) {
      tee = std::make_unique<TeeSink>(memory, *chain.primary);
      sink = tee.get();
    }

    SimClock clock;
    Workcell cell(cfg, std::move(templates), *scene, *sink, tool.get(), clock);
    RunOptions options;
    options.seed = args.seed;
    options.headless = args.headless;

    std::unique_ptr<OperatorApi> api;
    if (!args.listen.empty()) {
      const auto [host, port] = wireproto::parse_host_port(args.listen);
      api = std::make_unique<OperatorApi>(cell, nullptr, options);
      const int bound = api->bind(host, port);
      api->start();
      err << "operator api listening on " << host << ":" << bound << "\n";
    }

    const Session session = cell.run_session(script, args.serial, options);
    if (api) api->stop();
    const auto events = cell.session_events();

    if (args.json) {
      Json doc = {{"session", session_json(session)}, {"events", Json::array()}};
      for (const auto& e : events) doc["events"].push_back(logbook::to_json(e));
      out << doc.dump(2) << "\n";
    } else {
      out << format_step_table(session, events);
    }
    if (chain.spool && chain.spool->pending() > 0) {
      err << "warning: " << chain.spool->pending()
          << " event(s) left in the spool; the logbook was not reachable";
      if (!chain.spool->last_rejection().empty()) {
        err << " (rejected: " << chain.spool->last_rejection() << ")";
      }
      err << "\n";
    }
    return session.phase == SessionPhase::Complete ? kExitOk : kExitDomain;
  });
}

int cmd_calibrate(const CalibrateArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    std::vector<tooling::CalibrationSample> samples;
    if (!args.samples.empty()) {
      samples = tooling::parse_calibration_samples(text::read_file(args.samples));
    } else if (args.generate > 0) {
      samples = tooling::generate_calibration_samples(args.generate, args.k, args.noise, args.seed);
    } else {
      throw UsageError("calibrate needs --samples FILE or --generate N");
    }
    const auto model = tooling::fit_calibration(samples, args.fit_offset);
    if (args.json) {
      out << Json{{"k_nm_per_a", model.k_nm_per_a},
                  {"offset_nm", model.offset_nm},
                  {"band_nm", model.band_nm},
                  {"samples", samples.size()}}
                 .dump(2)
          << "\n";
    } else {
      out << tooling::format_calibration_report(samples, model);
    }
    return kExitOk;
  });
}

namespace {

void wait_until(const std::atomic<bool>& stop) {
  while (!stop) std::this_thread::sleep_for(std::chrono::milliseconds(50));
}

int serve_logbook(const ServeArgs& args, const std::atomic<bool>& stop, std::ostream& out) {
  if (args.store.empty()) throw UsageError("--role logbook needs --store DIR");
  logbook::EventStore store(args.store);
  logbook::Collector collector(store);
  const auto [host, port] = wireproto::parse_host_port(args.listen);
  const int bound = collector.bind(host, port);
  collector.start();
  out << "logbook listening on " << host << ":" << bound << std::endl;
  wait_until(stop);
  collector.stop();
  return kExitOk;
}

int serve_tool(const ServeArgs& args, const std::atomic<bool>& stop, std::ostream& out) {
  const auto [host, port] = wireproto::parse_host_port(args.listen);
  wireproto::TcpListener listener(host, port);
  out << "tool listening on " << host << ":" << listener.port() << std::endl;
  wireproto::ToolProfile profile;
  profile.tool.seed = args.tool_seed;
  wireproto::ServeOptions options;
  options.realtime_factor = args.realtime;

  std::atomic<bool> closing{false};
  std::vector<std::thread> connections;
  while (!stop) {
    auto channel = listener.accept(std::chrono::milliseconds(100));
    if (!channel) continue;
    connections.emplace_back([ch = std::move(channel), &profile, &closing, options]() mutable {
      wireproto::ToolEndpoint endpoint(profile);
      try {
        wireproto::serve_tool(*ch, endpoint, closing, options);
      } catch (const std::exception&) {
      }
      ch->close();
    });
  }
  closing = true;
  for (auto& t : connections) t.join();
  return kExitOk;
}

int serve_workcell(const ServeArgs& args, const std::atomic<bool>& stop, std::ostream& out,
                   std::ostream& err) {
  if (args.config.empty()) throw UsageError("--role workcell needs --config FILE");
  if (!args.store.empty() && !args.logbook_url.empty()) {
    throw UsageError("--store and --logbook-url are exclusive");
  }
  const auto cfg = load_config(args.config);
  auto templates = load_templates(cfg);

  std::unique_ptr<SceneSource> scene;
  FrameInbox* inbox = nullptr;
  if (args.mode == "replay" && args.frames.empty()) {
    auto owned = std::make_unique<FrameInbox>();
    inbox = owned.get();
    scene = std::move(owned);
  } else {
    scene = make_scene(args.mode, args.frames, args.seed, cfg);
  }
  auto tool = make_tool(args.tool, args.tool_seed, cfg);
  SinkChain chain(args.store, args.logbook_url, args.spool, cfg);
  MemorySink memory;
  std::unique_ptr<TeeSink> tee;
  EventSink* sink = &memory;
  if (chain.primary) {
    tee = std::make_unique<TeeSink>(memory, *chain.primary);
    sink = tee.get();
  }

  SystemClock clock;
  Workcell cell(cfg, std::move(templates), *scene, *sink, tool.get(), clock);
  RunOptions options;
  options.seed = args.seed;
  options.headless = false;
  OperatorApi api(cell, inbox, options);
  const auto [host, port] = wireproto::parse_host_port(args.listen);
  const int bound = api.bind(host, port);
  api.start();
  out << "workcell " << cfg.workcell_id << " listening on " << host << ":" << bound
      << std::endl;

  if (!args.procedure.empty()) {
    const auto script = procedure::load_procedure(args.procedure);
    const auto id = api.start_session(script, args.serial, args.seed);
    out << "session " << id << " started" << std::endl;
  }
  wait_until(stop);
  api.stop();
  if (chain.spool && !chain.spool->flush()) {
    err << "warning: " << chain.spool->pending() << " event(s) remain spooled\n";
  }
  return kExitOk;
}

}  // namespace

int cmd_serve(const ServeArgs& args, const std::atomic<bool>& stop, std::ostream& out,
              std::ostream& err) {
  return guarded(err, [&] {
    if (args.role == "logbook") return serve_logbook(args, stop, out);
    if (args.role == "tool") return serve_tool(args, stop, out);
    if (args.role == "workcell") return serve_workcell(args, stop, out, err);
    throw UsageError("unknown role '" + args.role + "' (workcell, logbook or tool)");
  });
}

int cmd_passport(const PassportArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!fs::is_directory(args.store)) throw IoError("store not found: " + args.store);
    const logbook::EventStore store(args.store);
    const auto passport = logbook::build_passport(store, args.serial);
    if (args.json) {
      out << logbook::to_json(passport).dump(2) << "\n";
    } else {
      out << logbook::format_passport(passport);
    }
    return kExitOk;
  });
}

}  // namespace asmctl::cli
