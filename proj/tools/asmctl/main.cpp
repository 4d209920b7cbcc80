#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <iostream>

#include "commands.hpp"

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

void install_signal_handlers() {
  struct sigaction sa {};
  sa.sa_handler = on_signal;
  sigemptyset(&sa.sa_mask);
  sigaction(SIGINT, &sa, nullptr);
  sigaction(SIGTERM, &sa, nullptr);
  std::signal(SIGPIPE, SIG_IGN);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace asmctl::cli;

  CLI::App app{"asmctl: assembly workcell controller"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  ValidateArgs validate;
  auto* v = app.add_subcommand("validate", "Check a procedure against a workcell config");
  v->add_option("--config", validate.config, "Workcell config file")->required();
  v->add_option("--procedure", validate.procedure, "Procedure script")->required();

  RunArgs run;
  auto* r = app.add_subcommand("run", "Run one assembly session to completion");
  r->add_option("--config", run.config, "Workcell config file")->required();
  r->add_option("--procedure", run.procedure, "Procedure script")->required();
  r->add_option("--serial", run.serial, "Product serial number")->required();
  r->add_option("--mode", run.mode, "Scene source")->check(CLI::IsMember({"sim", "replay"}));
  r->add_option("--frames", run.frames, "Frame directory for replay mode");
  r->add_option("--seed", run.seed, "Session seed");
  auto* url = r->add_option("--logbook-url", run.logbook_url, "Collector base URL");
  r->add_option("--store", run.store, "Local logbook store directory")->excludes(url);
  r->add_option("--spool", run.spool, "Spool directory used with --logbook-url");
  r->add_option("--tool", run.tool, "Tool endpoint: sim or HOST:PORT");
  r->add_option("--tool-seed", run.tool_seed, "Seed of the simulated tool");
  r->add_flag("--headless", run.headless, "Confirm operator steps automatically");
  r->add_flag("--json", run.json, "Print the session and its events as JSON");
  r->add_option("--misplace", run.misplace,
                "Displace an element in the simulated scene: STEP:DX,DY[@N] or STEP:absent");
  r->add_option("--listen", run.listen, "Serve the operator API on HOST:PORT during the run");

  CalibrateArgs cal;
  auto* c = app.add_subcommand("calibrate", "Fit the torque-current law");
  auto* samples = c->add_option("--samples", cal.samples, "Sample file: current torque per line");
  c->add_option("--generate", cal.generate, "Generate N bench samples")->excludes(samples);
  c->add_option("--k", cal.k, "Torque constant for generated samples, Nm/A");
  c->add_option("--noise", cal.noise, "Current noise for generated samples, A");
  c->add_option("--seed", cal.seed, "Seed for generated samples");
  c->add_flag("--offset", cal.fit_offset, "Fit a torque offset as well");
  c->add_flag("--json", cal.json, "Print the fitted model as JSON");

  ServeArgs serve;
  auto* s = app.add_subcommand("serve", "Run a workcell, logbook or tool service");
  s->add_option("--role", serve.role, "workcell, logbook or tool")->required();
  s->add_option("--listen", serve.listen, "HOST:PORT; port 0 picks a free port")
      ->default_val("127.0.0.1:0");
  s->add_option("--config", serve.config, "Workcell config file");
  s->add_option("--mode", serve.mode, "Scene source")->check(CLI::IsMember({"sim", "replay"}));
  s->add_option("--frames", serve.frames, "Frame directory for replay mode");
  s->add_option("--seed", serve.seed, "Seed of sessions started at launch");
  auto* surl = s->add_option("--logbook-url", serve.logbook_url, "Collector base URL");
  s->add_option("--store", serve.store, "Store directory")->excludes(surl);
  s->add_option("--spool", serve.spool, "Spool directory used with --logbook-url");
  s->add_option("--tool", serve.tool, "Tool endpoint: sim or HOST:PORT");
  s->add_option("--tool-seed", serve.tool_seed, "Seed of the simulated tool");
  s->add_option("--procedure", serve.procedure, "Start a session with this script at launch");
  s->add_option("--serial", serve.serial, "Serial of the session started at launch");
  s->add_option("--realtime", serve.realtime,
                "Tool role: simulated seconds per wall second, 0 unpaced");

  PassportArgs pass;
  auto* p = app.add_subcommand("passport", "Print the digital passport of a product");
  p->add_option("--store", pass.store, "Store directory")->required();
  p->add_option("--serial", pass.serial, "Product serial number")->required();
  p->add_flag("--json", pass.json, "Print JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitEnvironment;
  }

  if (*v) return cmd_validate(validate, std::cout, std::cerr);
  if (*r) return cmd_run(run, std::cout, std::cerr);
  if (*c) return cmd_calibrate(cal, std::cout, std::cerr);
  if (*p) return cmd_passport(pass, std::cout, std::cerr);
  install_signal_handlers();
  return cmd_serve(serve, g_stop, std::cout, std::cerr);
}
