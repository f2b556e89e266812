#include "puppetai/cli.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "puppetai/config.hpp"
#include "puppetai/console_protocol.hpp"
#include "puppetai/console_server.hpp"
#include "puppetai/model_io.hpp"

#ifndef PUPPETAI_DATA_DIR
#define PUPPETAI_DATA_DIR "data"
#endif

namespace puppetai {

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kRuntime = 2;

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

void print_error(const Error& e) {
  std::cerr << "error: " << e.code_name();
  if (e.offset()) std::cerr << " at offset " << *e.offset();
  std::cerr << ": " << e.what() << "\n";
  for (const Diagnostic& d : e.diagnostics())
    if (d.message != e.what()) std::cerr << "  " << format_diagnostic(d) << "\n";
}

// Validation-type codes exit 1; everything else is a runtime fault.
int exit_code_for(Errc code) {
  switch (code) {
    case Errc::Timeout:
    case Errc::AuthMissing:
    case Errc::TransportError:
      return kRuntime;
    default:
      return kInvalid;
  }
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::FileNotFound, "cannot write " + path);
  for (const auto& line : lines) out << line << '\n';
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::FileNotFound, "cannot write " + path);
  out << text << '\n';
}

int finish_session(const SessionResult& result, const std::string& log_path, const std::string& report_path,
                   const std::string& broadcast_path) {
  if (!log_path.empty()) write_lines(log_path, result.trajectory_log);
  if (!broadcast_path.empty()) write_lines(broadcast_path, result.broadcasts);
  const std::string report = result.report.to_json().dump(2);
  if (report_path.empty() || report_path == "-")
    std::cout << report << "\n";
  else
    write_text(report_path, report);
  return result.report.faults.empty() ? kOk : kRuntime;
}

std::optional<PlaneRef> parse_bend_ref(const std::string& spec, double& deg) {
  const auto a = spec.find(':');
  const auto b = spec.rfind(':');
  if (a == std::string::npos || a == b) return std::nullopt;
  try {
    std::size_t used = 0;
    const std::string num = spec.substr(b + 1);
    deg = std::stod(num, &used);
    if (used != num.size()) return std::nullopt;
  } catch (const std::exception&) {
    return std::nullopt;
  }
  return PlaneRef{spec.substr(0, a), spec.substr(a + 1, b - a - 1)};
}

int cmd_validate(const std::string& seq, const std::string& gestures, const std::string& model,
                 const std::string& config) {
  if (!seq.empty()) {
    const ActionSequence parsed = parse_sequence(seq);
    const AppConfig cfg = load_config(config);
    const ResolvedSequence resolved = resolve_sequence(parsed, cfg.library, ResolveMode::Strict);
    std::cout << "ok: " << format_sequence(resolved.canonical()) << " (" << resolved.items.size() << " items, "
              << format_number(schedule_duration(build_schedule(resolved, cfg.library))) << " s)\n";
  }
  if (!gestures.empty()) {
    const GestureLibrary lib = load_library_file(gestures);
    const AppConfig cfg = load_config(config);
    const auto findings = check_library_against(lib, cfg.model);
    if (!findings.empty()) throw Error(findings.front().code, format_diagnostic(findings.front()), findings);
    std::cout << "ok: " << lib.gestures.size() << " gestures\n";
  }
  if (!model.empty()) {
    const PuppetModel m = load_model_file(model);
    std::cout << "ok: model '" << m.name << "' with " << m.sections.size() << " sections\n";
  }
  return kOk;
}

int cmd_kinematics(const std::vector<std::string>& bends, const std::string& model_path, const std::string& config) {
  const PuppetModel model = model_path.empty() ? load_config(config).model : load_model_file(model_path);
  BendState state;
  for (const auto& spec : bends) {
    double deg = 0.0;
    auto ref = parse_bend_ref(spec, deg);
    if (!ref) throw Error(Errc::InvalidArgument, "expected SECTION:PLANE:DEG, got '" + spec + "'");
    state[*ref] = deg;
  }
  check_state(model, state);
  const SectionFrames frames = forward_kinematics(model, state);

  std::cout << std::fixed << std::setprecision(4);
  std::cout << "section      frame        x          y          z\n";
  for (const auto& [section, list] : frames) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto& p = list[i].position_mm;
      std::cout << std::left << std::setw(12) << section << std::right << std::setw(6) << i << std::setw(11) << p.x()
                << std::setw(11) << p.y() << std::setw(11) << p.z() << "\n";
    }
  }
  std::cout << "\nplane                 bend_deg   cable_mm\n";
  for (const PlaneRef& ref : all_planes(model)) {
    const auto it = state.find(ref);
    const double deg = it == state.end() ? 0.0 : it->second;
    const PlaneLocation loc = locate_plane(model, ref);
    std::cout << std::left << std::setw(20) << ref.str() << std::right << std::setw(10) << deg << std::setw(11)
              << cable_displacement(*loc.segment, ref.plane, deg) << "\n";
  }
  return kOk;
}

int cmd_sim(const std::string& script_path, const std::string& config, const std::string& log_path,
            const std::string& report_path, const std::string& broadcast_path) {
  const AppConfig cfg = load_config(config);
  const SessionScript script = load_script_file(script_path);
  Orchestrator loop(make_loop_parts(cfg), cfg.loop_config(), false);
  return finish_session(run_scripted_session(loop, script), log_path, report_path, broadcast_path);
}

int cmd_play(const std::string& seq, const std::string& config, const std::string& log_path,
             const std::string& report_path) {
  AppConfig cfg = load_config(config);
  // Fail fast with the parser's offset before the loop starts.
  resolve_sequence(parse_sequence(seq), cfg.library, ResolveMode::Strict);
  cfg.backend = BackendKind::Sim;
  Orchestrator loop(make_loop_parts(cfg), cfg.loop_config(), false);
  SessionScript script;
  script.duration_s = 0.0;
  script.events.push_back({0.0, events::Preempt{seq}});
  return finish_session(run_scripted_session(loop, script), log_path, report_path, "");
}

int cmd_live(const std::string& config, bool perception, int port_override, double duration_s,
             const std::string& log_path) {
  const AppConfig cfg = load_config(config);
  Orchestrator loop(make_loop_parts(cfg), cfg.loop_config(), true);

  auto handler = [&loop, perception](const std::string& text) -> std::vector<std::string> {
    try {
      const auto message = nlohmann::json::parse(text);
      const std::string type = message.is_object() ? message.value("type", "") : "";
      if (!perception && (type == "utterance" || type == "ptt_start" || type == "ptt_stop"))
        return {error_message("Unsupported", "perception is disabled on this server").dump()};
      for (auto& payload : parse_client_message(message)) loop.post(std::move(payload));
      return {};
    } catch (const nlohmann::json::exception& e) {
      return {error_message(std::string(to_string(Errc::SchemaError)), e.what()).dump()};
    } catch (const Error& e) {
      return {error_message(std::string(e.code_name()), e.what()).dump()};
    }
  };
  const unsigned short port = port_override >= 0 ? static_cast<unsigned short>(port_override) : cfg.console_port;
  ConsoleServer server(cfg.console_host, port, handler);
  std::cout << "console: ws://" << cfg.console_host << ":" << server.port() << "/" << std::endl;

  std::ofstream log;
  if (!log_path.empty()) log.open(log_path, std::ios::binary);

  g_stop = false;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);

  const auto period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(1.0 / cfg.tick_hz));
  auto next = std::chrono::steady_clock::now();
  while (!g_stop && (duration_s <= 0.0 || loop.now_s() < duration_s)) {
    TickOutput out = loop.control_tick();
    for (const auto& msg : out.broadcasts) server.broadcast(msg.dump());
    if (log) log << out.log_line << '\n';
    next += period;
    std::this_thread::sleep_until(next);
  }
  server.stop();
  std::cout << loop.report().to_json().dump(2) << std::endl;
  return loop.report().faults.empty() ? kOk : kRuntime;
}

}  // namespace

std::string default_config_path() {
  if (const char* dir = std::getenv("PUPPETAI_DATA_DIR")) return std::string(dir) + "/demo_config.json";
  return std::string(PUPPETAI_DATA_DIR) + "/demo_config.json";
}

int dispatch(const std::vector<std::string>& args) {
  CLI::App app{"puppetai: continuum puppet control stack"};
  app.require_subcommand(1);
  std::string config = default_config_path();
  app.add_option("-c,--config", config, "application config (JSON)");

  std::string seq, gestures, model;
  auto* validate = app.add_subcommand("validate", "validate a sequence, gesture library or model document");
  validate->add_option("--seq", seq, "action sequence text");
  validate->add_option("--gestures", gestures, "gesture library document");
  validate->add_option("--model", model, "puppet model document");

  std::vector<std::string> bends;
  std::string kin_model;
  auto* kin = app.add_subcommand("kinematics", "print FK frames and cable displacements");
  kin->add_option("--bend", bends, "SECTION:PLANE:DEG (repeatable)");
  kin->add_option("--model", kin_model, "model document (default: the config's model)");

  std::string script, log_path, report_path, broadcast_path;
  auto* sim = app.add_subcommand("sim", "deterministic scripted run under virtual time");
  sim->add_option("--script", script, "session script (JSON)")->required();
  sim->add_option("--log", log_path, "trajectory log output (JSON lines)");
  sim->add_option("--report", report_path, "exit report output (default stdout)");
  sim->add_option("--broadcasts", broadcast_path, "broadcast transcript output (JSON lines)");

  std::string play_seq;
  auto* play = app.add_subcommand("play", "execute one sequence on the simulator");
  play->add_option("sequence", play_seq, "action sequence text")->required();
  play->add_option("--log", log_path, "trajectory log output (JSON lines)");
  play->add_option("--report", report_path, "exit report output (default stdout)");

  int port = -1;
  double duration = 0.0;
  auto* run = app.add_subcommand("run", "live loop with perception and the console server");
  auto* serve = app.add_subcommand("serve", "console server and live loop without perception");
  for (auto* sub : {run, serve}) {
    sub->add_option("--port", port, "console port (0 picks a free one)");
    sub->add_option("--duration", duration, "stop after this many seconds (0 runs until signalled)");
    sub->add_option("--log", log_path, "trajectory log output (JSON lines)");
  }

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInvalid;
  }

  try {
    if (*validate) {
      if (seq.empty() && gestures.empty() && model.empty()) {
        std::cerr << "error: InvalidArgument: validate needs --seq, --gestures or --model\n";
        return kInvalid;
      }
      return cmd_validate(seq, gestures, model, config);
    }
    if (*kin) return cmd_kinematics(bends, kin_model, config);
    if (*sim) return cmd_sim(script, config, log_path, report_path, broadcast_path);
    if (*play) return cmd_play(play_seq, config, log_path, report_path);
    if (*run) return cmd_live(config, true, port, duration, log_path);
    if (*serve) return cmd_live(config, false, port, duration, log_path);
  } catch (const Error& e) {
    print_error(e);
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: RuntimeFault: " << e.what() << "\n";
    return kRuntime;
  }
  return kInvalid;
}

int dispatch(int argc, const char* const* argv) {
  std::vector<std::string> args(argv, argv + argc);
  return dispatch(args);
}

}  // namespace puppetai
