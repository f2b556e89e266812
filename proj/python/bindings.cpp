#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "puppetai/codec.hpp"
#include "puppetai/config.hpp"
#include "puppetai/orchestrator.hpp"

namespace py = pybind11;
using namespace puppetai;

namespace {

py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

BendState bend_state(const std::map<std::string, double>& bends) {
  BendState out;
  for (const auto& [key, deg] : bends) {
    const auto slash = key.find('/');
    if (slash == std::string::npos) throw Error(Errc::InvalidArgument, "expected 'section/plane', got '" + key + "'");
    out[{key.substr(0, slash), key.substr(slash + 1)}] = deg;
  }
  return out;
}

PuppetModel model_for(const std::string& config) {
  return config.empty() ? demo_model() : load_config(config).model;
}

py::dict session_dict(const SessionResult& r) {
  py::dict d;
  d["report"] = to_py(r.report.to_json());
  d["log"] = r.trajectory_log;
  d["broadcasts"] = r.broadcasts;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "puppetai native core";
  m.attr("__version__") = "0.1.0";
  m.attr("_build_data_dir") = PUPPETAI_DATA_DIR;

  static py::exception<Error> puppet_error(m, "PuppetError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      // args: (code, message, offset or None)
      py::object offset = e.offset() ? py::object(py::int_(*e.offset())) : py::object(py::none());
      py::tuple args = py::make_tuple(std::string(e.code_name()), std::string(e.what()), offset);
      PyErr_SetObject(puppet_error.ptr(), args.ptr());
    }
  });

  m.def(
      "parse_sequence",
      [](const std::string& text) {
        std::vector<std::pair<std::string, double>> out;
        for (const auto& item : parse_sequence(text).items) out.emplace_back(item.gesture_name, item.number_s);
        return out;
      },
      py::arg("text"), "Parse '[Name][n]...' into (name, seconds) pairs.");

  m.def(
      "format_sequence",
      [](const std::vector<std::pair<std::string, double>>& items) {
        ActionSequence seq;
        for (const auto& [name, n] : items) seq.items.push_back({name, n});
        return format_sequence(seq);
      },
      py::arg("items"));

  m.def(
      "forward_kinematics",
      [](const std::map<std::string, double>& bends, const std::string& config) {
        const PuppetModel model = model_for(config);
        std::map<std::string, std::vector<std::array<double, 3>>> out;
        for (const auto& [section, frames] : forward_kinematics(model, bend_state(bends)))
          for (const Frame& f : frames) out[section].push_back({f.position_mm.x(), f.position_mm.y(), f.position_mm.z()});
        return out;
      },
      py::arg("bends") = std::map<std::string, double>{}, py::arg("config") = "",
      "Frame positions (mm) per section for bends keyed 'section/plane' in degrees.");

  m.def(
      "cable_displacement",
      [](const std::string& section, const std::string& plane, double deg, const std::string& config) {
        const PuppetModel model = model_for(config);
        const PlaneLocation loc = locate_plane(model, {section, plane});
        return cable_displacement(*loc.segment, plane, deg);
      },
      py::arg("section"), py::arg("plane"), py::arg("deg"), py::arg("config") = "");

  m.def(
      "encode_set_target",
      [](int channel, double mm) {
        const auto bytes = codec::encode_frame(static_cast<std::uint8_t>(channel), codec::Opcode::SetTarget,
                                               codec::SetTargetPayload{codec::mm_to_um(mm)});
        return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
      },
      py::arg("channel"), py::arg("mm"));

  m.def(
      "decode_frame",
      [](const py::bytes& data) {
        const std::string raw = data;
        const std::vector<std::uint8_t> bytes(raw.begin(), raw.end());
        const codec::WireFrame f = codec::decode_frame(bytes);
        py::dict d;
        d["channel"] = f.channel;
        d["opcode"] = static_cast<int>(f.opcode);
        if (const auto* s = std::get_if<codec::SetTargetPayload>(&f.payload)) d["target_um"] = s->target_um;
        if (const auto* t = std::get_if<codec::TelemetryPayload>(&f.payload)) {
          d["position_um"] = t->position_um;
          d["velocity_um_s"] = t->velocity_um_s;
          d["torque_milli"] = t->torque_milli;
          d["flags"] = t->flags;
        }
        return d;
      },
      py::arg("data"));

  m.def(
      "transcribe",
      [](const std::string& text) { return to_py(to_json(mock_transcribe({text}))); }, py::arg("text"),
      "Keyword transcriber: {transcript, emotion, confidence}.");

  m.def(
      "respond",
      [](const std::string& text) {
        const PuppetModel model = demo_model();
        return format_sequence(rule_respond(mock_transcribe({text}), builtin_library(model)).sequence.canonical());
      },
      py::arg("text"), "Rule responder sequence for an utterance.");

  m.def(
      "run_script",
      [](const std::string& script, const std::string& config) {
        const AppConfig cfg = load_config(config);
        const SessionScript s = load_script_file(script);
        SessionResult r;
        {
          py::gil_scoped_release release;
          Orchestrator loop(make_loop_parts(cfg), cfg.loop_config(), false);
          r = run_scripted_session(loop, s);
        }
        return session_dict(r);
      },
      py::arg("script"), py::arg("config"), "Virtual-time scripted session: {report, log, broadcasts}.");

  m.def(
      "play",
      [](const std::string& sequence, const std::string& config) {
        AppConfig cfg = load_config(config);
        resolve_sequence(parse_sequence(sequence), cfg.library, ResolveMode::Strict);
        cfg.backend = BackendKind::Sim;
        SessionScript s;
        s.duration_s = 0.0;
        s.events.push_back({0.0, events::Preempt{sequence}});
        SessionResult r;
        {
          py::gil_scoped_release release;
          Orchestrator loop(make_loop_parts(cfg), cfg.loop_config(), false);
          r = run_scripted_session(loop, s);
        }
        return session_dict(r);
      },
      py::arg("sequence"), py::arg("config"), "Run one sequence on the simulator.");
}
