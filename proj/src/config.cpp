#include "puppetai/config.hpp"

#include <cmath>

#include "json_util.hpp"
#include "puppetai/model_io.hpp"

namespace puppetai {

using detail::ObjectReader;
using nlohmann::json;

namespace {

MotorChannelConfig channel_from_json(const json& value, const std::string& ptr) {
  ObjectReader r(value, ptr);
  MotorChannelConfig c;
  const int id = r.integer("channel_id");
  if (id < 0 || id > 255) detail::schema_error(r.child("channel_id"), "expected 0..255");
  c.channel_id = static_cast<ChannelId>(id);
  {
    ObjectReader t(r.required("target"), r.child("target"));
    c.target.section = t.string("section");
    c.target.plane = t.string("plane");
    t.finish();
  }
  c.displacement_limit_mm = r.number_or("displacement_limit_mm", c.displacement_limit_mm);
  c.velocity_limit_mm_s = r.number_or("velocity_limit_mm_s", c.velocity_limit_mm_s);
  c.torque_limit = r.number_or("torque_limit", c.torque_limit);
  c.torque_gain = r.number_or("torque_gain", c.torque_gain);
  r.finish();
  return c;
}

LlmClientConfig llm_from_json(const json& value, const std::string& ptr) {
  ObjectReader r(value, ptr);
  LlmClientConfig c;
  c.endpoint_url = r.string_or("endpoint_url", c.endpoint_url);
  c.auth_token_ref = r.string_or("auth_token_ref", c.auth_token_ref);
  c.model_name = r.string_or("model_name", c.model_name);
  c.timeout_ms = static_cast<int>(r.number_or("timeout_ms", c.timeout_ms));
  c.max_retries = static_cast<int>(r.number_or("max_retries", c.max_retries));
  if (c.timeout_ms <= 0) detail::schema_error(r.child("timeout_ms"), "must be positive");
  if (c.max_retries < 0) detail::schema_error(r.child("max_retries"), "must be non-negative");
  r.finish();
  return c;
}

std::filesystem::path resolve_path(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

LoopConfig AppConfig::loop_config() const {
  LoopConfig c;
  c.tick_hz = tick_hz;
  c.seed = seed;
  c.utterance_policy = utterance_policy;
  c.listen_timeout_s = listen_timeout_s;
  return c;
}

AppConfig config_from_json(const json& doc, const std::filesystem::path& base_dir) {
  ObjectReader r(doc, "");
  AppConfig cfg;

  cfg.model_path = resolve_path(base_dir, r.string("model"));
  cfg.model = load_model_file(cfg.model_path);

  const std::string gestures = r.string_or("gestures", "builtin");
  if (gestures == "builtin") {
    cfg.gestures_source = gestures;
    try {
      cfg.library = builtin_library(cfg.model);
    } catch (const Error& e) {
      throw Error(Errc::CrossRefError, std::string("builtin gestures do not fit the model: ") + e.what(),
                  e.diagnostics());
    }
  } else {
    const auto path = resolve_path(base_dir, gestures);
    cfg.gestures_source = path.string();
    cfg.library = load_library_file(path);
  }

  const json& channels = r.required("channels");
  if (!channels.is_array() || channels.empty()) detail::schema_error("/channels", "expected a non-empty array");
  for (std::size_t i = 0; i < channels.size(); ++i)
    cfg.channels.push_back(channel_from_json(channels[i], "/channels/" + std::to_string(i)));

  if (const json* resp = r.optional("responder")) {
    ObjectReader rr(*resp, "/responder");
    const std::string kind = rr.string("kind");
    if (kind == "rule")
      cfg.responder = ResponderKind::Rule;
    else if (kind == "llm")
      cfg.responder = ResponderKind::Llm;
    else
      detail::schema_error("/responder/kind", "expected \"rule\" or \"llm\"");
    if (const json* llm = rr.optional("llm")) cfg.llm = llm_from_json(*llm, "/responder/llm");
    rr.finish();
  }

  cfg.tick_hz = r.number_or("tick_hz", cfg.tick_hz);
  if (!(cfg.tick_hz > 0.0) || !std::isfinite(cfg.tick_hz)) detail::schema_error("/tick_hz", "must be positive");
  if (const json* seed = r.optional("seed")) {
    if (!seed->is_number_unsigned() && !(seed->is_number_integer() && seed->get<std::int64_t>() >= 0))
      detail::schema_error("/seed", "expected a non-negative integer");
    cfg.seed = seed->get<std::uint64_t>();
  }

  if (const json* backend = r.optional("backend")) {
    ObjectReader br(*backend, "/backend");
    const std::string kind = br.string("kind");
    if (kind == "sim") {
      cfg.backend = BackendKind::Sim;
    } else if (kind == "serial") {
      cfg.backend = BackendKind::Serial;
      cfg.device = br.string("device");
      if (cfg.device.empty()) detail::schema_error("/backend/device", "must not be empty");
    } else {
      detail::schema_error("/backend/kind", "expected \"sim\" or \"serial\"");
    }
    br.finish();
  }

  if (const json* loop = r.optional("loop")) {
    ObjectReader lr(*loop, "/loop");
    const std::string policy = lr.string_or("utterance_policy", "preempt");
    if (policy == "preempt")
      cfg.utterance_policy = UtterancePolicy::Preempt;
    else if (policy == "queue")
      cfg.utterance_policy = UtterancePolicy::Queue;
    else
      detail::schema_error("/loop/utterance_policy", "expected \"preempt\" or \"queue\"");
    cfg.listen_timeout_s = lr.number_or("listen_timeout_s", cfg.listen_timeout_s);
    if (!(cfg.listen_timeout_s > 0.0)) detail::schema_error("/loop/listen_timeout_s", "must be positive");
    lr.finish();
  }

  if (const json* console = r.optional("console")) {
    ObjectReader cr(*console, "/console");
    cfg.console_host = cr.string_or("host", cfg.console_host);
    const int port = static_cast<int>(cr.number_or("port", cfg.console_port));
    if (port < 0 || port > 65535) detail::schema_error("/console/port", "expected 0..65535");
    cfg.console_port = static_cast<unsigned short>(port);
    cr.finish();
  }
  r.finish();

  // Cross references: channels -> planes, gestures -> model, every plane driven.
  std::vector<Diagnostic> findings;
  for (const Diagnostic& d : validate_channels(cfg.channels, nullptr)) findings.push_back(d);
  for (std::size_t i = 0; i < cfg.channels.size(); ++i) {
    const auto& c = cfg.channels[i];
    try {
      locate_plane(cfg.model, c.target);
    } catch (const Error& e) {
      findings.push_back({Errc::CrossRefError, "/channels/" + std::to_string(i) + "/target",
                          "channel " + std::to_string(c.channel_id) + " targets " + c.target.str() + ": " + e.what()});
    }
  }
  for (const Diagnostic& d : check_library_against(cfg.library, cfg.model))
    findings.push_back({Errc::CrossRefError, "gestures/" + d.path, d.message});
  for (const PlaneRef& ref : all_planes(cfg.model)) {
    bool driven = false;
    for (const auto& c : cfg.channels) driven = driven || c.target == ref;
    if (!driven) findings.push_back({Errc::CrossRefError, "/channels", "no channel drives " + ref.str()});
  }
  if (!findings.empty()) {
    const Errc code = findings.front().code == Errc::CrossRefError ? Errc::CrossRefError : findings.front().code;
    std::string message = format_diagnostic(findings.front());
    throw Error(code, std::move(message), std::move(findings));
  }
  return cfg;
}

AppConfig load_config(const std::filesystem::path& path) {
  const auto parsed = detail::parse_document(detail::read_text_file(path), path.string());
  if (!parsed.duplicate_keys.empty()) detail::schema_error(parsed.duplicate_keys.front(), "duplicate key");
  return config_from_json(parsed.value, path.parent_path());
}

std::vector<MotorChannelConfig> demo_channels() {
  const PlaneRef targets[] = {{"body", "sagittal"},    {"body", "lateral"},      {"left_arm", "vertical"},
                              {"left_arm", "forward"}, {"right_arm", "vertical"}, {"right_arm", "forward"}};
  std::vector<MotorChannelConfig> out;
  ChannelId id = 1;
  for (const auto& t : targets) {
    MotorChannelConfig c;
    c.channel_id = id++;
    c.target = t;
    out.push_back(c);
  }
  return out;
}

LoopParts make_loop_parts(const AppConfig& config) {
  LoopParts parts;
  parts.model = config.model;
  parts.library = config.library;
  parts.channels = config.channels;
  if (config.backend == BackendKind::Serial)
    parts.backend = std::make_unique<SerialBackend>(config.device, config.channels);
  else
    parts.backend = make_sim_backend(config.channels);
  parts.transcriber = std::make_unique<MockTranscriber>();
  if (config.responder == ResponderKind::Llm)
    parts.responder = std::make_unique<LlmResponder>(config.llm);
  else
    parts.responder = std::make_unique<RuleResponder>();
  return parts;
}

}  // namespace puppetai
