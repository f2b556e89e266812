#pragma once

// Application config: one JSON document that references the model and
// gesture documents by path (relative to the config file).
//
//   {model: "demo_model.json", gestures: "builtin" | path,
//    channels: [{channel_id, target: {section, plane}, displacement_limit_mm?,
//                velocity_limit_mm_s?, torque_limit?, torque_gain?}],
//    responder?: {kind: "rule" | "llm", llm?: {endpoint_url?, auth_token_ref?,
//                 model_name?, timeout_ms?, max_retries?}},
//    tick_hz?: 50, seed?: 0,
//    backend?: {kind: "sim"} | {kind: "serial", device},
//    loop?: {utterance_policy?: "preempt" | "queue", listen_timeout_s?},
//    console?: {host?, port?}}

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "puppetai/actuation.hpp"
#include "puppetai/gestures.hpp"
#include "puppetai/orchestrator.hpp"
#include "puppetai/perception.hpp"

namespace puppetai {

enum class ResponderKind { Rule, Llm };
enum class BackendKind { Sim, Serial };

struct AppConfig {
  std::filesystem::path model_path;
  std::string gestures_source = "builtin";  // "builtin" or a resolved path
  PuppetModel model;
  GestureLibrary library;
  std::vector<MotorChannelConfig> channels;
  ResponderKind responder = ResponderKind::Rule;
  LlmClientConfig llm;
  double tick_hz = 50.0;
  std::uint64_t seed = 0;
  BackendKind backend = BackendKind::Sim;
  std::filesystem::path device;
  UtterancePolicy utterance_policy = UtterancePolicy::Preempt;
  double listen_timeout_s = 30.0;
  std::string console_host = "127.0.0.1";
  unsigned short console_port = 8765;

  LoopConfig loop_config() const;
};

// Throws FileNotFound, SchemaError (message carries the JSON pointer) or
// CrossRefError (diagnostics list every broken reference).
AppConfig load_config(const std::filesystem::path& path);
AppConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);

std::vector<MotorChannelConfig> demo_channels();

// Builds the loop's parts from a config (mock transcriber, configured
// responder and backend).
LoopParts make_loop_parts(const AppConfig& config);

}  // namespace puppetai
