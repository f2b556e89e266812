#pragma once

// Operator console message protocol, version 1. Every message is a JSON
// object with a "type" discriminator and "v": 1.
//
// client -> server
//   {type: "utterance", text}            push-to-talk start + stop in one
//   {type: "ptt_start"}
//   {type: "ptt_stop", text}
//   {type: "trigger_gesture", name, number?}
//   {type: "preempt", sequence}
//   {type: "update_config", patch}
//   {type: "reset"}
//   {type: "inject_fault", channel}
//
// server -> client
//   pose, event, sequence_echo, fault, config_ack, error

#include <vector>

#include <nlohmann/json.hpp>

#include "puppetai/orchestrator.hpp"

namespace puppetai {

inline constexpr int kProtocolVersion = 1;

// Throws SchemaError for malformed messages or a version other than 1.
// `require_version` is relaxed for scripts, where "v" may be omitted.
std::vector<EventPayload> parse_client_message(const nlohmann::json& message, bool require_version = true);

nlohmann::json event_message(std::uint64_t tick, const std::string& name, const std::string& detail);
nlohmann::json sequence_echo_message(const ResponderOutput& output);
nlohmann::json fault_message(std::uint64_t tick, ChannelId channel, const std::string& target);
nlohmann::json config_ack_message(bool accepted, const std::string& error);
nlohmann::json error_message(const std::string& code, const std::string& message);

}  // namespace puppetai
