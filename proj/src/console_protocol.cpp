#include "puppetai/console_protocol.hpp"

#include "json_util.hpp"

namespace puppetai {

using detail::ObjectReader;
using nlohmann::json;

std::vector<EventPayload> parse_client_message(const json& message, bool require_version) {
  ObjectReader r(message, "");
  const std::string type = r.string("type");
  const json* version = r.optional("v");
  if (version == nullptr && require_version) detail::schema_error("/v", "missing protocol version");
  if (version != nullptr && (!version->is_number_integer() || version->get<int>() != kProtocolVersion))
    detail::schema_error("/v", "unsupported protocol version (expected 1)");
  r.optional("t_s");  // scripts carry a timestamp; the caller reads it

  std::vector<EventPayload> out;
  if (type == "utterance") {
    out.emplace_back(events::PttStart{});
    out.emplace_back(events::PttStop{Utterance{r.string("text")}});
  } else if (type == "ptt_start") {
    out.emplace_back(events::PttStart{});
  } else if (type == "ptt_stop") {
    out.emplace_back(events::PttStop{Utterance{r.string_or("text", "")}});
  } else if (type == "trigger_gesture") {
    events::TriggerGesture trigger{r.string("name"), r.number_or("number", 1.0)};
    if (trigger.number_s < 0.0) detail::schema_error("/number", "must be non-negative");
    out.emplace_back(std::move(trigger));
  } else if (type == "preempt") {
    out.emplace_back(events::Preempt{r.string("sequence")});
  } else if (type == "update_config") {
    const json& patch = r.required("patch");
    if (!patch.is_object()) detail::schema_error("/patch", "expected an object");
    out.emplace_back(events::UpdateConfig{patch});
  } else if (type == "reset") {
    out.emplace_back(events::Reset{});
  } else if (type == "inject_fault") {
    const int channel = r.integer("channel");
    if (channel < 0 || channel > 255) detail::schema_error("/channel", "expected 0..255");
    out.emplace_back(events::InjectFault{static_cast<ChannelId>(channel)});
  } else {
    detail::schema_error("/type", "unknown message type '" + type + "'");
  }
  r.finish();
  return out;
}

json event_message(std::uint64_t tick, const std::string& name, const std::string& detail) {
  return {{"type", "event"}, {"v", kProtocolVersion}, {"tick", tick}, {"name", name}, {"detail", detail}};
}

json sequence_echo_message(const ResponderOutput& output) {
  json msg = to_json(output);
  msg["type"] = "sequence_echo";
  msg["v"] = kProtocolVersion;
  return msg;
}

json fault_message(std::uint64_t tick, ChannelId channel, const std::string& target) {
  return {{"type", "fault"}, {"v", kProtocolVersion}, {"tick", tick}, {"channel", channel}, {"target", target}};
}

json config_ack_message(bool accepted, const std::string& error) {
  json msg = {{"type", "config_ack"}, {"v", kProtocolVersion}, {"accepted", accepted}};
  if (!error.empty()) msg["error"] = error;
  return msg;
}

json error_message(const std::string& code, const std::string& message) {
  return {{"type", "error"}, {"v", kProtocolVersion}, {"code", code}, {"message", message}};
}

}  // namespace puppetai
