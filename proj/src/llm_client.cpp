#include "puppetai/perception.hpp"

// After Eigen: <resolv.h> (pulled in by httplib) defines a `_res` macro.
#include <httplib.h>

namespace puppetai {

using nlohmann::json;

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

std::optional<Endpoint> split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) return std::nullopt;
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return Endpoint{url, "/"};
  return Endpoint{url.substr(0, path_start), url.substr(path_start)};
}

struct ChatReply {
  std::optional<std::string> content;
  std::optional<RepairNote> failure;
};

ChatReply post_chat(const Endpoint& endpoint, const std::optional<std::string>& key, const LlmClientConfig& config,
                    const json& messages) {
  ChatReply reply;
  std::unique_ptr<httplib::Client> client;
  try {
    client = std::make_unique<httplib::Client>(endpoint.origin);
  } catch (const std::exception& e) {
    reply.failure = RepairNote{RepairKind::TransportError, std::string("bad endpoint: ") + e.what()};
    return reply;
  }
  if (!client->is_valid()) {
    reply.failure = RepairNote{RepairKind::TransportError, "unsupported endpoint '" + endpoint.origin + "'"};
    return reply;
  }
  const auto sec = config.timeout_ms / 1000;
  const auto usec = (config.timeout_ms % 1000) * 1000;
  client->set_connection_timeout(sec, usec);
  client->set_read_timeout(sec, usec);
  client->set_write_timeout(sec, usec);

  httplib::Headers headers;
  if (key) headers.emplace("Authorization", "Bearer " + *key);
  const json body = {{"model", config.model_name}, {"messages", messages}};
  const auto res = client->Post(endpoint.path, headers, body.dump(), "application/json");
  if (!res) {
    const auto err = res.error();
    const bool timeout = err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read;
    reply.failure = RepairNote{timeout ? RepairKind::Timeout : RepairKind::TransportError, httplib::to_string(err)};
    return reply;
  }
  if (res->status != 200) {
    reply.failure = RepairNote{RepairKind::TransportError, "HTTP status " + std::to_string(res->status)};
    return reply;
  }
  try {
    const json parsed = json::parse(res->body);
    if (parsed.contains("content") && parsed["content"].is_string()) {
      reply.content = parsed["content"].get<std::string>();
    } else if (parsed.contains("choices")) {
      // Also accept the common {choices: [{message: {content}}]} shape.
      reply.content = parsed.at("choices").at(0).at("message").at("content").get<std::string>();
    } else {
      reply.failure = RepairNote{RepairKind::TransportError, "reply has no content field"};
    }
  } catch (const std::exception& e) {
    reply.failure = RepairNote{RepairKind::TransportError, std::string("unreadable reply: ") + e.what()};
  }
  return reply;
}

ResponderOutput fall_back(const PerceptResult& percept, const GestureLibrary& library, std::vector<RepairNote> notes,
                          const std::string& why) {
  ResponderOutput out = rule_respond(percept, library);
  notes.push_back({RepairKind::FallbackUsed, why});
  notes.insert(notes.end(), out.repairs.begin(), out.repairs.end());
  out.repairs = std::move(notes);
  return out;
}

}  // namespace

ResponderOutput llm_respond(const PerceptResult& percept, const GestureLibrary& library, const LlmClientConfig& config,
                            const EnvLookup& env) {
  std::vector<RepairNote> notes;

  std::string url = config.endpoint_url;
  if (url.empty()) url = env(kLlmEndpointEnv).value_or("");
  const auto endpoint = split_url(url);
  if (!endpoint) {
    notes.push_back({RepairKind::TransportError, url.empty() ? "no endpoint configured" : "malformed endpoint '" + url + "'"});
    return fall_back(percept, library, std::move(notes), "endpoint unavailable");
  }

  std::optional<std::string> key;
  if (!config.auth_token_ref.empty()) {
    key = env(config.auth_token_ref);
    if (!key) {
      notes.push_back({RepairKind::AuthMissing, "environment variable " + config.auth_token_ref + " is not set"});
      return fall_back(percept, library, std::move(notes), "no credentials");
    }
  }

  json messages = json::array({{{"role", "system"}, {"content", build_system_prompt(library)}},
                               {{"role", "user"}, {"content", build_user_prompt(percept)}}});

  for (int attempt = 0; attempt <= std::max(0, config.max_retries); ++attempt) {
    const ChatReply reply = post_chat(*endpoint, key, config, messages);
    if (reply.failure) {
      notes.push_back(*reply.failure);
      return fall_back(percept, library, std::move(notes), "chat service unavailable");
    }

    const std::string& content = *reply.content;
    std::string problem;
    try {
      ResolvedSequence resolved = resolve_sequence(parse_sequence(content), library, ResolveMode::Repair);
      if (!resolved.empty()) {
        ResponderOutput out;
        out.raw_text = content;
        for (const auto& d : resolved.dropped) notes.push_back({RepairKind::DroppedUnknown, d.message});
        out.sequence = std::move(resolved);
        out.repairs = std::move(notes);
        return out;
      }
      notes.push_back({RepairKind::EmptyAfterRepair, "no known gestures in '" + content + "'"});
      problem = "none of the gestures you used exist";
    } catch (const Error& e) {
      problem = std::string(e.code_name()) + ": " + e.what();
    }

    if (attempt == config.max_retries) break;
    notes.push_back({RepairKind::Retry, "attempt " + std::to_string(attempt + 1) + " rejected (" + problem + ")"});
    messages.push_back({{"role", "assistant"}, {"content", content}});
    messages.push_back({{"role", "user"},
                        {"content", "That reply could not be executed (" + problem +
                                        "). Answer again with only the action sequence, nothing else."}});
  }
  return fall_back(percept, library, std::move(notes), "retries exhausted");
}

}  // namespace puppetai
