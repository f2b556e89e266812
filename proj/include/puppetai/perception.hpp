#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "puppetai/sequence.hpp"

namespace puppetai {

inline constexpr const char* kLlmEndpointEnv = "PUPPETAI_LLM_ENDPOINT";
inline constexpr const char* kLlmKeyEnv = "PUPPETAI_LLM_KEY";

enum class Emotion { Joy, Sadness, Neutral, Confusion };
std::string_view to_string(Emotion emotion) noexcept;
std::optional<Emotion> emotion_from_string(std::string_view name) noexcept;

struct PerceptResult {
  std::string transcript;
  Emotion emotion = Emotion::Neutral;
  double confidence = 0.5;

  bool operator==(const PerceptResult&) const = default;
};

// Push-to-talk capture. Audio capture is out of scope: the payload is the
// typed (or pre-transcribed) text.
struct Utterance {
  std::string text;
};

// Keyword table: wonderful/great/happy -> joy; tired/sad/late -> sadness;
// guess/"how many"/"?" -> confusion; otherwise neutral. Confidence is 1.0
// on a hit and 0.5 otherwise.
PerceptResult mock_transcribe(const Utterance& utterance);

enum class RepairKind { Retry, DroppedUnknown, EmptyAfterRepair, Timeout, AuthMissing, TransportError, FallbackUsed };
std::string_view to_string(RepairKind kind) noexcept;

struct RepairNote {
  RepairKind kind;
  std::string detail;

  bool operator==(const RepairNote&) const = default;
};

struct ResponderOutput {
  std::string raw_text;
  ResolvedSequence sequence;
  std::vector<RepairNote> repairs;

  bool has_repair(RepairKind kind) const noexcept;
};

bool is_greeting(std::string_view transcript);

// Greeting intent wins over the emotion label; then joy, sadness and
// confusion map to fixed sequences with a waving fallback.
std::string rule_sequence_text(const PerceptResult& percept);
ResponderOutput rule_respond(const PerceptResult& percept, const GestureLibrary& library);

struct LlmClientConfig {
  std::string endpoint_url;  // empty: read PUPPETAI_LLM_ENDPOINT
  std::string auth_token_ref = kLlmKeyEnv;  // env var holding the key; empty disables auth
  std::string model_name = "gpt-4o-mini";
  int timeout_ms = 5000;
  int max_retries = 2;

  bool operator==(const LlmClientConfig&) const = default;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
std::optional<std::string> process_env(const std::string& name);

// System prompt listing every gesture once with its kind and the grammar.
std::string build_system_prompt(const GestureLibrary& library);
std::string build_user_prompt(const PerceptResult& percept);

// Chat request {model, messages: [{role, content}]}; reply {content}.
// Parse or resolution failures are retried with a corrective follow-up up to
// max_retries times; transport failures and exhausted retries fall back to
// rule_respond. Never throws for service problems.
ResponderOutput llm_respond(const PerceptResult& percept, const GestureLibrary& library, const LlmClientConfig& config,
                            const EnvLookup& env = process_env);

// Narrow seams the control loop talks to.
class Transcriber {
 public:
  virtual ~Transcriber() = default;
  virtual PerceptResult transcribe(const Utterance& utterance) = 0;
};

class Responder {
 public:
  virtual ~Responder() = default;
  virtual ResponderOutput respond(const PerceptResult& percept, const GestureLibrary& library) = 0;
};

class MockTranscriber final : public Transcriber {
 public:
  PerceptResult transcribe(const Utterance& utterance) override { return mock_transcribe(utterance); }
};

class RuleResponder final : public Responder {
 public:
  ResponderOutput respond(const PerceptResult& percept, const GestureLibrary& library) override {
    return rule_respond(percept, library);
  }
};

class LlmResponder final : public Responder {
 public:
  explicit LlmResponder(LlmClientConfig config, EnvLookup env = process_env)
      : config_(std::move(config)), env_(std::move(env)) {}
  ResponderOutput respond(const PerceptResult& percept, const GestureLibrary& library) override {
    return llm_respond(percept, library, config_, env_);
  }

 private:
  LlmClientConfig config_;
  EnvLookup env_;
};

nlohmann::json to_json(const PerceptResult& percept);
nlohmann::json to_json(const ResponderOutput& output);

}  // namespace puppetai
