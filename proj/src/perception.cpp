#include "puppetai/perception.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>

namespace puppetai {

namespace {

std::vector<std::string> words(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (const char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '\'') {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

bool has_word(const std::vector<std::string>& ws, std::initializer_list<std::string_view> candidates) {
  return std::any_of(ws.begin(), ws.end(), [&](const std::string& w) {
    return std::find(candidates.begin(), candidates.end(), w) != candidates.end();
  });
}

bool has_phrase(const std::vector<std::string>& ws, std::initializer_list<std::string_view> phrase) {
  const std::size_t n = phrase.size();
  if (n == 0 || ws.size() < n) return false;
  for (std::size_t i = 0; i + n <= ws.size(); ++i) {
    if (std::equal(phrase.begin(), phrase.end(), ws.begin() + static_cast<std::ptrdiff_t>(i))) return true;
  }
  return false;
}

}  // namespace

std::string_view to_string(Emotion emotion) noexcept {
  switch (emotion) {
    case Emotion::Joy: return "joy";
    case Emotion::Sadness: return "sadness";
    case Emotion::Neutral: return "neutral";
    case Emotion::Confusion: return "confusion";
  }
  return "neutral";
}

std::optional<Emotion> emotion_from_string(std::string_view name) noexcept {
  for (const Emotion e : {Emotion::Joy, Emotion::Sadness, Emotion::Neutral, Emotion::Confusion})
    if (to_string(e) == name) return e;
  return std::nullopt;
}

std::string_view to_string(RepairKind kind) noexcept {
  switch (kind) {
    case RepairKind::Retry: return "Retry";
    case RepairKind::DroppedUnknown: return "DroppedUnknown";
    case RepairKind::EmptyAfterRepair: return "EmptyAfterRepair";
    case RepairKind::Timeout: return "Timeout";
    case RepairKind::AuthMissing: return "AuthMissing";
    case RepairKind::TransportError: return "TransportError";
    case RepairKind::FallbackUsed: return "FallbackUsed";
  }
  return "?";
}

bool ResponderOutput::has_repair(RepairKind kind) const noexcept {
  return std::any_of(repairs.begin(), repairs.end(), [kind](const RepairNote& n) { return n.kind == kind; });
}

PerceptResult mock_transcribe(const Utterance& utterance) {
  const auto ws = words(utterance.text);
  PerceptResult out{utterance.text, Emotion::Neutral, 0.5};
  if (has_word(ws, {"wonderful", "great", "happy"})) {
    out.emotion = Emotion::Joy;
  } else if (has_word(ws, {"tired", "sad", "late"})) {
    out.emotion = Emotion::Sadness;
  } else if (has_word(ws, {"guess"}) || has_phrase(ws, {"how", "many"}) ||
             utterance.text.find('?') != std::string::npos) {
    out.emotion = Emotion::Confusion;
  } else {
    return out;
  }
  out.confidence = 1.0;
  return out;
}

bool is_greeting(std::string_view transcript) {
  const auto ws = words(transcript);
  return has_word(ws, {"hi", "hello"}) || has_phrase(ws, {"how", "are", "you"});
}

std::string rule_sequence_text(const PerceptResult& percept) {
  if (is_greeting(percept.transcript)) return "[Waving][1][Joy][1]";
  switch (percept.emotion) {
    case Emotion::Joy: return "[Joy][1][Dancing][3]";
    case Emotion::Sadness: return "[Sadness][1][Hug][3]";
    case Emotion::Confusion: return "[Confusion][1]";
    case Emotion::Neutral: break;
  }
  return "[Waving][1]";
}

ResponderOutput rule_respond(const PerceptResult& percept, const GestureLibrary& library) {
  ResponderOutput out;
  out.raw_text = rule_sequence_text(percept);
  // A custom library may lack some of these gestures; drop rather than fail.
  out.sequence = resolve_sequence(parse_sequence(out.raw_text), library, ResolveMode::Repair);
  for (const auto& d : out.sequence.dropped) out.repairs.push_back({RepairKind::DroppedUnknown, d.message});
  return out;
}

std::optional<std::string> process_env(const std::string& name) {
  const char* value = std::getenv(name.c_str());
  if (value == nullptr) return std::nullopt;
  return std::string(value);
}

std::string build_system_prompt(const GestureLibrary& library) {
  std::string prompt =
      "You drive the gestures of a soft puppet robot that responds empathetically to what a person says.\n"
      "Compose a response using only these gestures:\n";
  for (const auto& [name, def] : library.gestures) {
    prompt += "- " + name + " (" + std::string(to_string(def.kind)) + ", " + format_number(def.nominal_duration_s) +
              " s)\n";
  }
  prompt +=
      "Reply with the action sequence only, no other text, in the form [Name][number][Name][number]...\n"
      "Names are letters, digits, spaces or underscores starting with a letter. Numbers are non-negative decimals "
      "in seconds.\n"
      "For discrete gestures the number is the pause after the gesture finishes; for continuous gestures it is the "
      "total time to keep performing it.\n";
  return prompt;
}

std::string build_user_prompt(const PerceptResult& percept) {
  char confidence[16];
  std::snprintf(confidence, sizeof confidence, "%.2f", percept.confidence);
  return "Transcript: " + percept.transcript + "\nVocal emotion estimate: " + std::string(to_string(percept.emotion)) +
         " (confidence " + confidence + ")";
}

nlohmann::json to_json(const PerceptResult& percept) {
  return {{"transcript", percept.transcript},
          {"emotion", to_string(percept.emotion)},
          {"confidence", percept.confidence}};
}

nlohmann::json to_json(const ResponderOutput& output) {
  nlohmann::json repairs = nlohmann::json::array();
  for (const auto& r : output.repairs) repairs.push_back({{"kind", to_string(r.kind)}, {"detail", r.detail}});
  return {{"raw", output.raw_text}, {"resolved", format_sequence(output.sequence.canonical())}, {"repairs", repairs}};
}

}  // namespace puppetai
