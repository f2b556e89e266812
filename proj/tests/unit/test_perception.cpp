#include <doctest.h>

#include "puppetai/perception.hpp"

using namespace puppetai;

namespace {

struct Fixture {
  PuppetModel model = demo_model();
  GestureLibrary lib = builtin_library(model);
};

}  // namespace

TEST_CASE("mock transcriber keyword table") {
  CHECK(mock_transcribe({"I feel wonderful today"}).emotion == Emotion::Joy);
  CHECK(mock_transcribe({"GREAT news"}).emotion == Emotion::Joy);
  CHECK(mock_transcribe({"I am so tired, I stayed up late"}).emotion == Emotion::Sadness);
  CHECK(mock_transcribe({"Guess how many fingers"}).emotion == Emotion::Confusion);
  CHECK(mock_transcribe({"what is this?"}).emotion == Emotion::Confusion);

  const auto neutral = mock_transcribe({"the sky"});
  CHECK(neutral.emotion == Emotion::Neutral);
  CHECK(neutral.confidence == doctest::Approx(0.5));
  CHECK(mock_transcribe({"happy"}).confidence == doctest::Approx(1.0));
  CHECK(mock_transcribe({"the sky"}).transcript == "the sky");
}

TEST_CASE("keywords match whole words only") {
  CHECK(mock_transcribe({"unhappy-ish"}).emotion != Emotion::Joy);
  CHECK(mock_transcribe({"greatest"}).emotion == Emotion::Neutral);
}

TEST_CASE("rule responder mapping") {
  Fixture f;
  auto seq_for = [&](const std::string& text) {
    return format_sequence(rule_respond(mock_transcribe({text}), f.lib).sequence.canonical());
  };
  CHECK(seq_for("Hi, how are you") == "[Waving][1][Joy][1]");
  CHECK(seq_for("I got a new job, I'm so happy") == "[Joy][1][Dancing][3]");
  CHECK(seq_for("I'm so tired") == "[Sadness][1][Hug][3]");
  CHECK(seq_for("Guess what I have in my hand") == "[Confusion][1]");
  CHECK(seq_for("the sky") == "[Waving][1]");
}

TEST_CASE("greeting wins over emotion") {
  CHECK(is_greeting("hello, I'm happy"));
  CHECK(rule_sequence_text({"hello, I'm happy", Emotion::Joy, 1.0}) == "[Waving][1][Joy][1]");
  CHECK_FALSE(is_greeting("chill"));
}

TEST_CASE("rule responder drops gestures missing from a custom library") {
  Fixture f;
  GestureLibrary small = f.lib;
  small.gestures.erase("Dancing");
  const auto out = rule_respond({"great", Emotion::Joy, 1.0}, small);
  CHECK(format_sequence(out.sequence.canonical()) == "[Joy][1]");
  CHECK(out.has_repair(RepairKind::DroppedUnknown));
}

TEST_CASE("system prompt lists each gesture once with its kind") {
  Fixture f;
  const std::string prompt = build_system_prompt(f.lib);
  for (const auto& [name, def] : f.lib.gestures) {
    const std::string line = "- " + name + " (" + std::string(to_string(def.kind));
    const auto first = prompt.find(line);
    REQUIRE(first != std::string::npos);
    CHECK(prompt.find(line, first + 1) == std::string::npos);
  }
  CHECK(prompt.find("[Name][number]") != std::string::npos);
}

TEST_CASE("user prompt carries transcript and emotion") {
  const auto p = build_user_prompt({"I'm so tired", Emotion::Sadness, 1.0});
  CHECK(p.find("I'm so tired") != std::string::npos);
  CHECK(p.find("sadness") != std::string::npos);
  CHECK(p.find("1.00") != std::string::npos);
}

TEST_CASE("emotion names round trip") {
  for (auto e : {Emotion::Joy, Emotion::Sadness, Emotion::Neutral, Emotion::Confusion})
    CHECK(emotion_from_string(to_string(e)) == e);
  CHECK_FALSE(emotion_from_string("Anger").has_value());
}

TEST_CASE("responder output json") {
  Fixture f;
  const auto j = to_json(rule_respond({"sad", Emotion::Sadness, 1.0}, f.lib));
  CHECK(j["raw"] == "[Sadness][1][Hug][3]");
  CHECK(j["resolved"] == "[Sadness][1][Hug][3]");
  CHECK(j["repairs"].empty());
}
