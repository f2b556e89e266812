#include <doctest.h>

#include <chrono>
#include <map>

#include "puppetai/perception.hpp"
#include "puppetai/stub_chat_server.hpp"

using namespace puppetai;

namespace {

struct Fixture {
  PuppetModel model = demo_model();
  GestureLibrary lib = builtin_library(model);
  std::map<std::string, std::string> env_vars{{kLlmKeyEnv, "test-key"}};

  EnvLookup env() const {
    return [vars = env_vars](const std::string& name) -> std::optional<std::string> {
      auto it = vars.find(name);
      if (it == vars.end()) return std::nullopt;
      return it->second;
    };
  }
  LlmClientConfig config(const std::string& url) const {
    LlmClientConfig c;
    c.endpoint_url = url;
    c.timeout_ms = 2000;
    return c;
  }
};

std::size_t count(const ResponderOutput& out, RepairKind kind) {
  std::size_t n = 0;
  for (const auto& r : out.repairs) n += r.kind == kind;
  return n;
}

const PerceptResult kSad{"I'm so tired", Emotion::Sadness, 1.0};

}  // namespace

TEST_CASE("well-formed reply is used as is") {
  Fixture f;
  StubChatServer stub({"[Hug][2]"});
  const auto out = llm_respond(kSad, f.lib, f.config(stub.url()), f.env());
  CHECK(format_sequence(out.sequence.canonical()) == "[Hug][2]");
  CHECK(out.repairs.empty());

  const auto reqs = stub.requests();
  REQUIRE(reqs.size() == 1u);
  CHECK(reqs[0]["model"] == "gpt-4o-mini");
  REQUIRE(reqs[0]["messages"].size() == 2u);
  CHECK(reqs[0]["messages"][0]["role"] == "system");
  CHECK(reqs[0]["messages"][1]["content"].get<std::string>().find("I'm so tired") != std::string::npos);
  CHECK(stub.authorization_headers().at(0) == "Bearer test-key");
}

TEST_CASE("malformed then valid: exactly one retry note") {
  Fixture f;
  StubChatServer stub({"Sure! Here you go: hug for a while", "[Sadness][1][Hug][3]"});
  const auto out = llm_respond(kSad, f.lib, f.config(stub.url()), f.env());
  CHECK(format_sequence(out.sequence.canonical()) == "[Sadness][1][Hug][3]");
  CHECK(count(out, RepairKind::Retry) == 1u);
  CHECK_FALSE(out.has_repair(RepairKind::FallbackUsed));
  const auto reqs = stub.requests();
  REQUIRE(reqs.size() == 2u);
  // The follow-up carries the bad reply and a correction.
  CHECK(reqs[1]["messages"].size() == 4u);
  CHECK(reqs[1]["messages"][2]["role"] == "assistant");
}

TEST_CASE("unknown names are dropped") {
  Fixture f;
  StubChatServer stub({"[Hug][2][Moonwalk][1]"});
  const auto out = llm_respond(kSad, f.lib, f.config(stub.url()), f.env());
  CHECK(format_sequence(out.sequence.canonical()) == "[Hug][2]");
  CHECK(count(out, RepairKind::DroppedUnknown) == 1u);
}

TEST_CASE("all unknown is retried then falls back") {
  Fixture f;
  StubChatServer stub({"[Moonwalk][1]"});
  auto cfg = f.config(stub.url());
  cfg.max_retries = 2;
  const auto out = llm_respond(kSad, f.lib, cfg, f.env());
  CHECK(stub.requests().size() == 3u);
  CHECK(count(out, RepairKind::Retry) == 2u);
  CHECK(out.has_repair(RepairKind::FallbackUsed));
  CHECK(format_sequence(out.sequence.canonical()) == "[Sadness][1][Hug][3]");
}

TEST_CASE("unreachable endpoint falls back to rules") {
  Fixture f;
  int port = 0;
  {
    StubChatServer probe({"x"});
    port = probe.port();
  }
  const auto out = llm_respond(kSad, f.lib, f.config("http://127.0.0.1:" + std::to_string(port) + "/v1/chat"), f.env());
  CHECK(out.has_repair(RepairKind::FallbackUsed));
  CHECK(out.has_repair(RepairKind::TransportError));
  CHECK(format_sequence(out.sequence.canonical()) == "[Sadness][1][Hug][3]");
}

TEST_CASE("slow service times out and falls back") {
  Fixture f;
  StubChatServer stub({"[Hug][2]"});
  stub.set_delay(std::chrono::milliseconds(1500));
  auto cfg = f.config(stub.url());
  cfg.timeout_ms = 300;
  const auto t0 = std::chrono::steady_clock::now();
  const auto out = llm_respond(kSad, f.lib, cfg, f.env());
  const auto took = std::chrono::steady_clock::now() - t0;
  CHECK(out.has_repair(RepairKind::Timeout));
  CHECK(out.has_repair(RepairKind::FallbackUsed));
  CHECK(took < std::chrono::milliseconds(1400));
}

TEST_CASE("missing key falls back without a request") {
  Fixture f;
  f.env_vars.clear();
  StubChatServer stub({"[Hug][2]"});
  const auto out = llm_respond(kSad, f.lib, f.config(stub.url()), f.env());
  CHECK(out.has_repair(RepairKind::AuthMissing));
  CHECK(out.has_repair(RepairKind::FallbackUsed));
  CHECK(stub.requests().empty());
}

TEST_CASE("auth can be disabled") {
  Fixture f;
  f.env_vars.clear();
  StubChatServer stub({"[Joy][1]"});
  auto cfg = f.config(stub.url());
  cfg.auth_token_ref.clear();
  const auto out = llm_respond(kSad, f.lib, cfg, f.env());
  CHECK(out.repairs.empty());
  CHECK(stub.authorization_headers().at(0).empty());
}

TEST_CASE("endpoint from the environment") {
  Fixture f;
  StubChatServer stub({"[Joy][1]"});
  f.env_vars[kLlmEndpointEnv] = stub.url();
  const auto out = llm_respond(kSad, f.lib, f.config(""), f.env());
  CHECK(format_sequence(out.sequence.canonical()) == "[Joy][1]");

  f.env_vars.erase(kLlmEndpointEnv);
  const auto none = llm_respond(kSad, f.lib, f.config(""), f.env());
  CHECK(none.has_repair(RepairKind::FallbackUsed));
}
