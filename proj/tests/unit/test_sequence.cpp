#include <doctest.h>

#include <cmath>
#include <random>

#include "puppetai/sequence.hpp"

using namespace puppetai;

namespace {

struct ParseFailure {
  Errc code;
  std::size_t offset;
};

ParseFailure parse_failure(std::string_view text) {
  try {
    parse_sequence(text);
  } catch (const Error& e) {
    return {e.code(), e.offset().value_or(9999)};
  }
  FAIL("expected a parse error for '" << std::string(text) << "'");
  return {Errc::InvalidArgument, 0};
}

std::vector<SequenceItem> items(std::initializer_list<SequenceItem> list) { return list; }

}  // namespace

TEST_CASE("scenario sequences parse to their item lists") {
  CHECK(parse_sequence("[Waving][1][Joy][1]").items == items({{"Waving", 1.0}, {"Joy", 1.0}}));
  CHECK(parse_sequence("[Joy][1][Dancing][3]").items == items({{"Joy", 1.0}, {"Dancing", 3.0}}));
  CHECK(parse_sequence("[Sadness][1][Hug][3]").items == items({{"Sadness", 1.0}, {"Hug", 3.0}}));
  CHECK(parse_sequence("[Confusion][1]").items == items({{"Confusion", 1.0}}));
}

TEST_CASE("whitespace and decimals") {
  const auto seq = parse_sequence("  [ Joy ][ 0.25 ]\n\t[Big Wave_2][10]  ");
  CHECK(seq.items == items({{"Joy", 0.25}, {"Big Wave_2", 10.0}}));
  CHECK(format_sequence(seq) == "[Joy][0.25][Big Wave_2][10]");
}

TEST_CASE("parse errors carry offsets") {
  auto f = parse_failure("[Joy][]");
  CHECK(f.code == Errc::MissingNumber);
  CHECK(f.offset == 6);
  f = parse_failure("");
  CHECK(f.code == Errc::EmptyInput);
  f = parse_failure("   ");
  CHECK(f.code == Errc::EmptyInput);
  f = parse_failure("[Joy][1");
  CHECK(f.code == Errc::UnbalancedBracket);
  CHECK(f.offset == 5);
  f = parse_failure("[Joy[1]");
  CHECK(f.code == Errc::UnbalancedBracket);
  f = parse_failure("[Joy]");
  CHECK(f.code == Errc::MissingNumber);
  CHECK(f.offset == 5);
  f = parse_failure("[Joy] [1]");
  CHECK(f.code == Errc::MissingNumber);
  f = parse_failure("[Joy][-1]");
  CHECK(f.code == Errc::BadNumber);
  CHECK(f.offset == 6);
  f = parse_failure("[Joy][1.]");
  CHECK(f.code == Errc::BadNumber);
  f = parse_failure("[Joy][1e3]");
  CHECK(f.code == Errc::BadNumber);
  f = parse_failure("[Joy][1]x");
  CHECK(f.code == Errc::TrailingGarbage);
  CHECK(f.offset == 8);
  f = parse_failure("hello [Joy][1]");
  CHECK(f.code == Errc::TrailingGarbage);
  CHECK(f.offset == 0);
  f = parse_failure("[9Lives][1]");
  CHECK(f.code == Errc::BadName);
  CHECK(f.offset == 1);
  f = parse_failure("[][1]");
  CHECK(f.code == Errc::BadName);
}

TEST_CASE("number formatting is shortest round-trip fixed") {
  CHECK(format_number(1.0) == "1");
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(3.25) == "3.25");
  CHECK(format_number(0.0) == "0");
  CHECK(format_number(1e-7) == "0.0000001");
  CHECK_THROWS_AS(format_number(-1.0), Error);
  CHECK_THROWS_AS(format_number(NAN), Error);
}

TEST_CASE("format then parse is the identity on generated sequences") {
  std::mt19937_64 rng(8);
  const std::string first = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz";
  const std::string rest = first + "0123456789_ ";
  for (int n = 0; n < 1000; ++n) {
    ActionSequence seq;
    const int count = 1 + static_cast<int>(rng() % 6);
    for (int i = 0; i < count; ++i) {
      std::string name(1, first[rng() % first.size()]);
      const int len = static_cast<int>(rng() % 10);
      for (int k = 0; k < len; ++k) name += rest[rng() % rest.size()];
      while (name.back() == ' ') name.pop_back();
      double number;
      switch (rng() % 3) {
        case 0: number = static_cast<double>(rng() % 20); break;
        case 1: number = static_cast<double>(rng() % 100000) / 1000.0; break;
        default: number = std::ldexp(static_cast<double>(rng() >> 11), -50);
      }
      seq.items.push_back({name, number});
    }
    const std::string text = format_sequence(seq);
    const ActionSequence back = parse_sequence(text);
    CHECK(back == seq);
    CHECK(format_sequence(back) == text);
  }
}

TEST_CASE("random input never crashes the parser") {
  std::mt19937_64 rng(12);
  const std::string alphabet = "[]0123456789. JoyWavng_\t\n-x";
  for (int n = 0; n < 20000; ++n) {
    std::string text;
    const int len = static_cast<int>(rng() % 24);
    for (int k = 0; k < len; ++k)
      text += (rng() % 8 == 0) ? static_cast<char>(rng() & 0xFF) : alphabet[rng() % alphabet.size()];
    try {
      const ActionSequence seq = parse_sequence(text);
      CHECK(parse_sequence(format_sequence(seq)) == seq);
    } catch (const Error& e) {
      CHECK(e.offset().has_value());
      CHECK(*e.offset() <= text.size());
    }
  }
}

TEST_CASE("resolution against the builtin library") {
  const GestureLibrary lib = builtin_library(demo_model());
  const auto r = resolve_sequence(parse_sequence("[happy][1][DANCING][3]"), lib);
  REQUIRE(r.items.size() == 2u);
  CHECK(r.items[0].gesture == "Joy");
  CHECK(r.items[1].gesture == "Dancing");
  CHECK(r.items[1].kind == GestureKind::Continuous);
  CHECK(format_sequence(r.canonical()) == "[Joy][1][Dancing][3]");

  try {
    resolve_sequence(parse_sequence("[Joy][1][Moonwalk][2][Flip][1]"), lib);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnknownGesture);
    CHECK(e.offset() == std::optional<std::size_t>(1));
    CHECK(e.diagnostics().size() == 2u);
  }
  const auto repaired = resolve_sequence(parse_sequence("[Joy][1][Moonwalk][2]"), lib, ResolveMode::Repair);
  CHECK(repaired.items.size() == 1u);
  CHECK(repaired.dropped.size() == 1u);
}

TEST_CASE("schedule construction") {
  const GestureLibrary lib = builtin_library(demo_model());
  const auto greet = build_schedule(resolve_sequence(parse_sequence("[Waving][1][Joy][1]"), lib), lib);
  REQUIRE(greet.size() == 4u);
  CHECK(greet[0] == ScheduleEntry{"Waving", 0.0, 2.0, SchedulePhase::Play, 0});
  CHECK(greet[1] == ScheduleEntry{"Waving", 2.0, 3.0, SchedulePhase::Pause, 0});
  CHECK(greet[2] == ScheduleEntry{"Joy", 3.0, 4.5, SchedulePhase::Play, 1});
  CHECK(greet[3] == ScheduleEntry{"Joy", 4.5, 5.5, SchedulePhase::Pause, 1});
  CHECK(schedule_duration(greet) == 5.5);

  const auto dance = build_schedule(resolve_sequence(parse_sequence("[Joy][0][Dancing][3]"), lib), lib);
  REQUIRE(dance.size() == 2u);
  CHECK(dance[1] == ScheduleEntry{"Dancing", 1.5, 4.5, SchedulePhase::Play, 1});
  CHECK(build_schedule(resolve_sequence(parse_sequence("[Dancing][0]"), lib), lib).empty());
}
