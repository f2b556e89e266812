#include <doctest.h>

#include <cmath>
#include <random>

#include "puppetai/scheduler.hpp"

using namespace puppetai;

namespace {

struct Fixture {
  PuppetModel model = demo_model();
  GestureLibrary lib = builtin_library(model);

  ResolvedSequence seq(const std::string& text) const { return resolve_sequence(parse_sequence(text), lib); }
};

// Ticks until SequenceFinished (inclusive) and the collected events.
std::pair<int, std::vector<SchedulerEvent>> run_to_end(SchedulerState s, const Fixture& f, double dt,
                                                       std::vector<BendState>* poses = nullptr) {
  std::vector<SchedulerEvent> events;
  for (int tick = 1; tick < 100000; ++tick) {
    auto step = scheduler_tick(s, f.lib, f.model, dt);
    if (poses) poses->push_back(step.target);
    events.insert(events.end(), step.events.begin(), step.events.end());
    s = step.state;
    if (!step.events.empty() && step.events.back().kind == SchedulerEvent::Kind::SequenceFinished)
      return {tick, events};
  }
  return {-1, events};
}

}  // namespace

TEST_CASE("neutral pose") {
  Fixture f;
  const BendState n = neutral_pose(f.model, f.lib);
  CHECK(n.size() == 6u);
  CHECK(n.at({"left_arm", "vertical"}) == 50.0);
  CHECK(n.at({"body", "lateral"}) == 0.0);
}

TEST_CASE("greeting runs for its analytic duration with ordered events") {
  Fixture f;
  const auto [ticks, events] = run_to_end(install_sequence(f.seq("[Waving][1][Joy][1]"), f.lib, f.model, 50.0), f, 0.02);
  CHECK(ticks == 275);
  using K = SchedulerEvent::Kind;
  const std::vector<SchedulerEvent> expected{{K::GestureStarted, "Waving", 0}, {K::GestureFinished, "Waving", 0},
                                             {K::GestureStarted, "Joy", 1},    {K::GestureFinished, "Joy", 1},
                                             {K::SequenceFinished, "", 0}};
  CHECK(events == expected);
}

TEST_CASE("completion tick matches analytic duration for random schedules") {
  Fixture f;
  std::mt19937_64 rng(21);
  const auto names = f.lib.names();
  for (int n = 0; n < 100; ++n) {
    std::string text;
    const int count = 1 + static_cast<int>(rng() % 4);
    for (int i = 0; i < count; ++i)
      text += "[" + names[rng() % names.size()] + "][" + format_number(static_cast<double>(rng() % 400) / 100.0) + "]";
    const ResolvedSequence seq = f.seq(text);
    const double duration = schedule_duration(build_schedule(seq, f.lib));
    if (duration == 0.0) continue;
    const int ticks = run_to_end(install_sequence(seq, f.lib, f.model, 50.0), f, 0.02).first;
    const int expected = static_cast<int>(std::ceil(duration / 0.02));
    CHECK_MESSAGE(std::abs(ticks - expected) <= 1, text);
  }
}

TEST_CASE("pauses hold neutral and continuous items loop") {
  Fixture f;
  std::vector<BendState> poses;
  run_to_end(install_sequence(f.seq("[Joy][1][Dancing][3]"), f.lib, f.model, 50.0), f, 0.02, &poses);
  REQUIRE(poses.size() == 275u);
  const BendState n = neutral_pose(f.model, f.lib);
  for (int k = 76; k < 125; ++k) CHECK(poses[k] == n);  // 1.5 s .. 2.5 s
  // Dancing starts at 2.5 s with a 2 s period.
  for (int k = 125; k < 150; ++k) CHECK(poses[k] == poses[k + 100]);
}

TEST_CASE("entries shorter than a tick are still reported") {
  Fixture f;
  f.lib = load_library(nlohmann::json::parse(R"({"gestures": [
    {"name": "Blink", "kind": "discrete", "duration_s": 0.005, "keyframes": [
      {"t_s": 0.0, "targets": {"body": {"sagittal": 0}}}, {"t_s": 0.005, "targets": {"body": {"sagittal": 1}}}]},
    {"name": "Lean", "kind": "discrete", "duration_s": 0.5, "keyframes": [
      {"t_s": 0.0, "targets": {"body": {"sagittal": 0}}}, {"t_s": 0.5, "targets": {"body": {"sagittal": 10}}}]}]})"));
  const auto [ticks, events] =
      run_to_end(install_sequence(f.seq("[Lean][0][Blink][0][Lean][0][Blink][0]"), f.lib, f.model, 50.0), f, 0.02);
  using K = SchedulerEvent::Kind;
  const std::vector<SchedulerEvent> expected{
      {K::GestureStarted, "Lean", 0},  {K::GestureFinished, "Lean", 0}, {K::GestureStarted, "Blink", 1},
      {K::GestureFinished, "Blink", 1}, {K::GestureStarted, "Lean", 2}, {K::GestureFinished, "Lean", 2},
      {K::GestureStarted, "Blink", 3}, {K::GestureFinished, "Blink", 3}, {K::SequenceFinished, "", 0}};
  CHECK(events == expected);
  CHECK(ticks == static_cast<int>(std::ceil(1.01 / 0.02)));
}

TEST_CASE("preemption blends linearly into the new sequence") {
  Fixture f;
  BendState from = neutral_pose(f.model, f.lib);
  from[{"right_arm", "vertical"}] = 140.0;
  SchedulerState s = preempt_sequence(f.seq("[Sadness][0]"), from, f.lib, f.model, 50.0, 0.02);
  CHECK(s.status == SchedulerStatus::Blending);
  CHECK(s.blend_ticks_total == 15);
  const BendState first = install_sequence(f.seq("[Sadness][0]"), f.lib, f.model, 50.0).trajectories.at("Sadness")->samples[0];
  for (int k = 1; k <= 15; ++k) {
    auto step = scheduler_tick(s, f.lib, f.model, 0.02);
    const double a = k / 15.0;
    CHECK(step.target.at({"right_arm", "vertical"}) ==
          doctest::Approx(140.0 + (first.at({"right_arm", "vertical"}) - 140.0) * a));
    s = step.state;
  }
  CHECK(s.status == SchedulerStatus::Running);
  CHECK(s.cursor_s == 0.0);
}

TEST_CASE("idle scheduler holds neutral") {
  Fixture f;
  SchedulerState s;
  const auto step = scheduler_tick(s, f.lib, f.model, 0.02);
  CHECK(step.target == neutral_pose(f.model, f.lib));
  CHECK(step.events.empty());
  CHECK_THROWS_AS(scheduler_tick(s, f.lib, f.model, 0.0), Error);
  CHECK(install_sequence(f.seq("[Dancing][0]"), f.lib, f.model, 50.0).status == SchedulerStatus::Done);
}
