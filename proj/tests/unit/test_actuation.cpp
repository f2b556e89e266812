#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "puppetai/actuation.hpp"

using namespace puppetai;

namespace {

std::vector<MotorChannelConfig> demo_channels_local() {
  std::vector<MotorChannelConfig> out;
  ChannelId id = 1;
  for (const PlaneRef& ref : all_planes(demo_model())) {
    MotorChannelConfig c;
    c.channel_id = id++;
    c.target = ref;
    out.push_back(c);
  }
  return out;
}

}  // namespace

TEST_CASE("phase shifted drive equals per-channel sinusoid") {
  const SinusoidSpec base{3.0, 0.7, 0.2, 1.5};
  const std::vector<PhasedChannel> chans{{1, 0.0}, {2, std::numbers::pi / 2}, {3, std::numbers::pi}, {4, -1.1}};
  for (double t = 0.0; t < 5.0; t += 0.013) {
    const auto cmds = phased_sinusoid_commands(base, chans, t);
    REQUIRE(cmds.size() == chans.size());
    for (std::size_t i = 0; i < chans.size(); ++i) {
      const double expected =
          1.5 + 3.0 * std::sin(2.0 * std::numbers::pi * 0.7 * t + 0.2 + chans[i].phase_offset_rad);
      CHECK(cmds[i].channel_id == chans[i].channel_id);
      CHECK(std::abs(cmds[i].target_displacement_mm - expected) <= 1e-12);
    }
  }
}

TEST_CASE("channel validation") {
  auto chans = demo_channels_local();
  const PuppetModel m = demo_model();
  CHECK(validate_channels(chans, &m).empty());
  chans[1].channel_id = chans[0].channel_id;
  chans[2].velocity_limit_mm_s = 0.0;
  chans[3].target = {"body", "twist"};
  const auto d = validate_channels(chans, &m);
  auto has = [&](Errc c) { return std::any_of(d.begin(), d.end(), [&](const Diagnostic& x) { return x.code == c; }); };
  CHECK(has(Errc::DuplicateChannel));
  CHECK(has(Errc::InvalidChannel));
  CHECK(has(Errc::CrossRefError));
}

TEST_CASE("bend to command mapping") {
  const PuppetModel m = demo_model();
  auto chans = demo_channels_local();
  const BendState s{{{"left_arm", "vertical"}, 150.0}, {{"body", "sagittal"}, -30.0}};
  const auto cmds = map_bend_to_commands(m, chans, s);
  REQUIRE(cmds.size() == chans.size());
  for (std::size_t i = 0; i < chans.size(); ++i) {
    CHECK(cmds[i].channel_id == chans[i].channel_id);
    const auto it = s.find(chans[i].target);
    const double deg = it == s.end() ? 0.0 : it->second;
    CHECK(cmds[i].target_displacement_mm == doctest::Approx(8.0 * deg * std::numbers::pi / 180.0));
  }

  const auto lateral = static_cast<std::size_t>(
      std::find_if(chans.begin(), chans.end(), [](const auto& c) { return c.target == PlaneRef{"body", "lateral"}; }) -
      chans.begin());
  REQUIRE(lateral < chans.size());
  chans[lateral].displacement_limit_mm = 1.0;
  auto clamped = map_bend_to_commands(m, chans, {{{"body", "lateral"}, 40.0}});
  CHECK(clamped[lateral].target_displacement_mm == 1.0);
  clamped = map_bend_to_commands(m, chans, {{{"body", "lateral"}, -40.0}});
  CHECK(clamped[lateral].target_displacement_mm == -1.0);

  std::vector<MotorChannelConfig> partial(chans.begin(), chans.begin() + 2);
  CHECK_THROWS_AS(map_bend_to_commands(m, partial, s), Error);
  CHECK_NOTHROW(map_bend_to_commands(m, partial, s, UnmappedPolicy::Ignore));
  CHECK_NOTHROW(map_bend_to_commands(m, partial, {{{"left_arm", "vertical"}, 0.0}}));
  CHECK_THROWS_AS(map_bend_to_commands(m, chans, {{{"left_arm", "vertical"}, 200.0}}), Error);
}

TEST_CASE("rate limit holds over long random runs") {
  std::vector<MotorChannelConfig> cfgs(3);
  for (int i = 0; i < 3; ++i) {
    cfgs[i].channel_id = static_cast<ChannelId>(i);
    cfgs[i].velocity_limit_mm_s = 20.0 + 30.0 * i;
    cfgs[i].torque_limit = 1e9;
  }
  SimState s = SimState::from_configs(cfgs);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> target(-25.0, 25.0);
  const double dt = 0.02;
  for (int step = 0; step < 20000; ++step) {
    std::vector<MotorCommand> cmds;
    for (int i = 0; i < 3; ++i) cmds.push_back({static_cast<ChannelId>(i), target(rng)});
    const auto r = step_sim(s, cmds, dt);
    for (int i = 0; i < 3; ++i) {
      const double moved = std::abs(r.state.channels[i].position_mm - s.channels[i].position_mm);
      CHECK(moved <= cfgs[i].velocity_limit_mm_s * dt + 1e-12);
    }
    s = r.state;
  }
}

TEST_CASE("torque fault latches in the same step and holds") {
  MotorChannelConfig c;
  c.channel_id = 4;
  c.torque_limit = 5.0;
  c.torque_gain = 1.0;
  SimState s = SimState::from_configs(std::vector{c});
  const std::vector<MotorCommand> small{{4, 3.0}};
  auto r = step_sim(s, small, 0.02);
  CHECK_FALSE(r.telemetry[0].faulted);
  const double held = r.state.channels[0].position_mm;
  const std::vector<MotorCommand> far{{4, held + 6.0}};
  r = step_sim(r.state, far, 0.02);
  CHECK(r.telemetry[0].faulted);
  CHECK(r.new_faults == std::vector<ChannelId>{4});
  CHECK(r.state.channels[0].position_mm == held);
  for (int i = 0; i < 10; ++i) {
    r = step_sim(r.state, small, 0.02);
    CHECK(r.telemetry[0].faulted);
    CHECK(r.new_faults.empty());
    CHECK(r.state.channels[0].position_mm == held);
  }
  SimState cleared = reset_faults(r.state);
  r = step_sim(cleared, small, 0.02);
  CHECK_FALSE(r.telemetry[0].faulted);
}

TEST_CASE("sim is deterministic and validates input") {
  std::vector<MotorChannelConfig> cfgs(2);
  cfgs[1].channel_id = 1;
  auto run = [&] {
    SimState s = SimState::from_configs(cfgs);
    std::vector<ChannelTelemetry> all;
    for (int k = 0; k < 500; ++k) {
      const std::vector<MotorCommand> cmds{{0, std::sin(k * 0.1) * 10.0}, {1, std::cos(k * 0.07) * 12.0}};
      auto r = step_sim(s, cmds, 0.02);
      all.insert(all.end(), r.telemetry.begin(), r.telemetry.end());
      s = r.state;
    }
    return all;
  };
  CHECK(run() == run());
  SimState s = SimState::from_configs(cfgs);
  const std::vector<MotorCommand> bad{{9, 1.0}};
  CHECK_THROWS_AS(step_sim(s, bad, 0.02), Error);
  CHECK_THROWS_AS(step_sim(s, {}, 0.0), Error);
  CHECK_THROWS_AS(inject_fault(s, 9), Error);
  CHECK(inject_fault(s, 1).channels[1].faulted);
}
