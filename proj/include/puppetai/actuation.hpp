#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "puppetai/kinematics.hpp"

namespace puppetai {

using ChannelId = std::uint8_t;

struct MotorChannelConfig {
  ChannelId channel_id = 0;
  PlaneRef target;
  double displacement_limit_mm = 25.0;
  double velocity_limit_mm_s = 100.0;
  double torque_limit = 30.0;
  double torque_gain = 1.0;  // torque units per mm of tracking error

  bool operator==(const MotorChannelConfig&) const = default;
};

// Checks unique ids, positive limits, and (with a model) that every target
// plane exists.
std::vector<Diagnostic> validate_channels(std::span<const MotorChannelConfig> channels, const PuppetModel* model = nullptr);

struct SinusoidSpec {
  double amplitude_mm = 0.0;
  double freq_hz = 0.0;
  double phase_rad = 0.0;
  double offset_mm = 0.0;
};

double evaluate_sinusoid(const SinusoidSpec& spec, double t_s);

struct MotorCommand {
  ChannelId channel_id = 0;
  double target_displacement_mm = 0.0;

  bool operator==(const MotorCommand&) const = default;
};

// Phase-shifted drive: every channel follows `base` with its own phase
// offset added.
struct PhasedChannel {
  ChannelId channel_id = 0;
  double phase_offset_rad = 0.0;
};
std::vector<MotorCommand> phased_sinusoid_commands(const SinusoidSpec& base, std::span<const PhasedChannel> channels,
                                                   double t_s);

enum class UnmappedPolicy { Error, Ignore };

// One command per channel, in channel order. Targets are the cable
// displacement of the driven plane clamped to +/- displacement_limit_mm.
std::vector<MotorCommand> map_bend_to_commands(const PuppetModel& model, std::span<const MotorChannelConfig> channels,
                                               const BendState& state,
                                               UnmappedPolicy policy = UnmappedPolicy::Error);

struct ChannelTelemetry {
  ChannelId channel_id = 0;
  double position_mm = 0.0;
  double velocity_mm_s = 0.0;
  double torque_estimate = 0.0;
  bool faulted = false;

  bool operator==(const ChannelTelemetry&) const = default;
};

struct ChannelSimState {
  MotorChannelConfig config;
  double position_mm = 0.0;
  double velocity_mm_s = 0.0;
  double target_mm = 0.0;
  double torque_estimate = 0.0;
  bool faulted = false;

  bool operator==(const ChannelSimState&) const = default;
};

// State of the simulated motor base. Value type; advanced only by step_sim.
struct SimState {
  std::vector<ChannelSimState> channels;

  static SimState from_configs(std::span<const MotorChannelConfig> configs);
  ChannelSimState* find(ChannelId id) noexcept;
  const ChannelSimState* find(ChannelId id) const noexcept;
  bool operator==(const SimState&) const = default;
};

struct SimStepResult {
  SimState state;
  std::vector<ChannelTelemetry> telemetry;
  std::vector<ChannelId> new_faults;  // channels that latched during this step
};

// Rate-limited first-order tracking. The torque estimate is
// torque_gain * |target - position| taken before the move; above
// torque_limit the channel latches faulted and holds its position.
// Channels without a command keep their previous target.
SimStepResult step_sim(const SimState& state, std::span<const MotorCommand> commands, double dt_s);

SimState reset_faults(SimState state);
SimState inject_fault(SimState state, ChannelId channel);

}  // namespace puppetai
