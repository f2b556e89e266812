#include "puppetai/actuation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace puppetai {

std::vector<Diagnostic> validate_channels(std::span<const MotorChannelConfig> channels, const PuppetModel* model) {
  std::vector<Diagnostic> diags;
  std::set<int> ids;
  std::set<PlaneRef> targets;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    const auto& ch = channels[i];
    const std::string path = "channels/" + std::to_string(i);
    if (!ids.insert(ch.channel_id).second)
      diags.push_back({Errc::DuplicateChannel, path, "channel id " + std::to_string(ch.channel_id) + " repeated"});
    if (!(ch.displacement_limit_mm > 0.0 && ch.velocity_limit_mm_s > 0.0 && ch.torque_limit > 0.0 &&
          ch.torque_gain > 0.0))
      diags.push_back({Errc::InvalidChannel, path, "limits and gain must be positive"});
    if (!targets.insert(ch.target).second)
      diags.push_back({Errc::InvalidChannel, path, "plane " + ch.target.str() + " driven by two channels"});
    if (model != nullptr) {
      try {
        locate_plane(*model, ch.target);
      } catch (const Error& e) {
        diags.push_back({Errc::CrossRefError, path + "/target", e.what()});
      }
    }
  }
  return diags;
}

double evaluate_sinusoid(const SinusoidSpec& spec, double t_s) {
  return spec.amplitude_mm * std::sin(2.0 * std::numbers::pi * spec.freq_hz * t_s + spec.phase_rad) + spec.offset_mm;
}

std::vector<MotorCommand> phased_sinusoid_commands(const SinusoidSpec& base, std::span<const PhasedChannel> channels,
                                                   double t_s) {
  std::vector<MotorCommand> out;
  out.reserve(channels.size());
  for (const auto& ch : channels) {
    SinusoidSpec spec = base;
    spec.phase_rad += ch.phase_offset_rad;
    out.push_back({ch.channel_id, evaluate_sinusoid(spec, t_s)});
  }
  return out;
}

std::vector<MotorCommand> map_bend_to_commands(const PuppetModel& model, std::span<const MotorChannelConfig> channels,
                                               const BendState& state, UnmappedPolicy policy) {
  check_state(model, state);
  if (policy == UnmappedPolicy::Error) {
    for (const auto& [ref, angle] : state) {
      if (angle == 0.0) continue;
      const bool mapped = std::any_of(channels.begin(), channels.end(),
                                      [&](const MotorChannelConfig& c) { return c.target == ref; });
      if (!mapped) throw Error(Errc::UnmappedPlane, "no channel drives " + ref.str());
    }
  }

  std::vector<MotorCommand> out;
  out.reserve(channels.size());
  for (const auto& ch : channels) {
    const auto loc = locate_plane(model, ch.target);
    const auto it = state.find(ch.target);
    const double bend = it == state.end() ? 0.0 : clamp_bend(*loc.segment, ch.target.plane, it->second);
    const double displacement = cable_displacement(*loc.segment, ch.target.plane, bend);
    out.push_back({ch.channel_id, std::clamp(displacement, -ch.displacement_limit_mm, ch.displacement_limit_mm)});
  }
  return out;
}

SimState SimState::from_configs(std::span<const MotorChannelConfig> configs) {
  SimState s;
  for (const auto& c : configs) s.channels.push_back(ChannelSimState{c});
  return s;
}

ChannelSimState* SimState::find(ChannelId id) noexcept {
  for (auto& ch : channels)
    if (ch.config.channel_id == id) return &ch;
  return nullptr;
}

const ChannelSimState* SimState::find(ChannelId id) const noexcept {
  for (const auto& ch : channels)
    if (ch.config.channel_id == id) return &ch;
  return nullptr;
}

SimStepResult step_sim(const SimState& state, std::span<const MotorCommand> commands, double dt_s) {
  if (!(dt_s > 0.0)) throw Error(Errc::InvalidArgument, "dt must be positive");
  SimStepResult result{state, {}, {}};
  for (const auto& cmd : commands) {
    ChannelSimState* ch = result.state.find(cmd.channel_id);
    if (ch == nullptr) throw Error(Errc::UnknownChannel, "unknown channel " + std::to_string(cmd.channel_id));
    ch->target_mm = cmd.target_displacement_mm;
  }

  result.telemetry.reserve(result.state.channels.size());
  for (auto& ch : result.state.channels) {
    if (!ch.faulted) {
      const double error = ch.target_mm - ch.position_mm;
      ch.torque_estimate = ch.config.torque_gain * std::abs(error);
      if (ch.torque_estimate > ch.config.torque_limit) {
        ch.faulted = true;
        ch.velocity_mm_s = 0.0;
        result.new_faults.push_back(ch.config.channel_id);
      } else {
        const double max_step = ch.config.velocity_limit_mm_s * dt_s;
        const double step = std::clamp(error, -max_step, max_step);
        const double previous = ch.position_mm;
        ch.position_mm = std::abs(error) <= max_step ? ch.target_mm : previous + step;
        ch.velocity_mm_s = (ch.position_mm - previous) / dt_s;
      }
    }
    result.telemetry.push_back(
        {ch.config.channel_id, ch.position_mm, ch.faulted ? 0.0 : ch.velocity_mm_s, ch.torque_estimate, ch.faulted});
  }
  return result;
}

SimState reset_faults(SimState state) {
  for (auto& ch : state.channels) {
    ch.faulted = false;
    ch.velocity_mm_s = 0.0;
    ch.target_mm = ch.position_mm;
    ch.torque_estimate = 0.0;
  }
  return state;
}

SimState inject_fault(SimState state, ChannelId channel) {
  ChannelSimState* ch = state.find(channel);
  if (ch == nullptr) throw Error(Errc::UnknownChannel, "unknown channel " + std::to_string(channel));
  ch->faulted = true;
  ch->velocity_mm_s = 0.0;
  return state;
}

}  // namespace puppetai
