#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "puppetai/gestures.hpp"
#include "puppetai/sequence.hpp"

namespace puppetai {

inline constexpr double kPreemptBlendS = 0.3;

enum class SchedulerStatus { Idle, Running, Blending, Done };
std::string_view to_string(SchedulerStatus status) noexcept;

struct SchedulerEvent {
  enum class Kind { GestureStarted, GestureFinished, SequenceFinished };
  Kind kind;
  std::string gesture;  // empty for SequenceFinished
  std::size_t item_index = 0;

  bool operator==(const SchedulerEvent&) const = default;
};
std::string_view to_string(SchedulerEvent::Kind kind) noexcept;

// Every plane of the model at the library's neutral angle (0 where the
// library is silent), clamped.
BendState neutral_pose(const PuppetModel& model, const GestureLibrary& library);

// Immutable compiled trajectories are shared between copies of the state.
struct SchedulerState {
  std::vector<ScheduleEntry> timeline;
  std::map<std::string, std::shared_ptr<const Trajectory>> trajectories;
  double cursor_s = 0.0;
  SchedulerStatus status = SchedulerStatus::Idle;
  std::ptrdiff_t active_entry = -1;

  // Blend window after a preemption.
  BendState blend_from;
  int blend_ticks_total = 0;
  int blend_ticks_done = 0;

  BendState last_target;

  double total_s() const noexcept { return schedule_duration(timeline); }
  bool active() const noexcept { return status == SchedulerStatus::Running || status == SchedulerStatus::Blending; }
};

struct SchedulerStep {
  SchedulerState state;
  BendState target;
  std::vector<SchedulerEvent> events;
};

// Builds the timeline and compiles every gesture it uses at tick_hz.
SchedulerState install_sequence(const ResolvedSequence& resolved, const GestureLibrary& library,
                                const PuppetModel& model, double tick_hz);

// Aborts whatever is running and blends linearly from `current_pose` to the
// new timeline's first pose over ceil(kPreemptBlendS / dt_s) ticks.
SchedulerState preempt_sequence(const ResolvedSequence& resolved, const BendState& current_pose,
                                const GestureLibrary& library, const PuppetModel& model, double tick_hz, double dt_s);

// Samples the pose at the current cursor, then advances it by dt_s.
SchedulerStep scheduler_tick(const SchedulerState& state, const GestureLibrary& library, const PuppetModel& model,
                             double dt_s);

}  // namespace puppetai
