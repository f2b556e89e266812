#include "puppetai/scheduler.hpp"

#include <cmath>

namespace puppetai {

namespace {

constexpr double kTimeEpsilon = 1e-9;

BendState lerp_pose(const BendState& from, const BendState& to, double alpha) {
  BendState out = to;
  for (auto& [ref, deg] : out) {
    const auto it = from.find(ref);
    if (it != from.end()) deg = it->second + (deg - it->second) * alpha;
  }
  return out;
}

std::ptrdiff_t entry_at(const std::vector<ScheduleEntry>& timeline, double t) {
  for (std::size_t i = 0; i < timeline.size(); ++i)
    if (t < timeline[i].end_s - kTimeEpsilon) return static_cast<std::ptrdiff_t>(i);
  return timeline.empty() ? -1 : static_cast<std::ptrdiff_t>(timeline.size()) - 1;
}

BendState pose_at(const SchedulerState& s, std::ptrdiff_t index, double t, const BendState& neutral) {
  if (index < 0) return neutral;
  const auto& entry = s.timeline[static_cast<std::size_t>(index)];
  if (entry.phase == SchedulePhase::Pause) return neutral;
  return sample_trajectory(*s.trajectories.at(entry.gesture), t - entry.start_s);
}

}  // namespace

std::string_view to_string(SchedulerStatus status) noexcept {
  switch (status) {
    case SchedulerStatus::Idle: return "idle";
    case SchedulerStatus::Running: return "running";
    case SchedulerStatus::Blending: return "blending";
    case SchedulerStatus::Done: return "done";
  }
  return "?";
}

std::string_view to_string(SchedulerEvent::Kind kind) noexcept {
  switch (kind) {
    case SchedulerEvent::Kind::GestureStarted: return "GestureStarted";
    case SchedulerEvent::Kind::GestureFinished: return "GestureFinished";
    case SchedulerEvent::Kind::SequenceFinished: return "SequenceFinished";
  }
  return "?";
}

BendState neutral_pose(const PuppetModel& model, const GestureLibrary& library) {
  BendState pose = zero_state(model);
  for (const auto& [ref, deg] : library.neutral) {
    const auto it = pose.find(ref);
    if (it != pose.end()) it->second = deg;
  }
  return clamp_state(model, pose);
}

SchedulerState install_sequence(const ResolvedSequence& resolved, const GestureLibrary& library,
                                const PuppetModel& model, double tick_hz) {
  SchedulerState s;
  s.timeline = build_schedule(resolved, library);
  const BendState neutral = neutral_pose(model, library);
  for (const auto& entry : s.timeline) {
    if (s.trajectories.count(entry.gesture)) continue;
    const GestureDef* def = library.resolve(entry.gesture);
    s.trajectories.emplace(entry.gesture,
                           std::make_shared<const Trajectory>(compile_gesture(*def, model, neutral, tick_hz)));
  }
  s.status = s.timeline.empty() ? SchedulerStatus::Done : SchedulerStatus::Running;
  s.last_target = neutral;
  return s;
}

SchedulerState preempt_sequence(const ResolvedSequence& resolved, const BendState& current_pose,
                                const GestureLibrary& library, const PuppetModel& model, double tick_hz, double dt_s) {
  if (!(dt_s > 0.0)) throw Error(Errc::InvalidArgument, "dt must be positive");
  SchedulerState s = install_sequence(resolved, library, model, tick_hz);
  if (s.status == SchedulerStatus::Done) return s;
  s.status = SchedulerStatus::Blending;
  s.blend_from = current_pose;
  s.blend_ticks_total = static_cast<int>(std::ceil(kPreemptBlendS / dt_s - kTimeEpsilon));
  s.blend_ticks_done = 0;
  s.last_target = current_pose;
  return s;
}

SchedulerStep scheduler_tick(const SchedulerState& state, const GestureLibrary& library, const PuppetModel& model,
                             double dt_s) {
  if (!(dt_s > 0.0)) throw Error(Errc::InvalidArgument, "dt must be positive");
  SchedulerStep step{state, {}, {}};
  SchedulerState& s = step.state;
  const BendState neutral = neutral_pose(model, library);

  switch (s.status) {
    case SchedulerStatus::Idle:
    case SchedulerStatus::Done:
      step.target = neutral;
      break;

    case SchedulerStatus::Blending: {
      ++s.blend_ticks_done;
      const double alpha = static_cast<double>(s.blend_ticks_done) / s.blend_ticks_total;
      step.target = lerp_pose(s.blend_from, pose_at(s, 0, 0.0, neutral), alpha);
      if (s.blend_ticks_done >= s.blend_ticks_total) s.status = SchedulerStatus::Running;
      break;
    }

    case SchedulerStatus::Running: {
      const std::ptrdiff_t index = entry_at(s.timeline, s.cursor_s);
      if (index != s.active_entry) {
        if (s.active_entry >= 0) {
          const auto& prev = s.timeline[static_cast<std::size_t>(s.active_entry)];
          if (prev.phase == SchedulePhase::Play)
            step.events.push_back({SchedulerEvent::Kind::GestureFinished, prev.gesture, prev.item_index});
        }
        // Entries shorter than one tick are passed over but still reported.
        for (std::ptrdiff_t i = s.active_entry + 1; i < index; ++i) {
          const auto& skipped = s.timeline[static_cast<std::size_t>(i)];
          if (skipped.phase != SchedulePhase::Play) continue;
          step.events.push_back({SchedulerEvent::Kind::GestureStarted, skipped.gesture, skipped.item_index});
          step.events.push_back({SchedulerEvent::Kind::GestureFinished, skipped.gesture, skipped.item_index});
        }
        const auto& entry = s.timeline[static_cast<std::size_t>(index)];
        if (entry.phase == SchedulePhase::Play)
          step.events.push_back({SchedulerEvent::Kind::GestureStarted, entry.gesture, entry.item_index});
        s.active_entry = index;
      }
      step.target = pose_at(s, index, s.cursor_s, neutral);

      s.cursor_s += dt_s;
      if (s.cursor_s >= s.total_s() - kTimeEpsilon) {
        const auto& last = s.timeline[static_cast<std::size_t>(s.active_entry)];
        if (last.phase == SchedulePhase::Play)
          step.events.push_back({SchedulerEvent::Kind::GestureFinished, last.gesture, last.item_index});
        for (std::size_t i = static_cast<std::size_t>(s.active_entry) + 1; i < s.timeline.size(); ++i) {
          const auto& skipped = s.timeline[i];
          if (skipped.phase != SchedulePhase::Play) continue;
          step.events.push_back({SchedulerEvent::Kind::GestureStarted, skipped.gesture, skipped.item_index});
          step.events.push_back({SchedulerEvent::Kind::GestureFinished, skipped.gesture, skipped.item_index});
        }
        step.events.push_back({SchedulerEvent::Kind::SequenceFinished, "", 0});
        s.cursor_s = s.total_s();
        s.status = SchedulerStatus::Done;
        s.active_entry = -1;
      }
      break;
    }
  }
  s.last_target = step.target;
  return step;
}

}  // namespace puppetai
