#pragma once

// The affective expression loop: push-to-talk input -> perception ->
// scheduling -> actuation, advanced by one owner at a fixed tick.

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "puppetai/actuation.hpp"
#include "puppetai/backend.hpp"
#include "puppetai/perception.hpp"
#include "puppetai/scheduler.hpp"

namespace puppetai {

enum class LoopPhase { Idle, Listening, Processing, Performing, Faulted };
std::string_view to_string(LoopPhase phase) noexcept;

namespace events {
struct PttStart {};
struct PttStop {
  Utterance utterance;
};
struct PerceptReady {
  PerceptResult percept;
};
struct SequenceReady {
  ResponderOutput output;
};
struct TriggerGesture {
  std::string name;
  double number_s = 1.0;
};
struct Preempt {
  std::string sequence_text;
};
struct FaultRaised {
  ChannelId channel = 0;
};
struct Reset {};
// Operator-side fault injection; the backend latches the channel and the
// loop then sees an ordinary FaultRaised.
struct InjectFault {
  ChannelId channel = 0;
};
struct UpdateConfig {
  nlohmann::json patch;
};
}  // namespace events

using EventPayload = std::variant<events::PttStart, events::PttStop, events::PerceptReady, events::SequenceReady,
                                  events::TriggerGesture, events::Preempt, events::FaultRaised, events::Reset,
                                  events::InjectFault, events::UpdateConfig>;

std::string_view event_name(const EventPayload& payload) noexcept;

struct SessionEvent {
  double t_s = 0.0;
  EventPayload payload;
};

// Ordered, thread-safe mailbox. Timestamps are forced non-decreasing.
class EventQueue {
 public:
  void push(double t_s, EventPayload payload);
  std::vector<SessionEvent> drain();
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::deque<SessionEvent> queue_;
  double last_t_ = 0.0;
};

namespace commands {
struct DispatchTranscription {
  Utterance utterance;
};
struct DispatchResponse {
  PerceptResult percept;
};
struct InstallSequence {
  ResolvedSequence sequence;
};
struct PreemptSequence {
  ResolvedSequence sequence;
};
struct HaltScheduler {};
struct ResetActuators {};
struct InjectActuatorFault {
  ChannelId channel = 0;
};
struct ApplyConfig {
  nlohmann::json patch;
};
}  // namespace commands

using LoopCommand =
    std::variant<commands::DispatchTranscription, commands::DispatchResponse, commands::InstallSequence,
                 commands::PreemptSequence, commands::HaltScheduler, commands::ResetActuators,
                 commands::InjectActuatorFault, commands::ApplyConfig>;

// Runs perception jobs. Inline execution keeps scripted runs deterministic;
// threaded execution keeps slow services off the control tick.
class PerceptionExecutor {
 public:
  using Job = std::function<EventPayload()>;
  virtual ~PerceptionExecutor() = default;
  virtual void submit(Job job) = 0;
};

class InlineExecutor final : public PerceptionExecutor {
 public:
  explicit InlineExecutor(std::function<void(EventPayload)> deliver) : deliver_(std::move(deliver)) {}
  void submit(Job job) override { deliver_(job()); }

 private:
  std::function<void(EventPayload)> deliver_;
};

class ThreadedExecutor final : public PerceptionExecutor {
 public:
  explicit ThreadedExecutor(std::function<void(EventPayload)> deliver);
  ~ThreadedExecutor() override;
  void submit(Job job) override;

 private:
  std::function<void(EventPayload)> deliver_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<Job> jobs_;
  bool stop_ = false;
  std::thread worker_;
};

enum class UtterancePolicy { Preempt, Queue };

struct LoopConfig {
  double tick_hz = 50.0;
  std::uint64_t seed = 0;
  UtterancePolicy utterance_policy = UtterancePolicy::Preempt;
  double listen_timeout_s = 30.0;
  bool broadcast_frames = true;  // include per-unit FK frames in pose messages
};

struct FaultRecord {
  std::uint64_t tick = 0;
  ChannelId channel = 0;
};

struct SessionReport {
  std::uint64_t ticks = 0;
  double duration_s = 0.0;
  std::vector<std::string> sequences_executed;  // canonical text, in order
  std::vector<nlohmann::json> responses;        // sequence_echo payloads
  std::vector<std::string> rejections;
  std::vector<FaultRecord> faults;
  std::vector<std::string> notes;
  std::string final_phase;
  double wall_time_ms = 0.0;

  nlohmann::json to_json() const;
};

struct TickOutput {
  std::uint64_t tick = 0;
  double t_s = 0.0;
  LoopPhase phase = LoopPhase::Idle;
  BendState pose;
  std::vector<ChannelTelemetry> telemetry;
  std::vector<nlohmann::json> broadcasts;
  std::string log_line;  // trajectory log record (JSON, no newline)
  std::vector<SchedulerEvent> scheduler_events;
};

// Everything a loop needs. The model and library are owned by the loop.
struct LoopParts {
  PuppetModel model;
  GestureLibrary library;
  std::vector<MotorChannelConfig> channels;
  std::unique_ptr<ActuatorBackend> backend;
  std::unique_ptr<Transcriber> transcriber;
  std::unique_ptr<Responder> responder;
};

class Orchestrator {
 public:
  // threaded_perception=false runs perception inline (virtual-clock mode).
  Orchestrator(LoopParts parts, LoopConfig config, bool threaded_perception = false);
  ~Orchestrator();

  // Thread-safe; the event is handled at the next tick boundary.
  void post(EventPayload payload);
  void post_at(double t_s, EventPayload payload);

  // Transition table. Mutates loop state only; side effects come back as
  // commands. Owner thread only.
  std::vector<LoopCommand> handle_event(const SessionEvent& event);

  // Drains the mailbox, produces one pose, drives the backend. Owner thread only.
  TickOutput control_tick();

  LoopPhase phase() const noexcept { return phase_; }
  const SchedulerState& scheduler() const noexcept { return scheduler_; }
  double dt_s() const noexcept { return 1.0 / config_.tick_hz; }
  double now_s() const noexcept { return static_cast<double>(tick_.load()) * dt_s(); }
  std::uint64_t tick_count() const noexcept { return tick_.load(); }
  const PuppetModel& model() const noexcept { return parts_.model; }
  const GestureLibrary& library() const noexcept { return parts_.library; }
  const std::vector<MotorChannelConfig>& channels() const noexcept { return parts_.channels; }
  const LoopConfig& config() const noexcept { return config_; }
  const SessionReport& report() const noexcept { return report_; }
  SessionReport& report() noexcept { return report_; }
  std::size_t pending_events() const { return mailbox_.size(); }

 private:
  void execute(const LoopCommand& command);
  void set_phase(LoopPhase next, const std::string& why);
  void emit_event(const std::string& name, const std::string& detail);
  bool install(const ResolvedSequence& seq, bool blend);
  std::optional<ResolvedSequence> resolve_strict(const std::string& text);
  std::string apply_config_patch(const nlohmann::json& patch);
  BendState source_pose(std::vector<SchedulerEvent>& scheduler_events);

  LoopParts parts_;
  LoopConfig config_;
  EventQueue mailbox_;
  std::unique_ptr<PerceptionExecutor> executor_;

  LoopPhase phase_ = LoopPhase::Idle;
  SchedulerState scheduler_;
  std::deque<ResolvedSequence> queued_;
  bool capturing_during_performance_ = false;
  std::atomic<std::uint64_t> tick_{0};
  double phase_entered_s_ = 0.0;
  std::uint64_t idle_entries_ = 0;
  std::unique_ptr<IdleSway> idle_;
  BendState last_pose_;
  BendState blend_from_;
  int blend_total_ = 0;
  int blend_done_ = 0;
  std::set<ChannelId> known_faults_;
  std::vector<nlohmann::json> pending_broadcasts_;
  SessionReport report_;
};

// Pose message: {type: "pose", v: 1, tick, t_s, phase, angles: {section:
// {plane: deg}}, tips: {section: [x,y,z]}, frames?: {section: [[x,y,z]...]}}.
nlohmann::json pose_message(std::uint64_t tick, double t_s, LoopPhase phase, const PuppetModel& model,
                            const BendState& pose, bool include_frames);

// One trajectory log record with a fixed field order.
std::string trajectory_record(std::uint64_t tick, double t_s, LoopPhase phase, const BendState& pose,
                              const std::vector<ChannelTelemetry>& telemetry);

// Scripted session input: {duration_s?: min simulated time, max_duration_s?,
// events: [{t_s, type, ...console message fields}]}.
struct ScriptedEvent {
  double t_s = 0.0;
  EventPayload payload;
};
struct SessionScript {
  double duration_s = 1.0;
  double max_duration_s = 600.0;
  std::vector<ScriptedEvent> events;
};

SessionScript parse_script(const nlohmann::json& doc);
SessionScript load_script_file(const std::string& path);

struct SessionResult {
  SessionReport report;
  std::vector<std::string> trajectory_log;
  std::vector<std::string> broadcasts;  // serialized, in emission order
};

// Virtual-clock run: feeds script events at their times and stops once the
// script is exhausted, the minimum duration has passed and the loop is
// Idle or Faulted (or max_duration_s is reached).
SessionResult run_scripted_session(Orchestrator& loop, const SessionScript& script);

}  // namespace puppetai
