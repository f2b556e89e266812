#include "puppetai/orchestrator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "json_util.hpp"
#include "puppetai/console_protocol.hpp"

namespace puppetai {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr double kTimeEps = 1e-9;

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

std::uint64_t idle_seed(std::uint64_t seed, std::uint64_t entry) {
  if (entry == 0) return seed;
  // splitmix64 step so consecutive idle periods do not repeat the same sway
  std::uint64_t z = seed + entry * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

BendState lerp_pose(const BendState& from, const BendState& to, double u) {
  BendState out = to;
  for (auto& [ref, angle] : out) {
    auto it = from.find(ref);
    const double a = it == from.end() ? 0.0 : it->second;
    angle = a + (angle - a) * u;
  }
  return out;
}

std::string_view policy_name(UtterancePolicy p) { return p == UtterancePolicy::Queue ? "queue" : "preempt"; }

}  // namespace

std::string_view to_string(LoopPhase phase) noexcept {
  switch (phase) {
    case LoopPhase::Idle: return "Idle";
    case LoopPhase::Listening: return "Listening";
    case LoopPhase::Processing: return "Processing";
    case LoopPhase::Performing: return "Performing";
    case LoopPhase::Faulted: return "Faulted";
  }
  return "?";
}

std::string_view event_name(const EventPayload& payload) noexcept {
  static constexpr std::string_view names[] = {"PttStart",       "PttStop", "PerceptReady", "SequenceReady",
                                               "TriggerGesture", "Preempt", "FaultRaised",  "Reset",
                                               "InjectFault",    "UpdateConfig"};
  return names[payload.index()];
}

void EventQueue::push(double t_s, EventPayload payload) {
  std::lock_guard lock(mutex_);
  last_t_ = std::max(last_t_, t_s);
  queue_.push_back({last_t_, std::move(payload)});
}

std::vector<SessionEvent> EventQueue::drain() {
  std::lock_guard lock(mutex_);
  std::vector<SessionEvent> out(std::make_move_iterator(queue_.begin()), std::make_move_iterator(queue_.end()));
  queue_.clear();
  return out;
}

std::size_t EventQueue::size() const {
  std::lock_guard lock(mutex_);
  return queue_.size();
}

ThreadedExecutor::ThreadedExecutor(std::function<void(EventPayload)> deliver) : deliver_(std::move(deliver)) {
  worker_ = std::thread([this] {
    for (;;) {
      Job job;
      {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [this] { return stop_ || !jobs_.empty(); });
        if (stop_) return;
        job = std::move(jobs_.front());
        jobs_.pop_front();
      }
      deliver_(job());
    }
  });
}

ThreadedExecutor::~ThreadedExecutor() {
  {
    std::lock_guard lock(mutex_);
    stop_ = true;
  }
  cv_.notify_all();
  if (worker_.joinable()) worker_.join();
}

void ThreadedExecutor::submit(Job job) {
  {
    std::lock_guard lock(mutex_);
    jobs_.push_back(std::move(job));
  }
  cv_.notify_one();
}

json SessionReport::to_json() const {
  json faults_json = json::array();
  for (const auto& f : faults) faults_json.push_back({{"tick", f.tick}, {"channel", f.channel}});
  return {{"ticks", ticks},
          {"duration_s", duration_s},
          {"sequences_executed", sequences_executed},
          {"responses", responses},
          {"rejections", rejections},
          {"faults", faults_json},
          {"notes", notes},
          {"final_phase", final_phase},
          {"wall_time_ms", wall_time_ms}};
}

Orchestrator::Orchestrator(LoopParts parts, LoopConfig config, bool threaded_perception)
    : parts_(std::move(parts)), config_(config) {
  if (!(config_.tick_hz > 0.0) || !std::isfinite(config_.tick_hz))
    throw Error(Errc::InvalidArgument, "tick_hz must be positive");
  if (!parts_.backend || !parts_.transcriber || !parts_.responder)
    throw Error(Errc::InvalidArgument, "loop needs a backend, a transcriber and a responder");
  auto deliver = [this](EventPayload payload) { mailbox_.push(now_s(), std::move(payload)); };
  if (threaded_perception)
    executor_ = std::make_unique<ThreadedExecutor>(deliver);
  else
    executor_ = std::make_unique<InlineExecutor>(deliver);
  idle_ = std::make_unique<IdleSway>(idle_seed(config_.seed, 0), parts_.library.idle);
  last_pose_ = neutral_pose(parts_.model, parts_.library);
  report_.final_phase = std::string(to_string(phase_));
}

Orchestrator::~Orchestrator() {
  // Stop the worker before the parts it uses go away.
  executor_.reset();
}

void Orchestrator::post(EventPayload payload) { mailbox_.push(now_s(), std::move(payload)); }

void Orchestrator::post_at(double t_s, EventPayload payload) { mailbox_.push(t_s, std::move(payload)); }

void Orchestrator::emit_event(const std::string& name, const std::string& detail) {
  pending_broadcasts_.push_back(event_message(tick_.load(), name, detail));
}

void Orchestrator::set_phase(LoopPhase next, const std::string& why) {
  if (next == phase_) return;
  emit_event("PhaseChanged", std::string(to_string(phase_)) + "->" + std::string(to_string(next)) +
                                 (why.empty() ? "" : " (" + why + ")"));
  phase_ = next;
  phase_entered_s_ = now_s();
  if (next == LoopPhase::Idle) {
    ++idle_entries_;
    idle_ = std::make_unique<IdleSway>(idle_seed(config_.seed, idle_entries_), parts_.library.idle);
  }
  if (next == LoopPhase::Idle || next == LoopPhase::Listening || next == LoopPhase::Processing) {
    blend_from_ = last_pose_;
    blend_total_ = static_cast<int>(std::ceil(kPreemptBlendS * config_.tick_hz - kTimeEps));
    blend_done_ = 0;
  } else {
    blend_total_ = 0;
    blend_done_ = 0;
  }
}

std::optional<ResolvedSequence> Orchestrator::resolve_strict(const std::string& text) {
  try {
    ResolvedSequence seq = resolve_sequence(parse_sequence(text), parts_.library, ResolveMode::Strict);
    if (seq.empty()) throw Error(Errc::EmptyInput, "sequence has no items");
    return seq;
  } catch (const Error& e) {
    const std::string msg = std::string(e.code_name()) + ": " + e.what();
    report_.rejections.push_back(msg);
    pending_broadcasts_.push_back(error_message(std::string(e.code_name()), e.what()));
    return std::nullopt;
  }
}

bool Orchestrator::install(const ResolvedSequence& seq, bool blend) {
  if (blend)
    scheduler_ = preempt_sequence(seq, last_pose_, parts_.library, parts_.model, config_.tick_hz, dt_s());
  else
    scheduler_ = install_sequence(seq, parts_.library, parts_.model, config_.tick_hz);
  const std::string text = format_sequence(seq.canonical());
  report_.sequences_executed.push_back(text);
  emit_event("SequenceInstalled", text);
  if (!scheduler_.active()) {
    // Every item had zero length; nothing will tick, so finish now.
    emit_event(std::string(to_string(SchedulerEvent::Kind::SequenceFinished)), "");
    if (phase_ == LoopPhase::Performing) set_phase(LoopPhase::Idle, "empty schedule");
    return false;
  }
  return true;
}

std::vector<LoopCommand> Orchestrator::handle_event(const SessionEvent& event) {
  std::vector<LoopCommand> cmds;
  const EventPayload& p = event.payload;
  auto ignore = [&] {
    const std::string note = "ignored " + std::string(event_name(p)) + " in " + std::string(to_string(phase_));
    report_.notes.push_back(note);
    emit_event("Ignored", note);
  };

  if (const auto* sr = std::get_if<events::SequenceReady>(&p)) {
    json echo = sequence_echo_message(sr->output);
    report_.responses.push_back(echo);
    pending_broadcasts_.push_back(std::move(echo));
  }

  if (const auto* f = std::get_if<events::FaultRaised>(&p)) {
    if (phase_ != LoopPhase::Faulted) {
      set_phase(LoopPhase::Faulted, "channel " + std::to_string(f->channel));
      cmds.emplace_back(commands::HaltScheduler{});
      capturing_during_performance_ = false;
    }
    return cmds;
  }
  if (const auto* u = std::get_if<events::UpdateConfig>(&p)) {
    cmds.emplace_back(commands::ApplyConfig{u->patch});
    return cmds;
  }

  if (phase_ == LoopPhase::Faulted) {
    if (std::holds_alternative<events::Reset>(p)) {
      cmds.emplace_back(commands::ResetActuators{});
      set_phase(LoopPhase::Idle, "reset");
    } else {
      ignore();
    }
    return cmds;
  }

  if (const auto* inj = std::get_if<events::InjectFault>(&p)) {
    cmds.emplace_back(commands::InjectActuatorFault{inj->channel});
    return cmds;
  }

  if (std::holds_alternative<events::TriggerGesture>(p) || std::holds_alternative<events::Preempt>(p)) {
    std::string text;
    if (const auto* tg = std::get_if<events::TriggerGesture>(&p))
      text = "[" + tg->name + "][" + format_number(tg->number_s) + "]";
    else
      text = std::get<events::Preempt>(p).sequence_text;
    auto seq = resolve_strict(text);
    if (!seq) return cmds;
    if (phase_ == LoopPhase::Idle)
      cmds.emplace_back(commands::InstallSequence{std::move(*seq)});
    else
      cmds.emplace_back(commands::PreemptSequence{std::move(*seq)});
    queued_.clear();
    capturing_during_performance_ = false;
    set_phase(LoopPhase::Performing, "operator");
    return cmds;
  }

  switch (phase_) {
    case LoopPhase::Idle:
      if (std::holds_alternative<events::PttStart>(p))
        set_phase(LoopPhase::Listening, "ptt");
      else
        ignore();
      break;
    case LoopPhase::Listening:
      if (const auto* stop = std::get_if<events::PttStop>(&p)) {
        set_phase(LoopPhase::Processing, "ptt released");
        cmds.emplace_back(commands::DispatchTranscription{stop->utterance});
      } else {
        ignore();
      }
      break;
    case LoopPhase::Processing:
      if (const auto* pr = std::get_if<events::PerceptReady>(&p)) {
        emit_event("PerceptReady", std::string(to_string(pr->percept.emotion)));
        cmds.emplace_back(commands::DispatchResponse{pr->percept});
      } else if (const auto* sr = std::get_if<events::SequenceReady>(&p)) {
        if (sr->output.sequence.empty()) {
          report_.notes.push_back("empty response; nothing to perform");
          set_phase(LoopPhase::Idle, "empty response");
        } else {
          cmds.emplace_back(commands::InstallSequence{sr->output.sequence});
          set_phase(LoopPhase::Performing, "sequence ready");
        }
      } else {
        ignore();
      }
      break;
    case LoopPhase::Performing:
      if (std::holds_alternative<events::PttStart>(p)) {
        if (config_.utterance_policy == UtterancePolicy::Preempt) {
          cmds.emplace_back(commands::HaltScheduler{});
          set_phase(LoopPhase::Listening, "ptt during performance");
        } else {
          capturing_during_performance_ = true;
        }
      } else if (const auto* stop = std::get_if<events::PttStop>(&p)) {
        if (capturing_during_performance_) {
          capturing_during_performance_ = false;
          cmds.emplace_back(commands::DispatchTranscription{stop->utterance});
        } else {
          ignore();
        }
      } else if (const auto* pr = std::get_if<events::PerceptReady>(&p)) {
        cmds.emplace_back(commands::DispatchResponse{pr->percept});
      } else if (const auto* sr = std::get_if<events::SequenceReady>(&p)) {
        if (sr->output.sequence.empty()) {
          report_.notes.push_back("empty response; nothing to queue");
        } else if (config_.utterance_policy == UtterancePolicy::Queue) {
          queued_.push_back(sr->output.sequence);
          emit_event("SequenceQueued", format_sequence(sr->output.sequence.canonical()));
        } else {
          cmds.emplace_back(commands::PreemptSequence{sr->output.sequence});
        }
      } else {
        ignore();
      }
      break;
    case LoopPhase::Faulted:
      break;
  }
  return cmds;
}

void Orchestrator::execute(const LoopCommand& command) {
  std::visit(
      overloaded{
          [&](const commands::DispatchTranscription& c) {
            Transcriber* tr = parts_.transcriber.get();
            executor_->submit([tr, u = c.utterance]() -> EventPayload {
              return events::PerceptReady{tr->transcribe(u)};
            });
          },
          [&](const commands::DispatchResponse& c) {
            Responder* resp = parts_.responder.get();
            executor_->submit([resp, lib = parts_.library, percept = c.percept]() -> EventPayload {
              try {
                return events::SequenceReady{resp->respond(percept, lib)};
              } catch (const std::exception& e) {
                ResponderOutput out = rule_respond(percept, lib);
                out.repairs.push_back({RepairKind::FallbackUsed, e.what()});
                return events::SequenceReady{std::move(out)};
              }
            });
          },
          [&](const commands::InstallSequence& c) { install(c.sequence, false); },
          [&](const commands::PreemptSequence& c) { install(c.sequence, true); },
          [&](const commands::HaltScheduler&) {
            scheduler_ = SchedulerState{};
            queued_.clear();
          },
          [&](const commands::ResetActuators&) {
            parts_.backend->reset_faults();
            known_faults_.clear();
          },
          [&](const commands::InjectActuatorFault& c) {
            try {
              parts_.backend->inject_fault(c.channel);
            } catch (const Error& e) {
              report_.rejections.push_back(std::string(e.code_name()) + ": " + e.what());
              pending_broadcasts_.push_back(error_message(std::string(e.code_name()), e.what()));
            }
          },
          [&](const commands::ApplyConfig& c) {
            const std::string err = apply_config_patch(c.patch);
            if (!err.empty()) report_.rejections.push_back("config: " + err);
            pending_broadcasts_.push_back(config_ack_message(err.empty(), err));
          },
      },
      command);
}

std::string Orchestrator::apply_config_patch(const json& patch) {
  if (!patch.is_object()) return "patch must be an object";
  GestureLibrary library = parts_.library;
  LoopConfig config = config_;
  try {
    for (const auto& [key, value] : patch.items()) {
      if (key == "neutral") {
        if (!value.is_object()) return "neutral: expected {section: {plane: deg}}";
        for (const auto& [section, planes] : value.items()) {
          if (!planes.is_object()) return "neutral/" + section + ": expected an object";
          for (const auto& [plane, deg] : planes.items()) {
            if (!deg.is_number()) return "neutral/" + section + "/" + plane + ": expected a number";
            const PlaneRef ref{section, plane};
            const PlaneLocation loc = locate_plane(parts_.model, ref);
            const double angle = deg.get<double>();
            const AngleRange& range = loc.plane->active_range;
            if (angle < range.min_deg - tolerance::kAngleDeg || angle > range.max_deg + tolerance::kAngleDeg)
              return "neutral/" + ref.str() + ": " + format_number(std::abs(angle)) + " outside plane range";
            library.neutral[ref] = angle;
          }
        }
      } else if (key == "idle") {
        detail::ObjectReader r(value, "/idle");
        if (const json* a = r.optional("amplitude_deg")) {
          if (!a->is_array() || a->size() != 2 || !(*a)[0].is_number() || !(*a)[1].is_number())
            return "idle/amplitude_deg: expected [lo, hi]";
          const double lo = (*a)[0], hi = (*a)[1];
          if (lo < 0.0 || hi < lo) return "idle/amplitude_deg: need 0 <= lo <= hi";
          library.idle.amplitude_min_deg = lo;
          library.idle.amplitude_max_deg = hi;
        }
        if (const json* ps = r.optional("period_s")) {
          if (!ps->is_array() || ps->size() != 2 || !(*ps)[0].is_number() || !(*ps)[1].is_number())
            return "idle/period_s: expected [lo, hi]";
          const double lo = (*ps)[0], hi = (*ps)[1];
          if (lo <= 0.0 || hi < lo) return "idle/period_s: need 0 < lo <= hi";
          library.idle.period_min_s = lo;
          library.idle.period_max_s = hi;
        }
        r.finish();
      } else if (key == "utterance_policy") {
        const std::string v = value.is_string() ? value.get<std::string>() : "";
        if (v == "preempt")
          config.utterance_policy = UtterancePolicy::Preempt;
        else if (v == "queue")
          config.utterance_policy = UtterancePolicy::Queue;
        else
          return "utterance_policy: expected \"preempt\" or \"queue\"";
      } else if (key == "listen_timeout_s") {
        if (!value.is_number() || value.get<double>() <= 0.0) return "listen_timeout_s: expected a positive number";
        config.listen_timeout_s = value.get<double>();
      } else {
        return "unknown config key '" + key + "'";
      }
    }
  } catch (const Error& e) {
    return std::string(e.code_name()) + ": " + e.what();
  }
  parts_.library = std::move(library);
  config_ = config;
  emit_event("ConfigApplied", patch.dump() + " policy=" + std::string(policy_name(config_.utterance_policy)));
  return "";
}

BendState Orchestrator::source_pose(std::vector<SchedulerEvent>& scheduler_events) {
  switch (phase_) {
    case LoopPhase::Performing: {
      SchedulerStep step = scheduler_tick(scheduler_, parts_.library, parts_.model, dt_s());
      scheduler_ = std::move(step.state);
      scheduler_events = std::move(step.events);
      return std::move(step.target);
    }
    case LoopPhase::Idle:
      return idle_->pose(parts_.model, neutral_pose(parts_.model, parts_.library), now_s() - phase_entered_s_);
    case LoopPhase::Listening:
    case LoopPhase::Processing:
      return neutral_pose(parts_.model, parts_.library);
    case LoopPhase::Faulted:
      return last_pose_;
  }
  return last_pose_;
}

TickOutput Orchestrator::control_tick() {
  TickOutput out;
  out.tick = tick_.load();
  out.t_s = now_s();

  for (const SessionEvent& ev : mailbox_.drain())
    for (const LoopCommand& cmd : handle_event(ev)) execute(cmd);

  if (phase_ == LoopPhase::Listening && out.t_s - phase_entered_s_ >= config_.listen_timeout_s - kTimeEps) {
    report_.notes.push_back("listening timed out");
    set_phase(LoopPhase::Idle, "listen timeout");
  }

  BendState pose = source_pose(out.scheduler_events);
  if (phase_ != LoopPhase::Performing && phase_ != LoopPhase::Faulted && blend_done_ < blend_total_) {
    ++blend_done_;
    pose = lerp_pose(blend_from_, pose, static_cast<double>(blend_done_) / blend_total_);
  }
  pose = clamp_state(parts_.model, pose);
  last_pose_ = pose;

  for (const SchedulerEvent& se : out.scheduler_events) {
    emit_event(std::string(to_string(se.kind)), se.gesture);
    if (se.kind == SchedulerEvent::Kind::SequenceFinished && phase_ == LoopPhase::Performing) {
      if (!queued_.empty()) {
        ResolvedSequence next = std::move(queued_.front());
        queued_.pop_front();
        install(next, false);
      } else {
        set_phase(LoopPhase::Idle, "sequence finished");
      }
    }
  }

  const auto commands = map_bend_to_commands(parts_.model, parts_.channels, pose, UnmappedPolicy::Ignore);
  out.telemetry = parts_.backend->apply(commands, dt_s());
  for (const ChannelTelemetry& t : out.telemetry) {
    if (!t.faulted || known_faults_.count(t.channel_id)) continue;
    known_faults_.insert(t.channel_id);
    report_.faults.push_back({out.tick, t.channel_id});
    std::string target;
    for (const auto& ch : parts_.channels)
      if (ch.channel_id == t.channel_id) target = ch.target.str();
    pending_broadcasts_.push_back(fault_message(out.tick, t.channel_id, target));
    mailbox_.push(out.t_s, events::FaultRaised{t.channel_id});
  }

  out.phase = phase_;
  out.pose = pose;
  out.broadcasts = std::move(pending_broadcasts_);
  pending_broadcasts_.clear();
  out.broadcasts.push_back(pose_message(out.tick, out.t_s, phase_, parts_.model, pose, config_.broadcast_frames));
  out.log_line = trajectory_record(out.tick, out.t_s, phase_, pose, out.telemetry);

  tick_.fetch_add(1);
  report_.ticks = tick_.load();
  report_.duration_s = now_s();
  report_.final_phase = std::string(to_string(phase_));
  return out;
}

json pose_message(std::uint64_t tick, double t_s, LoopPhase phase, const PuppetModel& model, const BendState& pose,
                  bool include_frames) {
  json angles = json::object();
  for (const auto& [ref, deg] : pose) angles[ref.section][ref.plane] = deg;
  json tips = json::object();
  json frames = json::object();
  for (const auto& [section, list] : forward_kinematics(model, pose)) {
    const auto& tip = list.back().position_mm;
    tips[section] = {tip.x(), tip.y(), tip.z()};
    if (include_frames) {
      json pts = json::array();
      for (const Frame& f : list) pts.push_back({f.position_mm.x(), f.position_mm.y(), f.position_mm.z()});
      frames[section] = std::move(pts);
    }
  }
  json msg = {{"type", "pose"}, {"v", kProtocolVersion}, {"tick", tick},   {"t_s", t_s},
              {"phase", std::string(to_string(phase))}, {"angles", angles}, {"tips", tips}};
  if (include_frames) msg["frames"] = std::move(frames);
  return msg;
}

std::string trajectory_record(std::uint64_t tick, double t_s, LoopPhase phase, const BendState& pose,
                              const std::vector<ChannelTelemetry>& telemetry) {
  ordered_json rec;
  rec["tick"] = tick;
  rec["t_s"] = t_s;
  rec["phase"] = std::string(to_string(phase));
  ordered_json positions = ordered_json::object();
  ordered_json faults = ordered_json::array();
  for (const auto& t : telemetry) {
    positions[std::to_string(t.channel_id)] = t.position_mm;
    if (t.faulted) faults.push_back(t.channel_id);
  }
  rec["position_mm"] = std::move(positions);
  ordered_json bends = ordered_json::object();
  for (const auto& [ref, deg] : pose) bends[ref.str()] = deg;
  rec["bend_deg"] = std::move(bends);
  rec["faults"] = std::move(faults);
  return rec.dump();
}

SessionScript parse_script(const json& doc) {
  detail::ObjectReader r(doc, "");
  SessionScript script;
  script.duration_s = r.number_or("duration_s", script.duration_s);
  script.max_duration_s = r.number_or("max_duration_s", script.max_duration_s);
  if (script.duration_s < 0.0) detail::schema_error("/duration_s", "must be non-negative");
  if (script.max_duration_s <= 0.0) detail::schema_error("/max_duration_s", "must be positive");
  const json& list = r.required("events");
  if (!list.is_array()) detail::schema_error("/events", "expected an array");
  for (std::size_t i = 0; i < list.size(); ++i) {
    const json& ev = list[i];
    const std::string ptr = "/events/" + std::to_string(i);
    if (!ev.is_object()) detail::schema_error(ptr, "expected an object");
    double t = 0.0;
    if (ev.contains("t_s")) t = detail::as_number(ev["t_s"], ptr + "/t_s");
    if (t < 0.0) detail::schema_error(ptr + "/t_s", "must be non-negative");
    std::vector<EventPayload> payloads;
    try {
      payloads = parse_client_message(ev, false);
    } catch (const Error& e) {
      throw Error(e.code(), ptr + ": " + e.what());
    }
    for (auto& p : payloads) script.events.push_back({t, std::move(p)});
  }
  r.finish();
  std::stable_sort(script.events.begin(), script.events.end(),
                   [](const ScriptedEvent& a, const ScriptedEvent& b) { return a.t_s < b.t_s; });
  return script;
}

SessionScript load_script_file(const std::string& path) {
  const auto parsed = detail::parse_document(detail::read_text_file(path), path);
  if (!parsed.duplicate_keys.empty()) detail::schema_error(parsed.duplicate_keys.front(), "duplicate key");
  return parse_script(parsed.value);
}

SessionResult run_scripted_session(Orchestrator& loop, const SessionScript& script) {
  SessionResult result;
  const auto wall0 = std::chrono::steady_clock::now();
  std::size_t next = 0;
  for (;;) {
    const double t = loop.now_s();
    while (next < script.events.size() && script.events[next].t_s <= t + kTimeEps) {
      loop.post_at(script.events[next].t_s, script.events[next].payload);
      ++next;
    }
    TickOutput out = loop.control_tick();
    result.trajectory_log.push_back(std::move(out.log_line));
    for (const json& b : out.broadcasts) result.broadcasts.push_back(b.dump());

    const double after = loop.now_s();
    const bool settled = loop.phase() == LoopPhase::Idle || loop.phase() == LoopPhase::Faulted;
    const bool quiescent = next == script.events.size() && loop.pending_events() == 0 && settled &&
                           after >= script.duration_s - kTimeEps;
    if (quiescent || after >= script.max_duration_s - kTimeEps) break;
  }
  result.report = loop.report();
  result.report.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - wall0).count();
  return result;
}

}  // namespace puppetai
