#include "puppetai/gestures.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <set>

#include "json_util.hpp"

namespace puppetai {

using detail::ObjectReader;
using nlohmann::json;

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

BendState read_targets(const json& value, const std::string& pointer) {
  if (!value.is_object()) detail::schema_error(pointer, "expected {section: {plane: deg}}");
  BendState out;
  for (auto s = value.begin(); s != value.end(); ++s) {
    if (!s.value().is_object()) detail::schema_error(pointer + "/" + s.key(), "expected {plane: deg}");
    for (auto p = s.value().begin(); p != s.value().end(); ++p)
      out[{s.key(), p.key()}] = detail::as_number(p.value(), pointer + "/" + s.key() + "/" + p.key());
  }
  return out;
}

json targets_to_json(const BendState& state) {
  json out = json::object();
  for (const auto& [ref, deg] : state) out[ref.section][ref.plane] = deg;
  return out;
}

std::pair<double, double> read_pair(const json& value, const std::string& pointer) {
  if (!value.is_array() || value.size() != 2) detail::schema_error(pointer, "expected [lo, hi]");
  return {detail::as_number(value[0], pointer + "/0"), detail::as_number(value[1], pointer + "/1")};
}

GestureDef read_gesture(const json& value, const std::string& pointer) {
  ObjectReader r(value, pointer);
  GestureDef def;
  def.name = r.string("name");
  const std::string kind = r.string("kind");
  if (kind == "discrete") def.kind = GestureKind::Discrete;
  else if (kind == "continuous") def.kind = GestureKind::Continuous;
  else detail::schema_error(r.child("kind"), "expected \"discrete\" or \"continuous\"");
  def.nominal_duration_s = r.number("duration_s");
  if (!(def.nominal_duration_s > 0.0)) detail::schema_error(r.child("duration_s"), "must be positive");
  if (const json* loop = r.optional("loopable")) {
    if (!loop->is_boolean() || loop->get<bool>() != def.loopable())
      detail::schema_error(r.child("loopable"), "loopable must equal (kind == continuous)");
  }
  if (const json* aliases = r.optional("aliases")) {
    if (!aliases->is_array()) detail::schema_error(r.child("aliases"), "expected an array of strings");
    for (const auto& a : *aliases) {
      if (!a.is_string()) detail::schema_error(r.child("aliases"), "expected an array of strings");
      def.aliases.push_back(a.get<std::string>());
    }
  }
  const json& frames = r.required("keyframes");
  if (!frames.is_array() || frames.empty()) detail::schema_error(r.child("keyframes"), "expected a non-empty array");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    ObjectReader k(frames[i], r.child("keyframes") + "/" + std::to_string(i));
    Keyframe kf;
    kf.time_s = k.number("t_s");
    if (kf.time_s < 0.0) detail::schema_error(k.child("t_s"), "must be non-negative");
    const std::string interp = k.string_or("interp", "smooth");
    if (interp == "linear") kf.interpolation = Interpolation::Linear;
    else if (interp == "smooth") kf.interpolation = Interpolation::Smooth;
    else detail::schema_error(k.child("interp"), "expected \"linear\" or \"smooth\"");
    kf.targets = read_targets(k.required("targets"), k.child("targets"));
    k.finish();
    def.keyframes.push_back(std::move(kf));
  }
  r.finish();
  return def;
}

bool same_targets(const BendState& a, const BendState& b) {
  if (a.size() != b.size()) return false;
  for (const auto& [ref, deg] : a) {
    const auto it = b.find(ref);
    if (it == b.end() || it->second != deg) return false;
  }
  return true;
}

std::vector<Diagnostic> check_gesture(const GestureDef& def, const std::string& path) {
  std::vector<Diagnostic> diags;
  for (std::size_t i = 1; i < def.keyframes.size(); ++i) {
    if (!(def.keyframes[i].time_s > def.keyframes[i - 1].time_s))
      diags.push_back({Errc::NonMonotoneKeyframes, path + "/keyframes/" + std::to_string(i),
                       def.name + ": keyframe times must strictly increase"});
  }
  for (std::size_t i = 0; i < def.keyframes.size(); ++i) {
    if (def.keyframes[i].time_s > def.nominal_duration_s)
      diags.push_back({Errc::KeyframeBeyondDuration, path + "/keyframes/" + std::to_string(i),
                       def.name + ": keyframe after nominal duration"});
  }
  if (def.kind == GestureKind::Continuous && !def.keyframes.empty() &&
      !same_targets(def.keyframes.front().targets, def.keyframes.back().targets))
    diags.push_back({Errc::OpenLoop, path + "/keyframes", def.name + ": first and last keyframes differ"});
  return diags;
}

BendState full_pose(const BendState& neutral, const BendState& targets) {
  BendState pose = neutral;
  for (const auto& [ref, deg] : targets) pose[ref] = deg;
  return pose;
}

double ease(double u, Interpolation interp) {
  return interp == Interpolation::Smooth ? u * u * (3.0 - 2.0 * u) : u;
}

// Both poses carry the same key set (neutral plus every keyframe's planes).
BendState lerp(const BendState& a, const BendState& b, double u) {
  BendState out = a;
  for (auto& [ref, deg] : out) {
    const auto it = b.find(ref);
    const double target = it == b.end() ? deg : it->second;
    deg = deg + (target - deg) * u;
  }
  return out;
}

}  // namespace

std::string_view to_string(GestureKind kind) noexcept {
  return kind == GestureKind::Continuous ? "continuous" : "discrete";
}

std::string_view to_string(Interpolation interp) noexcept {
  return interp == Interpolation::Linear ? "linear" : "smooth";
}

const GestureDef* GestureLibrary::resolve(std::string_view name) const {
  const std::string key = lower(name);
  for (const auto& [canonical, def] : gestures)
    if (lower(canonical) == key) return &def;
  const auto it = alias_index.find(key);
  if (it == alias_index.end()) return nullptr;
  const auto g = gestures.find(it->second);
  return g == gestures.end() ? nullptr : &g->second;
}

std::vector<std::string> GestureLibrary::names() const {
  std::vector<std::string> out;
  for (const auto& [name, def] : gestures) out.push_back(name);
  return out;
}

GestureLibrary load_library(const json& doc) {
  ObjectReader top(doc, "");
  GestureLibrary lib;
  if (const json* neutral = top.optional("neutral")) lib.neutral = read_targets(*neutral, "/neutral");
  if (const json* idle = top.optional("idle")) {
    ObjectReader r(*idle, "/idle");
    lib.idle.plane = {r.string("section"), r.string("plane")};
    std::tie(lib.idle.amplitude_min_deg, lib.idle.amplitude_max_deg) = read_pair(r.required("amplitude_deg"), r.child("amplitude_deg"));
    std::tie(lib.idle.period_min_s, lib.idle.period_max_s) = read_pair(r.required("period_s"), r.child("period_s"));
    if (!(lib.idle.amplitude_min_deg >= 0.0 && lib.idle.amplitude_min_deg <= lib.idle.amplitude_max_deg))
      detail::schema_error(r.child("amplitude_deg"), "expected 0 <= lo <= hi");
    if (!(lib.idle.period_min_s > 0.0 && lib.idle.period_min_s <= lib.idle.period_max_s))
      detail::schema_error(r.child("period_s"), "expected 0 < lo <= hi");
    r.finish();
  }
  const json& list = top.required("gestures");
  if (!list.is_array()) detail::schema_error("/gestures", "expected an array");
  top.finish();

  std::vector<Diagnostic> diags;
  std::map<std::string, std::string> canonical_lower;  // lowercased -> canonical
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string path = "/gestures/" + std::to_string(i);
    GestureDef def = read_gesture(list[i], path);
    auto found = check_gesture(def, path);
    diags.insert(diags.end(), found.begin(), found.end());
    if (!canonical_lower.emplace(lower(def.name), def.name).second) {
      diags.push_back({Errc::DuplicateName, path + "/name", "gesture '" + def.name + "' defined twice"});
      continue;
    }
    lib.gestures.emplace(def.name, std::move(def));
  }
  for (const auto& [name, def] : lib.gestures) {
    for (const auto& alias : def.aliases) {
      const std::string key = lower(alias);
      if (canonical_lower.count(key) || lib.alias_index.count(key)) {
        diags.push_back({Errc::AliasCollision, name + "/aliases", "alias '" + alias + "' already in use"});
        continue;
      }
      lib.alias_index.emplace(key, name);
    }
  }
  if (!diags.empty()) {
    const Errc first = diags.front().code;
    std::string message = "invalid gesture library: " + format_diagnostic(diags.front());
    throw Error(first, std::move(message), std::move(diags));
  }
  return lib;
}

GestureLibrary parse_library_document(const std::string& text) {
  auto doc = detail::parse_document(text, "gestures");
  if (!doc.duplicate_keys.empty()) detail::schema_error(doc.duplicate_keys.front(), "duplicate key");
  return load_library(doc.value);
}

GestureLibrary load_library_file(const std::filesystem::path& path) {
  return parse_library_document(detail::read_text_file(path));
}

json library_to_json(const GestureLibrary& library) {
  json gestures = json::array();
  for (const auto& [name, def] : library.gestures) {
    json frames = json::array();
    for (const auto& kf : def.keyframes)
      frames.push_back({{"t_s", kf.time_s}, {"interp", to_string(kf.interpolation)}, {"targets", targets_to_json(kf.targets)}});
    gestures.push_back({{"name", def.name},
                        {"kind", to_string(def.kind)},
                        {"duration_s", def.nominal_duration_s},
                        {"aliases", def.aliases},
                        {"keyframes", std::move(frames)}});
  }
  const auto& idle = library.idle;
  return {{"neutral", targets_to_json(library.neutral)},
          {"idle",
           {{"section", idle.plane.section},
            {"plane", idle.plane.plane},
            {"amplitude_deg", {idle.amplitude_min_deg, idle.amplitude_max_deg}},
            {"period_s", {idle.period_min_s, idle.period_max_s}}}},
          {"gestures", std::move(gestures)}};
}

std::vector<Diagnostic> check_library_against(const GestureLibrary& library, const PuppetModel& model) {
  std::vector<Diagnostic> diags;
  auto check = [&](const PlaneRef& ref, const std::string& path) {
    try {
      locate_plane(model, ref);
    } catch (const Error& e) {
      diags.push_back({Errc::UnknownPlaneInKeyframe, path, e.what()});
    }
  };
  for (const auto& [ref, deg] : library.neutral) check(ref, "neutral/" + ref.str());
  check(library.idle.plane, "idle");
  for (const auto& [name, def] : library.gestures)
    for (std::size_t i = 0; i < def.keyframes.size(); ++i)
      for (const auto& [ref, deg] : def.keyframes[i].targets)
        check(ref, name + "/keyframes/" + std::to_string(i) + "/" + ref.str());
  return diags;
}

const std::string& builtin_library_document() {
  // Arm "vertical" 50 deg is the neutral pose (arms about 10 deg below
  // horizontal). Elevation is +60, depression -30, hug flexes 90 inward.
  static const std::string doc = R"json({
  "neutral": {
    "body": {"sagittal": 0, "lateral": 0},
    "left_arm": {"vertical": 50, "forward": 0},
    "right_arm": {"vertical": 50, "forward": 0}
  },
  "idle": {"section": "body", "plane": "lateral", "amplitude_deg": [2, 5], "period_s": [4, 8]},
  "gestures": [
    {"name": "Waving", "kind": "discrete", "duration_s": 2.0, "keyframes": [
      {"t_s": 0.0, "targets": {"right_arm": {"vertical": 50}}},
      {"t_s": 0.4, "targets": {"right_arm": {"vertical": 110}}},
      {"t_s": 0.7, "targets": {"right_arm": {"vertical": 80}}},
      {"t_s": 1.0, "targets": {"right_arm": {"vertical": 110}}},
      {"t_s": 1.3, "targets": {"right_arm": {"vertical": 80}}},
      {"t_s": 1.6, "targets": {"right_arm": {"vertical": 110}}},
      {"t_s": 2.0, "targets": {"right_arm": {"vertical": 50}}}]},
    {"name": "Joy", "kind": "discrete", "duration_s": 1.5, "aliases": ["Happy"], "keyframes": [
      {"t_s": 0.0, "targets": {"left_arm": {"vertical": 50}, "right_arm": {"vertical": 50}}},
      {"t_s": 0.5, "targets": {"left_arm": {"vertical": 110}, "right_arm": {"vertical": 110}}},
      {"t_s": 1.0, "targets": {"left_arm": {"vertical": 110}, "right_arm": {"vertical": 110}}},
      {"t_s": 1.5, "targets": {"left_arm": {"vertical": 50}, "right_arm": {"vertical": 50}}}]},
    {"name": "Sadness", "kind": "discrete", "duration_s": 1.5, "keyframes": [
      {"t_s": 0.0, "targets": {"left_arm": {"vertical": 50}, "right_arm": {"vertical": 50}, "body": {"sagittal": 0}}},
      {"t_s": 0.5, "targets": {"left_arm": {"vertical": 20}, "right_arm": {"vertical": 20}, "body": {"sagittal": 10}}},
      {"t_s": 1.0, "targets": {"left_arm": {"vertical": 20}, "right_arm": {"vertical": 20}, "body": {"sagittal": 10}}},
      {"t_s": 1.5, "targets": {"left_arm": {"vertical": 50}, "right_arm": {"vertical": 50}, "body": {"sagittal": 0}}}]},
    {"name": "Hug", "kind": "discrete", "duration_s": 2.0, "keyframes": [
      {"t_s": 0.0, "targets": {"left_arm": {"vertical": 50, "forward": 0}, "right_arm": {"vertical": 50, "forward": 0}}},
      {"t_s": 0.75, "targets": {"left_arm": {"vertical": 60, "forward": 90}, "right_arm": {"vertical": 60, "forward": 90}}},
      {"t_s": 1.25, "targets": {"left_arm": {"vertical": 60, "forward": 90}, "right_arm": {"vertical": 60, "forward": 90}}},
      {"t_s": 2.0, "targets": {"left_arm": {"vertical": 50, "forward": 0}, "right_arm": {"vertical": 50, "forward": 0}}}]},
    {"name": "Confusion", "kind": "discrete", "duration_s": 2.0, "keyframes": [
      {"t_s": 0.0, "targets": {"body": {"lateral": 0}, "right_arm": {"vertical": 50, "forward": 0}}},
      {"t_s": 0.75, "targets": {"body": {"lateral": 20}, "right_arm": {"vertical": 130, "forward": 60}}},
      {"t_s": 1.25, "targets": {"body": {"lateral": 20}, "right_arm": {"vertical": 130, "forward": 60}}},
      {"t_s": 2.0, "targets": {"body": {"lateral": 0}, "right_arm": {"vertical": 50, "forward": 0}}}]},
    {"name": "Dancing", "kind": "continuous", "duration_s": 2.0, "keyframes": [
      {"t_s": 0.0, "targets": {"body": {"lateral": 0}, "left_arm": {"forward": 0}, "right_arm": {"forward": 0}}},
      {"t_s": 0.5, "targets": {"body": {"lateral": 10}, "left_arm": {"forward": 60}, "right_arm": {"forward": 0}}},
      {"t_s": 1.0, "targets": {"body": {"lateral": 0}, "left_arm": {"forward": 0}, "right_arm": {"forward": 0}}},
      {"t_s": 1.5, "targets": {"body": {"lateral": -10}, "left_arm": {"forward": 0}, "right_arm": {"forward": 60}}},
      {"t_s": 2.0, "targets": {"body": {"lateral": 0}, "left_arm": {"forward": 0}, "right_arm": {"forward": 0}}}]}
  ]
})json";
  return doc;
}

GestureLibrary builtin_library(const PuppetModel& model) {
  for (const char* section : {"body", "left_arm", "right_arm"}) {
    if (model.find_section(section) == nullptr)
      throw Error(Errc::ModelShapeMismatch, std::string("builtin gestures need section '") + section + "'");
  }
  GestureLibrary lib = parse_library_document(builtin_library_document());
  auto diags = check_library_against(lib, model);
  if (!diags.empty())
    throw Error(Errc::ModelShapeMismatch, "builtin gestures do not fit model: " + format_diagnostic(diags.front()),
                std::move(diags));
  return lib;
}

BendState evaluate_gesture(const GestureDef& def, const BendState& neutral, double t_s) {
  // Every keyframe pose shares one key set so interpolation never drops a plane.
  BendState base = neutral;
  for (const auto& kf : def.keyframes)
    for (const auto& [ref, deg] : kf.targets) base.try_emplace(ref, 0.0);

  const auto& frames = def.keyframes;
  if (frames.empty()) return base;
  if (t_s <= frames.front().time_s) return full_pose(base, frames.front().targets);
  if (t_s >= frames.back().time_s) return full_pose(base, frames.back().targets);
  const auto next = std::upper_bound(frames.begin(), frames.end(), t_s,
                                     [](double t, const Keyframe& kf) { return t < kf.time_s; });
  const auto prev = next - 1;
  const double u = (t_s - prev->time_s) / (next->time_s - prev->time_s);
  return lerp(full_pose(base, prev->targets), full_pose(base, next->targets), ease(u, next->interpolation));
}

double Trajectory::spacing_s() const noexcept {
  return samples.size() > 1 ? duration_s / static_cast<double>(samples.size() - 1) : duration_s;
}

double Trajectory::sample_time(std::size_t k) const noexcept {
  if (samples.size() <= 1) return 0.0;
  return k + 1 == samples.size() ? duration_s : static_cast<double>(k) * spacing_s();
}

Trajectory compile_gesture(const GestureDef& def, const PuppetModel& model, const BendState& neutral, double tick_hz) {
  if (!(tick_hz > 0.0)) throw Error(Errc::InvalidArgument, "tick_hz must be positive");
  for (const auto& kf : def.keyframes) {
    for (const auto& [ref, deg] : kf.targets) {
      try {
        locate_plane(model, ref);
      } catch (const Error& e) {
        throw Error(Errc::UnknownPlaneInKeyframe, def.name + ": " + e.what());
      }
    }
  }

  Trajectory traj{def.name, def.kind, def.nominal_duration_s, tick_hz, {}};
  const auto count = static_cast<std::size_t>(std::max(1.0, std::ceil(def.nominal_duration_s * tick_hz - 1e-9)));
  traj.samples.resize(count);
  for (std::size_t k = 0; k < count; ++k)
    traj.samples[k] = clamp_state(model, evaluate_gesture(def, neutral, traj.sample_time(k)));
  return traj;
}

const BendState& sample_trajectory(const Trajectory& traj, double t_s) {
  if (traj.samples.empty()) throw Error(Errc::InvalidArgument, "empty trajectory");
  if (traj.samples.size() == 1) return traj.samples.front();
  double t = std::max(0.0, t_s);
  if (traj.kind == GestureKind::Continuous) t = std::fmod(t, traj.duration_s);
  const double index = std::round(t / traj.spacing_s());
  const std::size_t last = traj.samples.size() - 1;
  return traj.samples[index >= static_cast<double>(last) ? last : static_cast<std::size_t>(index)];
}

IdleSway::IdleSway(std::uint64_t seed, IdleSwayConfig config) : config_(std::move(config)), rng_(seed) {}

void IdleSway::extend_to(double t_s) {
  auto uniform = [this](double lo, double hi) {
    const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  };
  while (periods_.empty() || periods_.back().start_s + periods_.back().length_s <= t_s) {
    const double start = periods_.empty() ? 0.0 : periods_.back().start_s + periods_.back().length_s;
    const double amplitude = uniform(config_.amplitude_min_deg, config_.amplitude_max_deg);
    const double length = uniform(config_.period_min_s, config_.period_max_s);
    periods_.push_back({start, length, amplitude});
  }
}

double IdleSway::angle_deg(double t_s) {
  const double t = std::max(0.0, t_s);
  extend_to(t);
  const auto it = std::upper_bound(periods_.begin(), periods_.end(), t,
                                   [](double v, const Period& p) { return v < p.start_s; }) - 1;
  return it->amplitude_deg * std::sin(2.0 * std::numbers::pi * (t - it->start_s) / it->length_s);
}

BendState IdleSway::pose(const PuppetModel& model, const BendState& neutral, double t_s) {
  BendState out = neutral;
  const auto base = neutral.find(config_.plane);
  out[config_.plane] = (base == neutral.end() ? 0.0 : base->second) + angle_deg(t_s);
  return clamp_state(model, out);
}

BendState idle_pose(std::uint64_t seed, const GestureLibrary& library, const PuppetModel& model, double t_s) {
  IdleSway sway(seed, library.idle);
  return sway.pose(model, library.neutral, t_s);
}

}  // namespace puppetai
