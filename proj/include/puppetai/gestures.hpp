#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "puppetai/kinematics.hpp"

namespace puppetai {

enum class Interpolation { Linear, Smooth };
enum class GestureKind { Discrete, Continuous };

std::string_view to_string(GestureKind kind) noexcept;
std::string_view to_string(Interpolation interp) noexcept;

// `interpolation` shapes the segment that ends at this keyframe. Planes not
// named in `targets` take their neutral value.
struct Keyframe {
  double time_s = 0.0;
  BendState targets;
  Interpolation interpolation = Interpolation::Smooth;

  bool operator==(const Keyframe&) const = default;
};

struct GestureDef {
  std::string name;
  GestureKind kind = GestureKind::Discrete;
  std::vector<Keyframe> keyframes;
  double nominal_duration_s = 1.0;
  std::vector<std::string> aliases;

  bool loopable() const noexcept { return kind == GestureKind::Continuous; }
  bool operator==(const GestureDef&) const = default;
};

struct IdleSwayConfig {
  PlaneRef plane{"body", "lateral"};
  double amplitude_min_deg = 2.0;
  double amplitude_max_deg = 5.0;
  double period_min_s = 4.0;
  double period_max_s = 8.0;

  bool operator==(const IdleSwayConfig&) const = default;
};

struct GestureLibrary {
  std::map<std::string, GestureDef> gestures;      // canonical name -> definition
  std::map<std::string, std::string> alias_index;  // lowercased alias -> canonical name
  BendState neutral;
  IdleSwayConfig idle;

  // Case-insensitive lookup over canonical names and aliases.
  const GestureDef* resolve(std::string_view name) const;
  std::vector<std::string> names() const;
};

// Document: {neutral?: {section: {plane: deg}}, idle?: {section, plane,
// amplitude_deg: [lo,hi], period_s: [lo,hi]}, gestures: [{name, kind,
// duration_s, aliases?, keyframes: [{t_s, interp?, targets}]}]}.
// Throws the first finding's code with every diagnostic attached.
GestureLibrary load_library(const nlohmann::json& doc);
GestureLibrary parse_library_document(const std::string& text);
GestureLibrary load_library_file(const std::filesystem::path& path);
nlohmann::json library_to_json(const GestureLibrary& library);

// Gesture targets, neutral pose and idle plane must all exist in `model`.
std::vector<Diagnostic> check_library_against(const GestureLibrary& library, const PuppetModel& model);

const std::string& builtin_library_document();
// Requires body, left_arm and right_arm with the demo planes.
GestureLibrary builtin_library(const PuppetModel& model);

// Keyframe interpolant at time t (held outside the keyframe span).
BendState evaluate_gesture(const GestureDef& def, const BendState& neutral, double t_s);

struct Trajectory {
  std::string gesture;
  GestureKind kind = GestureKind::Discrete;
  double duration_s = 0.0;
  double tick_hz = 0.0;
  std::vector<BendState> samples;

  // Samples are endpoint-inclusive: sample k sits at k * spacing_s(), the
  // last one exactly at duration_s.
  double spacing_s() const noexcept;
  double sample_time(std::size_t k) const noexcept;
};

Trajectory compile_gesture(const GestureDef& def, const PuppetModel& model, const BendState& neutral, double tick_hz);

// Nearest sample; discrete trajectories hold the last sample, continuous
// ones wrap modulo duration.
const BendState& sample_trajectory(const Trajectory& traj, double t_s);

// Seeded lateral sway: each period draws an amplitude and period length,
// angle(t) = A * sin(2 pi (t - t_start) / P) within it.
class IdleSway {
 public:
  IdleSway(std::uint64_t seed, IdleSwayConfig config);

  double angle_deg(double t_s);
  BendState pose(const PuppetModel& model, const BendState& neutral, double t_s);
  const IdleSwayConfig& config() const noexcept { return config_; }

 private:
  struct Period {
    double start_s;
    double length_s;
    double amplitude_deg;
  };
  void extend_to(double t_s);

  IdleSwayConfig config_;
  std::mt19937_64 rng_;
  std::vector<Period> periods_;
};

BendState idle_pose(std::uint64_t seed, const GestureLibrary& library, const PuppetModel& model, double t_s);

}  // namespace puppetai
