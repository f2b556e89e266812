#pragma once

// Cable-driven continuum segments: geometry, bend limits, cable mapping and
// constant-curvature forward kinematics.
//
// Conventions
//   - Each segment grows along its local +z axis.
//   - A bend plane with orientation psi bends the segment toward
//     (cos psi, sin psi, 0) for positive angles.
//   - Angles are degrees at every interface; radians only inside formulas.

#include <compare>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "puppetai/error.hpp"

namespace puppetai {

namespace tolerance {
// Slack allowed when checking a bend angle against its plane range.
inline constexpr double kAngleDeg = 1e-9;
// Below this total bend (radians) arc formulas switch to their series form.
inline constexpr double kSmallBendRad = 1e-6;
}  // namespace tolerance

double deg_to_rad(double deg) noexcept;
double rad_to_deg(double rad) noexcept;

struct AngleRange {
  double min_deg = 0.0;
  double max_deg = 0.0;

  bool operator==(const AngleRange&) const = default;
};

struct BendPlane {
  std::string plane_id;
  double orientation_deg = 0.0;
  double cable_offset_mm = 8.0;
  AngleRange active_range;
  bool elastic_return = true;

  bool operator==(const BendPlane&) const = default;
};

// One deformable section followed by an optional rigid section. Scalar
// invariants are enforced at construction; plane-level invariants are
// reported by validate_model.
class SegmentSpec {
 public:
  SegmentSpec(double flex_length_mm, double rigid_length_mm, int unit_count, double unit_angle_deg,
              std::vector<BendPlane> planes);

  double flex_length_mm() const noexcept { return flex_length_mm_; }
  double rigid_length_mm() const noexcept { return rigid_length_mm_; }
  int unit_count() const noexcept { return unit_count_; }
  double unit_angle_deg() const noexcept { return unit_angle_deg_; }
  const std::vector<BendPlane>& planes() const noexcept { return planes_; }

  double max_bend_deg() const noexcept { return unit_count_ * unit_angle_deg_; }
  double total_length_mm() const noexcept { return flex_length_mm_ + rigid_length_mm_; }
  double unit_length_mm() const noexcept { return flex_length_mm_ / unit_count_; }

  const BendPlane* find_plane(const std::string& plane_id) const noexcept;

  bool operator==(const SegmentSpec&) const = default;

 private:
  double flex_length_mm_;
  double rigid_length_mm_;
  int unit_count_;
  double unit_angle_deg_;
  std::vector<BendPlane> planes_;
};

struct Frame {
  Eigen::Vector3d position_mm = Eigen::Vector3d::Zero();
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();

  static Frame identity() { return {}; }
  static Frame translation(const Eigen::Vector3d& t) { return {t, Eigen::Matrix3d::Identity()}; }

  // this * other: `other` expressed in this frame.
  Frame operator*(const Frame& other) const;
  Eigen::Vector3d axis() const { return rotation.col(2); }
};

// Rigid attachment of a chain root to its parent's tip frame (or the base
// when parent is empty). rotation_deg is roll/pitch/yaw, applied as
// Rz(yaw) * Ry(pitch) * Rx(roll).
struct Mount {
  std::string parent;
  Eigen::Vector3d translation_mm = Eigen::Vector3d::Zero();
  Eigen::Vector3d rotation_deg = Eigen::Vector3d::Zero();

  Frame frame() const;
  bool operator==(const Mount&) const = default;
};

struct Section {
  std::string name;
  Mount mount;
  std::vector<SegmentSpec> segments;

  bool operator==(const Section&) const = default;
};

struct PuppetModel {
  std::string name;
  std::vector<Section> sections;

  const Section* find_section(const std::string& name) const noexcept;
  bool operator==(const PuppetModel&) const = default;
};

struct PlaneRef {
  std::string section;
  std::string plane;

  std::string str() const { return section + "/" + plane; }
  auto operator<=>(const PlaneRef&) const = default;
  bool operator==(const PlaneRef&) const = default;
};

// Bend angle (degrees) per (section, plane). Missing planes are straight.
using BendState = std::map<PlaneRef, double>;

// Forward-kinematics output: per section, the frames at every deformation
// unit boundary (root first) followed by each segment's rigid tip.
using SectionFrames = std::map<std::string, std::vector<Frame>>;

struct PlaneLocation {
  const Section* section = nullptr;
  const SegmentSpec* segment = nullptr;
  const BendPlane* plane = nullptr;
};

double max_bend_angle(const SegmentSpec& spec) noexcept;

// Rigid transform of a single constant-curvature arc of length `length_mm`
// bent by `bend_deg` in `plane`.
Frame unit_arc_transform(double length_mm, double bend_deg, const BendPlane& plane);

// Arc bent by `bend_rad` toward direction `direction_rad` about the axis.
Frame arc_transform(double length_mm, double bend_rad, double direction_rad);

// Closed form for a whole deformable section bent by the given per-plane
// totals; used as the reference route for unit composition.
Frame single_arc_transform(const SegmentSpec& spec, const std::map<std::string, double>& plane_bends_deg);

double cable_displacement(const SegmentSpec& spec, const std::string& plane_id, double bend_deg);
double clamp_bend(const SegmentSpec& spec, const std::string& plane_id, double bend_deg);

PlaneLocation locate_plane(const PuppetModel& model, const PlaneRef& ref);
std::vector<PlaneRef> all_planes(const PuppetModel& model);

// Throws UnknownSection / UnknownPlane / AngleOutOfRange.
void check_state(const PuppetModel& model, const BendState& state);
// Clamps every entry into its plane range. Unknown keys throw.
BendState clamp_state(const PuppetModel& model, const BendState& state);
// Every plane of the model at 0 degrees.
BendState zero_state(const PuppetModel& model);

SectionFrames forward_kinematics(const PuppetModel& model, const BendState& state);

std::vector<Diagnostic> validate_model(const PuppetModel& model);

// Sections ordered so that every parent precedes its children. Assumes a
// validated model.
std::vector<const Section*> mount_order(const PuppetModel& model);

// The body + two arms morphology used throughout the demo configuration.
PuppetModel demo_model();

}  // namespace puppetai
