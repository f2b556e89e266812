#include "puppetai/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace puppetai {

namespace {

bool finite(double v) { return std::isfinite(v); }

Eigen::Matrix3d rpy_matrix(const Eigen::Vector3d& rpy_deg) {
  const Eigen::AngleAxisd roll(deg_to_rad(rpy_deg.x()), Eigen::Vector3d::UnitX());
  const Eigen::AngleAxisd pitch(deg_to_rad(rpy_deg.y()), Eigen::Vector3d::UnitY());
  const Eigen::AngleAxisd yaw(deg_to_rad(rpy_deg.z()), Eigen::Vector3d::UnitZ());
  return (yaw * pitch * roll).toRotationMatrix();
}

// Sum of per-plane bends as a vector in the segment's xy plane (radians).
Eigen::Vector2d bend_vector(const SegmentSpec& spec, const std::map<std::string, double>& bends_deg) {
  Eigen::Vector2d v = Eigen::Vector2d::Zero();
  for (const auto& plane : spec.planes()) {
    const auto it = bends_deg.find(plane.plane_id);
    if (it == bends_deg.end()) continue;
    const double psi = deg_to_rad(plane.orientation_deg);
    v += deg_to_rad(it->second) * Eigen::Vector2d(std::cos(psi), std::sin(psi));
  }
  return v;
}

Frame arc_from_vector(double length_mm, const Eigen::Vector2d& bend) {
  const double magnitude = bend.norm();
  if (magnitude == 0.0) return Frame::translation({0.0, 0.0, length_mm});
  return arc_transform(length_mm, magnitude, std::atan2(bend.y(), bend.x()));
}

}  // namespace

double deg_to_rad(double deg) noexcept { return deg * std::numbers::pi / 180.0; }
double rad_to_deg(double rad) noexcept { return rad * 180.0 / std::numbers::pi; }

SegmentSpec::SegmentSpec(double flex_length_mm, double rigid_length_mm, int unit_count, double unit_angle_deg,
                         std::vector<BendPlane> planes)
    : flex_length_mm_(flex_length_mm),
      rigid_length_mm_(rigid_length_mm),
      unit_count_(unit_count),
      unit_angle_deg_(unit_angle_deg),
      planes_(std::move(planes)) {
  if (!finite(flex_length_mm) || flex_length_mm <= 0.0)
    throw Error(Errc::InvalidSegment, "flex_length_mm must be positive");
  if (!finite(rigid_length_mm) || rigid_length_mm < 0.0)
    throw Error(Errc::InvalidSegment, "rigid_length_mm must be non-negative");
  if (unit_count < 1) throw Error(Errc::InvalidSegment, "unit_count must be positive");
  if (!finite(unit_angle_deg) || unit_angle_deg <= 0.0)
    throw Error(Errc::InvalidSegment, "unit_angle_deg must be positive");
}

const BendPlane* SegmentSpec::find_plane(const std::string& plane_id) const noexcept {
  const auto it = std::find_if(planes_.begin(), planes_.end(),
                               [&](const BendPlane& p) { return p.plane_id == plane_id; });
  return it == planes_.end() ? nullptr : &*it;
}

Frame Frame::operator*(const Frame& other) const {
  return {position_mm + rotation * other.position_mm, rotation * other.rotation};
}

Frame Mount::frame() const { return {translation_mm, rpy_matrix(rotation_deg)}; }

const Section* PuppetModel::find_section(const std::string& section_name) const noexcept {
  const auto it = std::find_if(sections.begin(), sections.end(),
                               [&](const Section& s) { return s.name == section_name; });
  return it == sections.end() ? nullptr : &*it;
}

double max_bend_angle(const SegmentSpec& spec) noexcept { return spec.max_bend_deg(); }

Frame arc_transform(double length_mm, double bend_rad, double direction_rad) {
  if (!(length_mm > 0.0)) throw Error(Errc::InvalidArgument, "arc length must be positive");
  const double phi = bend_rad;
  double radial = 0.0;  // offset toward the bend direction
  double axial = 0.0;
  if (std::abs(phi) < tolerance::kSmallBendRad) {
    const double phi2 = phi * phi;
    radial = length_mm * (phi / 2.0 - phi * phi2 / 24.0);
    axial = length_mm * (1.0 - phi2 / 6.0);
  } else {
    const double radius = length_mm / phi;
    const double half = std::sin(phi / 2.0);
    radial = radius * 2.0 * half * half;  // 1 - cos(phi) without cancellation
    axial = radius * std::sin(phi);
  }
  const double c = std::cos(direction_rad);
  const double s = std::sin(direction_rad);
  Frame out;
  out.position_mm = {radial * c, radial * s, axial};
  out.rotation = Eigen::AngleAxisd(phi, Eigen::Vector3d(-s, c, 0.0)).toRotationMatrix();
  return out;
}

Frame unit_arc_transform(double length_mm, double bend_deg, const BendPlane& plane) {
  return arc_transform(length_mm, deg_to_rad(bend_deg), deg_to_rad(plane.orientation_deg));
}

Frame single_arc_transform(const SegmentSpec& spec, const std::map<std::string, double>& plane_bends_deg) {
  return arc_from_vector(spec.flex_length_mm(), bend_vector(spec, plane_bends_deg));
}

double cable_displacement(const SegmentSpec& spec, const std::string& plane_id, double bend_deg) {
  const BendPlane* plane = spec.find_plane(plane_id);
  if (plane == nullptr) throw Error(Errc::UnknownPlane, "unknown plane '" + plane_id + "'");
  if (!finite(bend_deg) || bend_deg < plane->active_range.min_deg - tolerance::kAngleDeg ||
      bend_deg > plane->active_range.max_deg + tolerance::kAngleDeg)
    throw Error(Errc::AngleOutOfRange, "bend " + std::to_string(bend_deg) + " outside range of '" + plane_id + "'");
  // Negative bends on elastic planes are produced by the rope; the cable only pays out slack.
  if (bend_deg < 0.0 && plane->elastic_return) return 0.0;
  return plane->cable_offset_mm * deg_to_rad(bend_deg);
}

double clamp_bend(const SegmentSpec& spec, const std::string& plane_id, double bend_deg) {
  const BendPlane* plane = spec.find_plane(plane_id);
  if (plane == nullptr) throw Error(Errc::UnknownPlane, "unknown plane '" + plane_id + "'");
  if (std::isnan(bend_deg)) return 0.0;
  return std::clamp(bend_deg, plane->active_range.min_deg, plane->active_range.max_deg);
}

PlaneLocation locate_plane(const PuppetModel& model, const PlaneRef& ref) {
  const Section* section = model.find_section(ref.section);
  if (section == nullptr) throw Error(Errc::UnknownSection, "unknown section '" + ref.section + "'");
  for (const auto& segment : section->segments) {
    if (const BendPlane* plane = segment.find_plane(ref.plane)) return {section, &segment, plane};
  }
  throw Error(Errc::UnknownPlane, "unknown plane '" + ref.str() + "'");
}

std::vector<PlaneRef> all_planes(const PuppetModel& model) {
  std::vector<PlaneRef> out;
  for (const auto& section : model.sections)
    for (const auto& segment : section.segments)
      for (const auto& plane : segment.planes()) out.push_back({section.name, plane.plane_id});
  return out;
}

void check_state(const PuppetModel& model, const BendState& state) {
  for (const auto& [ref, angle] : state) {
    const auto loc = locate_plane(model, ref);
    const auto& range = loc.plane->active_range;
    if (!finite(angle) || angle < range.min_deg - tolerance::kAngleDeg || angle > range.max_deg + tolerance::kAngleDeg)
      throw Error(Errc::AngleOutOfRange, ref.str() + " = " + std::to_string(angle) + " outside [" +
                                             std::to_string(range.min_deg) + ", " + std::to_string(range.max_deg) + "]");
  }
}

BendState clamp_state(const PuppetModel& model, const BendState& state) {
  BendState out;
  for (const auto& [ref, angle] : state) {
    const auto loc = locate_plane(model, ref);
    out[ref] = clamp_bend(*loc.segment, ref.plane, angle);
  }
  return out;
}

BendState zero_state(const PuppetModel& model) {
  BendState out;
  for (auto& ref : all_planes(model)) out.emplace(std::move(ref), 0.0);
  return out;
}

std::vector<const Section*> mount_order(const PuppetModel& model) {
  std::vector<const Section*> order;
  std::set<std::string> placed;
  // Sections are few; repeated passes keep this simple and cycle-safe.
  for (std::size_t pass = 0; pass <= model.sections.size() && order.size() < model.sections.size(); ++pass) {
    for (const auto& section : model.sections) {
      if (placed.count(section.name)) continue;
      if (section.mount.parent.empty() || placed.count(section.mount.parent)) {
        order.push_back(&section);
        placed.insert(section.name);
      }
    }
  }
  return order;
}

SectionFrames forward_kinematics(const PuppetModel& model, const BendState& state) {
  check_state(model, state);

  // Per section, per plane bend.
  std::map<std::string, std::map<std::string, double>> bends;
  for (const auto& [ref, angle] : state) bends[ref.section][ref.plane] = angle;

  SectionFrames out;
  for (const Section* section : mount_order(model)) {
    Frame root = section->mount.frame();
    if (!section->mount.parent.empty()) root = out.at(section->mount.parent).back() * root;

    std::vector<Frame> frames{root};
    Frame current = root;
    const auto& section_bends = bends[section->name];
    for (const auto& segment : section->segments) {
      // Plane components combine into one bend vector per unit; each unit
      // carries 1/n of the section bend.
      const Eigen::Vector2d unit_bend = bend_vector(segment, section_bends) / segment.unit_count();
      const Frame unit = arc_from_vector(segment.unit_length_mm(), unit_bend);
      for (int i = 0; i < segment.unit_count(); ++i) {
        current = current * unit;
        frames.push_back(current);
      }
      current = current * Frame::translation({0.0, 0.0, segment.rigid_length_mm()});
      frames.push_back(current);
    }
    out.emplace(section->name, std::move(frames));
  }
  return out;
}

std::vector<Diagnostic> validate_model(const PuppetModel& model) {
  std::vector<Diagnostic> diags;
  std::set<std::string> names;
  for (const auto& section : model.sections) {
    if (!names.insert(section.name).second)
      diags.push_back({Errc::DuplicateSection, section.name, "section name used more than once"});
  }

  for (const auto& section : model.sections) {
    const std::string base = section.name;
    if (section.segments.empty()) diags.push_back({Errc::EmptyChain, base, "section has no segments"});
    if (!section.mount.parent.empty() && model.find_section(section.mount.parent) == nullptr)
      diags.push_back({Errc::UnknownParent, base + "/mount", "parent '" + section.mount.parent + "' not found"});

    std::set<std::string> plane_ids;
    for (std::size_t si = 0; si < section.segments.size(); ++si) {
      const auto& segment = section.segments[si];
      const std::string seg_path = base + "/segments/" + std::to_string(si);
      if (segment.planes().empty() || segment.planes().size() > 2)
        diags.push_back({Errc::BadPlaneCount, seg_path, "a segment needs 1 or 2 bend planes"});
      const double theta_max = segment.max_bend_deg();
      std::set<double> orientations;
      for (std::size_t pi = 0; pi < segment.planes().size(); ++pi) {
        const auto& plane = segment.planes()[pi];
        const std::string path = seg_path + "/planes/" + std::to_string(pi);
        if (!plane_ids.insert(plane.plane_id).second)
          diags.push_back({Errc::DuplicatePlane, path, "plane id '" + plane.plane_id + "' repeated in section"});
        if (!(plane.cable_offset_mm > 0.0))
          diags.push_back({Errc::NonPositiveCableOffset, path, "cable_offset_mm must be positive"});
        if (!(plane.orientation_deg >= 0.0 && plane.orientation_deg < 360.0))
          diags.push_back({Errc::OrientationOutOfRange, path, "orientation_deg must lie in [0, 360)"});
        else if (!orientations.insert(plane.orientation_deg).second)
          diags.push_back({Errc::DuplicateOrientation, path, "two planes share an orientation"});
        const auto& range = plane.active_range;
        if (!(range.min_deg <= 0.0 && range.max_deg >= 0.0))
          diags.push_back({Errc::RangeExcludesZero, path, "active_range must contain 0"});
        if (range.min_deg < -theta_max || range.max_deg > theta_max)
          diags.push_back({Errc::RangeExceedsMaxBend, path,
                           "active_range exceeds +/-" + std::to_string(theta_max) + " deg"});
      }
    }
  }

  // Cycle check: anything mount_order cannot place sits on a cycle (or under
  // an unknown parent, already reported).
  if (diags.empty()) {
    const auto order = mount_order(model);
    if (order.size() != model.sections.size()) {
      for (const auto& section : model.sections) {
        if (std::find(order.begin(), order.end(), &section) == order.end())
          diags.push_back({Errc::MountCycle, section.name + "/mount", "mount graph is not a tree"});
      }
    }
  }
  return diags;
}

PuppetModel demo_model() {
  auto plane = [](std::string id, double orientation, AngleRange range, bool elastic) {
    return BendPlane{std::move(id), orientation, 8.0, range, elastic};
  };

  Section body;
  body.name = "body";
  body.segments.emplace_back(100.0, 40.0, 3, 15.0,
                             std::vector<BendPlane>{plane("sagittal", 0.0, {-45.0, 45.0}, false),
                                                    plane("lateral", 90.0, {-45.0, 45.0}, false)});

  // At zero bend each arm points outward and 60 deg below horizontal. The
  // "vertical" plane raises it; the "forward" plane swings it to the front.
  Section left;
  left.name = "left_arm";
  left.mount = {"body", {0.0, 40.0, 0.0}, {180.0, -30.0, 90.0}};
  left.segments.emplace_back(122.0, 36.0, 5, 30.0,
                             std::vector<BendPlane>{plane("vertical", 0.0, {0.0, 150.0}, true),
                                                    plane("forward", 90.0, {0.0, 150.0}, true)});

  Section right;
  right.name = "right_arm";
  right.mount = {"body", {0.0, -40.0, 0.0}, {180.0, -30.0, -90.0}};
  right.segments.emplace_back(122.0, 36.0, 5, 30.0,
                              std::vector<BendPlane>{plane("vertical", 0.0, {0.0, 150.0}, true),
                                                     plane("forward", 270.0, {0.0, 150.0}, true)});

  return PuppetModel{"puppetai-demo", {std::move(body), std::move(left), std::move(right)}};
}

}  // namespace puppetai
