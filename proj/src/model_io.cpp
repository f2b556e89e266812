#include "puppetai/model_io.hpp"

#include "json_util.hpp"

namespace puppetai {

using detail::ObjectReader;
using nlohmann::json;

namespace {

Eigen::Vector3d read_vec3(const json& value, const std::string& pointer) {
  if (!value.is_array() || value.size() != 3) detail::schema_error(pointer, "expected [x, y, z]");
  return {detail::as_number(value[0], pointer + "/0"), detail::as_number(value[1], pointer + "/1"),
          detail::as_number(value[2], pointer + "/2")};
}

BendPlane read_plane(const json& value, const std::string& pointer) {
  ObjectReader r(value, pointer);
  BendPlane plane;
  plane.plane_id = r.string("plane_id");
  plane.orientation_deg = r.number("orientation_deg");
  plane.cable_offset_mm = r.number("cable_offset_mm");
  const json& range = r.required("active_range");
  if (!range.is_array() || range.size() != 2) detail::schema_error(r.child("active_range"), "expected [min, max]");
  plane.active_range = {detail::as_number(range[0], r.child("active_range") + "/0"),
                        detail::as_number(range[1], r.child("active_range") + "/1")};
  plane.elastic_return = r.boolean_or("elastic_return", true);
  r.finish();
  return plane;
}

SegmentSpec read_segment(const json& value, const std::string& pointer) {
  ObjectReader r(value, pointer);
  const double flex = r.number("flex_length_mm");
  const double rigid = r.number_or("rigid_length_mm", 0.0);
  const int units = r.integer("unit_count");
  const double unit_angle = r.number("unit_angle_deg");
  const json& planes_json = r.required("planes");
  if (!planes_json.is_array()) detail::schema_error(r.child("planes"), "expected an array");
  std::vector<BendPlane> planes;
  for (std::size_t i = 0; i < planes_json.size(); ++i)
    planes.push_back(read_plane(planes_json[i], r.child("planes") + "/" + std::to_string(i)));
  r.finish();
  try {
    return SegmentSpec(flex, rigid, units, unit_angle, std::move(planes));
  } catch (const Error& e) {
    throw Error(e.code(), pointer + ": " + e.what(), std::vector<Diagnostic>{{e.code(), pointer, e.what()}});
  }
}

}  // namespace

PuppetModel model_from_json(const json& doc) {
  ObjectReader top(doc, "");
  PuppetModel model;
  model.name = top.string_or("name", "");
  const json& sections = top.required("sections");
  if (!sections.is_object()) detail::schema_error("/sections", "expected an object");
  for (auto it = sections.begin(); it != sections.end(); ++it) {
    const std::string pointer = "/sections/" + it.key();
    ObjectReader r(it.value(), pointer);
    Section section;
    section.name = it.key();
    if (const json* mount = r.optional("mount")) {
      ObjectReader m(*mount, r.child("mount"));
      section.mount.parent = m.string_or("parent", "");
      if (const json* t = m.optional("translation_mm")) section.mount.translation_mm = read_vec3(*t, m.child("translation_mm"));
      if (const json* rot = m.optional("rotation_deg")) section.mount.rotation_deg = read_vec3(*rot, m.child("rotation_deg"));
      m.finish();
    }
    const json& segments = r.required("segments");
    if (!segments.is_array()) detail::schema_error(r.child("segments"), "expected an array");
    for (std::size_t i = 0; i < segments.size(); ++i)
      section.segments.push_back(read_segment(segments[i], r.child("segments") + "/" + std::to_string(i)));
    r.finish();
    model.sections.push_back(std::move(section));
  }
  top.finish();

  auto diags = validate_model(model);
  if (!diags.empty()) {
    const Errc first = diags.front().code;
    std::string message = "invalid model: " + format_diagnostic(diags.front());
    throw Error(first, std::move(message), std::move(diags));
  }
  return model;
}

PuppetModel parse_model_document(const std::string& text) {
  auto doc = detail::parse_document(text, "model");
  if (!doc.duplicate_keys.empty()) {
    std::vector<Diagnostic> diags;
    for (const auto& path : doc.duplicate_keys) {
      const bool section = path.rfind("/sections/", 0) == 0 && path.find('/', 10) == std::string::npos;
      diags.push_back({section ? Errc::DuplicateSection : Errc::SchemaError, path, "duplicate key"});
    }
    const Errc first = diags.front().code;
    std::string message = "invalid model: " + format_diagnostic(diags.front());
    throw Error(first, std::move(message), std::move(diags));
  }
  return model_from_json(doc.value);
}

PuppetModel load_model_file(const std::filesystem::path& path) {
  return parse_model_document(detail::read_text_file(path));
}

json model_to_json(const PuppetModel& model) {
  json sections = json::object();
  for (const auto& section : model.sections) {
    json mount = {{"translation_mm", {section.mount.translation_mm.x(), section.mount.translation_mm.y(),
                                      section.mount.translation_mm.z()}},
                  {"rotation_deg", {section.mount.rotation_deg.x(), section.mount.rotation_deg.y(),
                                    section.mount.rotation_deg.z()}}};
    if (!section.mount.parent.empty()) mount["parent"] = section.mount.parent;
    json segments = json::array();
    for (const auto& segment : section.segments) {
      json planes = json::array();
      for (const auto& p : segment.planes()) {
        planes.push_back({{"plane_id", p.plane_id},
                          {"orientation_deg", p.orientation_deg},
                          {"cable_offset_mm", p.cable_offset_mm},
                          {"active_range", {p.active_range.min_deg, p.active_range.max_deg}},
                          {"elastic_return", p.elastic_return}});
      }
      segments.push_back({{"flex_length_mm", segment.flex_length_mm()},
                          {"rigid_length_mm", segment.rigid_length_mm()},
                          {"unit_count", segment.unit_count()},
                          {"unit_angle_deg", segment.unit_angle_deg()},
                          {"planes", std::move(planes)}});
    }
    sections[section.name] = {{"mount", std::move(mount)}, {"segments", std::move(segments)}};
  }
  return {{"name", model.name}, {"sections", std::move(sections)}};
}

}  // namespace puppetai
