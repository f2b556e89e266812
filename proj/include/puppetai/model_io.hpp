#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "puppetai/kinematics.hpp"

namespace puppetai {

// PuppetModel document:
//   {name, sections: {<name>: {mount: {parent?, translation_mm: [x,y,z],
//    rotation_deg: [r,p,y]}, segments: [{flex_length_mm, rigid_length_mm,
//    unit_count, unit_angle_deg, planes: [{plane_id, orientation_deg,
//    cable_offset_mm, active_range: [min,max], elastic_return}]}]}}}
// Unknown fields are rejected. Parsing throws SchemaError for shape
// problems; a model that parses but breaks an invariant throws the first
// validate_model code with the full diagnostic list attached.
PuppetModel model_from_json(const nlohmann::json& doc);
PuppetModel parse_model_document(const std::string& text);
PuppetModel load_model_file(const std::filesystem::path& path);

nlohmann::json model_to_json(const PuppetModel& model);

}  // namespace puppetai
