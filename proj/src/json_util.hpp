#pragma once

// Strict JSON reading helpers shared by the document loaders. Not part of
// the public headers.

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "puppetai/error.hpp"

namespace puppetai::detail {

using nlohmann::json;

struct ParsedDocument {
  json value;
  // Pointer-like paths ("/sections/body") of keys that appeared twice in the
  // same object. Array levels show as "/#".
  std::vector<std::string> duplicate_keys;
};

ParsedDocument parse_document(const std::string& text, const std::string& source);
std::string read_text_file(const std::filesystem::path& path);

[[noreturn]] void schema_error(const std::string& pointer, const std::string& message);

// Reads fields of one JSON object and rejects anything it was not asked about.
class ObjectReader {
 public:
  ObjectReader(const json& value, std::string pointer);

  const json& required(const std::string& key);
  const json* optional(const std::string& key);
  std::string child(const std::string& key) const { return pointer_ + "/" + key; }
  const std::string& pointer() const { return pointer_; }

  double number(const std::string& key);
  double number_or(const std::string& key, double fallback);
  int integer(const std::string& key);
  std::string string(const std::string& key);
  std::string string_or(const std::string& key, std::string fallback);
  bool boolean_or(const std::string& key, bool fallback);

  // Throws SchemaError naming the first unread key.
  void finish() const;

 private:
  const json& value_;
  std::string pointer_;
  std::set<std::string> seen_;
};

double as_number(const json& value, const std::string& pointer);

}  // namespace puppetai::detail
