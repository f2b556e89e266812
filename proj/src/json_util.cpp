#include "json_util.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace puppetai::detail {

namespace {

struct Level {
  bool is_array = false;
  std::string name;  // key under which this level sits in its parent
  std::set<std::string> keys;
};

}  // namespace

ParsedDocument parse_document(const std::string& text, const std::string& source) {
  ParsedDocument doc;
  std::vector<Level> stack;
  std::string pending_key;

  auto path_of = [&](const std::string& key) {
    std::string p;
    for (std::size_t i = 1; i < stack.size(); ++i) p += "/" + (stack[i].name.empty() ? "#" : stack[i].name);
    return p + "/" + key;
  };

  const json::parser_callback_t callback = [&](int, json::parse_event_t event, json& parsed) {
    switch (event) {
      case json::parse_event_t::object_start:
      case json::parse_event_t::array_start: {
        Level level;
        level.is_array = event == json::parse_event_t::array_start;
        if (!stack.empty() && !stack.back().is_array) level.name = pending_key;
        stack.push_back(std::move(level));
        break;
      }
      case json::parse_event_t::object_end:
      case json::parse_event_t::array_end:
        if (!stack.empty()) stack.pop_back();
        break;
      case json::parse_event_t::key: {
        pending_key = parsed.get<std::string>();
        if (!stack.empty() && !stack.back().keys.insert(pending_key).second)
          doc.duplicate_keys.push_back(path_of(pending_key));
        break;
      }
      case json::parse_event_t::value:
        break;
    }
    return true;
  };

  try {
    doc.value = json::parse(text, callback);
  } catch (const json::parse_error& e) {
    throw Error(Errc::SchemaError, source + ": " + e.what());
  }
  return doc;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::FileNotFound, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void schema_error(const std::string& pointer, const std::string& message) {
  throw Error(Errc::SchemaError, (pointer.empty() ? std::string("/") : pointer) + ": " + message,
              std::vector<Diagnostic>{{Errc::SchemaError, pointer.empty() ? "/" : pointer, message}});
}

ObjectReader::ObjectReader(const json& value, std::string pointer) : value_(value), pointer_(std::move(pointer)) {
  if (!value_.is_object()) schema_error(pointer_, "expected an object");
}

const json& ObjectReader::required(const std::string& key) {
  seen_.insert(key);
  const auto it = value_.find(key);
  if (it == value_.end()) schema_error(child(key), "missing required field");
  return *it;
}

const json* ObjectReader::optional(const std::string& key) {
  seen_.insert(key);
  const auto it = value_.find(key);
  return it == value_.end() ? nullptr : &*it;
}

double as_number(const json& value, const std::string& pointer) {
  if (!value.is_number()) schema_error(pointer, "expected a number");
  const double v = value.get<double>();
  if (!std::isfinite(v)) schema_error(pointer, "expected a finite number");
  return v;
}

double ObjectReader::number(const std::string& key) { return as_number(required(key), child(key)); }

double ObjectReader::number_or(const std::string& key, double fallback) {
  const json* v = optional(key);
  return v == nullptr ? fallback : as_number(*v, child(key));
}

int ObjectReader::integer(const std::string& key) {
  const json& v = required(key);
  if (!v.is_number_integer()) schema_error(child(key), "expected an integer");
  return v.get<int>();
}

std::string ObjectReader::string(const std::string& key) {
  const json& v = required(key);
  if (!v.is_string()) schema_error(child(key), "expected a string");
  return v.get<std::string>();
}

std::string ObjectReader::string_or(const std::string& key, std::string fallback) {
  const json* v = optional(key);
  if (v == nullptr) return fallback;
  if (!v->is_string()) schema_error(child(key), "expected a string");
  return v->get<std::string>();
}

bool ObjectReader::boolean_or(const std::string& key, bool fallback) {
  const json* v = optional(key);
  if (v == nullptr) return fallback;
  if (!v->is_boolean()) schema_error(child(key), "expected a boolean");
  return v->get<bool>();
}

void ObjectReader::finish() const {
  for (auto it = value_.begin(); it != value_.end(); ++it) {
    if (!seen_.count(it.key())) schema_error(child(it.key()), "unknown field");
  }
}

}  // namespace puppetai::detail
