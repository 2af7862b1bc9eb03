#include "vmp/config.hpp"

#include <algorithm>
#include <cmath>

namespace vmp::config {

std::string type_name(const json& j) {
  switch (j.type()) {
    case json::value_t::null: return "null";
    case json::value_t::boolean: return "boolean";
    case json::value_t::number_integer:
    case json::value_t::number_unsigned: return "integer";
    case json::value_t::number_float: return "number";
    case json::value_t::string: return "string";
    case json::value_t::array: return "array";
    case json::value_t::object: return "object";
    default: return "value";
  }
}

std::string child_path(const std::string& path, const std::string& key) {
  return path + "." + key;
}

std::string child_path(const std::string& path, std::size_t index) {
  return path + "[" + std::to_string(index) + "]";
}

void fail(const std::string& path, const std::string& expected, const json& got) {
  throw ParseError(path + ": expected " + expected + ", got " + type_name(got));
}

const json& require_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "object", j);
  return j;
}

const json& require_array(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "array", j);
  return j;
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "number", j);
  return j.get<double>();
}

std::int64_t as_integer(const json& j, const std::string& path) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (std::floor(v) == v && std::abs(v) < 9.0e15) return static_cast<std::int64_t>(v);
  }
  fail(path, "integer", j);
}

std::uint64_t as_unsigned(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(j.get<std::int64_t>());
  }
  fail(path, "non-negative integer", j);
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "string", j);
  return j.get<std::string>();
}

bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "boolean", j);
  return j.get<bool>();
}

std::vector<double> as_number_array(const json& j, const std::string& path) {
  require_array(j, path);
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_number(j[i], child_path(path, i)));
  return out;
}

const json& member(const json& obj, const std::string& key, const std::string& path) {
  require_object(obj, path);
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(child_path(path, key) + ": required field is missing");
  return *it;
}

const json* optional_member(const json& obj, const std::string& key) {
  if (!obj.is_object()) return nullptr;
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

void reject_unknown(const json& obj, const std::vector<std::string>& allowed,
                    const std::string& path) {
  require_object(obj, path);
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ParseError(child_path(path, key) + ": unknown field");
    }
  }
}

}  // namespace vmp::config
