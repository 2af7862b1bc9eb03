#pragma once

// Typed field access for JSON configs. Errors name the field path and the
// expected type, e.g. "$.model.beta: expected number, got string".

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vmp/errors.hpp"

namespace vmp::config {

using nlohmann::json;

std::string type_name(const json& j);
std::string child_path(const std::string& path, const std::string& key);
std::string child_path(const std::string& path, std::size_t index);

[[noreturn]] void fail(const std::string& path, const std::string& expected, const json& got);

const json& require_object(const json& j, const std::string& path);
const json& require_array(const json& j, const std::string& path);

double as_number(const json& j, const std::string& path);
std::int64_t as_integer(const json& j, const std::string& path);
std::uint64_t as_unsigned(const json& j, const std::string& path);
std::string as_string(const json& j, const std::string& path);
bool as_bool(const json& j, const std::string& path);
std::vector<double> as_number_array(const json& j, const std::string& path);

/// Member lookup; throws ParseError when a required key is absent.
const json& member(const json& obj, const std::string& key, const std::string& path);
const json* optional_member(const json& obj, const std::string& key);

/// Rejects keys outside `allowed`, so typos surface instead of being ignored.
void reject_unknown(const json& obj, const std::vector<std::string>& allowed,
                    const std::string& path);

}  // namespace vmp::config
