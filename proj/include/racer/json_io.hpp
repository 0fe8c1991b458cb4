#pragma once

#include <string>

#include <json.hpp>

namespace racer::json_io {

using nlohmann::json;
using nlohmann::ordered_json;

/// Doubles as "%.17g" so output bytes are platform-stable; non-finite as null.
std::string format_double(double value);

/// Compact single-line JSON. `json` objects come out with sorted keys,
/// `ordered_json` objects in insertion order.
std::string dump(const json& value);
std::string dump(const ordered_json& value);

}  // namespace racer::json_io
