#include "racer/json_io.hpp"

#include <cmath>
#include <cstdio>

namespace racer::json_io {

std::string format_double(double value) {
  if (!std::isfinite(value)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

namespace {

template <typename Json>
void emit(const Json& v, std::string& out) {
  switch (v.type()) {
    case nlohmann::detail::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += Json(it.key()).dump();
        out += ':';
        emit(it.value(), out);
      }
      out += '}';
      break;
    }
    case nlohmann::detail::value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& e : v) {
        if (!first) out += ',';
        first = false;
        emit(e, out);
      }
      out += ']';
      break;
    }
    case nlohmann::detail::value_t::number_float:
      out += format_double(v.template get<double>());
      break;
    default:
      out += v.dump();
  }
}

}  // namespace

std::string dump(const json& value) {
  std::string out;
  emit(value, out);
  return out;
}

std::string dump(const ordered_json& value) {
  std::string out;
  emit(value, out);
  return out;
}

}  // namespace racer::json_io
