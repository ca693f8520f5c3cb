// SPDX-License-Identifier: Apache-2.0
#pragma once

// Strict helpers shared by the JSON readers: unknown keys are errors and
// numeric fields must have the exact JSON kind the schema names.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "dnnpart/error.hpp"

namespace dnnpart::detail {

using Json = nlohmann::json;

inline Json parse_json(std::string_view text, std::string_view what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    const std::size_t limit = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < limit; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(std::string(what) + ":" + std::to_string(line) + ":" + std::to_string(col) +
                ": malformed JSON: " + e.what());
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void require_object(const Json& j, std::string_view ctx) {
  if (!j.is_object()) throw Error(std::string(ctx) + ": expected a JSON object");
}

inline void reject_unknown(const Json& j, std::initializer_list<std::string_view> allowed,
                           std::string_view ctx) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw Error(std::string(ctx) + ": unknown field \"" + key + "\"");
  }
}

inline const Json& require_key(const Json& j, std::string_view key, std::string_view ctx) {
  auto it = j.find(key);
  if (it == j.end())
    throw Error(std::string(ctx) + ": missing field \"" + std::string(key) + "\"");
  return *it;
}

inline std::string get_string(const Json& j, std::string_view key, std::string_view ctx) {
  const Json& v = require_key(j, key, ctx);
  if (!v.is_string())
    throw Error(std::string(ctx) + ": field \"" + std::string(key) + "\" must be a string");
  return v.get<std::string>();
}

inline std::uint64_t as_uint(const Json& v, std::string_view what) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  throw Error(std::string(what) + " must be a non-negative integer");
}

inline std::uint64_t get_uint(const Json& j, std::string_view key, std::string_view ctx) {
  return as_uint(require_key(j, key, ctx),
                 std::string(ctx) + ": field \"" + std::string(key) + "\"");
}

inline double as_number(const Json& v, std::string_view what) {
  if (!v.is_number()) throw Error(std::string(what) + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw Error(std::string(what) + " must be finite");
  return x;
}

inline double get_number(const Json& j, std::string_view key, std::string_view ctx) {
  return as_number(require_key(j, key, ctx),
                   std::string(ctx) + ": field \"" + std::string(key) + "\"");
}

}  // namespace dnnpart::detail
