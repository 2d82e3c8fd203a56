// Copyright 2026 The accvlm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "accvlm/response_parser.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>

namespace accvlm
{
namespace
{

// End (exclusive) of the balanced object starting at `open`, ignoring braces in strings.
std::optional<std::size_t> balanced_end(std::string_view text, std::size_t open)
{
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = open; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) {
        return i + 1;
      }
    }
  }
  return std::nullopt;
}

double number_field(const Json & obj, const char * key)
{
  if (!obj.contains(key)) {
    throw SchemaError(std::string("missing key '") + key + "'");
  }
  const Json & v = obj.at(key);
  double value = 0.0;
  if (v.is_number()) {
    value = v.get<double>();
  } else if (v.is_string()) {
    const std::string s = v.get<std::string>();
    const char * first = s.data();
    const char * last = s.data() + s.size();
    while (first < last && *first == ' ') {
      ++first;
    }
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc() || res.ptr == first) {
      throw SchemaError(std::string("key '") + key + "' is not numeric");
    }
  } else {
    throw SchemaError(std::string("key '") + key + "' is not numeric");
  }
  if (!std::isfinite(value)) {
    throw SchemaError(std::string("key '") + key + "' is not finite");
  }
  return value;
}

}  // namespace

Json extract_first_json_object(std::string_view text)
{
  std::size_t pos = text.find('{');
  while (pos != std::string_view::npos) {
    if (const auto end = balanced_end(text, pos)) {
      Json candidate = Json::parse(text.substr(pos, *end - pos), nullptr, false);
      if (!candidate.is_discarded() && candidate.is_object()) {
        return candidate;
      }
    }
    pos = text.find('{', pos + 1);
  }
  throw NoJsonFound("no JSON object in response");
}

Prediction parse_stage1_response(std::string_view text, const ClipMeta & clip)
{
  const Json obj = extract_first_json_object(text);
  const double t = number_field(obj, "time_s");
  const double x = number_field(obj, "x");
  const double y = number_field(obj, "y");
  if (!obj.contains("type") || !obj.at("type").is_string()) {
    throw SchemaError("missing string key 'type'");
  }
  CollisionType type;
  try {
    type = parse_collision_type(obj.at("type").get<std::string>());
  } catch (const UnknownType & e) {
    throw SchemaError(e.what());
  }
  return Prediction(
    clip.clip_id, std::max(0.0, t), Point(x, y), type, Source::kStage1, clip.duration_s);
}

double parse_stage2_response(std::string_view text, const ClipMeta & clip)
{
  const Json obj = extract_first_json_object(text);
  return std::clamp(number_field(obj, "time_s"), 0.0, clip.duration_s);
}

Point parse_stage3_point(std::string_view text)
{
  const Json obj = extract_first_json_object(text);
  double x = 0.0;
  double y = 0.0;
  if (obj.contains("x") || obj.contains("y")) {
    x = number_field(obj, "x");
    y = number_field(obj, "y");
  } else {
    const char * key = obj.contains("point_2d") ? "point_2d" : "point";
    if (!obj.contains(key) || !obj.at(key).is_array() || obj.at(key).size() != 2) {
      throw SchemaError("missing keys 'x', 'y'");
    }
    const Json pair{{"x", obj.at(key)[0]}, {"y", obj.at(key)[1]}};
    x = number_field(pair, "x");
    y = number_field(pair, "y");
  }
  return Point(x / kGroundingScale, y / kGroundingScale);
}

}  // namespace accvlm
