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

#ifndef ACCVLM_RESPONSE_PARSER_HPP_
#define ACCVLM_RESPONSE_PARSER_HPP_

#include "accvlm/domain.hpp"
#include "accvlm/io.hpp"

#include <stdexcept>
#include <string_view>

namespace accvlm
{

class ResponseError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class NoJsonFound : public ResponseError
{
public:
  using ResponseError::ResponseError;
};

class SchemaError : public ResponseError
{
public:
  using ResponseError::ResponseError;
};

/// Native coordinate scale of the grounding answer.
inline constexpr double kGroundingScale = 1000.0;

/// First balanced `{...}` span of the text that parses as a JSON object;
/// markdown fences and surrounding prose are ignored. Throws NoJsonFound.
Json extract_first_json_object(std::string_view text);

/// Keys time_s, x, y (in [0, 1]) and type. Numbers may also be given as numeric
/// strings. Time is clamped to the clip, the point to the unit square.
Prediction parse_stage1_response(std::string_view text, const ClipMeta & clip);

/// Key time_s, clamped to [0, duration].
double parse_stage2_response(std::string_view text, const ClipMeta & clip);

/// Keys x, y (or a two-element "point"/"point_2d" array) on the [0, 1000]
/// scale, divided by 1000 and clamped into [0, 1].
Point parse_stage3_point(std::string_view text);

}  // namespace accvlm

#endif  // ACCVLM_RESPONSE_PARSER_HPP_
