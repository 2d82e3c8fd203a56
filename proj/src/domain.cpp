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

#include "accvlm/domain.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace accvlm
{
namespace
{

// Lowercase and drop separators: "Grade-Separated  Intersection" -> "gradeseparatedintersection".
std::string normalize_token(std::string_view text)
{
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    const auto uc = static_cast<unsigned char>(c);
    if (c == '-' || c == '_' || std::isspace(uc)) {
      continue;
    }
    out.push_back(static_cast<char>(std::tolower(uc)));
  }
  return out;
}

}  // namespace

std::string_view to_string(CollisionType type)
{
  switch (type) {
    case CollisionType::kHeadOn:
      return "head-on";
    case CollisionType::kRearEnd:
      return "rear-end";
    case CollisionType::kTBone:
      return "t-bone";
    case CollisionType::kSideswipe:
      return "sideswipe";
    case CollisionType::kSingleVehicle:
      return "single-vehicle";
  }
  return "rear-end";
}

CollisionType parse_collision_type(std::string_view text)
{
  const std::string key = normalize_token(text);
  for (CollisionType type : kAllCollisionTypes) {
    if (normalize_token(to_string(type)) == key) {
      return type;
    }
  }
  throw UnknownType("unknown collision type: '" + std::string(text) + "'");
}

bool LayoutRules::allows_perpendicular(std::string_view tag) const
{
  const std::string key = normalize_token(tag);
  return std::none_of(
    perpendicular_impossible.begin(), perpendicular_impossible.end(),
    [&](const std::string & banned) { return normalize_token(banned) == key; });
}

SceneLayout::SceneLayout(std::string tag, const LayoutRules & rules)
: tag_(std::move(tag)), perpendicular_possible_(rules.allows_perpendicular(tag_))
{
}

Point::Point(double x, double y)
{
  if (!std::isfinite(x) || !std::isfinite(y)) {
    throw InvalidCoordinate("non-finite point coordinate");
  }
  x_ = std::clamp(x, 0.0, 1.0);
  y_ = std::clamp(y, 0.0, 1.0);
}

Point clamp_point(double x, double y) { return Point(x, y); }

double distance(const Point & a, const Point & b)
{
  return std::hypot(a.x() - b.x(), a.y() - b.y());
}

Box::Box(double x0, double y0, double x1, double y1) : x0_(x0), y0_(y0), x1_(x1), y1_(y1)
{
  const auto in_unit = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
  if (!in_unit(x0) || !in_unit(y0) || !in_unit(x1) || !in_unit(y1)) {
    throw InvalidBox("box coordinates must lie in [0, 1]");
  }
  if (!(x0 < x1) || !(y0 < y1)) {
    throw InvalidBox("degenerate box");
  }
}

Point Box::center() const { return Point(0.5 * (x0_ + x1_), 0.5 * (y0_ + y1_)); }

bool Box::contains(const Point & p) const
{
  return p.x() >= x0_ && p.x() <= x1_ && p.y() >= y0_ && p.y() <= y1_;
}

Point Box::clamp(const Point & p) const
{
  return Point(std::clamp(p.x(), x0_, x1_), std::clamp(p.y(), y0_, y1_));
}

void ClipMeta::validate() const
{
  if (clip_id.empty()) {
    throw InvalidClip("clip_id must not be empty");
  }
  if (!std::isfinite(duration_s) || duration_s <= 0.0) {
    throw InvalidClip("clip '" + clip_id + "': duration_s must be > 0");
  }
  if (!std::isfinite(native_fps) || native_fps <= 0.0) {
    throw InvalidClip("clip '" + clip_id + "': native_fps must be > 0");
  }
  if (frame_source && !(frame_source->fps > 0.0)) {
    throw InvalidClip("clip '" + clip_id + "': frame_source.fps must be > 0");
  }
}

std::string_view to_string(Source source)
{
  switch (source) {
    case Source::kStage1:
      return "stage1";
    case Source::kStage2:
      return "stage2";
    case Source::kStage3:
      return "stage3";
    case Source::kEnsemble:
      return "ensemble";
    case Source::kSnapped:
      return "snapped";
    case Source::kFallback:
      return "fallback";
  }
  return "stage1";
}

Source parse_source(std::string_view text)
{
  for (Source s : {Source::kStage1, Source::kStage2, Source::kStage3, Source::kEnsemble,
                   Source::kSnapped, Source::kFallback}) {
    if (to_string(s) == text) {
      return s;
    }
  }
  throw std::invalid_argument("unknown prediction source: '" + std::string(text) + "'");
}

Prediction::Prediction(
  std::string clip_id, double time_s, Point centroid, CollisionType type, Source source,
  double duration_s)
: clip_id_(std::move(clip_id)),
  time_s_(0.0),
  centroid_(centroid),
  type_(type),
  source_(source),
  duration_s_(duration_s)
{
  if (std::isnan(time_s)) {
    throw InvalidCoordinate("prediction time is NaN");
  }
  if (std::isnan(duration_s) || duration_s < 0.0) {
    throw InvalidClip("prediction duration bound must be >= 0");
  }
  time_s_ = std::clamp(time_s, 0.0, duration_s_);
  if (!std::isfinite(time_s_)) {
    throw InvalidCoordinate("prediction time is not finite");
  }
}

Prediction Prediction::with_time(double time_s) const
{
  return Prediction(clip_id_, time_s, centroid_, type_, source_, duration_s_);
}

Prediction Prediction::with_centroid(Point centroid) const
{
  Prediction out = *this;
  out.centroid_ = centroid;
  return out;
}

Prediction Prediction::with_type(CollisionType type) const
{
  Prediction out = *this;
  out.type_ = type;
  return out;
}

Prediction Prediction::with_source(Source source) const
{
  Prediction out = *this;
  out.source_ = source;
  return out;
}

bool Prediction::operator==(const Prediction & other) const
{
  return clip_id_ == other.clip_id_ && time_s_ == other.time_s_ && centroid_ == other.centroid_ &&
         type_ == other.type_ && source_ == other.source_;
}

Prediction fallback_prediction(const ClipMeta & clip)
{
  return Prediction(
    clip.clip_id, clip.duration_s / 2.0, Point(0.5, 0.5), CollisionType::kRearEnd,
    Source::kFallback, clip.duration_s);
}

}  // namespace accvlm
