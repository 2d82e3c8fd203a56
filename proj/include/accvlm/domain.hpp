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

#ifndef ACCVLM_DOMAIN_HPP_
#define ACCVLM_DOMAIN_HPP_

#include <array>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

namespace accvlm
{

// =============================================================================
// Errors
// =============================================================================

class InvalidCoordinate : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

class UnknownType : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

class InvalidBox : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

class InvalidClip : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

// =============================================================================
// Collision type
// =============================================================================

enum class CollisionType { kHeadOn, kRearEnd, kTBone, kSideswipe, kSingleVehicle };

inline constexpr std::array<CollisionType, 5> kAllCollisionTypes = {
  CollisionType::kHeadOn, CollisionType::kRearEnd, CollisionType::kTBone,
  CollisionType::kSideswipe, CollisionType::kSingleVehicle};

/// Canonical lowercase hyphenated name, e.g. "rear-end".
std::string_view to_string(CollisionType type);

/// Case-insensitive match that ignores spaces, hyphens and underscores, so
/// "T Bone", "t_bone" and "TBONE" all map to t-bone. Throws UnknownType.
CollisionType parse_collision_type(std::string_view text);

// =============================================================================
// Scene layout
// =============================================================================

/// Layouts in which two vehicles cannot meet perpendicularly. Tags are compared
/// after the same normalization as collision types.
struct LayoutRules
{
  std::set<std::string> perpendicular_impossible = {
    "highway", "tunnel", "grade-separated intersection"};

  bool allows_perpendicular(std::string_view tag) const;
};

class SceneLayout
{
public:
  SceneLayout() = default;
  explicit SceneLayout(std::string tag, const LayoutRules & rules = LayoutRules{});

  const std::string & tag() const { return tag_; }
  bool perpendicular_possible() const { return perpendicular_possible_; }

  bool operator==(const SceneLayout &) const = default;

private:
  std::string tag_;
  bool perpendicular_possible_ = true;
};

// =============================================================================
// Geometry
// =============================================================================

/// Normalized image point; both coordinates always lie in [0, 1].
class Point
{
public:
  Point() = default;
  /// Saturates each coordinate into [0, 1]. Throws InvalidCoordinate on NaN/inf.
  Point(double x, double y);

  double x() const { return x_; }
  double y() const { return y_; }

  bool operator==(const Point &) const = default;

private:
  double x_ = 0.5;
  double y_ = 0.5;
};

Point clamp_point(double x, double y);

double distance(const Point & a, const Point & b);

/// Normalized axis-aligned box with x0 < x1, y0 < y1, all inside [0, 1].
class Box
{
public:
  Box(double x0, double y0, double x1, double y1);

  double x0() const { return x0_; }
  double y0() const { return y0_; }
  double x1() const { return x1_; }
  double y1() const { return y1_; }
  double width() const { return x1_ - x0_; }
  double height() const { return y1_ - y0_; }
  double area() const { return width() * height(); }
  Point center() const;

  /// Closed-interval containment.
  bool contains(const Point & p) const;
  /// Nearest point of the box to p.
  Point clamp(const Point & p) const;

  bool operator==(const Box &) const = default;

private:
  double x0_, y0_, x1_, y1_;
};

// =============================================================================
// Clips
// =============================================================================

/// Directory of `%05d.<ext>` images extracted at `fps`; image k shows time k / fps.
struct FrameSourceSpec
{
  std::string directory;
  double fps = 0.0;
  std::string extension = "png";

  bool operator==(const FrameSourceSpec &) const = default;
};

struct ClipMeta
{
  std::string clip_id;
  double duration_s = 0.0;
  double native_fps = 0.0;
  SceneLayout scene_layout;
  /// Absent for synthetic clips whose frames exist only as timestamps.
  std::optional<FrameSourceSpec> frame_source;
  std::map<std::string, std::string> metadata;

  /// Throws InvalidClip unless duration and fps are positive and finite.
  void validate() const;
};

// =============================================================================
// Predictions
// =============================================================================

enum class Source { kStage1, kStage2, kStage3, kEnsemble, kSnapped, kFallback };

std::string_view to_string(Source source);
Source parse_source(std::string_view text);

/// Immutable per-clip answer. The time is clamped to [0, duration] at
/// construction; a prediction read back from disk has no known duration and
/// is only clamped below.
class Prediction
{
public:
  static constexpr double kUnbounded = std::numeric_limits<double>::infinity();

  Prediction(
    std::string clip_id, double time_s, Point centroid, CollisionType type, Source source,
    double duration_s = kUnbounded);

  const std::string & clip_id() const { return clip_id_; }
  double time_s() const { return time_s_; }
  const Point & centroid() const { return centroid_; }
  CollisionType collision_type() const { return type_; }
  Source source() const { return source_; }
  double duration_bound() const { return duration_s_; }

  Prediction with_time(double time_s) const;
  Prediction with_centroid(Point centroid) const;
  Prediction with_type(CollisionType type) const;
  Prediction with_source(Source source) const;

  /// Compares the serialized fields; the duration bound is not part of identity.
  bool operator==(const Prediction & other) const;

private:
  std::string clip_id_;
  double time_s_;
  Point centroid_;
  CollisionType type_;
  Source source_;
  double duration_s_;
};

/// Centered mid-clip guess used when a clip's inference output is unusable.
Prediction fallback_prediction(const ClipMeta & clip);

struct GroundTruth
{
  std::string clip_id;
  double time_s = 0.0;
  Box bbox{0.0, 0.0, 1.0, 1.0};
  CollisionType collision_type = CollisionType::kRearEnd;

  bool operator==(const GroundTruth &) const = default;
};

// =============================================================================
// Detections
// =============================================================================

inline const std::set<std::string> & default_vehicle_classes()
{
  static const std::set<std::string> classes = {"car", "motorcycle", "bus", "truck"};
  return classes;
}

struct Detection
{
  std::string clip_id;
  int frame_idx = 0;
  Box box{0.0, 0.0, 1.0, 1.0};
  std::string class_label;
  double score = 1.0;

  bool is_vehicle(const std::set<std::string> & classes = default_vehicle_classes()) const
  {
    return classes.count(class_label) != 0;
  }

  bool operator==(const Detection &) const = default;
};

}  // namespace accvlm

#endif  // ACCVLM_DOMAIN_HPP_
