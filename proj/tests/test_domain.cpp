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
#include "accvlm/io.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

using namespace accvlm;

TEST_CASE("clamp_point saturates into the unit square")
{
  CHECK(clamp_point(0.5, 0.5) == Point(0.5, 0.5));
  CHECK(clamp_point(-0.1, 1.3) == Point(0.0, 1.0));
  CHECK(clamp_point(1.0, 0.0) == Point(1.0, 0.0));
}

TEST_CASE("clamp_point rejects non-finite input")
{
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(clamp_point(nan, 0.5), InvalidCoordinate);
  CHECK_THROWS_AS(clamp_point(0.5, inf), InvalidCoordinate);
  CHECK_THROWS_AS(Point(-inf, 0.0), InvalidCoordinate);
}

TEST_CASE("parse_collision_type normalizes case and separators")
{
  CHECK(parse_collision_type("rear-end") == CollisionType::kRearEnd);
  CHECK(parse_collision_type("T Bone") == CollisionType::kTBone);
  CHECK_THROWS_AS(parse_collision_type("pileup"), UnknownType);
  CHECK_THROWS_AS(parse_collision_type(""), UnknownType);

  for (CollisionType t : kAllCollisionTypes) {
    const std::string canonical(to_string(t));
    CHECK(parse_collision_type(canonical) == t);
    std::string upper = canonical;
    for (char & c : upper) {
      c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    CHECK(parse_collision_type(upper) == t);
    std::string spaced = canonical;
    std::string underscored = canonical;
    for (std::size_t i = 0; i < canonical.size(); ++i) {
      if (canonical[i] == '-') {
        spaced[i] = ' ';
        underscored[i] = '_';
      }
    }
    CHECK(parse_collision_type(spaced) == t);
    CHECK(parse_collision_type(underscored) == t);
    CHECK(parse_collision_type("  " + canonical + " ") == t);
  }
}

TEST_CASE("scene layouts")
{
  CHECK_FALSE(SceneLayout("highway").perpendicular_possible());
  CHECK_FALSE(SceneLayout("Tunnel").perpendicular_possible());
  CHECK_FALSE(SceneLayout("grade_separated intersection").perpendicular_possible());
  CHECK(SceneLayout("4-way intersection").perpendicular_possible());
  CHECK(SceneLayout("roundabout").perpendicular_possible());

  LayoutRules rules;
  rules.perpendicular_impossible = {"bridge"};
  CHECK(SceneLayout("highway", rules).perpendicular_possible());
  CHECK_FALSE(SceneLayout("Bridge", rules).perpendicular_possible());
}

TEST_CASE("boxes validate and clamp")
{
  CHECK_THROWS_AS(Box(0.5, 0.2, 0.4, 0.3), InvalidBox);
  CHECK_THROWS_AS(Box(-0.1, 0.2, 0.4, 0.3), InvalidBox);
  CHECK_THROWS_AS(Box(0.1, 0.2, 1.4, 0.3), InvalidBox);
  const Box box(0.4, 0.4, 0.48, 0.6);
  CHECK(box.contains(Point(0.48, 0.6)));
  CHECK_FALSE(box.contains(Point(0.5, 0.5)));
  CHECK(box.clamp(Point(0.5, 0.5)) == Point(0.48, 0.5));
  CHECK(box.center().x() == doctest::Approx(0.44));
}

TEST_CASE("prediction construction keeps every field in range")
{
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> wide(-1e6, 1e6);
  std::uniform_real_distribution<double> dur(0.01, 600.0);
  for (int i = 0; i < 20000; ++i) {
    const double d = dur(rng);
    const Prediction p(
      "c", wide(rng), clamp_point(wide(rng), wide(rng)), CollisionType::kHeadOn, Source::kStage1, d);
    CHECK(p.time_s() >= 0.0);
    CHECK(p.time_s() <= d);
    CHECK(p.centroid().x() >= 0.0);
    CHECK(p.centroid().x() <= 1.0);
    CHECK(p.centroid().y() >= 0.0);
    CHECK(p.centroid().y() <= 1.0);
  }
  CHECK_THROWS_AS(
    Prediction("c", std::nan(""), Point(), CollisionType::kHeadOn, Source::kStage1, 10.0),
    InvalidCoordinate);
}

TEST_CASE("prediction times are clamped to the clip duration")
{
  const Prediction late("c", 99.0, Point(), CollisionType::kRearEnd, Source::kStage1, 30.0);
  CHECK(late.time_s() == 30.0);
  CHECK(late.with_time(-3.0).time_s() == 0.0);
}

TEST_CASE("fallback prediction is centred")
{
  ClipMeta clip{"x", 30.0, 30.0, SceneLayout("highway")};
  const Prediction p = fallback_prediction(clip);
  CHECK(p.time_s() == 15.0);
  CHECK(p.centroid() == Point(0.5, 0.5));
  CHECK(p.collision_type() == CollisionType::kRearEnd);
  CHECK(p.source() == Source::kFallback);
}

TEST_CASE("clip metadata validation")
{
  ClipMeta clip{"x", 0.0, 30.0, SceneLayout("highway")};
  CHECK_THROWS_AS(clip.validate(), InvalidClip);
  clip.duration_s = 10.0;
  clip.native_fps = 0.0;
  CHECK_THROWS_AS(clip.validate(), InvalidClip);
  clip.native_fps = 30.0;
  clip.clip_id.clear();
  CHECK_THROWS_AS(clip.validate(), InvalidClip);
}

TEST_CASE("source tags round-trip")
{
  for (Source s : {Source::kStage1, Source::kStage2, Source::kStage3, Source::kEnsemble,
                   Source::kSnapped, Source::kFallback}) {
    CHECK(parse_source(to_string(s)) == s);
  }
}

TEST_CASE("prediction and ground truth JSON-lines round-trip")
{
  const auto dir = std::filesystem::temp_directory_path() / "accvlm_test_domain";
  std::filesystem::create_directories(dir);
  std::vector<Prediction> preds = {
    Prediction("b", 1.5, Point(0.1, 0.2), CollisionType::kTBone, Source::kStage3),
    Prediction("a", 2.5, Point(0.3, 0.4), CollisionType::kSideswipe, Source::kSnapped)};
  write_predictions(dir / "p.jsonl", preds);
  const auto back = read_predictions(dir / "p.jsonl");
  REQUIRE(back.size() == 2);
  CHECK(back[0] == preds[1]);  // sorted by clip_id on write
  CHECK(back[1] == preds[0]);

  std::vector<GroundTruth> gts = {GroundTruth{"a", 3.0, Box(0.1, 0.2, 0.3, 0.5), CollisionType::kHeadOn}};
  write_ground_truth(dir / "g.jsonl", gts);
  CHECK(read_ground_truth(dir / "g.jsonl") == gts);

  write_text_file(dir / "bad.jsonl", "{\"clip_id\":\"a\",\"time_s\":1.0,\"x\":0.5}\n");
  CHECK_THROWS_AS(read_predictions(dir / "bad.jsonl"), FormatError);
  std::filesystem::remove_all(dir);
}
