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

#include "accvlm/metrics.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace accvlm;

namespace
{

GroundTruth gt(const std::string & id, double t, Box box, CollisionType type = CollisionType::kHeadOn)
{
  return GroundTruth{id, t, box, type};
}

Prediction perfect(const GroundTruth & g)
{
  return Prediction(g.clip_id, g.time_s, g.bbox.center(), g.collision_type, Source::kStage3);
}

}  // namespace

TEST_CASE("temporal kernel at one second")
{
  // Hand evaluation: (e^-2 + e^-0.5 + e^-0.125) / 3.
  const double expected = 0.5414542818446139;
  CHECK(std::abs(temporal_score(11.0, 10.0) - expected) <= 1e-12);
  CHECK(std::abs(temporal_score(9.0, 10.0) - expected) <= 1e-12);
  CHECK(temporal_score(10.0, 10.0) == 1.0);

  MetricConfig one;
  one.temporal_sigmas = {1.0};
  CHECK(std::abs(temporal_score(11.0, 10.0, one) - 0.6065306597126334) <= 1e-12);
}

TEST_CASE("spatial kernel at one-sigma offsets")
{
  CHECK(std::abs(spatial_score(Point(0.6, 0.5), Point(0.5, 0.5), 0.1, 0.2) - 0.6065306597126334) <= 1e-9);
  CHECK(std::abs(spatial_score(Point(0.6, 0.7), Point(0.5, 0.5), 0.1, 0.2) - 0.36787944117144233) <= 1e-9);
  CHECK(spatial_score(Point(0.5, 0.5), Point(0.5, 0.5), 0.1, 0.1) == 1.0);
  CHECK_THROWS_AS(spatial_score(Point(0.5, 0.5), Point(0.5, 0.5), 0.0, 0.1), MetricConfigError);
}

TEST_CASE("kernels are bounded and decrease with distance")
{
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double d1 = u(rng) * 5.0;
    const double d2 = d1 + u(rng);
    const double a = temporal_score(10.0 + d1, 10.0);
    const double b = temporal_score(10.0 + d2, 10.0);
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
    CHECK(b <= a);
  }
}

TEST_CASE("mean box dimensions")
{
  const auto s = mean_bbox_sigmas({gt("a", 1, Box(0.0, 0.0, 0.2, 0.1)), gt("b", 1, Box(0.5, 0.5, 0.9, 0.8))});
  CHECK(s.first == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(s.second == doctest::Approx(0.2).epsilon(1e-12));
  CHECK_THROWS_AS(mean_bbox_sigmas({}), MetricConfigError);
}

TEST_CASE("harmonic mean anchors")
{
  CHECK(std::abs(acc_s(0.343, 0.488, 0.293) - 0.358) <= 1e-3);
  CHECK(acc_s(0.7, 0.7, 0.7) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(acc_s(1.0, 1.0, 1.0) == 1.0);
  CHECK(acc_s(0.9, 0.8, 0.0) == 0.0);
  CHECK(acc_s(1.0, 1.0, 1e-12) < 1e-11);
}

TEST_CASE("harmonic mean properties")
{
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 20000; ++i) {
    const double t = u(rng);
    const double s = u(rng);
    const double c = u(rng);
    const double v = acc_s(t, s, c);
    CHECK(v >= 0.0);
    CHECK(v <= 3.0 * std::min({t, s, c}) + 1e-15);
    CHECK(v <= std::max({t, s, c}) + 1e-15);
    CHECK(v == doctest::Approx(acc_s(c, t, s)).epsilon(1e-12));
    CHECK(v == doctest::Approx(acc_s(s, c, t)).epsilon(1e-12));
    const double bumped = std::min(1.0, t + u(rng) * 0.1);
    CHECK(acc_s(bumped, s, c) >= v - 1e-15);
  }
}

TEST_CASE("dataset scoring: perfect predictions")
{
  const std::vector<GroundTruth> gts = {gt("a", 1.0, Box(0.1, 0.1, 0.3, 0.3)),
                                        gt("b", 5.0, Box(0.4, 0.5, 0.6, 0.9), CollisionType::kTBone)};
  const ScoreReport r = score_dataset({perfect(gts[0]), perfect(gts[1])}, gts);
  CHECK(r.temporal == 1.0);
  CHECK(r.spatial == 1.0);
  CHECK(r.classification == 1.0);
  CHECK(r.acc_s == 1.0);
  CHECK(r.num_missing == 0);
  CHECK(r.sigma_x == doctest::Approx(0.2));
  CHECK(r.sigma_y == doctest::Approx(0.3));
}

TEST_CASE("dataset scoring: wrong type annihilates the score")
{
  const GroundTruth g = gt("a", 1.0, Box(0.1, 0.1, 0.3, 0.3));
  const ScoreReport r = score_dataset({perfect(g).with_type(CollisionType::kRearEnd)}, {g});
  CHECK(r.temporal == 1.0);
  CHECK(r.spatial == 1.0);
  CHECK(r.classification == 0.0);
  CHECK(r.acc_s == 0.0);
}

TEST_CASE("dataset scoring: missing, unmatched and duplicate predictions")
{
  const std::vector<GroundTruth> gts = {gt("a", 1.0, Box(0.1, 0.1, 0.3, 0.3)),
                                        gt("b", 5.0, Box(0.4, 0.5, 0.6, 0.9))};
  const Prediction stray("zzz", 1.0, Point(0.5, 0.5), CollisionType::kHeadOn, Source::kStage3);
  const ScoreReport r = score_dataset({perfect(gts[0]), stray}, gts);
  CHECK(r.num_missing == 1);
  CHECK(r.num_unmatched == 1);
  CHECK(r.temporal == doctest::Approx(0.5));
  CHECK(r.spatial == doctest::Approx(0.5));
  CHECK(r.classification == doctest::Approx(0.5));
  CHECK(r.acc_s == doctest::Approx(0.5));

  CHECK_THROWS_AS(score_dataset({perfect(gts[0]), perfect(gts[0])}, gts), DuplicatePrediction);
}

TEST_CASE("dataset scoring: sigma modes and aggregation orders")
{
  // Clip a: perfect. Clip b: one second late, type wrong.
  const std::vector<GroundTruth> gts = {gt("a", 1.0, Box(0.1, 0.1, 0.3, 0.3)),
                                        gt("b", 5.0, Box(0.4, 0.4, 0.8, 0.8))};
  const Prediction pb("b", 6.0, Point(0.7, 0.6), CollisionType::kRearEnd, Source::kStage3);
  const std::vector<Prediction> preds = {perfect(gts[0]), pb};

  const double t_b = 0.5414542818446139;

  MetricConfig mean_mode;
  const ScoreReport m = score_dataset(preds, gts, mean_mode);
  // Mean box size 0.3 in both axes; offset (0.1, 0).
  const double s_b_mean = std::exp(-0.01 / (2.0 * 0.09));
  CHECK(m.spatial == doctest::Approx((1.0 + s_b_mean) / 2.0).epsilon(1e-12));
  CHECK(m.temporal == doctest::Approx((1.0 + t_b) / 2.0).epsilon(1e-12));
  CHECK(m.classification == 0.5);
  CHECK(m.acc_s == doctest::Approx(acc_s(m.temporal, m.spatial, 0.5)).epsilon(1e-12));

  MetricConfig per_clip;
  per_clip.spatial_sigma_mode = SpatialSigmaMode::kPerClipBbox;
  const ScoreReport pc = score_dataset(preds, gts, per_clip);
  const double s_b_own = std::exp(-0.01 / (2.0 * 0.16));
  CHECK(pc.spatial == doctest::Approx((1.0 + s_b_own) / 2.0).epsilon(1e-12));

  MetricConfig explicit_mode;
  explicit_mode.spatial_sigma_mode = SpatialSigmaMode::kExplicit;
  explicit_mode.explicit_sigma_xy = {0.1, 0.1};
  const ScoreReport ex = score_dataset(preds, gts, explicit_mode);
  CHECK(ex.spatial == doctest::Approx((1.0 + std::exp(-0.5)) / 2.0).epsilon(1e-12));

  MetricConfig per_clip_mean;
  per_clip_mean.aggregation = Aggregation::kMeanOfPerClip;
  const ScoreReport pm = score_dataset(preds, gts, per_clip_mean);
  // Clip b has C = 0, so its per-clip score vanishes.
  CHECK(pm.acc_s == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("metric configuration validation")
{
  MetricConfig cfg;
  cfg.temporal_sigmas = {};
  CHECK_THROWS_AS(cfg.validate(), MetricConfigError);
  cfg.temporal_sigmas = {1.0, -1.0};
  CHECK_THROWS_AS(cfg.validate(), MetricConfigError);
  cfg = MetricConfig{};
  cfg.spatial_sigma_mode = SpatialSigmaMode::kExplicit;
  cfg.explicit_sigma_xy = {0.0, 0.1};
  CHECK_THROWS_AS(cfg.validate(), MetricConfigError);
}

TEST_CASE("report serialization")
{
  const GroundTruth g = gt("a", 1.0, Box(0.1, 0.1, 0.3, 0.3));
  const ScoreReport r = score_dataset({perfect(g)}, {g});
  const Json j = to_json(r);
  CHECK(j.at("acc_s").get<double>() == 1.0);
  CHECK(to_json(r, false).dump() != j.dump());
  CHECK(format_report(r).find("ACC") != std::string::npos);
}
