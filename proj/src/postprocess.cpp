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

#include "accvlm/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace accvlm
{
namespace
{

double convex(double lambda, double a, double b)
{
  return std::clamp(lambda * a + (1.0 - lambda) * b, std::min(a, b), std::max(a, b));
}

}  // namespace

void EnsembleConfig::validate() const
{
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("ensemble lambda must lie in [0, 1]");
  }
}

Prediction blend(const Prediction & a, const Prediction & b, const EnsembleConfig & cfg)
{
  cfg.validate();
  if (a.clip_id() != b.clip_id()) {
    throw EnsembleMismatch("cannot blend '" + a.clip_id() + "' with '" + b.clip_id() + "'");
  }
  const double lambda = cfg.lambda;
  const Point point(
    convex(lambda, a.centroid().x(), b.centroid().x()),
    convex(lambda, a.centroid().y(), b.centroid().y()));
  const CollisionType type =
    cfg.type_source == TypeSource::kRunA ? a.collision_type() : b.collision_type();
  return Prediction(
    a.clip_id(), convex(lambda, a.time_s(), b.time_s()), point, type, Source::kEnsemble,
    std::max(a.duration_bound(), b.duration_bound()));
}

std::vector<Prediction> blend_runs(
  const std::vector<Prediction> & a, const std::vector<Prediction> & b, const EnsembleConfig & cfg)
{
  std::map<std::string, const Prediction *> by_clip;
  for (const Prediction & p : b) {
    by_clip[p.clip_id()] = &p;
  }
  std::vector<Prediction> out;
  std::set<std::string> seen;
  for (const Prediction & p : a) {
    seen.insert(p.clip_id());
    const auto it = by_clip.find(p.clip_id());
    out.push_back(it == by_clip.end() ? p : blend(p, *it->second, cfg));
  }
  for (const Prediction & p : b) {
    if (!seen.count(p.clip_id())) {
      out.push_back(p);
    }
  }
  std::sort(out.begin(), out.end(), [](const Prediction & x, const Prediction & y) {
    return x.clip_id() < y.clip_id();
  });
  return out;
}

void SnapConfig::validate() const
{
  if (!(delta_snap > 0.0)) {
    throw std::invalid_argument("delta_snap must be > 0");
  }
  if (half_window_frames < 1) {
    throw std::invalid_argument("half_window_frames must be >= 1");
  }
  if (!(detection_fps > 0.0)) {
    throw std::invalid_argument("detection_fps must be > 0");
  }
}

std::string_view to_string(SnapOutcome outcome)
{
  switch (outcome) {
    case SnapOutcome::kSnapped:
      return "snapped";
    case SnapOutcome::kAlreadyInside:
      return "already_inside";
    case SnapOutcome::kCancelled:
      return "cancelled";
    case SnapOutcome::kNoVehicle:
      return "no_vehicle";
  }
  return "no_vehicle";
}

SnapResult snap_detailed(
  const Prediction & pred, const std::vector<Detection> & detections, const SnapConfig & cfg)
{
  cfg.validate();
  SnapResult result{pred};
  const long long frame = std::llround(pred.time_s() * cfg.detection_fps);
  result.frame_idx = static_cast<int>(frame);

  std::vector<const Detection *> vehicles;
  long long lo_frame = frame;
  long long hi_frame = frame;
  for (const Detection & det : detections) {
    if (det.is_vehicle(cfg.vehicle_classes)) {
      vehicles.push_back(&det);
      lo_frame = std::min<long long>(lo_frame, det.frame_idx);
      hi_frame = std::max<long long>(hi_frame, det.frame_idx);
    }
  }

  long long half = cfg.half_window_frames;
  std::vector<const Detection *> window;
  while (true) {
    for (const Detection * det : vehicles) {
      if (std::llabs(det->frame_idx - frame) <= half) {
        window.push_back(det);
      }
    }
    result.half_window_used = static_cast<int>(half);
    if (!window.empty()) {
      break;
    }
    const bool covers_clip = frame - half <= lo_frame && frame + half >= hi_frame;
    const bool out_of_retries = cfg.max_doublings >= 0 && result.doublings >= cfg.max_doublings;
    if (covers_clip || out_of_retries) {
      result.outcome = SnapOutcome::kNoVehicle;
      return result;
    }
    half *= 2;
    ++result.doublings;
  }

  const Point & p = pred.centroid();
  for (const Detection * det : window) {
    if (det->box.contains(p)) {
      result.outcome = SnapOutcome::kAlreadyInside;
      result.chosen = *det;
      return result;
    }
  }

  // Nearest centre; ties go to the larger box, then the earlier frame.
  const Detection * best = window.front();
  double best_dist = distance(best->box.center(), p);
  for (const Detection * det : window) {
    const double d = distance(det->box.center(), p);
    const bool better = d < best_dist ||
                        (d == best_dist && (det->box.area() > best->box.area() ||
                                            (det->box.area() == best->box.area() &&
                                             det->frame_idx < best->frame_idx)));
    if (better) {
      best = det;
      best_dist = d;
    }
  }

  const Point candidate = best->box.clamp(p);
  result.chosen = *best;
  result.displacement = distance(candidate, p);
  if (result.displacement > cfg.delta_snap) {
    result.outcome = SnapOutcome::kCancelled;
    return result;
  }
  result.outcome = SnapOutcome::kSnapped;
  result.prediction = pred.with_centroid(candidate).with_source(Source::kSnapped);
  return result;
}

Prediction snap(const Prediction & pred, const std::vector<Detection> & detections, const SnapConfig & cfg)
{
  return snap_detailed(pred, detections, cfg).prediction;
}

Json to_json(const SnapResult & result)
{
  return Json{
    {"clip_id", result.prediction.clip_id()},
    {"outcome", std::string(to_string(result.outcome))},
    {"frame_idx", result.frame_idx},
    {"half_window_used", result.half_window_used},
    {"doublings", result.doublings},
    {"chosen", result.chosen ? to_json(*result.chosen) : Json(nullptr)},
    {"displacement", result.displacement},
    {"prediction", to_json(result.prediction)}};
}

}  // namespace accvlm
