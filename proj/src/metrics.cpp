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

#include <fmt/format.h>

#include <cmath>
#include <map>
#include <set>

namespace accvlm
{

void MetricConfig::validate() const
{
  if (temporal_sigmas.empty()) {
    throw MetricConfigError("at least one temporal sigma is required");
  }
  for (double s : temporal_sigmas) {
    if (!(s > 0.0)) {
      throw MetricConfigError("temporal sigmas must be > 0");
    }
  }
  if (spatial_sigma_mode == SpatialSigmaMode::kExplicit &&
      !(explicit_sigma_xy.first > 0.0 && explicit_sigma_xy.second > 0.0)) {
    throw MetricConfigError("explicit spatial sigmas must be > 0");
  }
}

double temporal_score(double t_pred, double t_gt, const MetricConfig & cfg)
{
  cfg.validate();
  const double dt = t_pred - t_gt;
  double sum = 0.0;
  for (double sigma : cfg.temporal_sigmas) {
    sum += std::exp(-(dt * dt) / (2.0 * sigma * sigma));
  }
  return sum / static_cast<double>(cfg.temporal_sigmas.size());
}

double spatial_score(const Point & pred, const Point & gt, double sigma_x, double sigma_y)
{
  if (!(sigma_x > 0.0 && sigma_y > 0.0)) {
    throw MetricConfigError("spatial sigmas must be > 0");
  }
  const double dx = pred.x() - gt.x();
  const double dy = pred.y() - gt.y();
  return std::exp(-((dx * dx) / (2.0 * sigma_x * sigma_x) + (dy * dy) / (2.0 * sigma_y * sigma_y)));
}

std::pair<double, double> mean_bbox_sigmas(const std::vector<GroundTruth> & gts)
{
  if (gts.empty()) {
    throw MetricConfigError("cannot derive spatial sigmas from an empty ground-truth set");
  }
  double w = 0.0;
  double h = 0.0;
  for (const GroundTruth & gt : gts) {
    w += gt.bbox.width();
    h += gt.bbox.height();
  }
  const auto n = static_cast<double>(gts.size());
  return {w / n, h / n};
}

double acc_s(double t, double s, double c)
{
  if (t <= 0.0 || s <= 0.0 || c <= 0.0) {
    return 0.0;
  }
  return 3.0 / (1.0 / t + 1.0 / s + 1.0 / c);
}

ScoreReport score_dataset(
  const std::vector<Prediction> & preds, const std::vector<GroundTruth> & gts, const MetricConfig & cfg)
{
  cfg.validate();
  ScoreReport report;
  report.config = cfg;
  report.num_ground_truth = gts.size();

  std::map<std::string, const Prediction *> by_clip;
  for (const Prediction & p : preds) {
    if (!by_clip.emplace(p.clip_id(), &p).second) {
      throw DuplicatePrediction("duplicate prediction for clip '" + p.clip_id() + "'");
    }
  }

  switch (cfg.spatial_sigma_mode) {
    case SpatialSigmaMode::kMeanBboxDims:
      std::tie(report.sigma_x, report.sigma_y) = mean_bbox_sigmas(gts);
      break;
    case SpatialSigmaMode::kExplicit:
      std::tie(report.sigma_x, report.sigma_y) = cfg.explicit_sigma_xy;
      break;
    case SpatialSigmaMode::kPerClipBbox:
      if (gts.empty()) {
        throw MetricConfigError("cannot score an empty ground-truth set");
      }
      break;
  }

  double t_sum = 0.0;
  double s_sum = 0.0;
  double c_sum = 0.0;
  double acc_sum = 0.0;
  std::set<std::string> gt_ids;
  for (const GroundTruth & gt : gts) {
    gt_ids.insert(gt.clip_id);
    ClipScore clip{gt.clip_id};
    const auto it = by_clip.find(gt.clip_id);
    if (it != by_clip.end()) {
      const Prediction & p = *it->second;
      const bool per_clip = cfg.spatial_sigma_mode == SpatialSigmaMode::kPerClipBbox;
      clip.has_prediction = true;
      clip.temporal = temporal_score(p.time_s(), gt.time_s, cfg);
      clip.spatial = spatial_score(
        p.centroid(), gt.bbox.center(), per_clip ? gt.bbox.width() : report.sigma_x,
        per_clip ? gt.bbox.height() : report.sigma_y);
      clip.type_correct = p.collision_type() == gt.collision_type;
      ++report.num_predicted;
    } else {
      ++report.num_missing;
    }
    t_sum += clip.temporal;
    s_sum += clip.spatial;
    c_sum += clip.type_correct ? 1.0 : 0.0;
    acc_sum += acc_s(clip.temporal, clip.spatial, clip.type_correct ? 1.0 : 0.0);
    report.clips.push_back(clip);
  }
  for (const auto & [clip_id, pred] : by_clip) {
    if (!gt_ids.count(clip_id)) {
      ++report.num_unmatched;
    }
  }

  if (!gts.empty()) {
    const auto n = static_cast<double>(gts.size());
    report.temporal = t_sum / n;
    report.spatial = s_sum / n;
    report.classification = c_sum / n;
    report.acc_s = cfg.aggregation == Aggregation::kHarmonicOfMeans
                     ? acc_s(report.temporal, report.spatial, report.classification)
                     : acc_sum / n;
  }
  return report;
}

Json to_json(const ScoreReport & report, bool include_clips)
{
  Json out{
    {"acc_s", report.acc_s},
    {"T", report.temporal},
    {"S", report.spatial},
    {"C", report.classification},
    {"num_ground_truth", report.num_ground_truth},
    {"num_predicted", report.num_predicted},
    {"num_missing", report.num_missing},
    {"num_unmatched", report.num_unmatched},
    {"config",
     {{"temporal_sigmas", report.config.temporal_sigmas},
      {"spatial_sigma_mode",
       report.config.spatial_sigma_mode == SpatialSigmaMode::kMeanBboxDims ? "mean-bbox-dims"
       : report.config.spatial_sigma_mode == SpatialSigmaMode::kPerClipBbox ? "per-clip-bbox"
                                                                             : "explicit"},
      {"sigma_x", report.sigma_x},
      {"sigma_y", report.sigma_y},
      {"aggregation", report.config.aggregation == Aggregation::kHarmonicOfMeans
                        ? "harmonic-of-means"
                        : "mean-of-per-clip"}}}};
  if (include_clips) {
    Json clips = Json::array();
    for (const ClipScore & c : report.clips) {
      clips.push_back(Json{
        {"clip_id", c.clip_id},
        {"has_prediction", c.has_prediction},
        {"t_score", c.temporal},
        {"s_score", c.spatial},
        {"c_correct", c.type_correct}});
    }
    out["clips"] = clips;
  }
  return out;
}

std::string format_report(const ScoreReport & report)
{
  std::string out;
  out += fmt::format("{:<10} {:>8}\n", "metric", "value");
  out += fmt::format("{:<10} {:>8.4f}\n", "ACC^S", report.acc_s);
  out += fmt::format("{:<10} {:>8.4f}\n", "T", report.temporal);
  out += fmt::format("{:<10} {:>8.4f}\n", "S", report.spatial);
  out += fmt::format("{:<10} {:>8.4f}\n", "C", report.classification);
  out += fmt::format(
    "clips: {} ground truth, {} predicted, {} missing, {} unmatched\n", report.num_ground_truth,
    report.num_predicted, report.num_missing, report.num_unmatched);
  out += fmt::format("sigma_x={:.4f} sigma_y={:.4f}\n", report.sigma_x, report.sigma_y);
  return out;
}

}  // namespace accvlm
