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

#ifndef ACCVLM_METRICS_HPP_
#define ACCVLM_METRICS_HPP_

#include "accvlm/domain.hpp"
#include "accvlm/io.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace accvlm
{

class MetricConfigError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

class DuplicatePrediction : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

enum class SpatialSigmaMode {
  kMeanBboxDims,  ///< dataset-mean ground-truth box width/height
  kPerClipBbox,   ///< each clip's own box width/height
  kExplicit,      ///< fixed (sigma_x, sigma_y)
};

enum class Aggregation {
  kHarmonicOfMeans,  ///< ACC^S of the dataset-level T, S, C
  kMeanOfPerClip,    ///< mean over clips of per-clip ACC^S
};

struct MetricConfig
{
  std::vector<double> temporal_sigmas = {0.5, 1.0, 2.0};
  SpatialSigmaMode spatial_sigma_mode = SpatialSigmaMode::kMeanBboxDims;
  std::pair<double, double> explicit_sigma_xy = {0.1, 0.1};
  Aggregation aggregation = Aggregation::kHarmonicOfMeans;

  void validate() const;
};

/// Mean over the configured sigmas of exp(-dt^2 / (2 sigma^2)).
double temporal_score(double t_pred, double t_gt, const MetricConfig & cfg = {});

/// exp(-(dx^2 / (2 sx^2) + dy^2 / (2 sy^2))).
double spatial_score(const Point & pred, const Point & gt, double sigma_x, double sigma_y);

/// Mean ground-truth box width and height. Throws MetricConfigError when empty.
std::pair<double, double> mean_bbox_sigmas(const std::vector<GroundTruth> & gts);

/// Harmonic mean 3 / (1/T + 1/S + 1/C); 0 when any component is 0.
double acc_s(double t, double s, double c);

struct ClipScore
{
  std::string clip_id;
  bool has_prediction = false;
  double temporal = 0.0;
  double spatial = 0.0;
  bool type_correct = false;
};

struct ScoreReport
{
  std::vector<ClipScore> clips;
  double temporal = 0.0;
  double spatial = 0.0;
  double classification = 0.0;
  double acc_s = 0.0;
  std::size_t num_ground_truth = 0;
  std::size_t num_predicted = 0;
  std::size_t num_missing = 0;
  std::size_t num_unmatched = 0;
  double sigma_x = 0.0;
  double sigma_y = 0.0;
  MetricConfig config;
};

/// Missing predictions score zero on every component; predictions for clips
/// without ground truth are counted as unmatched and ignored.
ScoreReport score_dataset(
  const std::vector<Prediction> & preds, const std::vector<GroundTruth> & gts,
  const MetricConfig & cfg = {});

Json to_json(const ScoreReport & report, bool include_clips = true);
std::string format_report(const ScoreReport & report);

}  // namespace accvlm

#endif  // ACCVLM_METRICS_HPP_
