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

#ifndef ACCVLM_POSTPROCESS_HPP_
#define ACCVLM_POSTPROCESS_HPP_

#include "accvlm/domain.hpp"
#include "accvlm/io.hpp"

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace accvlm
{

class EnsembleMismatch : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

enum class TypeSource { kRunA, kRunB };

struct EnsembleConfig
{
  /// Weight of run A (the primary model).
  double lambda = 0.9;
  TypeSource type_source = TypeSource::kRunA;

  void validate() const;
};

/// lambda * a + (1 - lambda) * b for time and both coordinates; the class comes
/// from `type_source`. Results never leave the interval spanned by the inputs.
Prediction blend(const Prediction & a, const Prediction & b, const EnsembleConfig & cfg = {});

/// Blends two prediction files row-wise by clip_id. Clips present in only one
/// run keep that run's prediction.
std::vector<Prediction> blend_runs(
  const std::vector<Prediction> & a, const std::vector<Prediction> & b, const EnsembleConfig & cfg = {});

struct SnapConfig
{
  double delta_snap = 0.2;
  int half_window_frames = 10;
  /// Frame rate the detection indices refer to.
  double detection_fps = 30.0;
  /// Number of window doublings allowed after the first search; negative means
  /// keep doubling until the window covers every detection of the clip.
  int max_doublings = -1;
  std::set<std::string> vehicle_classes = default_vehicle_classes();

  void validate() const;
};

enum class SnapOutcome { kSnapped, kAlreadyInside, kCancelled, kNoVehicle };

std::string_view to_string(SnapOutcome outcome);

struct SnapResult
{
  Prediction prediction;
  SnapOutcome outcome = SnapOutcome::kNoVehicle;
  int frame_idx = 0;
  int half_window_used = 0;
  int doublings = 0;
  std::optional<Detection> chosen;
  double displacement = 0.0;
};

/// Moves the point into the vehicle box whose centre is nearest, searching
/// detections within +-half_window frames of the predicted time and doubling
/// the window while none is found. The move is cancelled when it exceeds
/// delta_snap; points already inside a vehicle box stay put.
SnapResult snap_detailed(
  const Prediction & pred, const std::vector<Detection> & detections, const SnapConfig & cfg = {});

Prediction snap(
  const Prediction & pred, const std::vector<Detection> & detections, const SnapConfig & cfg = {});

Json to_json(const SnapResult & result);

}  // namespace accvlm

#endif  // ACCVLM_POSTPROCESS_HPP_
