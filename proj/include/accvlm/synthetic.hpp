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

#ifndef ACCVLM_SYNTHETIC_HPP_
#define ACCVLM_SYNTHETIC_HPP_

#include "accvlm/domain.hpp"
#include "accvlm/io.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace accvlm
{

struct SyntheticParams
{
  double duration_min_s = 25.0;
  double duration_max_s = 35.0;
  /// Accident time is uniform on [lo, hi] * duration.
  double accident_lo_frac = 0.1;
  double accident_hi_frac = 0.9;
  /// Box centres are uniform on [margin, 1 - margin]^2.
  double centre_margin = 0.1;
  double box_min = 0.05;
  double box_max = 0.2;
  double native_fps = 30.0;
  std::vector<std::string> layouts = {
    "4-way intersection", "t-junction", "roundabout", "urban street",
    "highway", "tunnel", "grade-separated intersection"};

  double detection_fps = 10.0;
  /// Detections are emitted for frames within this many frames of the accident.
  int detection_span_frames = 20;
  /// Static non-colliding vehicles per clip.
  int distractors = 2;

  double render_fps = 4.0;
  int render_width = 320;
  int render_height = 180;
};

struct SyntheticDataset
{
  std::vector<ClipMeta> clips;
  std::vector<GroundTruth> truths;
  DetectionSet detections;
};

/// Deterministic in (n, seed, params). Types are drawn uniformly among those
/// physically possible in the clip's layout.
SyntheticDataset generate_synthetic(
  std::size_t n, std::uint64_t seed, const SyntheticParams & params = {},
  const LayoutRules & rules = {});

/// Writes flat-colour PNG frames for every clip under `directory/<clip_id>/`
/// and points each clip's frame source at them. The collision box is drawn for
/// frames within one second of the accident.
void render_synthetic_frames(
  SyntheticDataset & dataset, const std::filesystem::path & directory,
  const SyntheticParams & params = {});

}  // namespace accvlm

#endif  // ACCVLM_SYNTHETIC_HPP_
