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

#ifndef ACCVLM_FRAME_PLAN_HPP_
#define ACCVLM_FRAME_PLAN_HPP_

#include "accvlm/domain.hpp"

#include <cstddef>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace accvlm
{

enum class Stage { kStage1 = 1, kStage2 = 2, kStage3 = 3 };

std::string_view to_string(Stage stage);

struct Interval
{
  double start = 0.0;
  double end = 0.0;

  bool contains(double t) const { return t >= start && t <= end; }
  double length() const { return end - start; }
  bool operator==(const Interval &) const = default;
};

/// Timestamps (seconds, strictly increasing) to sample for one inference call.
struct FramePlan
{
  Stage stage = Stage::kStage1;
  std::vector<double> timestamps;
  int longest_side_px = 960;

  bool operator==(const FramePlan &) const = default;
};

struct Pass
{
  FramePlan plan;
  Interval span;

  bool operator==(const Pass &) const = default;
};

/// One pass for short clips; two passes anchored at both clip ends otherwise.
struct PassSet
{
  std::vector<Pass> passes;
  std::optional<Interval> overlap;

  bool operator==(const PassSet &) const = default;
};

struct Stage1Params
{
  double fps = 4.0;
  std::size_t max_frames = 128;
  double pass_len_s = 32.0;
  /// Passes are lengthened beyond pass_len_s when needed to overlap by this much.
  double min_overlap_s = 4.0;
  int longest_side_px = 960;
};

/// Dense window around the Stage-1 time plus a few sparse context anchors.
struct Stage2Params
{
  double dense_half_width_s = 2.0;
  double dense_fps = 4.0;
  std::size_t dense_max_frames = 12;
  double sparse_before_s = 8.0;
  double sparse_after_s = 4.0;
  double sparse_fps = 0.5;
  std::size_t sparse_max_frames = 4;
  int longest_side_px = 960;

  std::size_t max_frames() const { return dense_max_frames + sparse_max_frames; }
};

struct Stage3Params
{
  int longest_side_px = 960;
};

PassSet plan_stage1(const ClipMeta & clip, const Stage1Params & params = {});

FramePlan plan_stage2(double t_base, const ClipMeta & clip, const Stage2Params & params = {});

/// Single timestamp at t_final snapped onto the clip's native frame grid.
FramePlan plan_stage3(double t_final, const ClipMeta & clip, const Stage3Params & params = {});

/// Aspect-preserving downscale so the longer side is at most `longest`.
std::pair<int, int> resize_dims(int width, int height, int longest = 960);

// Exposed for tests.
namespace detail
{
/// Uniform index-space thinning of n items to at most `cap`, keeping the
/// first, the last and every index listed in `keep`.
std::vector<std::size_t> thin_indices(
  std::size_t n, std::size_t cap, const std::vector<std::size_t> & keep = {});

/// Greedy max-min spread selection that always keeps the two extremes.
std::vector<double> spread_select(const std::vector<double> & sorted_values, std::size_t cap);
}  // namespace detail

}  // namespace accvlm

#endif  // ACCVLM_FRAME_PLAN_HPP_
