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

#include "accvlm/frame_plan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace accvlm
{
namespace
{

constexpr double kTimeEps = 1e-9;

// Number of grid points k / fps (k = 0, 1, ...) strictly before `length`; at least one.
std::size_t grid_count(double length, double fps)
{
  const double n = std::ceil(length * fps - kTimeEps);
  return n < 1.0 ? 1 : static_cast<std::size_t>(n);
}

std::vector<double> uniform_grid(double start, double length, double fps, std::size_t cap)
{
  const std::size_t n = grid_count(length, fps);
  std::vector<double> out;
  out.reserve(std::min(n, cap));
  for (std::size_t idx : detail::thin_indices(n, cap)) {
    out.push_back(start + static_cast<double>(idx) / fps);
  }
  return out;
}

// Merge near-equal timestamps after sorting.
void sort_unique(std::vector<double> & ts)
{
  std::sort(ts.begin(), ts.end());
  ts.erase(
    std::unique(ts.begin(), ts.end(), [](double a, double b) { return std::abs(a - b) < kTimeEps; }),
    ts.end());
}

}  // namespace

std::string_view to_string(Stage stage)
{
  switch (stage) {
    case Stage::kStage1:
      return "stage1";
    case Stage::kStage2:
      return "stage2";
    case Stage::kStage3:
      return "stage3";
  }
  return "stage1";
}

namespace detail
{

std::vector<std::size_t> thin_indices(
  std::size_t n, std::size_t cap, const std::vector<std::size_t> & keep)
{
  std::vector<std::size_t> out;
  if (n == 0) {
    return out;
  }
  if (n <= cap) {
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = i;
    }
    return out;
  }

  std::vector<std::size_t> required = {0, n - 1};
  for (std::size_t k : keep) {
    if (k < n) {
      required.push_back(k);
    }
  }
  std::sort(required.begin(), required.end());
  required.erase(std::unique(required.begin(), required.end()), required.end());
  if (required.size() >= cap) {
    required.resize(std::max<std::size_t>(cap, 1));
    return required;
  }

  // Share the free slots across the gaps between required indices in
  // proportion to each gap's interior size (largest remainder, earlier gap wins ties).
  const std::size_t slots = cap - required.size();
  const std::size_t gaps = required.size() - 1;
  std::vector<std::size_t> interior(gaps);
  std::size_t total_interior = 0;
  for (std::size_t g = 0; g < gaps; ++g) {
    interior[g] = required[g + 1] - required[g] - 1;
    total_interior += interior[g];
  }
  std::vector<std::size_t> quota(gaps, 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t g = 0; g < gaps; ++g) {
    const double exact =
      static_cast<double>(slots) * static_cast<double>(interior[g]) / static_cast<double>(total_interior);
    quota[g] = static_cast<std::size_t>(std::floor(exact));
    assigned += quota[g];
    remainders.emplace_back(exact - std::floor(exact), g);
  }
  std::stable_sort(remainders.begin(), remainders.end(), [](const auto & a, const auto & b) {
    return a.first > b.first;
  });
  for (std::size_t i = 0; assigned < slots && i < remainders.size(); ++i) {
    const std::size_t g = remainders[i].second;
    if (quota[g] < interior[g]) {
      ++quota[g];
      ++assigned;
    }
  }

  for (std::size_t g = 0; g < gaps; ++g) {
    out.push_back(required[g]);
    const double span = static_cast<double>(required[g + 1] - required[g]);
    for (std::size_t j = 1; j <= quota[g]; ++j) {
      const double offset = std::round(static_cast<double>(j) * span / static_cast<double>(quota[g] + 1));
      out.push_back(required[g] + static_cast<std::size_t>(offset));
    }
  }
  out.push_back(required.back());
  return out;
}

std::vector<double> spread_select(const std::vector<double> & sorted_values, std::size_t cap)
{
  if (sorted_values.size() <= cap) {
    return sorted_values;
  }
  if (cap == 0) {
    return {};
  }
  std::vector<double> selected = {sorted_values.front()};
  if (cap >= 2) {
    selected.push_back(sorted_values.back());
  }
  std::vector<bool> taken(sorted_values.size(), false);
  taken.front() = true;
  taken.back() = cap >= 2;
  while (selected.size() < cap) {
    std::size_t best = sorted_values.size();
    double best_gap = -1.0;
    for (std::size_t i = 0; i < sorted_values.size(); ++i) {
      if (taken[i]) {
        continue;
      }
      double gap = std::numeric_limits<double>::infinity();
      for (double s : selected) {
        gap = std::min(gap, std::abs(sorted_values[i] - s));
      }
      if (gap > best_gap) {
        best_gap = gap;
        best = i;
      }
    }
    taken[best] = true;
    selected.push_back(sorted_values[best]);
  }
  std::sort(selected.begin(), selected.end());
  return selected;
}

}  // namespace detail

PassSet plan_stage1(const ClipMeta & clip, const Stage1Params & params)
{
  clip.validate();
  const double duration = clip.duration_s;
  PassSet out;

  if (duration <= params.pass_len_s) {
    FramePlan plan{Stage::kStage1, uniform_grid(0.0, duration, params.fps, params.max_frames),
                   params.longest_side_px};
    out.passes.push_back({std::move(plan), Interval{0.0, duration}});
    return out;
  }

  // Long clips stretch both passes so they still meet with the minimum overlap;
  // the frame cap then thins each pass.
  const double len = std::min(duration, std::max(params.pass_len_s, (duration + params.min_overlap_s) / 2.0));
  const Interval first{0.0, len};
  const Interval second{duration - len, duration};
  for (const Interval & span : {first, second}) {
    FramePlan plan{
      Stage::kStage1, uniform_grid(span.start, span.length(), params.fps, params.max_frames),
      params.longest_side_px};
    out.passes.push_back({std::move(plan), span});
  }
  out.overlap = Interval{second.start, first.end};
  return out;
}

FramePlan plan_stage2(double t_base, const ClipMeta & clip, const Stage2Params & params)
{
  clip.validate();
  const double duration = clip.duration_s;
  t_base = std::clamp(t_base, 0.0, duration);
  const auto in_clip = [&](double t) { return t >= -kTimeEps && t <= duration + kTimeEps; };
  const auto clip_time = [&](double t) { return std::clamp(t, 0.0, duration); };

  // Dense grid t_base + k / fps, |k / fps| <= half width.
  const auto dense_k = static_cast<long>(std::floor(params.dense_half_width_s * params.dense_fps + kTimeEps));
  std::vector<double> dense;
  std::size_t centre = 0;
  for (long k = -dense_k; k <= dense_k; ++k) {
    const double t = t_base + static_cast<double>(k) / params.dense_fps;
    if (!in_clip(t)) {
      continue;
    }
    if (k == 0) {
      centre = dense.size();
    }
    dense.push_back(clip_time(t));
  }
  std::vector<double> timestamps;
  for (std::size_t idx : detail::thin_indices(dense.size(), params.dense_max_frames, {centre})) {
    timestamps.push_back(dense[idx]);
  }

  // Sparse anchors outside the dense window.
  const auto sparse_lo = static_cast<long>(std::ceil(-params.sparse_before_s * params.sparse_fps - kTimeEps));
  const auto sparse_hi = static_cast<long>(std::floor(params.sparse_after_s * params.sparse_fps + kTimeEps));
  std::vector<double> sparse;
  for (long k = sparse_lo; k <= sparse_hi; ++k) {
    const double offset = static_cast<double>(k) / params.sparse_fps;
    const double t = t_base + offset;
    if (std::abs(offset) <= params.dense_half_width_s + kTimeEps || !in_clip(t)) {
      continue;
    }
    sparse.push_back(clip_time(t));
  }
  for (double t : detail::spread_select(sparse, params.sparse_max_frames)) {
    timestamps.push_back(t);
  }

  sort_unique(timestamps);
  return FramePlan{Stage::kStage2, std::move(timestamps), params.longest_side_px};
}

FramePlan plan_stage3(double t_final, const ClipMeta & clip, const Stage3Params & params)
{
  clip.validate();
  const double fps = clip.native_fps;
  const double last_idx = static_cast<double>(grid_count(clip.duration_s, fps) - 1);
  const double idx = std::clamp(std::round(t_final * fps), 0.0, last_idx);
  return FramePlan{Stage::kStage3, {idx / fps}, params.longest_side_px};
}

std::pair<int, int> resize_dims(int width, int height, int longest)
{
  const int current = std::max(width, height);
  if (width <= 0 || height <= 0 || current <= longest) {
    return {width, height};
  }
  const double scale = static_cast<double>(longest) / static_cast<double>(current);
  const auto scaled = [&](int v, bool is_longest) {
    if (is_longest) {
      return longest;
    }
    return std::max(1, static_cast<int>(std::lround(static_cast<double>(v) * scale)));
  };
  const bool width_longest = width >= height;
  return {scaled(width, width_longest), scaled(height, !width_longest)};
}

}  // namespace accvlm
