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

#include "accvlm/synthetic.hpp"

#include "accvlm/overlay.hpp"

#include <fmt/format.h>

#include <cmath>
#include <random>

namespace accvlm
{

SyntheticDataset generate_synthetic(
  std::size_t n, std::uint64_t seed, const SyntheticParams & params, const LayoutRules & rules)
{
  if (n == 0) {
    throw std::invalid_argument("generate_synthetic needs n >= 1");
  }
  if (params.layouts.empty()) {
    throw std::invalid_argument("generate_synthetic needs at least one layout");
  }
  std::mt19937_64 rng(seed);
  const auto uniform = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  const auto pick = [&](std::size_t count) {
    return std::uniform_int_distribution<std::size_t>(0, count - 1)(rng);
  };
  const auto random_box = [&] {
    const double cx = uniform(params.centre_margin, 1.0 - params.centre_margin);
    const double cy = uniform(params.centre_margin, 1.0 - params.centre_margin);
    const double w = uniform(params.box_min, params.box_max);
    const double h = uniform(params.box_min, params.box_max);
    return Box(
      std::max(0.0, cx - w / 2), std::max(0.0, cy - h / 2), std::min(1.0, cx + w / 2),
      std::min(1.0, cy + h / 2));
  };

  SyntheticDataset out;
  out.detections.detection_fps = params.detection_fps;
  for (std::size_t i = 0; i < n; ++i) {
    ClipMeta clip;
    clip.clip_id = fmt::format("syn_{:05d}", i);
    clip.duration_s = uniform(params.duration_min_s, params.duration_max_s);
    clip.native_fps = params.native_fps;
    clip.scene_layout = SceneLayout(params.layouts[pick(params.layouts.size())], rules);
    clip.metadata["generator"] = "synthetic";

    GroundTruth gt;
    gt.clip_id = clip.clip_id;
    gt.time_s = uniform(params.accident_lo_frac * clip.duration_s, params.accident_hi_frac * clip.duration_s);
    gt.bbox = random_box();
    std::vector<CollisionType> allowed;
    for (CollisionType t : kAllCollisionTypes) {
      if (t != CollisionType::kTBone || clip.scene_layout.perpendicular_possible()) {
        allowed.push_back(t);
      }
    }
    gt.collision_type = allowed[pick(allowed.size())];

    std::vector<Box> parked;
    for (int d = 0; d < params.distractors; ++d) {
      parked.push_back(random_box());
    }
    const long long accident_frame = std::llround(gt.time_s * params.detection_fps);
    const long long last_frame =
      static_cast<long long>(std::ceil(clip.duration_s * params.detection_fps)) - 1;
    auto & dets = out.detections.by_clip[clip.clip_id];
    for (long long f = std::max(0LL, accident_frame - params.detection_span_frames);
         f <= std::min(last_frame, accident_frame + params.detection_span_frames); ++f) {
      dets.push_back(Detection{clip.clip_id, static_cast<int>(f), gt.bbox, "car", 0.9});
      for (const Box & box : parked) {
        dets.push_back(Detection{clip.clip_id, static_cast<int>(f), box, "truck", 0.8});
      }
    }

    out.clips.push_back(std::move(clip));
    out.truths.push_back(gt);
  }
  return out;
}

void render_synthetic_frames(
  SyntheticDataset & dataset, const std::filesystem::path & directory, const SyntheticParams & params)
{
  for (std::size_t i = 0; i < dataset.clips.size(); ++i) {
    ClipMeta & clip = dataset.clips[i];
    const GroundTruth & gt = dataset.truths[i];
    const auto clip_dir = directory / clip.clip_id;
    std::filesystem::create_directories(clip_dir);
    const auto count = static_cast<long long>(std::ceil(clip.duration_s * params.render_fps - 1e-9));
    for (long long k = 0; k < count; ++k) {
      const double t = static_cast<double>(k) / params.render_fps;
      const auto shade = static_cast<std::uint8_t>(60 + (k * 7) % 120);
      Frame frame(
        params.render_width, params.render_height, t,
        Frame::Rgb{shade, shade, static_cast<std::uint8_t>(shade / 2)});
      if (std::abs(t - gt.time_s) <= 1.0) {
        const int x0 = static_cast<int>(gt.bbox.x0() * (params.render_width - 1));
        const int x1 = static_cast<int>(gt.bbox.x1() * (params.render_width - 1));
        const int y0 = static_cast<int>(gt.bbox.y0() * (params.render_height - 1));
        const int y1 = static_cast<int>(gt.bbox.y1() * (params.render_height - 1));
        for (int y = y0; y <= y1; ++y) {
          for (int x = x0; x <= x1; ++x) {
            frame.set(x, y, {220, 30, 30});
          }
        }
      }
      save_png(frame, clip_dir / fmt::format("{:05d}.png", k));
    }
    clip.frame_source = FrameSourceSpec{clip_dir.string(), params.render_fps, "png"};
  }
}

}  // namespace accvlm
