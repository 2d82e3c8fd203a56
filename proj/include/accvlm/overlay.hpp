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

#ifndef ACCVLM_OVERLAY_HPP_
#define ACCVLM_OVERLAY_HPP_

#include "accvlm/domain.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace accvlm
{

/// 8-bit interleaved RGB raster tagged with the clip time it shows.
class Frame
{
public:
  using Rgb = std::array<std::uint8_t, 3>;

  Frame(int width, int height, double timestamp_s, Rgb fill = {0, 0, 0});
  Frame(int width, int height, double timestamp_s, std::vector<std::uint8_t> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  double timestamp_s() const { return timestamp_s_; }
  const std::vector<std::uint8_t> & pixels() const { return pixels_; }

  Rgb at(int x, int y) const;
  void set(int x, int y, Rgb color);

  bool operator==(const Frame &) const = default;

private:
  int width_;
  int height_;
  double timestamp_s_;
  std::vector<std::uint8_t> pixels_;
};

struct PixelRect
{
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;

  bool contains(int px, int py) const
  {
    return px >= x && px < x + width && py >= y && py < y + height;
  }
  bool operator==(const PixelRect &) const = default;
};

class FrameLoadError : public std::runtime_error
{
public:
  FrameLoadError(std::string clip_id, double t, const std::string & reason);

  const std::string & clip_id() const { return clip_id_; }
  double time_s() const { return time_s_; }

private:
  std::string clip_id_;
  double time_s_;
};

/// "t=12.35s": two decimals, rounded half-up on the shortest decimal form of t.
std::string format_timestamp(double t);

/// Top-left rectangle the label for `text` occupies (glyphs scaled x2 plus padding).
PixelRect label_rect(std::string_view text);

/// Draws the frame's timestamp label in black on a white box at the top-left.
/// Frames too small to hold the label are returned unchanged with a warning.
Frame burn_timestamp(const Frame & frame);

/// Loads image round(t * fps) of the clip's frame directory, saturating at the
/// last image, and downscales it so the longer side is at most `longest_side`.
Frame load_frame(const ClipMeta & clip, double t, int longest_side);

Frame resize_frame(const Frame & frame, int longest_side);

std::string encode_png(const Frame & frame);
void save_png(const Frame & frame, const std::filesystem::path & path);

std::string base64_encode(std::string_view bytes);

}  // namespace accvlm

#endif  // ACCVLM_OVERLAY_HPP_
