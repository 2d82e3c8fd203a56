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

#include "accvlm/overlay.hpp"

#include "accvlm/frame_plan.hpp"

#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <regex>

namespace accvlm
{
namespace
{

constexpr int kGlyphWidth = 5;
constexpr int kGlyphHeight = 7;
constexpr int kGlyphScale = 2;
constexpr int kLabelPadding = 4;

using Glyph = std::array<std::uint8_t, kGlyphHeight>;

// 5x7 rows, MSB of the low five bits is the leftmost column.
Glyph glyph_for(char c)
{
  switch (c) {
    case '0': return {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E};
    case '1': return {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E};
    case '2': return {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F};
    case '3': return {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E};
    case '4': return {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02};
    case '5': return {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E};
    case '6': return {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E};
    case '7': return {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08};
    case '8': return {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E};
    case '9': return {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C};
    case 't': return {0x08, 0x08, 0x1C, 0x08, 0x08, 0x09, 0x06};
    case 's': return {0x00, 0x00, 0x0E, 0x10, 0x0E, 0x01, 0x1E};
    case '=': return {0x00, 0x00, 0x1F, 0x00, 0x1F, 0x00, 0x00};
    case '.': return {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C};
    default: return {0, 0, 0, 0, 0, 0, 0};
  }
}

cv::Mat to_bgr_mat(const Frame & frame)
{
  cv::Mat rgb(
    frame.height(), frame.width(), CV_8UC3, const_cast<std::uint8_t *>(frame.pixels().data()));
  cv::Mat bgr;
  cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
  return bgr;
}

Frame from_bgr_mat(const cv::Mat & bgr, double timestamp_s)
{
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  if (!rgb.isContinuous()) {
    rgb = rgb.clone();
  }
  std::vector<std::uint8_t> pixels(rgb.data, rgb.data + rgb.total() * rgb.elemSize());
  return Frame(rgb.cols, rgb.rows, timestamp_s, std::move(pixels));
}

std::filesystem::path frame_path(const FrameSourceSpec & spec, long long index)
{
  char name[32];
  std::snprintf(name, sizeof(name), "%05lld.", index);
  return std::filesystem::path(spec.directory) / (name + spec.extension);
}

// Highest frame index present in the directory, or -1.
long long last_frame_index(const FrameSourceSpec & spec)
{
  std::error_code ec;
  long long best = -1;
  const std::regex pattern("^([0-9]+)\\." + spec.extension + "$");
  for (const auto & entry : std::filesystem::directory_iterator(spec.directory, ec)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (std::regex_match(name, m, pattern)) {
      best = std::max(best, std::stoll(m[1].str()));
    }
  }
  return best;
}

}  // namespace

Frame::Frame(int width, int height, double timestamp_s, Rgb fill)
: width_(width), height_(height), timestamp_s_(timestamp_s)
{
  if (width < 1 || height < 1) {
    throw std::invalid_argument("frame dimensions must be >= 1");
  }
  pixels_.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3);
  for (std::size_t i = 0; i < pixels_.size(); i += 3) {
    pixels_[i] = fill[0];
    pixels_[i + 1] = fill[1];
    pixels_[i + 2] = fill[2];
  }
}

Frame::Frame(int width, int height, double timestamp_s, std::vector<std::uint8_t> pixels)
: width_(width), height_(height), timestamp_s_(timestamp_s), pixels_(std::move(pixels))
{
  if (width < 1 || height < 1) {
    throw std::invalid_argument("frame dimensions must be >= 1");
  }
  if (pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3) {
    throw std::invalid_argument("pixel buffer size does not match frame dimensions");
  }
}

Frame::Rgb Frame::at(int x, int y) const
{
  const std::size_t i = (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + x) * 3;
  return {pixels_[i], pixels_[i + 1], pixels_[i + 2]};
}

void Frame::set(int x, int y, Rgb color)
{
  const std::size_t i = (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + x) * 3;
  pixels_[i] = color[0];
  pixels_[i + 1] = color[1];
  pixels_[i + 2] = color[2];
}

FrameLoadError::FrameLoadError(std::string clip_id, double t, const std::string & reason)
: std::runtime_error("clip '" + clip_id + "' t=" + std::to_string(t) + ": " + reason),
  clip_id_(std::move(clip_id)),
  time_s_(t)
{
}

std::string format_timestamp(double t)
{
  if (!(t > 0.0)) {
    t = 0.0;
  }
  // Shortest round-trip decimal, then half-up rounding on the digit string.
  char buf[400];
  const auto res = std::to_chars(buf, buf + sizeof(buf), t, std::chars_format::fixed);
  std::string digits(buf, res.ptr);
  const auto dot = digits.find('.');
  std::string whole = dot == std::string::npos ? digits : digits.substr(0, dot);
  std::string frac = dot == std::string::npos ? "" : digits.substr(dot + 1);
  frac.resize(std::max<std::size_t>(frac.size(), 3), '0');

  std::string kept = whole + frac.substr(0, 2);
  if (frac[2] >= '5') {
    int i = static_cast<int>(kept.size()) - 1;
    while (i >= 0 && kept[i] == '9') {
      kept[i] = '0';
      --i;
    }
    if (i < 0) {
      kept.insert(kept.begin(), '1');
    } else {
      ++kept[i];
    }
  }
  return "t=" + kept.substr(0, kept.size() - 2) + "." + kept.substr(kept.size() - 2) + "s";
}

PixelRect label_rect(std::string_view text)
{
  const int n = static_cast<int>(text.size());
  const int text_width = n == 0 ? 0 : n * (kGlyphWidth + 1) * kGlyphScale - kGlyphScale;
  return PixelRect{
    0, 0, text_width + 2 * kLabelPadding, kGlyphHeight * kGlyphScale + 2 * kLabelPadding};
}

Frame burn_timestamp(const Frame & frame)
{
  const std::string label = format_timestamp(frame.timestamp_s());
  const PixelRect rect = label_rect(label);
  if (rect.width > frame.width() || rect.height > frame.height()) {
    spdlog::warn(
      "frame {}x{} too small for timestamp label '{}'; left unchanged", frame.width(),
      frame.height(), label);
    return frame;
  }

  Frame out = frame;
  const Frame::Rgb white{255, 255, 255};
  const Frame::Rgb black{0, 0, 0};
  for (int y = rect.y; y < rect.y + rect.height; ++y) {
    for (int x = rect.x; x < rect.x + rect.width; ++x) {
      out.set(x, y, white);
    }
  }
  for (std::size_t i = 0; i < label.size(); ++i) {
    const Glyph glyph = glyph_for(label[i]);
    const int origin_x = rect.x + kLabelPadding + static_cast<int>(i) * (kGlyphWidth + 1) * kGlyphScale;
    const int origin_y = rect.y + kLabelPadding;
    for (int row = 0; row < kGlyphHeight; ++row) {
      for (int col = 0; col < kGlyphWidth; ++col) {
        if (!((glyph[row] >> (kGlyphWidth - 1 - col)) & 1U)) {
          continue;
        }
        for (int dy = 0; dy < kGlyphScale; ++dy) {
          for (int dx = 0; dx < kGlyphScale; ++dx) {
            out.set(origin_x + col * kGlyphScale + dx, origin_y + row * kGlyphScale + dy, black);
          }
        }
      }
    }
  }
  return out;
}

Frame resize_frame(const Frame & frame, int longest_side)
{
  const auto [w, h] = resize_dims(frame.width(), frame.height(), longest_side);
  if (w == frame.width() && h == frame.height()) {
    return frame;
  }
  cv::Mat src(
    frame.height(), frame.width(), CV_8UC3, const_cast<std::uint8_t *>(frame.pixels().data()));
  cv::Mat dst;
  cv::resize(src, dst, cv::Size(w, h), 0.0, 0.0, cv::INTER_AREA);
  if (!dst.isContinuous()) {
    dst = dst.clone();
  }
  std::vector<std::uint8_t> pixels(dst.data, dst.data + dst.total() * dst.elemSize());
  return Frame(w, h, frame.timestamp_s(), std::move(pixels));
}

Frame load_frame(const ClipMeta & clip, double t, int longest_side)
{
  if (!clip.frame_source) {
    throw FrameLoadError(clip.clip_id, t, "clip has no frame source");
  }
  const FrameSourceSpec & spec = *clip.frame_source;
  long long index = std::llround(std::max(0.0, t) * spec.fps);
  std::filesystem::path path = frame_path(spec, index);
  if (!std::filesystem::exists(path)) {
    const long long last = last_frame_index(spec);
    if (last < 0) {
      throw FrameLoadError(clip.clip_id, t, "no frames in " + spec.directory);
    }
    if (index <= last) {
      throw FrameLoadError(clip.clip_id, t, "missing frame " + path.string());
    }
    index = last;
    path = frame_path(spec, index);
  }
  const cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) {
    throw FrameLoadError(clip.clip_id, t, "cannot decode " + path.string());
  }
  return resize_frame(from_bgr_mat(bgr, static_cast<double>(index) / spec.fps), longest_side);
}

std::string encode_png(const Frame & frame)
{
  std::vector<std::uint8_t> buf;
  if (!cv::imencode(".png", to_bgr_mat(frame), buf)) {
    throw std::runtime_error("PNG encoding failed");
  }
  return std::string(buf.begin(), buf.end());
}

void save_png(const Frame & frame, const std::filesystem::path & path)
{
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  if (!cv::imwrite(path.string(), to_bgr_mat(frame))) {
    throw std::runtime_error("cannot write " + path.string());
  }
}

std::string base64_encode(std::string_view bytes)
{
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(
    reinterpret_cast<unsigned char *>(out.data()),
    reinterpret_cast<const unsigned char *>(bytes.data()), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

}  // namespace accvlm
