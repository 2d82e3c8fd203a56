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

#include "accvlm/io.hpp"
#include "accvlm/overlay.hpp"

#include <doctest.h>
#include <fmt/format.h>

#include <filesystem>
#include <random>
#include <regex>

using namespace accvlm;
namespace fs = std::filesystem;

namespace
{

struct TempDir
{
  fs::path path;
  explicit TempDir(const std::string & name) : path(fs::temp_directory_path() / name)
  {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

// Frame k is filled with grey level 10 * k so loads can be identified.
ClipMeta numbered_clip(const fs::path & dir, int count, double fps, int w = 64, int h = 36)
{
  for (int k = 0; k < count; ++k) {
    const auto level = static_cast<std::uint8_t>(10 * k);
    save_png(Frame(w, h, 0.0, Frame::Rgb{level, level, level}), dir / fmt::format("{:05d}.png", k));
  }
  ClipMeta clip{"numbered", count / fps, 30.0, SceneLayout("urban street")};
  clip.frame_source = FrameSourceSpec{dir.string(), fps, "png"};
  return clip;
}

}  // namespace

TEST_CASE("timestamp formatting")
{
  CHECK(format_timestamp(12.345) == "t=12.35s");
  CHECK(format_timestamp(0.0) == "t=0.00s");
  CHECK(format_timestamp(9.5) == "t=9.50s");
  CHECK(format_timestamp(0.125) == "t=0.13s");
  CHECK(format_timestamp(1.005) == "t=1.01s");
  CHECK(format_timestamp(29.999) == "t=30.00s");
  CHECK(format_timestamp(123.0) == "t=123.00s");

  const std::regex shape(R"(^t=\d+\.\d{2}s$)");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> dist(0.0, 1000.0);
  for (int i = 0; i < 20000; ++i) {
    CHECK(std::regex_match(format_timestamp(dist(rng)), shape));
  }
}

TEST_CASE("burned label is confined to its rectangle")
{
  const Frame plain(960, 540, 5.0, Frame::Rgb{40, 90, 160});
  const Frame burned = burn_timestamp(plain);
  const PixelRect rect = label_rect(format_timestamp(5.0));
  CHECK(rect.x == 0);
  CHECK(rect.y == 0);
  bool changed_inside = false;
  bool has_black = false;
  for (int y = 0; y < plain.height(); ++y) {
    for (int x = 0; x < plain.width(); ++x) {
      if (plain.at(x, y) != burned.at(x, y)) {
        CHECK(rect.contains(x, y));
        changed_inside = true;
      }
      if (burned.at(x, y) == Frame::Rgb{0, 0, 0}) {
        has_black = true;
      }
    }
  }
  CHECK(changed_inside);
  CHECK(has_black);
  CHECK(burned.timestamp_s() == 5.0);
}

TEST_CASE("different timestamps draw different labels")
{
  const Frame plain(320, 180, 5.0, Frame::Rgb{40, 90, 160});
  const Frame other(320, 180, 6.0, Frame::Rgb{40, 90, 160});
  CHECK(burn_timestamp(plain).pixels() != burn_timestamp(other).pixels());
}

TEST_CASE("burning is idempotent")
{
  std::mt19937 rng(2);
  std::vector<std::uint8_t> px(200 * 100 * 3);
  for (auto & v : px) {
    v = static_cast<std::uint8_t>(rng());
  }
  const Frame noisy(200, 100, 12.345, px);
  const Frame once = burn_timestamp(noisy);
  CHECK(burn_timestamp(once) == once);
}

TEST_CASE("frames too small for the label are left untouched")
{
  const Frame tiny(8, 8, 1.0, Frame::Rgb{1, 2, 3});
  CHECK(burn_timestamp(tiny) == tiny);
}

TEST_CASE("load_frame maps time to index round(t * fps)")
{
  TempDir dir("accvlm_test_overlay_load");
  const ClipMeta clip = numbered_clip(dir.path, 8, 4.0);

  const Frame f1 = load_frame(clip, 0.25, 960);
  CHECK(f1.at(0, 0) == Frame::Rgb{10, 10, 10});
  CHECK(f1.timestamp_s() == 0.25);
  CHECK(load_frame(clip, 0.0, 960).at(5, 5) == Frame::Rgb{0, 0, 0});
  CHECK(load_frame(clip, 0.7, 960).at(5, 5) == Frame::Rgb{30, 30, 30});  // round(2.8) = 3
  // Past the end saturates at the last image.
  CHECK(load_frame(clip, 100.0, 960).at(5, 5) == Frame::Rgb{70, 70, 70});
}

TEST_CASE("load_frame downscales to the requested longest side")
{
  TempDir dir("accvlm_test_overlay_resize");
  const ClipMeta clip = numbered_clip(dir.path, 2, 4.0, 1920, 1080);
  const Frame f = load_frame(clip, 0.0, 960);
  CHECK(f.width() == 960);
  CHECK(f.height() == 540);
  const Frame small = load_frame(clip, 0.0, 4000);
  CHECK(small.width() == 1920);
}

TEST_CASE("load_frame reports missing and corrupt images")
{
  TempDir dir("accvlm_test_overlay_errors");
  ClipMeta clip = numbered_clip(dir.path, 3, 4.0);
  write_text_file(dir.path / "00001.png", "not a png");
  CHECK_THROWS_AS(load_frame(clip, 0.25, 960), FrameLoadError);
  try {
    load_frame(clip, 0.25, 960);
  } catch (const FrameLoadError & e) {
    CHECK(e.clip_id() == "numbered");
    CHECK(e.time_s() == 0.25);
  }

  clip.frame_source->directory = (dir.path / "absent").string();
  CHECK_THROWS_AS(load_frame(clip, 0.0, 960), FrameLoadError);

  ClipMeta no_source{"x", 5.0, 30.0, SceneLayout("urban street")};
  CHECK_THROWS_AS(load_frame(no_source, 0.0, 960), FrameLoadError);
}

TEST_CASE("PNG encoding round-trips through disk")
{
  TempDir dir("accvlm_test_overlay_png");
  ClipMeta clip = numbered_clip(dir.path, 1, 1.0, 17, 9);
  const Frame f = load_frame(clip, 0.0, 960);
  CHECK(f.width() == 17);
  CHECK(f.height() == 9);
  const std::string png = encode_png(f);
  REQUIRE(png.size() > 8);
  CHECK(png.substr(1, 3) == "PNG");
}

TEST_CASE("base64 known vectors")
{
  CHECK(base64_encode("") == "");
  CHECK(base64_encode("M") == "TQ==");
  CHECK(base64_encode("Ma") == "TWE=");
  CHECK(base64_encode("Man") == "TWFu");
  CHECK(base64_encode("foobar") == "Zm9vYmFy");
}
