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

#include <algorithm>
#include <cmath>
#include <sstream>

namespace accvlm
{
namespace
{

const Json & require(const Json & row, const char * key)
{
  if (!row.is_object() || !row.contains(key)) {
    throw FormatError(std::string("missing field '") + key + "'");
  }
  return row.at(key);
}

double require_number(const Json & row, const char * key)
{
  const Json & v = require(row, key);
  if (!v.is_number()) {
    throw FormatError(std::string("field '") + key + "' must be a number");
  }
  const double d = v.get<double>();
  if (!std::isfinite(d)) {
    throw FormatError(std::string("field '") + key + "' must be finite");
  }
  return d;
}

std::string require_string(const Json & row, const char * key)
{
  const Json & v = require(row, key);
  if (!v.is_string()) {
    throw FormatError(std::string("field '") + key + "' must be a string");
  }
  return v.get<std::string>();
}

template <typename Fn>
auto rethrow_as_format_error(Fn && fn) -> decltype(fn())
{
  try {
    return fn();
  } catch (const FormatError &) {
    throw;
  } catch (const std::exception & e) {
    throw FormatError(e.what());
  }
}

}  // namespace

Json to_json(const Prediction & pred)
{
  return Json{
    {"clip_id", pred.clip_id()},
    {"time_s", pred.time_s()},
    {"x", pred.centroid().x()},
    {"y", pred.centroid().y()},
    {"type", std::string(to_string(pred.collision_type()))},
    {"source", std::string(to_string(pred.source()))}};
}

Prediction prediction_from_json(const Json & row, double duration_s)
{
  return rethrow_as_format_error([&] {
    const double t = require_number(row, "time_s");
    if (t < 0.0) {
      throw FormatError("time_s must be >= 0");
    }
    const Source source =
      row.contains("source") ? parse_source(require_string(row, "source")) : Source::kStage1;
    return Prediction(
      require_string(row, "clip_id"), t,
      Point(require_number(row, "x"), require_number(row, "y")),
      parse_collision_type(require_string(row, "type")), source, duration_s);
  });
}

Json to_json(const GroundTruth & gt)
{
  const Point c = gt.bbox.center();
  return Json{
    {"clip_id", gt.clip_id},
    {"time_s", gt.time_s},
    {"x0", gt.bbox.x0()},
    {"y0", gt.bbox.y0()},
    {"x1", gt.bbox.x1()},
    {"y1", gt.bbox.y1()},
    {"x", c.x()},
    {"y", c.y()},
    {"type", std::string(to_string(gt.collision_type))}};
}

GroundTruth ground_truth_from_json(const Json & row)
{
  return rethrow_as_format_error([&] {
    return GroundTruth{
      require_string(row, "clip_id"), require_number(row, "time_s"),
      Box(require_number(row, "x0"), require_number(row, "y0"), require_number(row, "x1"),
          require_number(row, "y1")),
      parse_collision_type(require_string(row, "type"))};
  });
}

Json to_json(const Detection & det)
{
  return Json{
    {"clip_id", det.clip_id},
    {"frame_idx", det.frame_idx},
    {"x0", det.box.x0()},
    {"y0", det.box.y0()},
    {"x1", det.box.x1()},
    {"y1", det.box.y1()},
    {"label", det.class_label},
    {"score", det.score}};
}

Detection detection_from_json(const Json & row)
{
  return rethrow_as_format_error([&] {
    const Json & idx = require(row, "frame_idx");
    if (!idx.is_number_integer() || idx.get<long long>() < 0) {
      throw FormatError("frame_idx must be a non-negative integer");
    }
    const double score = row.contains("score") ? require_number(row, "score") : 1.0;
    return Detection{
      require_string(row, "clip_id"), idx.get<int>(),
      Box(require_number(row, "x0"), require_number(row, "y0"), require_number(row, "x1"),
          require_number(row, "y1")),
      require_string(row, "label"), score};
  });
}

Json to_json(const ClipMeta & clip)
{
  Json row{
    {"clip_id", clip.clip_id},
    {"duration_s", clip.duration_s},
    {"native_fps", clip.native_fps},
    {"scene_layout", clip.scene_layout.tag()},
    {"metadata", clip.metadata}};
  if (clip.frame_source) {
    row["frame_source"] = Json{
      {"directory", clip.frame_source->directory},
      {"fps", clip.frame_source->fps},
      {"extension", clip.frame_source->extension}};
  }
  return row;
}

ClipMeta clip_from_json(const Json & row, const LayoutRules & rules)
{
  return rethrow_as_format_error([&] {
    ClipMeta clip;
    clip.clip_id = require_string(row, "clip_id");
    clip.duration_s = require_number(row, "duration_s");
    clip.native_fps = require_number(row, "native_fps");
    clip.scene_layout = SceneLayout(require_string(row, "scene_layout"), rules);
    if (row.contains("frame_source") && !row.at("frame_source").is_null()) {
      const Json & fs = row.at("frame_source");
      FrameSourceSpec spec;
      spec.directory = require_string(fs, "directory");
      spec.fps = require_number(fs, "fps");
      if (fs.contains("extension")) {
        spec.extension = require_string(fs, "extension");
      }
      clip.frame_source = spec;
    }
    if (row.contains("metadata")) {
      for (const auto & [key, value] : row.at("metadata").items()) {
        clip.metadata[key] = value.is_string() ? value.get<std::string>() : value.dump();
      }
    }
    clip.validate();
    return clip;
  });
}

Json to_json(const Interval & interval) { return Json::array({interval.start, interval.end}); }

Json to_json(const FramePlan & plan)
{
  return Json{
    {"stage", std::string(to_string(plan.stage))},
    {"longest_side_px", plan.longest_side_px},
    {"timestamps", plan.timestamps}};
}

FramePlan plan_from_json(const Json & row)
{
  try {
    FramePlan plan;
    const std::string stage = row.at("stage").get<std::string>();
    if (stage == "stage1") {
      plan.stage = Stage::kStage1;
    } else if (stage == "stage2") {
      plan.stage = Stage::kStage2;
    } else if (stage == "stage3") {
      plan.stage = Stage::kStage3;
    } else {
      throw FormatError("unknown stage: " + stage);
    }
    plan.longest_side_px = row.at("longest_side_px").get<int>();
    plan.timestamps = row.at("timestamps").get<std::vector<double>>();
    return plan;
  } catch (const FormatError &) {
    throw;
  } catch (const std::exception & e) {
    throw FormatError(std::string("malformed plan: ") + e.what());
  }
}

Json to_json(const PassSet & passes)
{
  Json rows = Json::array();
  for (const Pass & pass : passes.passes) {
    rows.push_back(Json{{"span", to_json(pass.span)}, {"plan", to_json(pass.plan)}});
  }
  return Json{
    {"passes", rows}, {"overlap", passes.overlap ? to_json(*passes.overlap) : Json(nullptr)}};
}

std::vector<Json> read_jsonl(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw FormatError("cannot open " + path.string());
  }
  std::vector<Json> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    Json row = Json::parse(line, nullptr, false);
    if (row.is_discarded()) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": invalid JSON");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_jsonl(const std::filesystem::path & path, const std::vector<Json> & rows)
{
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw FormatError("cannot write " + path.string());
  }
  for (const Json & row : rows) {
    out << row.dump(-1, ' ', false, Json::error_handler_t::replace) << '\n';
  }
}

JsonlAppender::JsonlAppender(const std::filesystem::path & path)
{
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  out_.open(path, std::ios::app);
  if (!out_) {
    throw FormatError("cannot append to " + path.string());
  }
}

void JsonlAppender::append(const Json & row)
{
  const std::string line = row.dump(-1, ' ', false, Json::error_handler_t::replace);
  std::lock_guard<std::mutex> lock(mutex_);
  out_ << line << '\n';
  out_.flush();
}

void write_predictions(const std::filesystem::path & path, std::vector<Prediction> preds)
{
  std::sort(preds.begin(), preds.end(), [](const Prediction & a, const Prediction & b) {
    return a.clip_id() < b.clip_id();
  });
  std::vector<Json> rows;
  rows.reserve(preds.size());
  for (const Prediction & p : preds) {
    rows.push_back(to_json(p));
  }
  write_jsonl(path, rows);
}

std::vector<Prediction> read_predictions(const std::filesystem::path & path)
{
  std::vector<Prediction> out;
  for (const Json & row : read_jsonl(path)) {
    out.push_back(prediction_from_json(row));
  }
  return out;
}

void write_ground_truth(const std::filesystem::path & path, std::vector<GroundTruth> gts)
{
  std::sort(gts.begin(), gts.end(), [](const GroundTruth & a, const GroundTruth & b) {
    return a.clip_id < b.clip_id;
  });
  std::vector<Json> rows;
  for (const GroundTruth & gt : gts) {
    rows.push_back(to_json(gt));
  }
  write_jsonl(path, rows);
}

std::vector<GroundTruth> read_ground_truth(const std::filesystem::path & path)
{
  std::vector<GroundTruth> out;
  for (const Json & row : read_jsonl(path)) {
    out.push_back(ground_truth_from_json(row));
  }
  return out;
}

const std::vector<Detection> & DetectionSet::for_clip(const std::string & clip_id) const
{
  static const std::vector<Detection> empty;
  const auto it = by_clip.find(clip_id);
  return it == by_clip.end() ? empty : it->second;
}

void write_detections(const std::filesystem::path & path, const DetectionSet & set)
{
  std::vector<Json> rows;
  rows.push_back(Json{{"header", true}, {"detection_fps", set.detection_fps}});
  for (const auto & [clip_id, dets] : set.by_clip) {
    for (const Detection & det : dets) {
      rows.push_back(to_json(det));
    }
  }
  write_jsonl(path, rows);
}

DetectionSet read_detections(const std::filesystem::path & path)
{
  const std::vector<Json> rows = read_jsonl(path);
  if (rows.empty() || !rows.front().is_object() || !rows.front().value("header", false)) {
    throw FormatError(path.string() + ": missing detections header record");
  }
  DetectionSet set;
  set.detection_fps = rethrow_as_format_error([&] { return require_number(rows.front(), "detection_fps"); });
  if (!(set.detection_fps > 0.0)) {
    throw FormatError(path.string() + ": detection_fps must be > 0");
  }
  for (std::size_t i = 1; i < rows.size(); ++i) {
    Detection det = detection_from_json(rows[i]);
    set.by_clip[det.clip_id].push_back(std::move(det));
  }
  return set;
}

DetectionSet import_coco_detections(const Json & images, const Json & results, double detection_fps)
{
  static const std::map<int, std::string> kVehicleCategories = {
    {3, "car"}, {4, "motorcycle"}, {6, "bus"}, {8, "truck"}};

  struct ImageInfo
  {
    std::string clip_id;
    int frame_idx;
    double width;
    double height;
  };
  std::map<long long, ImageInfo> by_id;
  rethrow_as_format_error([&] {
    for (const Json & img : images) {
      const Json & id = require(img, "id");
      by_id[id.get<long long>()] = ImageInfo{
        require_string(img, "clip_id"), require(img, "frame_idx").get<int>(),
        require_number(img, "width"), require_number(img, "height")};
    }
    return 0;
  });

  DetectionSet set;
  set.detection_fps = detection_fps;
  rethrow_as_format_error([&] {
    for (const Json & res : results) {
      const auto category = kVehicleCategories.find(require(res, "category_id").get<int>());
      if (category == kVehicleCategories.end()) {
        continue;
      }
      const auto image = by_id.find(require(res, "image_id").get<long long>());
      if (image == by_id.end()) {
        throw FormatError("detection references unknown image id");
      }
      const ImageInfo & info = image->second;
      const Json & bbox = require(res, "bbox");
      if (!bbox.is_array() || bbox.size() != 4) {
        throw FormatError("bbox must be [x, y, w, h]");
      }
      const double x0 = std::clamp(bbox[0].get<double>() / info.width, 0.0, 1.0);
      const double y0 = std::clamp(bbox[1].get<double>() / info.height, 0.0, 1.0);
      const double x1 = std::clamp((bbox[0].get<double>() + bbox[2].get<double>()) / info.width, 0.0, 1.0);
      const double y1 = std::clamp((bbox[1].get<double>() + bbox[3].get<double>()) / info.height, 0.0, 1.0);
      if (!(x0 < x1) || !(y0 < y1)) {
        continue;
      }
      set.by_clip[info.clip_id].push_back(Detection{
        info.clip_id, info.frame_idx, Box(x0, y0, x1, y1), category->second,
        res.contains("score") ? require_number(res, "score") : 1.0});
    }
    return 0;
  });
  return set;
}

std::string read_text_file(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError("cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path & path, const std::string & text)
{
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw FormatError("cannot write " + path.string());
  }
  out << text;
}

}  // namespace accvlm
