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

#ifndef ACCVLM_IO_HPP_
#define ACCVLM_IO_HPP_

#include "accvlm/domain.hpp"
#include "accvlm/frame_plan.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace accvlm
{

using Json = nlohmann::json;

/// Raised when a file row does not match its documented schema.
class FormatError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// JSON-lines rows: {clip_id, time_s, x, y, type[, source]}
Json to_json(const Prediction & pred);
Prediction prediction_from_json(const Json & row, double duration_s = Prediction::kUnbounded);

// {clip_id, time_s, x0, y0, x1, y1, x, y, type}; x/y echo the box centre.
Json to_json(const GroundTruth & gt);
GroundTruth ground_truth_from_json(const Json & row);

Json to_json(const Detection & det);
Detection detection_from_json(const Json & row);

Json to_json(const ClipMeta & clip);
ClipMeta clip_from_json(const Json & row, const LayoutRules & rules = {});

Json to_json(const Interval & interval);
Json to_json(const FramePlan & plan);
// Throws FormatError on unknown stage names or malformed rows.
FramePlan plan_from_json(const Json & row);
Json to_json(const PassSet & passes);

/// Throws FormatError on unreadable files or malformed lines; blank lines are skipped.
std::vector<Json> read_jsonl(const std::filesystem::path & path);
void write_jsonl(const std::filesystem::path & path, const std::vector<Json> & rows);

/// Thread-safe append-only JSON-lines writer; each row is flushed on write.
class JsonlAppender
{
public:
  explicit JsonlAppender(const std::filesystem::path & path);

  void append(const Json & row);

private:
  std::mutex mutex_;
  std::ofstream out_;
};

/// Rows are written sorted by clip_id.
void write_predictions(const std::filesystem::path & path, std::vector<Prediction> preds);
std::vector<Prediction> read_predictions(const std::filesystem::path & path);

void write_ground_truth(const std::filesystem::path & path, std::vector<GroundTruth> gts);
std::vector<GroundTruth> read_ground_truth(const std::filesystem::path & path);

/// Detections grouped per clip, with the frame rate used to index them.
struct DetectionSet
{
  double detection_fps = 0.0;
  std::map<std::string, std::vector<Detection>> by_clip;

  const std::vector<Detection> & for_clip(const std::string & clip_id) const;
};

/// First line is the header record {"header": true, "detection_fps": <Hz>}.
void write_detections(const std::filesystem::path & path, const DetectionSet & set);
DetectionSet read_detections(const std::filesystem::path & path);

/// Converts COCO-style detector output. `images` maps each image id to
/// {clip_id, frame_idx, width, height}; `results` holds
/// {image_id, category_id, bbox: [x, y, w, h] in pixels, score}. Only the COCO
/// vehicle categories (3 car, 4 motorcycle, 6 bus, 8 truck) are kept.
DetectionSet import_coco_detections(const Json & images, const Json & results, double detection_fps);

std::string read_text_file(const std::filesystem::path & path);
void write_text_file(const std::filesystem::path & path, const std::string & text);

}  // namespace accvlm

#endif  // ACCVLM_IO_HPP_
