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

#include "accvlm/pipeline.hpp"

#include "accvlm/overlay.hpp"
#include "accvlm/response_parser.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <functional>

namespace accvlm
{
namespace
{

// One inference with a single re-ask on an unparseable answer.
template <typename Result>
std::optional<Result> query(
  Backend & backend, InferenceRequest request, const PromptTemplates & prompts,
  const std::function<Result(const std::string &)> & parse, std::vector<std::string> & errors)
{
  const std::string original_prompt = request.prompt_text;
  for (int attempt = 0; attempt < 2; ++attempt) {
    request.context.attempt = attempt;
    if (attempt > 0) {
      request.prompt_text = build_reask_prompt(original_prompt, prompts);
    }
    std::string text;
    try {
      text = backend.infer(request);
    } catch (const BackendError & e) {
      errors.push_back(std::string(to_string(request.context.stage)) + ": " + e.what());
      return std::nullopt;
    }
    try {
      return parse(text);
    } catch (const ResponseError & e) {
      errors.push_back(
        std::string(to_string(request.context.stage)) + " attempt " + std::to_string(attempt) +
        ": " + e.what());
    }
  }
  return std::nullopt;
}

std::optional<std::vector<EncodedImage>> frames_or_error(
  const ClipMeta & clip, const FramePlan & plan, std::vector<std::string> & errors)
{
  try {
    return prepare_frames(clip, plan);
  } catch (const FrameLoadError & e) {
    errors.push_back(std::string(to_string(plan.stage)) + ": " + e.what());
    return std::nullopt;
  }
}

Json optional_prediction(const std::optional<Prediction> & pred)
{
  return pred ? to_json(*pred) : Json(nullptr);
}

}  // namespace

void StageConfig::validate() const
{
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("alpha must lie in (0, 1]");
  }
  if (!(delta_max_s > 0.0)) {
    throw std::invalid_argument("delta_max_s must be > 0");
  }
  if (!(stage1.fps > 0.0) || stage1.max_frames == 0 || !(stage1.pass_len_s > 0.0) ||
      !(stage1.min_overlap_s >= 0.0)) {
    throw std::invalid_argument("invalid stage-1 sampling parameters");
  }
}

void set_enabled_stages(StageConfig & cfg, std::string_view stages)
{
  if (stages == "1") {
    cfg.enable_stage2 = false;
    cfg.enable_stage3 = false;
  } else if (stages == "12") {
    cfg.enable_stage2 = true;
    cfg.enable_stage3 = false;
  } else if (stages == "13") {
    cfg.enable_stage2 = false;
    cfg.enable_stage3 = true;
  } else if (stages == "123") {
    cfg.enable_stage2 = true;
    cfg.enable_stage3 = true;
  } else {
    throw std::invalid_argument("--stages must be one of 1, 12, 13, 123");
  }
}

Prediction merge_passes(const Prediction & first, const Prediction & second, const Interval & overlap)
{
  if (overlap.contains(first.time_s()) && overlap.contains(second.time_s())) {
    const Point mid(
      0.5 * (first.centroid().x() + second.centroid().x()),
      0.5 * (first.centroid().y() + second.centroid().y()));
    return Prediction(
      first.clip_id(), 0.5 * (first.time_s() + second.time_s()), mid, first.collision_type(),
      Source::kStage1, std::min(first.duration_bound(), second.duration_bound()));
  }
  if (first.time_s() < overlap.start) {
    return first.with_source(Source::kStage1);
  }
  if (second.time_s() > overlap.end) {
    return second.with_source(Source::kStage1);
  }
  return first.with_source(Source::kStage1);
}

double refine_time(double t_base, double t_refined, double alpha, double delta_max)
{
  const double bound = alpha * delta_max;
  const double correction = alpha * std::clamp(t_refined - t_base, -delta_max, delta_max);
  double t_final = t_base + correction;
  // Rounding of the addition may overshoot the cap by an ulp; pull back toward t_base.
  while (std::abs(t_final - t_base) > bound) {
    t_final = std::nextafter(t_final, t_base);
  }
  return t_final;
}

double refine_time(double t_base, double t_refined, const StageConfig & cfg, double duration_s)
{
  return std::clamp(refine_time(t_base, t_refined, cfg.alpha, cfg.delta_max_s), 0.0, duration_s);
}

Prediction apply_type_rule(const Prediction & pred, const SceneLayout & layout)
{
  if (pred.collision_type() == CollisionType::kTBone && !layout.perpendicular_possible()) {
    return pred.with_type(CollisionType::kRearEnd);
  }
  return pred;
}

std::vector<EncodedImage> prepare_frames(const ClipMeta & clip, const FramePlan & plan)
{
  std::vector<EncodedImage> out;
  out.reserve(plan.timestamps.size());
  const bool burn = plan.stage != Stage::kStage3;
  for (double t : plan.timestamps) {
    if (!clip.frame_source) {
      out.push_back(EncodedImage{"image/png", "", t});
      continue;
    }
    Frame frame = load_frame(clip, t, plan.longest_side_px);
    if (burn) {
      frame = burn_timestamp(frame);
    }
    out.push_back(EncodedImage{"image/png", base64_encode(encode_png(frame)), frame.timestamp_s()});
  }
  return out;
}

PipelineResult run_pipeline(const ClipMeta & clip, Backend & backend, const StageConfig & cfg)
{
  clip.validate();
  PipelineTrace trace;
  trace.clip_id = clip.clip_id;
  trace.duration_s = clip.duration_s;
  trace.scene_layout = clip.scene_layout.tag();
  trace.perpendicular_possible = clip.scene_layout.perpendicular_possible();

  const auto make_request = [&](std::string prompt, std::vector<EncodedImage> frames, Stage stage, int pass) {
    InferenceRequest req;
    req.prompt_text = std::move(prompt);
    req.frames = std::move(frames);
    req.max_tokens = cfg.max_tokens;
    req.context = RequestContext{clip.clip_id, stage, pass, 0};
    return req;
  };

  // Stage 1: one query per pass.
  const PassSet passes = plan_stage1(clip, cfg.stage1);
  trace.overlap = passes.overlap;
  const std::string stage1_prompt = build_stage1_prompt(clip.scene_layout, cfg.prompts);
  const std::function<Prediction(const std::string &)> parse_stage1 = [&](const std::string & text) {
    return parse_stage1_response(text, clip);
  };
  for (std::size_t i = 0; i < passes.passes.size(); ++i) {
    const FramePlan & plan = passes.passes[i].plan;
    trace.plans.push_back(plan);
    std::optional<Prediction> answer;
    if (auto frames = frames_or_error(clip, plan, trace.errors)) {
      answer = query<Prediction>(
        backend, make_request(stage1_prompt, std::move(*frames), Stage::kStage1, static_cast<int>(i)),
        cfg.prompts, parse_stage1, trace.errors);
    }
    trace.stage1_passes.push_back(answer);
  }

  std::optional<Prediction> stage1;
  if (trace.stage1_passes.size() == 2 && trace.stage1_passes[0] && trace.stage1_passes[1]) {
    stage1 = merge_passes(*trace.stage1_passes[0], *trace.stage1_passes[1], *passes.overlap);
    trace.applied_rules.push_back("two_pass_merge");
  } else {
    for (const auto & answer : trace.stage1_passes) {
      if (answer) {
        stage1 = answer;
        break;
      }
    }
  }
  if (!stage1) {
    trace.stage1_fallback = true;
    trace.stage1 = fallback_prediction(clip);
    trace.t_base = trace.t_final = trace.stage1->time_s();
    trace.final_prediction = trace.stage1;
    spdlog::warn("clip '{}': stage 1 failed, emitting fallback prediction", clip.clip_id);
    return PipelineResult{*trace.final_prediction, std::move(trace)};
  }
  trace.stage1 = stage1;

  Prediction current = *stage1;
  if (cfg.enable_type_rule) {
    const Prediction ruled = apply_type_rule(current, clip.scene_layout);
    if (ruled.collision_type() != current.collision_type()) {
      trace.type_rule_applied = true;
      trace.applied_rules.push_back("type_rule");
    }
    current = ruled;
  }
  trace.t_base = current.time_s();
  trace.t_final = current.time_s();

  // Stage 2: bounded time correction.
  if (cfg.enable_stage2) {
    const FramePlan plan = plan_stage2(trace.t_base, clip, cfg.stage2);
    trace.plans.push_back(plan);
    const std::function<double(const std::string &)> parse_stage2 = [&](const std::string & text) {
      return parse_stage2_response(text, clip);
    };
    std::optional<double> refined;
    if (auto frames = frames_or_error(clip, plan, trace.errors)) {
      refined = query<double>(
        backend, make_request(build_stage2_prompt(trace.t_base, cfg.prompts), std::move(*frames), Stage::kStage2, 0),
        cfg.prompts, parse_stage2, trace.errors);
    }
    if (refined) {
      trace.t_refined = refined;
      trace.t_final = refine_time(trace.t_base, *refined, cfg, clip.duration_s);
      current = current.with_time(trace.t_final).with_source(Source::kStage2);
      trace.applied_rules.push_back("stage2_refine");
    } else {
      trace.stage2_degraded = true;
    }
  }

  // Stage 3: single-frame grounding at the refined time, no overlay.
  if (cfg.enable_stage3) {
    const FramePlan plan = plan_stage3(trace.t_final, clip, cfg.stage3);
    trace.plans.push_back(plan);
    const std::function<Point(const std::string &)> parse_stage3 = [](const std::string & text) {
      return parse_stage3_point(text);
    };
    std::optional<Point> point;
    if (auto frames = frames_or_error(clip, plan, trace.errors)) {
      point = query<Point>(
        backend, make_request(build_stage3_prompt(cfg.prompts), std::move(*frames), Stage::kStage3, 0),
        cfg.prompts, parse_stage3, trace.errors);
    }
    if (point) {
      trace.stage3_point = point;
      current = current.with_centroid(*point).with_source(Source::kStage3);
      trace.applied_rules.push_back("stage3_ground");
    } else {
      trace.stage3_degraded = true;
    }
  }

  trace.final_prediction = current;
  return PipelineResult{current, std::move(trace)};
}

Prediction replay_trace(const PipelineTrace & trace, const StageConfig & cfg)
{
  if (!trace.stage1) {
    throw FormatError("trace for '" + trace.clip_id + "' has no stage-1 prediction");
  }
  Prediction current = trace.stage1->with_time(trace.stage1->time_s());
  if (trace.stage1_fallback) {
    return current;
  }
  if (cfg.enable_type_rule) {
    // Rebuild a layout with the recorded verdict so replay does not depend on
    // the rules in force when the trace is read back.
    LayoutRules recorded{{}};
    if (!trace.perpendicular_possible) {
      recorded.perpendicular_impossible.insert(trace.scene_layout);
    }
    current = apply_type_rule(current, SceneLayout(trace.scene_layout, recorded));
  }
  if (trace.t_refined) {
    const double t_final = refine_time(current.time_s(), *trace.t_refined, cfg, trace.duration_s);
    current = current.with_time(t_final).with_source(Source::kStage2);
  }
  if (trace.stage3_point) {
    current = current.with_centroid(*trace.stage3_point).with_source(Source::kStage3);
  }
  return current;
}

Json to_json(const PipelineTrace & trace)
{
  Json passes = Json::array();
  for (const auto & p : trace.stage1_passes) {
    passes.push_back(optional_prediction(p));
  }
  Json plans = Json::array();
  for (const FramePlan & plan : trace.plans) {
    plans.push_back(to_json(plan));
  }
  return Json{
    {"clip_id", trace.clip_id},
    {"duration_s", trace.duration_s},
    {"scene_layout", trace.scene_layout},
    {"perpendicular_possible", trace.perpendicular_possible},
    {"plans", plans},
    {"stage1_passes", passes},
    {"overlap", trace.overlap ? to_json(*trace.overlap) : Json(nullptr)},
    {"stage1", optional_prediction(trace.stage1)},
    {"stage1_fallback", trace.stage1_fallback},
    {"type_rule_applied", trace.type_rule_applied},
    {"t_base", trace.t_base},
    {"t_refined", trace.t_refined ? Json(*trace.t_refined) : Json(nullptr)},
    {"t_final", trace.t_final},
    {"stage2_degraded", trace.stage2_degraded},
    {"stage3_point",
     trace.stage3_point ? Json::array({trace.stage3_point->x(), trace.stage3_point->y()}) : Json(nullptr)},
    {"stage3_degraded", trace.stage3_degraded},
    {"applied_rules", trace.applied_rules},
    {"errors", trace.errors},
    {"final", optional_prediction(trace.final_prediction)}};
}

PipelineTrace trace_from_json(const Json & row)
{
  try {
    PipelineTrace trace;
    trace.clip_id = row.at("clip_id").get<std::string>();
    trace.duration_s = row.at("duration_s").get<double>();
    trace.scene_layout = row.value("scene_layout", "");
    trace.perpendicular_possible = row.value("perpendicular_possible", true);
    const auto read_pred = [&](const Json & v) -> std::optional<Prediction> {
      if (v.is_null()) {
        return std::nullopt;
      }
      return prediction_from_json(v, trace.duration_s);
    };
    for (const Json & plan : row.value("plans", Json::array())) {
      trace.plans.push_back(plan_from_json(plan));
    }
    for (const Json & p : row.value("stage1_passes", Json::array())) {
      trace.stage1_passes.push_back(read_pred(p));
    }
    if (row.contains("overlap") && row.at("overlap").is_array()) {
      trace.overlap = Interval{row["overlap"][0].get<double>(), row["overlap"][1].get<double>()};
    }
    trace.stage1 = read_pred(row.value("stage1", Json()));
    trace.stage1_fallback = row.value("stage1_fallback", false);
    trace.type_rule_applied = row.value("type_rule_applied", false);
    trace.t_base = row.value("t_base", 0.0);
    if (row.contains("t_refined") && row.at("t_refined").is_number()) {
      trace.t_refined = row.at("t_refined").get<double>();
    }
    trace.t_final = row.value("t_final", 0.0);
    trace.stage2_degraded = row.value("stage2_degraded", false);
    if (row.contains("stage3_point") && row.at("stage3_point").is_array()) {
      trace.stage3_point = Point(row["stage3_point"][0].get<double>(), row["stage3_point"][1].get<double>());
    }
    trace.stage3_degraded = row.value("stage3_degraded", false);
    trace.applied_rules = row.value("applied_rules", std::vector<std::string>{});
    trace.errors = row.value("errors", std::vector<std::string>{});
    trace.final_prediction = read_pred(row.value("final", Json()));
    return trace;
  } catch (const FormatError &) {
    throw;
  } catch (const std::exception & e) {
    throw FormatError(std::string("malformed trace: ") + e.what());
  }
}

}  // namespace accvlm
