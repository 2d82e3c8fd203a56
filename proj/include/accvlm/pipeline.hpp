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

#ifndef ACCVLM_PIPELINE_HPP_
#define ACCVLM_PIPELINE_HPP_

#include "accvlm/backend.hpp"
#include "accvlm/domain.hpp"
#include "accvlm/frame_plan.hpp"
#include "accvlm/io.hpp"
#include "accvlm/prompts.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace accvlm
{

struct StageConfig
{
  /// Weight of the Stage-2 correction.
  double alpha = 0.35;
  /// Cap on |t_refined - t_base| before weighting, seconds.
  double delta_max_s = 1.5;

  Stage1Params stage1;
  Stage2Params stage2;
  Stage3Params stage3;

  bool enable_stage2 = true;
  bool enable_stage3 = true;
  bool enable_type_rule = true;

  PromptTemplates prompts = PromptTemplates::defaults();
  int max_tokens = 256;

  void validate() const;
};

/// Applies a `--stages` value: "1", "12", "13" or "123".
void set_enabled_stages(StageConfig & cfg, std::string_view stages);

/// Everything needed to re-derive a clip's final prediction.
struct PipelineTrace
{
  std::string clip_id;
  double duration_s = 0.0;
  std::string scene_layout;
  bool perpendicular_possible = true;

  std::vector<FramePlan> plans;
  /// Per-pass Stage-1 answers; a failed pass is absent.
  std::vector<std::optional<Prediction>> stage1_passes;
  std::optional<Interval> overlap;
  /// Merged Stage-1 prediction before the type rule (the fallback if Stage 1 failed).
  std::optional<Prediction> stage1;
  bool stage1_fallback = false;
  bool type_rule_applied = false;

  double t_base = 0.0;
  std::optional<double> t_refined;
  double t_final = 0.0;
  bool stage2_degraded = false;

  std::optional<Point> stage3_point;
  bool stage3_degraded = false;

  std::vector<std::string> applied_rules;
  std::vector<std::string> errors;
  std::optional<Prediction> final_prediction;
};

Json to_json(const PipelineTrace & trace);
PipelineTrace trace_from_json(const Json & row);

struct PipelineResult
{
  Prediction prediction;
  PipelineTrace trace;
};

/// Two-pass merge: averages time and point and keeps pass 1's type when both
/// answers fall inside the overlap; otherwise keeps the answer lying in its own
/// pass's exclusive region, pass 1 first.
Prediction merge_passes(const Prediction & first, const Prediction & second, const Interval & overlap);

/// t_base + alpha * clip(t_refined - t_base, -delta_max, +delta_max).
/// The result never moves more than fl(alpha * delta_max) away from t_base.
double refine_time(double t_base, double t_refined, double alpha, double delta_max);

/// As above with the configured constants, then clamped to [0, duration].
double refine_time(double t_base, double t_refined, const StageConfig & cfg, double duration_s);

/// t-bone becomes rear-end where perpendicular impacts are impossible.
Prediction apply_type_rule(const Prediction & pred, const SceneLayout & layout);

/// Stage 1 (per pass, merged), type rule, Stage 2 time refinement and Stage 3
/// grounding. A failed Stage 2 or 3 keeps the previous stage's value; a failed
/// Stage 1 yields the fallback prediction and skips the later stages.
PipelineResult run_pipeline(const ClipMeta & clip, Backend & backend, const StageConfig & cfg);

/// Re-applies the type rule, time refinement and grounding to the recorded
/// intermediates of a trace.
Prediction replay_trace(const PipelineTrace & trace, const StageConfig & cfg);

/// Frames for one plan as base64 PNGs. Clips without a frame source yield
/// timestamp-only placeholders.
std::vector<EncodedImage> prepare_frames(const ClipMeta & clip, const FramePlan & plan);

}  // namespace accvlm

#endif  // ACCVLM_PIPELINE_HPP_
