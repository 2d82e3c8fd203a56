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

// accvlm: command-line front end for planning, running, post-processing and
// scoring accident predictions.

#include "accvlm/frame_plan.hpp"
#include "accvlm/harness.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace accvlm;

namespace
{

struct NoiseFlags
{
  std::optional<double> time_sigma;
  std::optional<double> refine_sigma;
  std::optional<double> space_sigma;
  std::optional<double> grid_quantum;
  std::optional<double> type_flip;

  void add(CLI::App * app)
  {
    app->add_option("--time-sigma", time_sigma, "Oracle stage-1 time noise (s)");
    app->add_option("--refine-sigma", refine_sigma, "Oracle stage-2 time noise (s)");
    app->add_option("--space-sigma", space_sigma, "Oracle coordinate jitter");
    app->add_option("--grid-quantum", grid_quantum, "Oracle stage-1 coordinate grid");
    app->add_option("--type-flip", type_flip, "Oracle type flip probability");
  }

  void apply(OracleNoise & n) const
  {
    n.time_sigma_s = time_sigma.value_or(n.time_sigma_s);
    n.refine_time_sigma_s = refine_sigma.value_or(n.refine_time_sigma_s);
    n.space_sigma = space_sigma.value_or(n.space_sigma);
    n.grid_quantum = grid_quantum.value_or(n.grid_quantum);
    n.type_flip_prob = type_flip.value_or(n.type_flip_prob);
  }
};

struct RunFlags
{
  std::string manifest;
  std::string config;
  std::string stages;
  std::string prompt_dir;
  std::string audit_dir;
  std::optional<std::size_t> concurrency;
  std::optional<std::uint64_t> seed;
  bool dump_plans = false;
  bool oracle_b = false;
  NoiseFlags noise;

  void add(CLI::App * app)
  {
    app->add_option("--manifest", manifest, "Manifest JSON")->required()->check(CLI::ExistingFile);
    app->add_option("--config", config, "Run configuration JSON")->check(CLI::ExistingFile);
    app->add_option("--stages", stages, "Enabled stages: 1, 12, 13 or 123");
    app->add_option("--prompt-dir", prompt_dir, "Directory overriding the built-in prompt templates")
      ->check(CLI::ExistingDirectory);
    app->add_option("--audit-dir", audit_dir, "Mirror every backend request and response here");
    app->add_option("--concurrency", concurrency, "Clips processed in parallel");
    app->add_option("--seed", seed, "Oracle seed (profile B uses seed + 1)");
    app->add_flag("--oracle-b", oracle_b, "Add a second oracle profile B when the config has none");
    noise.add(app);
  }

  RunConfig build() const
  {
    RunConfig cfg = config.empty() ? RunConfig{} : load_config(config);
    if (config.empty()) {
      apply_env_overrides(cfg.profile_a);
    }
    if (oracle_b && !cfg.profile_b) {
      BackendProfile b = cfg.profile_a;
      b.name = "B";
      b.endpoint = BackendProfile::kOracleEndpoint;
      b.oracle_noise.seed = cfg.profile_a.oracle_noise.seed + 1;
      cfg.profile_b = b;
    }
    if (!stages.empty()) {
      set_enabled_stages(cfg.stages, stages);
    }
    if (!prompt_dir.empty()) {
      cfg.stages.prompts = PromptTemplates::load(prompt_dir);
    }
    if (!audit_dir.empty()) {
      cfg.audit_dir = fs::path(audit_dir);
    }
    if (concurrency) {
      cfg.concurrency = *concurrency;
    }
    cfg.dump_plans = cfg.dump_plans || dump_plans;
    noise.apply(cfg.profile_a.oracle_noise);
    if (seed) {
      cfg.profile_a.oracle_noise.seed = *seed;
    }
    if (cfg.profile_b) {
      noise.apply(cfg.profile_b->oracle_noise);
      if (seed) {
        cfg.profile_b->oracle_noise.seed = *seed + 1;
      }
    }
    cfg.validate();
    return cfg;
  }
};

MetricConfig metric_config(
  const std::vector<double> & sigmas, const std::vector<double> & sigma_xy, bool per_clip,
  bool mean_of_clips)
{
  MetricConfig cfg;
  if (!sigmas.empty()) {
    cfg.temporal_sigmas = sigmas;
  }
  if (!sigma_xy.empty()) {
    if (sigma_xy.size() != 2) {
      throw MetricConfigError("--sigma-xy takes two values");
    }
    cfg.spatial_sigma_mode = SpatialSigmaMode::kExplicit;
    cfg.explicit_sigma_xy = {sigma_xy[0], sigma_xy[1]};
  } else if (per_clip) {
    cfg.spatial_sigma_mode = SpatialSigmaMode::kPerClipBbox;
  }
  if (mean_of_clips) {
    cfg.aggregation = Aggregation::kMeanOfPerClip;
  }
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Three-stage VLM accident prediction: plan, run, post-process and score."};
  app.require_subcommand(1);
  app.fallthrough();
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off");

  // gen-synthetic --------------------------------------------------------------
  auto * gen = app.add_subcommand("gen-synthetic", "Write a synthetic manifest, ground truth and detections");
  std::size_t gen_n = 50;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  bool gen_render = false;
  int gen_distractors = 2;
  gen->add_option("-n,--count", gen_n, "Number of clips")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--distractors", gen_distractors, "Parked vehicles per clip")->check(CLI::NonNegativeNumber);
  gen->add_flag("--render-frames", gen_render, "Also render flat-colour PNG frames");

  // plan -----------------------------------------------------------------------
  auto * plan = app.add_subcommand("plan", "Print the frame plans for manifest clips");
  std::string plan_manifest;
  std::string plan_clip;
  std::optional<double> plan_t_base;
  std::optional<double> plan_t_final;
  plan->add_option("--manifest", plan_manifest, "Manifest JSON")->required()->check(CLI::ExistingFile);
  plan->add_option("--clip", plan_clip, "Only this clip");
  plan->add_option("--t-base", plan_t_base, "Also plan the refinement window around this time");
  plan->add_option("--t-final", plan_t_final, "Also plan the grounding frame at this time");

  // run ------------------------------------------------------------------------
  auto * run_cmd = app.add_subcommand("run", "Run the pipeline over a manifest (resumable)");
  RunFlags run_flags;
  std::string run_dir;
  run_flags.add(run_cmd);
  run_cmd->add_option("--run-dir", run_dir, "Run directory")->required();
  run_cmd->add_flag("--dump-plans", run_flags.dump_plans, "Write per-clip frame plans under plans/");

  // blend ----------------------------------------------------------------------
  auto * blend_cmd = app.add_subcommand("blend", "Blend two prediction files");
  std::string blend_a;
  std::string blend_b;
  std::string blend_out;
  double blend_lambda = 0.9;
  std::string blend_type = "A";
  blend_cmd->add_option("--a", blend_a, "Run A predictions")->required()->check(CLI::ExistingFile);
  blend_cmd->add_option("--b", blend_b, "Run B predictions")->required()->check(CLI::ExistingFile);
  blend_cmd->add_option("--out", blend_out, "Output predictions")->required();
  blend_cmd->add_option("--lambda", blend_lambda, "Weight of run A")->check(CLI::Range(0.0, 1.0));
  blend_cmd->add_option("--type-source", blend_type, "A or B")->check(CLI::IsMember({"A", "B"}));

  // snap -----------------------------------------------------------------------
  auto * snap_cmd = app.add_subcommand("snap", "Snap prediction points into detected vehicle boxes");
  std::string snap_preds;
  std::string snap_dets;
  std::string snap_out;
  std::string snap_trace;
  SnapConfig snap_cfg;
  snap_cmd->add_option("--preds", snap_preds, "Predictions")->required()->check(CLI::ExistingFile);
  snap_cmd->add_option("--detections", snap_dets, "Detections JSON-lines")->required()->check(CLI::ExistingFile);
  snap_cmd->add_option("--out", snap_out, "Output predictions")->required();
  snap_cmd->add_option("--trace", snap_trace, "Write per-clip snap decisions here");
  snap_cmd->add_option("--delta", snap_cfg.delta_snap, "Maximum displacement");
  snap_cmd->add_option("--half-window", snap_cfg.half_window_frames, "Initial half window in frames");
  snap_cmd->add_option("--max-doublings", snap_cfg.max_doublings, "Window doublings (-1: until exhausted)");

  // score ----------------------------------------------------------------------
  auto * score_cmd = app.add_subcommand("score", "Score predictions against ground truth");
  std::string score_preds;
  std::string score_gt;
  std::vector<double> score_sigmas;
  std::vector<double> score_sigma_xy;
  bool score_per_clip = false;
  bool score_mean_of_clips = false;
  bool score_json = false;
  score_cmd->add_option("--preds", score_preds, "Predictions")->required()->check(CLI::ExistingFile);
  score_cmd->add_option("--gt", score_gt, "Ground truth")->required()->check(CLI::ExistingFile);
  score_cmd->add_option("--sigmas", score_sigmas, "Temporal sigmas in seconds")->delimiter(',');
  score_cmd->add_option("--sigma-xy", score_sigma_xy, "Explicit spatial sigmas sx,sy")->delimiter(',');
  score_cmd->add_flag("--per-clip-sigma", score_per_clip, "Use each clip's own box size as sigma");
  score_cmd->add_flag("--mean-of-clips", score_mean_of_clips, "Average per-clip ACC^S instead");
  score_cmd->add_flag("--json", score_json, "Print the JSON report");

  // ablate ---------------------------------------------------------------------
  auto * ablate_cmd = app.add_subcommand("ablate", "Score the cumulative component ladder");
  RunFlags ablate_flags;
  std::string ablate_out;
  ablate_flags.add(ablate_cmd);
  ablate_cmd->add_option("--out", ablate_out, "Also write the table as JSON");

  // import-coco ----------------------------------------------------------------
  auto * coco = app.add_subcommand("import-coco", "Convert COCO-style detector output");
  std::string coco_images;
  std::string coco_results;
  std::string coco_out;
  double coco_fps = 30.0;
  coco->add_option("--images", coco_images, "Image index JSON")->required()->check(CLI::ExistingFile);
  coco->add_option("--results", coco_results, "Detector results JSON")->required()->check(CLI::ExistingFile);
  coco->add_option("--fps", coco_fps, "Frame rate of the detected frames")->check(CLI::PositiveNumber);
  coco->add_option("--out", coco_out, "Output detections JSON-lines")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    // --help and --version exit 0; every usage error maps to 1.
    return app.exit(e) == 0 ? 0 : 1;
  }
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*gen) {
      SyntheticParams params;
      params.distractors = gen_distractors;
      SyntheticDataset ds = generate_synthetic(gen_n, gen_seed, params);
      if (gen_render) {
        render_synthetic_frames(ds, fs::path(gen_out) / "frames", params);
      }
      const fs::path manifest = write_synthetic_dataset(ds, gen_out);
      if (gen_render) {
        // Keep frame paths relative so the dataset directory stays relocatable.
        Manifest m = load_manifest(manifest);
        for (ClipMeta & clip : m.clips) {
          clip.frame_source->directory = (fs::path("frames") / clip.clip_id).generic_string();
        }
        m.ground_truth = "ground_truth.jsonl";
        m.detections = "detections.jsonl";
        save_manifest(m, manifest);
      }
      std::cout << manifest.string() << "\n";
      return 0;
    }
    if (*plan) {
      const Manifest m = load_manifest(plan_manifest);
      for (const ClipMeta & clip : m.clips) {
        if (!plan_clip.empty() && clip.clip_id != plan_clip) {
          continue;
        }
        Json row{{"clip_id", clip.clip_id}, {"stage1", to_json(plan_stage1(clip))}};
        if (plan_t_base) {
          row["stage2"] = to_json(plan_stage2(*plan_t_base, clip));
        }
        if (plan_t_final) {
          row["stage3"] = to_json(plan_stage3(*plan_t_final, clip));
        }
        std::cout << row.dump() << "\n";
      }
      return 0;
    }
    if (*run_cmd) {
      const RunConfig cfg = run_flags.build();
      const Manifest m = load_manifest(run_flags.manifest, cfg.layout_rules);
      const RunSummary s = run(m, cfg, run_dir);
      fmt::print(
        "clips={} run={} skipped={} inferences={} fallbacks={} errors={}\n", s.clips, s.pipelines_run,
        s.pipelines_skipped, s.inferences, s.fallbacks, s.clips_with_errors);
      if (s.report) {
        fmt::print("{}", format_report(*s.report));
      }
      return s.exit_code();
    }
    if (*blend_cmd) {
      EnsembleConfig cfg{blend_lambda, blend_type == "A" ? TypeSource::kRunA : TypeSource::kRunB};
      write_predictions(blend_out, blend_runs(read_predictions(blend_a), read_predictions(blend_b), cfg));
      return 0;
    }
    if (*snap_cmd) {
      const DetectionSet dets = read_detections(snap_dets);
      if (dets.detection_fps > 0.0) {
        snap_cfg.detection_fps = dets.detection_fps;
      }
      std::vector<Prediction> out;
      std::vector<Json> trace;
      for (const Prediction & p : read_predictions(snap_preds)) {
        const SnapResult r = snap_detailed(p, dets.for_clip(p.clip_id()), snap_cfg);
        out.push_back(r.prediction);
        trace.push_back(to_json(r));
      }
      write_predictions(snap_out, out);
      if (!snap_trace.empty()) {
        write_jsonl(snap_trace, trace);
      }
      return 0;
    }
    if (*score_cmd) {
      const MetricConfig cfg =
        metric_config(score_sigmas, score_sigma_xy, score_per_clip, score_mean_of_clips);
      const ScoreReport r = score_dataset(read_predictions(score_preds), read_ground_truth(score_gt), cfg);
      std::cout << (score_json ? to_json(r).dump(2) + "\n" : format_report(r));
      return 0;
    }
    if (*ablate_cmd) {
      const RunConfig cfg = ablate_flags.build();
      const Manifest m = load_manifest(ablate_flags.manifest, cfg.layout_rules);
      const auto rows = ablate(m, cfg);
      std::cout << format_ablation(rows);
      if (!ablate_out.empty()) {
        write_text_file(ablate_out, to_json(rows).dump(2) + "\n");
      }
      return 0;
    }
    if (*coco) {
      const Json images = Json::parse(read_text_file(coco_images));
      const Json results = Json::parse(read_text_file(coco_results));
      write_detections(coco_out, import_coco_detections(images, results, coco_fps));
      return 0;
    }
  } catch (const std::exception & e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 1;
}
