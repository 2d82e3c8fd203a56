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

#include "accvlm/harness.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

namespace accvlm
{
namespace fs = std::filesystem;

namespace
{

fs::path resolve(const fs::path & base, const fs::path & p)
{
  return p.is_absolute() ? p : (base / p).lexically_normal();
}

std::map<std::string, GroundTruth> truth_map(const std::vector<GroundTruth> & gts)
{
  std::map<std::string, GroundTruth> out;
  for (const GroundTruth & gt : gts) {
    out.emplace(gt.clip_id, gt);
  }
  return out;
}

std::vector<GroundTruth> manifest_truths(const Manifest & manifest)
{
  return manifest.ground_truth ? read_ground_truth(*manifest.ground_truth) : std::vector<GroundTruth>{};
}

std::shared_ptr<Backend> build_backend(
  const BackendProfile & profile, const std::map<std::string, GroundTruth> & truths,
  const std::optional<fs::path> & audit_dir)
{
  auto backend = make_backend(profile, truths);
  if (audit_dir) {
    backend = std::make_shared<AuditingBackend>(backend, *audit_dir / profile.name);
  }
  return backend;
}

std::string env_suffix(const std::string & name)
{
  std::string out;
  for (char c : name) {
    out += std::isalnum(static_cast<unsigned char>(c)) ? static_cast<char>(std::toupper(static_cast<unsigned char>(c))) : '_';
  }
  return out;
}

template <typename T>
void read_if(const Json & doc, const char * key, T & target)
{
  if (doc.contains(key) && !doc.at(key).is_null()) {
    target = doc.at(key).get<T>();
  }
}

BackendProfile profile_from_json(const std::string & name, const Json & doc)
{
  BackendProfile p;
  p.name = name;
  read_if(doc, "endpoint", p.endpoint);
  read_if(doc, "model_id", p.model_id);
  read_if(doc, "timeout_s", p.timeout_s);
  read_if(doc, "retries", p.retries);
  read_if(doc, "backoff_initial_s", p.backoff_initial_s);
  read_if(doc, "auth_env", p.auth_env);
  read_if(doc, "max_tokens", p.max_tokens);
  if (doc.contains("oracle_noise")) {
    const Json & n = doc.at("oracle_noise");
    read_if(n, "time_sigma_s", p.oracle_noise.time_sigma_s);
    read_if(n, "refine_time_sigma_s", p.oracle_noise.refine_time_sigma_s);
    read_if(n, "space_sigma", p.oracle_noise.space_sigma);
    read_if(n, "type_flip_prob", p.oracle_noise.type_flip_prob);
    read_if(n, "grid_quantum", p.oracle_noise.grid_quantum);
    read_if(n, "seed", p.oracle_noise.seed);
  }
  apply_env_overrides(p);
  return p;
}

/// Last trace per clip id from an append-only trace file.
std::map<std::string, PipelineTrace> load_traces(const fs::path & path)
{
  std::map<std::string, PipelineTrace> out;
  if (!fs::exists(path)) {
    return out;
  }
  for (const Json & row : read_jsonl(path)) {
    PipelineTrace trace = trace_from_json(row);
    out[trace.clip_id] = std::move(trace);
  }
  return out;
}

struct ProfileOutcome
{
  std::vector<Prediction> predictions;
  std::size_t run = 0;
  std::size_t skipped = 0;
  std::uint64_t inferences = 0;
  std::size_t fallbacks = 0;
  std::size_t with_errors = 0;
  bool complete = false;
};

ProfileOutcome run_profile(
  const Manifest & manifest, const RunConfig & cfg, const BackendProfile & profile,
  const std::map<std::string, GroundTruth> & truths, const fs::path & run_dir, const RunOptions & options)
{
  const fs::path trace_path = run_dir / "traces" / (profile.name + ".jsonl");
  std::map<std::string, PipelineTrace> traces = load_traces(trace_path);

  std::vector<const ClipMeta *> pending;
  ProfileOutcome outcome;
  for (const ClipMeta & clip : manifest.clips) {
    if (traces.count(clip.clip_id)) {
      ++outcome.skipped;
    } else {
      pending.push_back(&clip);
    }
  }
  if (options.max_new_clips && pending.size() > *options.max_new_clips) {
    pending.resize(*options.max_new_clips);
  }
  spdlog::info(
    "profile {}: {} clips to run, {} already traced", profile.name, pending.size(), outcome.skipped);

  CountingBackend backend(build_backend(profile, truths, cfg.audit_dir));
  StageConfig stage_cfg = cfg.stages;
  stage_cfg.max_tokens = profile.max_tokens;
  JsonlAppender appender(trace_path);
  std::mutex traces_mutex;
  const fs::path plan_dir = run_dir / "plans" / profile.name;
  if (cfg.dump_plans) {
    fs::create_directories(plan_dir);
  }

  parallel_for(pending.size(), cfg.concurrency, [&](std::size_t i) {
    const ClipMeta & clip = *pending[i];
    PipelineResult result = run_pipeline(clip, backend, stage_cfg);
    appender.append(to_json(result.trace));
    if (cfg.dump_plans) {
      Json plans = Json::array();
      for (const FramePlan & plan : result.trace.plans) {
        plans.push_back(to_json(plan));
      }
      write_text_file(plan_dir / (clip.clip_id + ".json"), plans.dump(2) + "\n");
    }
    std::lock_guard<std::mutex> lock(traces_mutex);
    traces[clip.clip_id] = std::move(result.trace);
  });

  outcome.run = pending.size();
  outcome.inferences = backend.calls();
  outcome.complete = true;
  for (const ClipMeta & clip : manifest.clips) {
    const auto it = traces.find(clip.clip_id);
    if (it == traces.end()) {
      outcome.complete = false;
      continue;
    }
    const PipelineTrace & trace = it->second;
    outcome.fallbacks += trace.stage1_fallback ? 1 : 0;
    outcome.with_errors += trace.errors.empty() ? 0 : 1;
    outcome.predictions.push_back(
      trace.final_prediction ? *trace.final_prediction : fallback_prediction(clip));
  }
  return outcome;
}

SnapConfig effective_snap_config(const RunConfig & cfg, const DetectionSet & detections)
{
  SnapConfig snap = cfg.snap;
  if (detections.detection_fps > 0.0) {
    snap.detection_fps = detections.detection_fps;
  }
  return snap;
}

std::vector<SnapResult> snap_all(
  const std::vector<Prediction> & preds, const DetectionSet & detections, const SnapConfig & cfg)
{
  std::vector<SnapResult> out;
  out.reserve(preds.size());
  for (const Prediction & p : preds) {
    out.push_back(snap_detailed(p, detections.for_clip(p.clip_id()), cfg));
  }
  return out;
}

std::vector<Prediction> predictions_of(const std::vector<PipelineResult> & results)
{
  std::vector<Prediction> out;
  out.reserve(results.size());
  for (const PipelineResult & r : results) {
    out.push_back(r.prediction);
  }
  return out;
}

}  // namespace

// =============================================================================
// Manifest
// =============================================================================

void Manifest::validate() const
{
  if (schema_version != kSchemaVersion) {
    throw ManifestError(fmt::format("unsupported manifest schema_version {}", schema_version));
  }
  std::set<std::string> ids;
  for (const ClipMeta & clip : clips) {
    clip.validate();
    if (!ids.insert(clip.clip_id).second) {
      throw ManifestError("duplicate clip_id '" + clip.clip_id + "' in manifest");
    }
  }
}

Json to_json(const Manifest & manifest)
{
  Json clips = Json::array();
  for (const ClipMeta & clip : manifest.clips) {
    clips.push_back(to_json(clip));
  }
  Json out{{"schema_version", manifest.schema_version}, {"clips", clips}};
  out["ground_truth"] = manifest.ground_truth ? Json(manifest.ground_truth->generic_string()) : Json(nullptr);
  out["detections"] = manifest.detections ? Json(manifest.detections->generic_string()) : Json(nullptr);
  return out;
}

Manifest manifest_from_json(const Json & doc, const LayoutRules & rules)
{
  if (!doc.is_object() || !doc.contains("clips") || !doc.at("clips").is_array()) {
    throw ManifestError("manifest must be an object with a 'clips' array");
  }
  Manifest m;
  m.schema_version = doc.value("schema_version", Manifest::kSchemaVersion);
  for (const Json & row : doc.at("clips")) {
    m.clips.push_back(clip_from_json(row, rules));
  }
  if (doc.contains("ground_truth") && doc.at("ground_truth").is_string()) {
    m.ground_truth = fs::path(doc.at("ground_truth").get<std::string>());
  }
  if (doc.contains("detections") && doc.at("detections").is_string()) {
    m.detections = fs::path(doc.at("detections").get<std::string>());
  }
  m.validate();
  return m;
}

Manifest load_manifest(const fs::path & path, const LayoutRules & rules)
{
  Json doc;
  try {
    doc = Json::parse(read_text_file(path));
  } catch (const Json::exception & e) {
    throw ManifestError(path.string() + ": " + e.what());
  }
  Manifest m = manifest_from_json(doc, rules);
  const fs::path base = fs::absolute(path).parent_path();
  if (m.ground_truth) {
    m.ground_truth = resolve(base, *m.ground_truth);
  }
  if (m.detections) {
    m.detections = resolve(base, *m.detections);
  }
  for (ClipMeta & clip : m.clips) {
    if (clip.frame_source) {
      clip.frame_source->directory = resolve(base, clip.frame_source->directory).string();
    }
  }
  return m;
}

void save_manifest(const Manifest & manifest, const fs::path & path)
{
  manifest.validate();
  write_text_file(path, to_json(manifest).dump(2) + "\n");
}

fs::path write_synthetic_dataset(const SyntheticDataset & dataset, const fs::path & directory)
{
  fs::create_directories(directory);
  Manifest m;
  m.clips = dataset.clips;
  m.ground_truth = "ground_truth.jsonl";
  m.detections = "detections.jsonl";
  write_ground_truth(directory / "ground_truth.jsonl", dataset.truths);
  write_detections(directory / "detections.jsonl", dataset.detections);
  const fs::path manifest_path = directory / "manifest.json";
  save_manifest(m, manifest_path);
  return manifest_path;
}

// =============================================================================
// Config
// =============================================================================

void RunConfig::validate() const
{
  stages.validate();
  ensemble.validate();
  snap.validate();
  metrics.validate();
  profile_a.validate();
  if (profile_b) {
    profile_b->validate();
    if (profile_b->name == profile_a.name) {
      throw ConfigError("profiles A and B need distinct names");
    }
  }
  if (concurrency == 0) {
    throw ConfigError("concurrency must be >= 1");
  }
}

void apply_env_overrides(BackendProfile & profile)
{
  const std::string suffix = env_suffix(profile.name);
  if (const char * v = std::getenv(("ACCVLM_ENDPOINT_" + suffix).c_str()); v && *v) {
    profile.endpoint = v;
  }
  if (const char * v = std::getenv(("ACCVLM_MODEL_" + suffix).c_str()); v && *v) {
    profile.model_id = v;
  }
}

RunConfig config_from_json(const Json & doc)
{
  if (!doc.is_object()) {
    throw ConfigError("config must be a JSON object");
  }
  RunConfig cfg;
  try {
    if (doc.contains("layout_rules")) {
      cfg.layout_rules.perpendicular_impossible =
        doc.at("layout_rules").at("perpendicular_impossible").get<std::set<std::string>>();
    }
    if (doc.contains("stages")) {
      const Json & s = doc.at("stages");
      StageConfig & st = cfg.stages;
      if (s.contains("enabled")) {
        set_enabled_stages(st, s.at("enabled").get<std::string>());
      }
      read_if(s, "alpha", st.alpha);
      read_if(s, "delta_max_s", st.delta_max_s);
      read_if(s, "type_rule", st.enable_type_rule);
      if (s.contains("prompt_dir") && !s.at("prompt_dir").is_null()) {
        st.prompts = PromptTemplates::load(s.at("prompt_dir").get<std::string>());
      }
      if (s.contains("stage1")) {
        const Json & p = s.at("stage1");
        read_if(p, "fps", st.stage1.fps);
        read_if(p, "max_frames", st.stage1.max_frames);
        read_if(p, "pass_len_s", st.stage1.pass_len_s);
        read_if(p, "min_overlap_s", st.stage1.min_overlap_s);
        read_if(p, "longest_side_px", st.stage1.longest_side_px);
      }
      if (s.contains("stage2")) {
        const Json & p = s.at("stage2");
        read_if(p, "dense_half_width_s", st.stage2.dense_half_width_s);
        read_if(p, "dense_fps", st.stage2.dense_fps);
        read_if(p, "dense_max_frames", st.stage2.dense_max_frames);
        read_if(p, "sparse_before_s", st.stage2.sparse_before_s);
        read_if(p, "sparse_after_s", st.stage2.sparse_after_s);
        read_if(p, "sparse_fps", st.stage2.sparse_fps);
        read_if(p, "sparse_max_frames", st.stage2.sparse_max_frames);
        read_if(p, "longest_side_px", st.stage2.longest_side_px);
      }
      if (s.contains("stage3")) {
        read_if(s.at("stage3"), "longest_side_px", st.stage3.longest_side_px);
      }
    }
    if (doc.contains("ensemble")) {
      const Json & e = doc.at("ensemble");
      read_if(e, "enabled", cfg.enable_ensemble);
      read_if(e, "lambda", cfg.ensemble.lambda);
      if (e.contains("type_source")) {
        const std::string src = e.at("type_source").get<std::string>();
        if (src != "A" && src != "B") {
          throw ConfigError("ensemble.type_source must be \"A\" or \"B\"");
        }
        cfg.ensemble.type_source = src == "A" ? TypeSource::kRunA : TypeSource::kRunB;
      }
    }
    if (doc.contains("snap")) {
      const Json & s = doc.at("snap");
      read_if(s, "enabled", cfg.enable_snap);
      read_if(s, "delta", cfg.snap.delta_snap);
      read_if(s, "half_window_frames", cfg.snap.half_window_frames);
      read_if(s, "detection_fps", cfg.snap.detection_fps);
      read_if(s, "max_doublings", cfg.snap.max_doublings);
      if (s.contains("vehicle_classes")) {
        cfg.snap.vehicle_classes = s.at("vehicle_classes").get<std::set<std::string>>();
      }
    }
    if (doc.contains("metrics")) {
      const Json & m = doc.at("metrics");
      read_if(m, "temporal_sigmas", cfg.metrics.temporal_sigmas);
      if (m.contains("spatial_sigma_mode")) {
        const std::string mode = m.at("spatial_sigma_mode").get<std::string>();
        if (mode == "mean-bbox-dims") {
          cfg.metrics.spatial_sigma_mode = SpatialSigmaMode::kMeanBboxDims;
        } else if (mode == "per-clip-bbox") {
          cfg.metrics.spatial_sigma_mode = SpatialSigmaMode::kPerClipBbox;
        } else if (mode == "explicit") {
          cfg.metrics.spatial_sigma_mode = SpatialSigmaMode::kExplicit;
        } else {
          throw ConfigError("unknown metrics.spatial_sigma_mode '" + mode + "'");
        }
      }
      if (m.contains("sigma_xy")) {
        const auto xy = m.at("sigma_xy").get<std::vector<double>>();
        if (xy.size() != 2) {
          throw ConfigError("metrics.sigma_xy needs two values");
        }
        cfg.metrics.explicit_sigma_xy = {xy[0], xy[1]};
      }
      if (m.contains("aggregation")) {
        const std::string agg = m.at("aggregation").get<std::string>();
        if (agg == "harmonic-of-means") {
          cfg.metrics.aggregation = Aggregation::kHarmonicOfMeans;
        } else if (agg == "mean-of-per-clip") {
          cfg.metrics.aggregation = Aggregation::kMeanOfPerClip;
        } else {
          throw ConfigError("unknown metrics.aggregation '" + agg + "'");
        }
      }
    }
    if (doc.contains("profiles")) {
      const Json & p = doc.at("profiles");
      if (p.contains("A")) {
        cfg.profile_a = profile_from_json("A", p.at("A"));
      }
      if (p.contains("B") && !p.at("B").is_null()) {
        cfg.profile_b = profile_from_json("B", p.at("B"));
      }
    } else {
      apply_env_overrides(cfg.profile_a);
    }
    read_if(doc, "concurrency", cfg.concurrency);
    read_if(doc, "dump_plans", cfg.dump_plans);
    if (doc.contains("audit_dir") && doc.at("audit_dir").is_string()) {
      cfg.audit_dir = fs::path(doc.at("audit_dir").get<std::string>());
    }
  } catch (const Json::exception & e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const fs::path & path)
{
  try {
    return config_from_json(Json::parse(read_text_file(path)));
  } catch (const Json::parse_error & e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

// =============================================================================
// Drivers
// =============================================================================

void parallel_for(std::size_t n, std::size_t concurrency, const std::function<void(std::size_t)> & fn)
{
  if (n == 0) {
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const auto worker = [&] {
    while (!failed.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) {
        return;
      }
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) {
          first_error = std::current_exception();
        }
        failed = true;
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(concurrency, n));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back(worker);
    }
    for (std::thread & th : pool) {
      th.join();
    }
  }
  if (first_error) {
    std::rethrow_exception(first_error);
  }
}

std::vector<PipelineResult> run_clips(
  const std::vector<ClipMeta> & clips, Backend & backend, const StageConfig & cfg, std::size_t concurrency)
{
  std::vector<std::optional<PipelineResult>> slots(clips.size());
  parallel_for(clips.size(), concurrency, [&](std::size_t i) {
    slots[i] = run_pipeline(clips[i], backend, cfg);
  });
  std::vector<PipelineResult> out;
  out.reserve(clips.size());
  for (auto & slot : slots) {
    out.push_back(std::move(*slot));
  }
  return out;
}

int RunSummary::exit_code() const
{
  return (fallbacks > 0 || !complete) ? 2 : 0;
}

RunSummary run(
  const Manifest & manifest, const RunConfig & cfg, const fs::path & run_dir, const RunOptions & options)
{
  manifest.validate();
  cfg.validate();
  fs::create_directories(run_dir / "traces");
  fs::create_directories(run_dir / "report");

  const std::vector<GroundTruth> truths = manifest_truths(manifest);
  const auto truths_by_clip = truth_map(truths);

  RunSummary summary;
  summary.clips = manifest.clips.size();

  ProfileOutcome a = run_profile(manifest, cfg, cfg.profile_a, truths_by_clip, run_dir, options);
  summary.pipelines_run += a.run;
  summary.pipelines_skipped += a.skipped;
  summary.inferences += a.inferences;
  summary.fallbacks += a.fallbacks;
  summary.clips_with_errors += a.with_errors;
  summary.complete = a.complete;

  std::optional<ProfileOutcome> b;
  if (cfg.profile_b) {
    b = run_profile(manifest, cfg, *cfg.profile_b, truths_by_clip, run_dir, options);
    summary.pipelines_run += b->run;
    summary.pipelines_skipped += b->skipped;
    summary.inferences += b->inferences;
    summary.fallbacks += b->fallbacks;
    summary.clips_with_errors += b->with_errors;
    summary.complete = summary.complete && b->complete;
  }

  if (!summary.complete) {
    spdlog::warn("run incomplete; re-run to resume");
    return summary;
  }

  write_predictions(run_dir / "preds_A.jsonl", a.predictions);
  std::vector<Prediction> current = a.predictions;
  if (b) {
    write_predictions(run_dir / "preds_B.jsonl", b->predictions);
    if (cfg.enable_ensemble) {
      current = blend_runs(a.predictions, b->predictions, cfg.ensemble);
      write_predictions(run_dir / "preds_ens.jsonl", current);
    }
  }
  if (manifest.detections && cfg.enable_snap) {
    const DetectionSet detections = read_detections(*manifest.detections);
    const std::vector<SnapResult> snapped =
      snap_all(current, detections, effective_snap_config(cfg, detections));
    std::vector<Json> rows;
    current.clear();
    for (const SnapResult & r : snapped) {
      rows.push_back(to_json(r));
      current.push_back(r.prediction);
    }
    write_jsonl(run_dir / "traces" / "snap.jsonl", rows);
  }
  write_predictions(run_dir / "preds_final.jsonl", current);

  Json run_json{
    {"clips", summary.clips},
    {"pipelines_run", summary.pipelines_run},
    {"pipelines_skipped", summary.pipelines_skipped},
    {"inferences", summary.inferences},
    {"fallbacks", summary.fallbacks},
    {"clips_with_errors", summary.clips_with_errors}};
  if (!truths.empty()) {
    summary.report = score_dataset(current, truths, cfg.metrics);
    write_text_file(run_dir / "report" / "score.json", to_json(*summary.report).dump(2) + "\n");
    write_text_file(run_dir / "report" / "score.txt", format_report(*summary.report));
    run_json["acc_s"] = summary.report->acc_s;
  }
  write_text_file(run_dir / "report" / "run.json", run_json.dump(2) + "\n");
  return summary;
}

std::vector<AblationRow> ablate(const Manifest & manifest, const RunConfig & cfg)
{
  manifest.validate();
  cfg.validate();
  const std::vector<GroundTruth> truths = manifest_truths(manifest);
  if (truths.empty()) {
    throw ManifestError("ablation needs ground truth");
  }
  const auto truths_by_clip = truth_map(truths);
  auto backend_a = build_backend(cfg.profile_a, truths_by_clip, cfg.audit_dir);

  std::vector<AblationRow> rows;
  const auto add_row = [&](std::string name, const std::vector<Prediction> & preds) {
    rows.push_back(AblationRow{std::move(name), score_dataset(preds, truths, cfg.metrics)});
  };
  const auto run_with = [&](Backend & backend, std::string_view stages, bool type_rule) {
    StageConfig st = cfg.stages;
    set_enabled_stages(st, stages);
    st.enable_type_rule = type_rule;
    return predictions_of(run_clips(manifest.clips, backend, st, cfg.concurrency));
  };

  add_row("stage1-only", run_with(*backend_a, "1", false));
  add_row("+stage3", run_with(*backend_a, "13", false));
  add_row("+type-rule", run_with(*backend_a, "13", true));
  std::vector<Prediction> current = run_with(*backend_a, "123", true);
  add_row("+stage2", current);

  if (cfg.profile_b) {
    auto backend_b = build_backend(*cfg.profile_b, truths_by_clip, cfg.audit_dir);
    current = blend_runs(current, run_with(*backend_b, "123", true), cfg.ensemble);
    add_row("+ensemble", current);
  }
  if (manifest.detections) {
    const DetectionSet detections = read_detections(*manifest.detections);
    std::vector<Prediction> snapped;
    for (const SnapResult & r : snap_all(current, detections, effective_snap_config(cfg, detections))) {
      snapped.push_back(r.prediction);
    }
    add_row("+snap", snapped);
  }
  return rows;
}

std::string format_ablation(const std::vector<AblationRow> & rows)
{
  std::string out = fmt::format(
    "{:<14} {:>8} {:>8} {:>8} {:>8} {:>9}\n", "configuration", "ACC^S", "T", "S", "C", "delta");
  double previous = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const ScoreReport & r = rows[i].report;
    const std::string delta = i == 0 ? std::string("-") : fmt::format("{:+.4f}", r.acc_s - previous);
    out += fmt::format(
      "{:<14} {:>8.4f} {:>8.4f} {:>8.4f} {:>8.4f} {:>9}\n", rows[i].name, r.acc_s, r.temporal,
      r.spatial, r.classification, delta);
    previous = r.acc_s;
  }
  return out;
}

Json to_json(const std::vector<AblationRow> & rows)
{
  Json out = Json::array();
  double previous = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Json row = to_json(rows[i].report, false);
    row["name"] = rows[i].name;
    row["delta_acc_s"] = i == 0 ? Json(nullptr) : Json(rows[i].report.acc_s - previous);
    previous = rows[i].report.acc_s;
    out.push_back(row);
  }
  return out;
}

}  // namespace accvlm
