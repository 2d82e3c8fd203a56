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

#ifndef ACCVLM_HARNESS_HPP_
#define ACCVLM_HARNESS_HPP_

#include "accvlm/backend.hpp"
#include "accvlm/domain.hpp"
#include "accvlm/io.hpp"
#include "accvlm/metrics.hpp"
#include "accvlm/pipeline.hpp"
#include "accvlm/postprocess.hpp"
#include "accvlm/synthetic.hpp"

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace accvlm
{

class ManifestError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

// =============================================================================
// Manifest
// =============================================================================

struct Manifest
{
  static constexpr int kSchemaVersion = 1;

  int schema_version = kSchemaVersion;
  std::vector<ClipMeta> clips;
  /// Relative paths are resolved against the manifest's directory.
  std::optional<std::filesystem::path> ground_truth;
  std::optional<std::filesystem::path> detections;

  /// Throws ManifestError on duplicate clip ids or an unknown schema version.
  void validate() const;
};

Json to_json(const Manifest & manifest);
Manifest manifest_from_json(const Json & doc, const LayoutRules & rules = {});

/// Loads and validates; optional paths come back absolute.
Manifest load_manifest(const std::filesystem::path & path, const LayoutRules & rules = {});
void save_manifest(const Manifest & manifest, const std::filesystem::path & path);

/// Writes manifest.json, ground_truth.jsonl and detections.jsonl into `directory`.
std::filesystem::path write_synthetic_dataset(
  const SyntheticDataset & dataset, const std::filesystem::path & directory);

// =============================================================================
// Run configuration
// =============================================================================

struct RunConfig
{
  StageConfig stages;
  EnsembleConfig ensemble;
  SnapConfig snap;
  bool enable_ensemble = true;
  bool enable_snap = true;
  MetricConfig metrics;

  BackendProfile profile_a;
  std::optional<BackendProfile> profile_b;

  /// Clip-level worker pool size.
  std::size_t concurrency = 4;
  /// Write every clip's frame plans under plans/.
  bool dump_plans = false;
  /// Mirror backend traffic here when set.
  std::optional<std::filesystem::path> audit_dir;
  LayoutRules layout_rules;

  void validate() const;
};

/// Reads the documented config schema (see README). Missing keys keep their
/// defaults. `ACCVLM_ENDPOINT_<NAME>` and `ACCVLM_MODEL_<NAME>` environment
/// variables override a profile's endpoint and model id.
RunConfig config_from_json(const Json & doc);
RunConfig load_config(const std::filesystem::path & path);
void apply_env_overrides(BackendProfile & profile);

// =============================================================================
// Drivers
// =============================================================================

/// Runs `fn(i)` for i in [0, n) on up to `concurrency` threads. The first
/// exception thrown by any call is rethrown after all workers stop.
void parallel_for(std::size_t n, std::size_t concurrency, const std::function<void(std::size_t)> & fn);

/// Pipeline predictions for every clip, in clip order.
std::vector<PipelineResult> run_clips(
  const std::vector<ClipMeta> & clips, Backend & backend, const StageConfig & cfg,
  std::size_t concurrency);

struct RunOptions
{
  /// Stop after this many new pipelines per profile (simulates an interruption).
  std::optional<std::size_t> max_new_clips;
};

struct RunSummary
{
  std::size_t clips = 0;
  std::size_t pipelines_run = 0;
  std::size_t pipelines_skipped = 0;
  std::uint64_t inferences = 0;
  std::size_t fallbacks = 0;
  std::size_t clips_with_errors = 0;
  bool complete = false;
  std::optional<ScoreReport> report;

  /// 0 clean, 2 finished with fallbacks or incomplete.
  int exit_code() const;
};

/// Run directory layout:
///   plans/<profile>/<clip_id>.json      (with dump_plans)
///   traces/A.jsonl, traces/B.jsonl      append-only pipeline traces
///   traces/snap.jsonl                   snap decisions
///   preds_A.jsonl, preds_B.jsonl, preds_ens.jsonl, preds_final.jsonl
///   report/score.json, report/score.txt, report/run.json
/// Clips that already have a trace record are not re-run.
RunSummary run(
  const Manifest & manifest, const RunConfig & cfg, const std::filesystem::path & run_dir,
  const RunOptions & options = {});

struct AblationRow
{
  std::string name;
  ScoreReport report;
};

/// Scores stage1-only, +stage3, +type-rule, +stage2, +ensemble and +snap, each
/// row adding one component. +ensemble needs profile B and +snap needs
/// detections; rows whose input is unavailable are omitted.
std::vector<AblationRow> ablate(const Manifest & manifest, const RunConfig & cfg);

std::string format_ablation(const std::vector<AblationRow> & rows);
Json to_json(const std::vector<AblationRow> & rows);

}  // namespace accvlm

#endif  // ACCVLM_HARNESS_HPP_
