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

#ifndef ACCVLM_BACKEND_HPP_
#define ACCVLM_BACKEND_HPP_

#include "accvlm/domain.hpp"
#include "accvlm/frame_plan.hpp"
#include "accvlm/io.hpp"

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace accvlm
{

// =============================================================================
// Requests
// =============================================================================

struct EncodedImage
{
  std::string media_type = "image/png";
  /// Base64 payload. Empty when the clip has no pixel source (oracle runs).
  std::string base64;
  double timestamp_s = 0.0;
};

/// Bookkeeping that travels with a request but is never sent on the wire.
struct RequestContext
{
  std::string clip_id;
  Stage stage = Stage::kStage1;
  int pass_index = 0;
  int attempt = 0;
};

/// Greedy decoding only: requests are always sent with temperature 0.
struct InferenceRequest
{
  static constexpr double kTemperature = 0.0;

  std::string prompt_text;
  std::vector<EncodedImage> frames;
  int max_tokens = 256;
  RequestContext context;
};

// =============================================================================
// Profiles
// =============================================================================

/// Noise model of the simulated backend. Stage-1 coordinates are snapped to a
/// grid of `grid_quantum` before jitter; Stage-3 coordinates are only jittered.
struct OracleNoise
{
  double time_sigma_s = 0.0;
  double refine_time_sigma_s = 0.0;
  double space_sigma = 0.0;
  double type_flip_prob = 0.0;
  double grid_quantum = 0.0;
  std::uint64_t seed = 0;
};

struct BackendProfile
{
  static constexpr const char * kOracleEndpoint = "oracle";

  std::string name = "A";
  /// Base URL of an OpenAI-compatible server (e.g. http://host:8000/v1) or "oracle".
  std::string endpoint = kOracleEndpoint;
  std::string model_id;
  double timeout_s = 600.0;
  int retries = 3;
  double backoff_initial_s = 1.0;
  /// Environment variable holding the bearer token.
  std::string auth_env = "ACCVLM_API_TOKEN";
  int max_tokens = 256;
  OracleNoise oracle_noise;

  bool is_oracle() const { return endpoint == kOracleEndpoint; }
  void validate() const;
};

// =============================================================================
// Errors
// =============================================================================

class BackendError : public std::runtime_error
{
public:
  BackendError(const std::string & what, std::string clip_id)
  : std::runtime_error(clip_id.empty() ? what : "clip '" + clip_id + "': " + what),
    clip_id_(std::move(clip_id))
  {
  }
  const std::string & clip_id() const { return clip_id_; }

private:
  std::string clip_id_;
};

class TimeoutError : public BackendError
{
public:
  using BackendError::BackendError;
};

class TransportError : public BackendError
{
public:
  using BackendError::BackendError;
};

class HttpStatusError : public BackendError
{
public:
  HttpStatusError(int status, const std::string & body, std::string clip_id)
  : BackendError("HTTP " + std::to_string(status) + ": " + body.substr(0, 200), std::move(clip_id)),
    status_(status)
  {
  }
  int status() const { return status_; }

private:
  int status_;
};

// =============================================================================
// Backends
// =============================================================================

class Backend
{
public:
  virtual ~Backend() = default;

  /// Returns the model's text completion for the request.
  virtual std::string infer(const InferenceRequest & request) = 0;
};

/// Deterministic synthetic completion for one clip and stage. Stage 1 emits
/// {time_s, x, y, type}, stage 2 {time_s}, stage 3 {x, y} on the [0, 1000] scale.
std::string oracle_respond(
  const GroundTruth & truth, const OracleNoise & noise, Stage stage, int pass_index = 0);

/// Answers from ground truth; never touches the network.
class OracleBackend : public Backend
{
public:
  OracleBackend(std::map<std::string, GroundTruth> truths, OracleNoise noise);

  std::string infer(const InferenceRequest & request) override;

private:
  std::map<std::string, GroundTruth> truths_;
  OracleNoise noise_;
};

/// OpenAI-compatible chat-completions client with image content parts.
/// Transport failures, timeouts, 429 and 5xx are retried up to
/// `profile.retries` times with exponential backoff.
class HttpBackend : public Backend
{
public:
  explicit HttpBackend(BackendProfile profile);

  std::string infer(const InferenceRequest & request) override;

  /// The JSON body sent for a request.
  Json request_body(const InferenceRequest & request) const;

private:
  std::string send_once(const std::string & body, const std::string & clip_id) const;

  BackendProfile profile_;
  std::string scheme_host_port_;
  std::string path_;
};

/// Mirrors every request summary and response (or error) into a directory.
class AuditingBackend : public Backend
{
public:
  AuditingBackend(std::shared_ptr<Backend> inner, std::filesystem::path directory);

  std::string infer(const InferenceRequest & request) override;

private:
  std::shared_ptr<Backend> inner_;
  std::filesystem::path directory_;
  std::atomic<std::uint64_t> sequence_{0};
};

/// Counts calls; used by the harness to report how many inferences ran.
class CountingBackend : public Backend
{
public:
  explicit CountingBackend(std::shared_ptr<Backend> inner) : inner_(std::move(inner)) {}

  std::string infer(const InferenceRequest & request) override
  {
    ++calls_;
    return inner_->infer(request);
  }
  std::uint64_t calls() const { return calls_.load(); }

private:
  std::shared_ptr<Backend> inner_;
  std::atomic<std::uint64_t> calls_{0};
};

/// Oracle profiles need the ground truth of every clip they will be asked about.
std::shared_ptr<Backend> make_backend(
  const BackendProfile & profile, const std::map<std::string, GroundTruth> & truths = {});

}  // namespace accvlm

#endif  // ACCVLM_BACKEND_HPP_
