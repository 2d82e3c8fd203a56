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

#include "accvlm/backend.hpp"
#include "accvlm/response_parser.hpp"

#include <cmath>
#include <random>

namespace accvlm
{
namespace
{

std::mt19937_64 stream_for(const GroundTruth & truth, const OracleNoise & noise, Stage stage, int pass)
{
  std::vector<std::uint32_t> key = {
    static_cast<std::uint32_t>(noise.seed), static_cast<std::uint32_t>(noise.seed >> 32),
    static_cast<std::uint32_t>(stage), static_cast<std::uint32_t>(pass)};
  for (char c : truth.clip_id) {
    key.push_back(static_cast<unsigned char>(c));
  }
  std::seed_seq seq(key.begin(), key.end());
  return std::mt19937_64(seq);
}

double quantize(double v, double quantum)
{
  if (quantum <= 0.0) {
    return v;
  }
  const double steps = 1.0 / quantum;
  return std::round(v * steps) / steps;
}

}  // namespace

std::string oracle_respond(
  const GroundTruth & truth, const OracleNoise & noise, Stage stage, int pass_index)
{
  std::mt19937_64 rng = stream_for(truth, noise, stage, pass_index);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  // Fixed draw order so every field is reproducible regardless of which sigmas are zero.
  const double z_time = normal(rng);
  const double z_x = normal(rng);
  const double z_y = normal(rng);
  const double u_flip = uniform(rng);
  const double u_pick = uniform(rng);

  const Point centre = truth.bbox.center();
  nlohmann::ordered_json out;
  switch (stage) {
    case Stage::kStage1: {
      CollisionType type = truth.collision_type;
      if (u_flip < noise.type_flip_prob) {
        std::vector<CollisionType> others;
        for (CollisionType t : kAllCollisionTypes) {
          if (t != truth.collision_type) {
            others.push_back(t);
          }
        }
        const auto pick = std::min(others.size() - 1, static_cast<std::size_t>(u_pick * others.size()));
        type = others[pick];
      }
      out["time_s"] = truth.time_s + noise.time_sigma_s * z_time;
      out["x"] = quantize(centre.x(), noise.grid_quantum) + noise.space_sigma * z_x;
      out["y"] = quantize(centre.y(), noise.grid_quantum) + noise.space_sigma * z_y;
      out["type"] = std::string(to_string(type));
      break;
    }
    case Stage::kStage2:
      out["time_s"] = truth.time_s + noise.refine_time_sigma_s * z_time;
      break;
    case Stage::kStage3:
      out["x"] = (centre.x() + noise.space_sigma * z_x) * kGroundingScale;
      out["y"] = (centre.y() + noise.space_sigma * z_y) * kGroundingScale;
      break;
  }
  return out.dump();
}

OracleBackend::OracleBackend(std::map<std::string, GroundTruth> truths, OracleNoise noise)
: truths_(std::move(truths)), noise_(noise)
{
}

std::string OracleBackend::infer(const InferenceRequest & request)
{
  const auto it = truths_.find(request.context.clip_id);
  if (it == truths_.end()) {
    throw TransportError("oracle has no ground truth for this clip", request.context.clip_id);
  }
  return oracle_respond(it->second, noise_, request.context.stage, request.context.pass_index);
}

}  // namespace accvlm
