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

#include <fmt/format.h>

#include <fstream>

namespace accvlm
{

AuditingBackend::AuditingBackend(std::shared_ptr<Backend> inner, std::filesystem::path directory)
: inner_(std::move(inner)), directory_(std::move(directory))
{
  std::filesystem::create_directories(directory_);
}

std::string AuditingBackend::infer(const InferenceRequest & request)
{
  const RequestContext & ctx = request.context;
  Json record{
    {"clip_id", ctx.clip_id},
    {"stage", std::string(to_string(ctx.stage))},
    {"pass", ctx.pass_index},
    {"attempt", ctx.attempt},
    {"prompt", request.prompt_text},
    {"max_tokens", request.max_tokens},
    {"temperature", InferenceRequest::kTemperature}};
  Json frames = Json::array();
  for (const EncodedImage & image : request.frames) {
    frames.push_back(Json{
      {"timestamp_s", image.timestamp_s},
      {"media_type", image.media_type},
      {"base64_bytes", image.base64.size()}});
  }
  record["frames"] = frames;

  const auto write = [&] {
    const std::uint64_t seq = sequence_++;
    const auto path = directory_ / fmt::format(
                                     "{}__{}__p{}__a{}__{:06d}.json", ctx.clip_id, to_string(ctx.stage),
                                     ctx.pass_index, ctx.attempt, seq);
    std::ofstream(path) << record.dump(2, ' ', false, Json::error_handler_t::replace) << '\n';
  };

  try {
    std::string response = inner_->infer(request);
    record["response"] = response;
    write();
    return response;
  } catch (const std::exception & e) {
    record["error"] = e.what();
    write();
    throw;
  }
}

std::shared_ptr<Backend> make_backend(
  const BackendProfile & profile, const std::map<std::string, GroundTruth> & truths)
{
  profile.validate();
  if (profile.is_oracle()) {
    return std::make_shared<OracleBackend>(truths, profile.oracle_noise);
  }
  return std::make_shared<HttpBackend>(profile);
}

}  // namespace accvlm
