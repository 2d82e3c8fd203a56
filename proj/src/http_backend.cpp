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

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <regex>
#include <thread>

namespace accvlm
{
namespace
{

using Clock = std::chrono::steady_clock;

std::chrono::microseconds to_duration(double seconds)
{
  return std::chrono::microseconds(static_cast<long long>(std::llround(seconds * 1e6)));
}

bool retryable_status(int status) { return status == 429 || status >= 500; }

}  // namespace

void BackendProfile::validate() const
{
  if (retries < 0) {
    throw std::invalid_argument("profile '" + name + "': retries must be >= 0");
  }
  if (!(timeout_s > 0.0)) {
    throw std::invalid_argument("profile '" + name + "': timeout_s must be > 0");
  }
  if (!(backoff_initial_s >= 0.0)) {
    throw std::invalid_argument("profile '" + name + "': backoff_initial_s must be >= 0");
  }
}

HttpBackend::HttpBackend(BackendProfile profile) : profile_(std::move(profile))
{
  profile_.validate();
  static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(profile_.endpoint, m, url)) {
    throw std::invalid_argument("profile '" + profile_.name + "': bad endpoint '" + profile_.endpoint + "'");
  }
  scheme_host_port_ = m[1].str();
  std::string prefix = m[2].matched ? m[2].str() : "";
  while (!prefix.empty() && prefix.back() == '/') {
    prefix.pop_back();
  }
  path_ = prefix + "/chat/completions";
}

Json HttpBackend::request_body(const InferenceRequest & request) const
{
  Json content = Json::array();
  for (const EncodedImage & image : request.frames) {
    content.push_back(Json{
      {"type", "image_url"},
      {"image_url", {{"url", "data:" + image.media_type + ";base64," + image.base64}}}});
  }
  content.push_back(Json{{"type", "text"}, {"text", request.prompt_text}});
  return Json{
    {"model", profile_.model_id},
    {"temperature", InferenceRequest::kTemperature},
    {"max_tokens", request.max_tokens},
    {"messages", Json::array({Json{{"role", "user"}, {"content", content}}})}};
}

std::string HttpBackend::send_once(const std::string & body, const std::string & clip_id) const
{
  httplib::Client client(scheme_host_port_);
  const auto timeout = to_duration(profile_.timeout_s);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  httplib::Headers headers;
  if (const char * token = std::getenv(profile_.auth_env.c_str()); token && *token) {
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }

  const auto start = Clock::now();
  const httplib::Result res = client.Post(path_, headers, body, "application/json");
  if (!res) {
    const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
    const httplib::Error err = res.error();
    if (err == httplib::Error::ConnectionTimeout ||
        (err == httplib::Error::Read && elapsed >= 0.9 * profile_.timeout_s)) {
      throw TimeoutError("request timed out after " + std::to_string(elapsed) + " s", clip_id);
    }
    throw TransportError("transport failure: " + httplib::to_string(err), clip_id);
  }
  if (res->status != 200) {
    throw HttpStatusError(res->status, res->body, clip_id);
  }

  const Json payload = Json::parse(res->body, nullptr, false);
  if (payload.is_discarded() || !payload.contains("choices") || !payload["choices"].is_array() ||
      payload["choices"].empty()) {
    throw TransportError("malformed chat-completions payload", clip_id);
  }
  const Json & message = payload["choices"][0].value("message", Json::object());
  const Json content = message.value("content", Json());
  if (content.is_string()) {
    return content.get<std::string>();
  }
  if (content.is_array()) {
    std::string text;
    for (const Json & part : content) {
      if (part.value("type", "") == "text") {
        text += part.value("text", "");
      }
    }
    return text;
  }
  throw TransportError("chat-completions payload has no text content", clip_id);
}

std::string HttpBackend::infer(const InferenceRequest & request)
{
  for (const EncodedImage & image : request.frames) {
    if (image.base64.empty()) {
      throw TransportError("request carries a frame without pixel data", request.context.clip_id);
    }
  }
  const std::string body = request_body(request).dump();
  double backoff = profile_.backoff_initial_s;
  for (int attempt = 0;; ++attempt) {
    try {
      return send_once(body, request.context.clip_id);
    } catch (const HttpStatusError & e) {
      if (!retryable_status(e.status()) || attempt >= profile_.retries) {
        throw;
      }
      spdlog::warn("{} (attempt {}/{}), retrying", e.what(), attempt + 1, profile_.retries + 1);
    } catch (const BackendError & e) {
      if (attempt >= profile_.retries) {
        throw;
      }
      spdlog::warn("{} (attempt {}/{}), retrying", e.what(), attempt + 1, profile_.retries + 1);
    }
    std::this_thread::sleep_for(to_duration(backoff));
    backoff *= 2.0;
  }
}

}  // namespace accvlm
