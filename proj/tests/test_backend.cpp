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
#include "accvlm/prompts.hpp"
#include "accvlm/response_parser.hpp"

#include <doctest.h>
#include <httplib.h>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <thread>

using namespace accvlm;
namespace fs = std::filesystem;

namespace
{

const ClipMeta kClip{"c1", 30.0, 30.0, SceneLayout("4-way intersection")};

bool has(const std::string & haystack, const std::string & needle)
{
  return haystack.find(needle) != std::string::npos;
}

/// Local chat-completions server whose behaviour is scripted per call.
class ScriptedServer
{
public:
  using Handler = std::function<void(int call, const httplib::Request &, httplib::Response &)>;

  explicit ScriptedServer(Handler handler) : handler_(std::move(handler))
  {
    server_.Post("/v1/chat/completions", [this](const httplib::Request & req, httplib::Response & res) {
      last_body_ = req.body;
      last_auth_ = req.get_header_value("Authorization");
      handler_(calls_++, req, res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~ScriptedServer()
  {
    server_.stop();
    thread_.join();
  }

  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }
  int calls() const { return calls_.load(); }
  const std::string & last_body() const { return last_body_; }
  const std::string & last_auth() const { return last_auth_; }

  static void reply(httplib::Response & res, const std::string & content)
  {
    const Json body{{"choices", Json::array({Json{{"message", {{"role", "assistant"}, {"content", content}}}}})}};
    res.set_content(body.dump(), "application/json");
  }

private:
  Handler handler_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> calls_{0};
  std::string last_body_;
  std::string last_auth_;
};

InferenceRequest request_with_frame()
{
  InferenceRequest req;
  req.prompt_text = "hello";
  req.frames.push_back(EncodedImage{"image/png", "aGVsbG8=", 1.0});
  req.context.clip_id = "c1";
  return req;
}

BackendProfile http_profile(const std::string & endpoint)
{
  BackendProfile p;
  p.name = "test";
  p.endpoint = endpoint;
  p.model_id = "some-model";
  p.backoff_initial_s = 0.01;
  p.timeout_s = 5.0;
  return p;
}

}  // namespace

// -----------------------------------------------------------------------------
// Prompts
// -----------------------------------------------------------------------------

TEST_CASE("stage 1 prompt carries the scene hint, the types and a JSON contract")
{
  const std::string highway = build_stage1_prompt(SceneLayout("highway"));
  CHECK(has(highway, "highway"));
  for (CollisionType t : kAllCollisionTypes) {
    CHECK(has(highway, std::string(to_string(t))));
  }
  CHECK(has(highway, "JSON"));
  CHECK(has(highway, "\"time_s\""));
  CHECK(has(highway, "\"type\""));

  const std::string roundabout = build_stage1_prompt(SceneLayout("roundabout"));
  CHECK(has(roundabout, "roundabout"));
  CHECK_FALSE(has(roundabout, "highway"));
  // Same template, only the hint differs.
  std::string swapped = highway;
  swapped.replace(swapped.find("highway"), 7, "roundabout");
  CHECK(swapped == roundabout);
  CHECK_FALSE(has(highway, "{{"));
}

TEST_CASE("stage 2 prompt asks for a time only")
{
  const std::string p = build_stage2_prompt(12.5);
  CHECK(has(p, "12.50"));
  CHECK(has(p, "JSON"));
  CHECK(has(p, "\"time_s\""));
  CHECK_FALSE(has(p, "\"x\""));
  CHECK_FALSE(has(p, "\"y\""));
}

TEST_CASE("stage 3 prompt asks for one point on the 1000 scale")
{
  const std::string p = build_stage3_prompt();
  CHECK(has(p, "1000"));
  CHECK(has(p, "\"x\""));
  CHECK(has(p, "\"y\""));
  CHECK(has(p, "exactly one point"));
  CHECK_FALSE(has(p, "time_s"));
  CHECK_FALSE(has(p, "t=xx.xxs"));
}

TEST_CASE("prompt templates can be overridden from a directory")
{
  const fs::path dir = fs::temp_directory_path() / "accvlm_test_prompts";
  fs::create_directories(dir);
  {
    std::ofstream(dir / "stage3.txt") << "custom grounding prompt";
  }
  const PromptTemplates t = PromptTemplates::load(dir);
  CHECK(build_stage3_prompt(t) == "custom grounding prompt");
  CHECK(t.stage1 == PromptTemplates::defaults().stage1);
  fs::remove_all(dir);
  CHECK(has(build_reask_prompt("original"), "original"));
}

// -----------------------------------------------------------------------------
// Parsers
// -----------------------------------------------------------------------------

TEST_CASE("stage 1 responses")
{
  const std::string plain = R"({"time_s": 12.5, "x": 0.4, "y": 0.6, "type": "t-bone"})";
  const Prediction p = parse_stage1_response(plain, kClip);
  CHECK(p.time_s() == 12.5);
  CHECK(p.centroid() == Point(0.4, 0.6));
  CHECK(p.collision_type() == CollisionType::kTBone);
  CHECK(p.source() == Source::kStage1);

  const std::string fenced = "Sure! Here it is:\n```json\n" + plain + "\n```\nThe vehicles {collide} hard.";
  CHECK(parse_stage1_response(fenced, kClip) == p);

  const auto late = parse_stage1_response(R"({"time_s": 99.0, "x": 0.4, "y": 0.6, "type": "rear-end"})", kClip);
  CHECK(late.time_s() == 30.0);

  const auto strings = parse_stage1_response(R"({"time_s": "7.25", "x": "0.1", "y": 1.4, "type": "Head On"})", kClip);
  CHECK(strings.time_s() == 7.25);
  CHECK(strings.centroid() == Point(0.1, 1.0));
  CHECK(strings.collision_type() == CollisionType::kHeadOn);

  CHECK_THROWS_AS(parse_stage1_response("no json here", kClip), NoJsonFound);
  CHECK_THROWS_AS(parse_stage1_response(R"({"time_s": 1, "x": 0.1, "y": 0.1})", kClip), SchemaError);
  CHECK_THROWS_AS(
    parse_stage1_response(R"({"time_s": 1, "x": 0.1, "y": 0.1, "type": "pileup"})", kClip), SchemaError);
  CHECK_THROWS_AS(
    parse_stage1_response(R"({"time_s": "soon", "x": 0.1, "y": 0.1, "type": "t-bone"})", kClip), SchemaError);
}

TEST_CASE("JSON extraction skips braces that do not form an object")
{
  CHECK(extract_first_json_object(R"(noise {not json} then {"a": "}{"} tail)")["a"] == "}{");
  CHECK_THROWS_AS(extract_first_json_object("{{{{"), NoJsonFound);
  CHECK_THROWS_AS(extract_first_json_object("[1, 2]"), NoJsonFound);
}

TEST_CASE("stage 2 responses")
{
  CHECK(parse_stage2_response(R"({"time_s": 10.75})", kClip) == 10.75);
  CHECK(parse_stage2_response(R"({"time_s": -3})", kClip) == 0.0);
  CHECK_THROWS_AS(parse_stage2_response(R"({"t": 3})", kClip), SchemaError);
}

TEST_CASE("stage 3 points are normalized from the 1000 scale")
{
  CHECK(parse_stage3_point(R"({"x": 500, "y": 250})") == Point(0.5, 0.25));
  CHECK(parse_stage3_point(R"({"x": 0, "y": 1000})") == Point(0.0, 1.0));
  CHECK(parse_stage3_point(R"({"x": 1200, "y": -5})") == Point(1.0, 0.0));
  CHECK(parse_stage3_point(R"({"point_2d": [100, 900]})") == Point(0.1, 0.9));
  CHECK_THROWS_AS(parse_stage3_point(R"({"x": 100})"), SchemaError);
  CHECK_THROWS_AS(parse_stage3_point(R"({"x": null, "y": 3})"), SchemaError);
}

TEST_CASE("parsers survive random bytes")
{
  std::mt19937_64 rng(99);
  const std::string alphabet = "{}[]\":,.-+0123456789eE xytimesypeTBONE\\\n\t";
  for (int i = 0; i < 20000; ++i) {
    std::string text(static_cast<std::size_t>(rng() % 80), '\0');
    for (char & c : text) {
      c = (rng() % 2) ? alphabet[rng() % alphabet.size()] : static_cast<char>(rng() % 256);
    }
    try {
      const Prediction p = parse_stage1_response(text, kClip);
      CHECK(p.time_s() >= 0.0);
      CHECK(p.time_s() <= 30.0);
    } catch (const ResponseError &) {
    }
    try {
      const Point p = parse_stage3_point(text);
      CHECK(p.x() >= 0.0);
      CHECK(p.x() <= 1.0);
    } catch (const ResponseError &) {
    }
  }
}

// -----------------------------------------------------------------------------
// Oracle
// -----------------------------------------------------------------------------

TEST_CASE("noiseless oracle answers with the ground truth")
{
  const GroundTruth gt{"c1", 12.34, Box(0.2, 0.3, 0.4, 0.7), CollisionType::kSideswipe};
  const Json s1 = Json::parse(oracle_respond(gt, {}, Stage::kStage1));
  CHECK(s1["time_s"].get<double>() == 12.34);
  CHECK(s1["x"].get<double>() == gt.bbox.center().x());
  CHECK(s1["y"].get<double>() == gt.bbox.center().y());
  CHECK(s1["type"] == "sideswipe");

  const Prediction p = parse_stage1_response(oracle_respond(gt, {}, Stage::kStage1), kClip);
  CHECK(std::abs(p.time_s() - gt.time_s) <= 1e-9);
  CHECK(std::abs(p.centroid().x() - gt.bbox.center().x()) <= 1e-9);
  CHECK(std::abs(p.centroid().y() - gt.bbox.center().y()) <= 1e-9);

  CHECK(parse_stage2_response(oracle_respond(gt, {}, Stage::kStage2), kClip) == 12.34);
  const Point p3 = parse_stage3_point(oracle_respond(gt, {}, Stage::kStage3));
  CHECK(std::abs(p3.x() - gt.bbox.center().x()) <= 1e-12);
  CHECK(std::abs(p3.y() - gt.bbox.center().y()) <= 1e-12);
}

TEST_CASE("oracle round-trip holds for random ground truth")
{
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double x0 = u(rng) * 0.8;
    const double y0 = u(rng) * 0.8;
    const GroundTruth gt{
      "c" + std::to_string(i), u(rng) * 30.0, Box(x0, y0, x0 + 0.2 * u(rng), y0 + 0.2 * u(rng)),
      kAllCollisionTypes[i % 5]};
    const Prediction p = parse_stage1_response(oracle_respond(gt, {}, Stage::kStage1), kClip);
    CHECK(std::abs(p.time_s() - gt.time_s) <= 1e-9);
    CHECK(std::abs(p.centroid().x() - gt.bbox.center().x()) <= 1e-9);
    CHECK(std::abs(p.centroid().y() - gt.bbox.center().y()) <= 1e-9);
    CHECK(p.collision_type() == gt.collision_type);
  }
}

TEST_CASE("oracle quantizes stage 1 coordinates to its grid")
{
  const GroundTruth gt{"c1", 5.0, Box(0.41, 0.55, 0.45, 0.59), CollisionType::kRearEnd};
  REQUIRE(gt.bbox.center().x() == doctest::Approx(0.43));
  REQUIRE(gt.bbox.center().y() == doctest::Approx(0.57));
  OracleNoise noise;
  noise.grid_quantum = 0.1;
  const Json s1 = Json::parse(oracle_respond(gt, noise, Stage::kStage1));
  CHECK(s1["x"].get<double>() == 0.4);
  CHECK(s1["y"].get<double>() == 0.6);
  // Stage 3 is not quantized.
  const Point p3 = parse_stage3_point(oracle_respond(gt, noise, Stage::kStage3));
  CHECK(p3.x() == doctest::Approx(0.43).epsilon(1e-12));
}

TEST_CASE("oracle answers are deterministic per seed, stage and pass")
{
  const GroundTruth gt{"c1", 5.0, Box(0.41, 0.55, 0.45, 0.59), CollisionType::kRearEnd};
  OracleNoise noise{1.0, 0.3, 0.02, 0.3, 0.1, 17};
  CHECK(oracle_respond(gt, noise, Stage::kStage1) == oracle_respond(gt, noise, Stage::kStage1));
  CHECK(oracle_respond(gt, noise, Stage::kStage1, 0) != oracle_respond(gt, noise, Stage::kStage1, 1));
  OracleNoise other = noise;
  other.seed = 18;
  CHECK(oracle_respond(gt, noise, Stage::kStage1) != oracle_respond(gt, other, Stage::kStage1));
}

TEST_CASE("oracle noise has the configured spread")
{
  OracleNoise noise;
  noise.time_sigma_s = 1.0;
  noise.type_flip_prob = 0.25;
  double sum = 0.0;
  double sum_sq = 0.0;
  int flips = 0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    const GroundTruth gt{"clip" + std::to_string(i), 10.0, Box(0.4, 0.4, 0.6, 0.6), CollisionType::kHeadOn};
    const Json s1 = Json::parse(oracle_respond(gt, noise, Stage::kStage1));
    const double e = s1["time_s"].get<double>() - 10.0;
    sum += e;
    sum_sq += e * e;
    flips += s1["type"] != "head-on" ? 1 : 0;
  }
  const double mean = sum / n;
  CHECK(std::abs(mean) < 4.0 / std::sqrt(n));
  CHECK(std::sqrt(sum_sq / n - mean * mean) == doctest::Approx(1.0).epsilon(0.06));
  CHECK(static_cast<double>(flips) / n == doctest::Approx(0.25).epsilon(0.1));
}

TEST_CASE("oracle backend answers by clip id without any network")
{
  const GroundTruth gt{"c1", 5.0, Box(0.4, 0.4, 0.6, 0.6), CollisionType::kHeadOn};
  BackendProfile profile;
  auto backend = make_backend(profile, {{"c1", gt}});
  InferenceRequest req;
  req.context.clip_id = "c1";
  req.context.stage = Stage::kStage2;
  CHECK(parse_stage2_response(backend->infer(req), kClip) == 5.0);
  req.context.clip_id = "unknown";
  CHECK_THROWS_AS(backend->infer(req), BackendError);
}

// -----------------------------------------------------------------------------
// HTTP
// -----------------------------------------------------------------------------

TEST_CASE("http backend sends an OpenAI-style request with image parts")
{
  ScriptedServer server([](int, const httplib::Request &, httplib::Response & res) {
    ScriptedServer::reply(res, R"({"x": 1, "y": 2})");
  });
  setenv("ACCVLM_TEST_TOKEN", "secret", 1);
  BackendProfile profile = http_profile(server.endpoint());
  profile.auth_env = "ACCVLM_TEST_TOKEN";
  HttpBackend backend(profile);
  CHECK(backend.infer(request_with_frame()) == R"({"x": 1, "y": 2})");
  CHECK(server.last_auth() == "Bearer secret");

  const Json body = Json::parse(server.last_body());
  CHECK(body["model"] == "some-model");
  CHECK(body["temperature"] == 0.0);
  const Json & content = body["messages"][0]["content"];
  REQUIRE(content.size() == 2);
  CHECK(content[0]["type"] == "image_url");
  CHECK(content[0]["image_url"]["url"] == "data:image/png;base64,aGVsbG8=");
  CHECK(content[1]["text"] == "hello");
  unsetenv("ACCVLM_TEST_TOKEN");
}

TEST_CASE("http backend retries transient 503s")
{
  ScriptedServer server([](int call, const httplib::Request &, httplib::Response & res) {
    if (call < 2) {
      res.status = 503;
      res.set_content("busy", "text/plain");
      return;
    }
    ScriptedServer::reply(res, "ok");
  });
  BackendProfile profile = http_profile(server.endpoint());
  profile.retries = 3;
  HttpBackend backend(profile);
  CHECK(backend.infer(request_with_frame()) == "ok");
  CHECK(server.calls() == 3);
}

TEST_CASE("http backend does not retry client errors")
{
  ScriptedServer server([](int, const httplib::Request &, httplib::Response & res) {
    res.status = 400;
    res.set_content("bad request", "text/plain");
  });
  HttpBackend backend(http_profile(server.endpoint()));
  try {
    backend.infer(request_with_frame());
    FAIL("expected HttpStatusError");
  } catch (const HttpStatusError & e) {
    CHECK(e.status() == 400);
    CHECK(e.clip_id() == "c1");
  }
  CHECK(server.calls() == 1);
}

TEST_CASE("http backend gives up after repeated timeouts")
{
  ScriptedServer server([](int, const httplib::Request &, httplib::Response & res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(600));
    ScriptedServer::reply(res, "too late");
  });
  BackendProfile profile = http_profile(server.endpoint());
  profile.timeout_s = 0.2;
  profile.retries = 2;
  HttpBackend backend(profile);
  CHECK_THROWS_AS(backend.infer(request_with_frame()), TimeoutError);
  CHECK(server.calls() == 3);
}

TEST_CASE("http backend reports unreachable servers as transport errors")
{
  // Port 1 (tcpmux) is not served on test machines; connecting is refused.
  BackendProfile profile = http_profile("http://127.0.0.1:1/v1");
  profile.timeout_s = 1.0;
  profile.retries = 1;
  HttpBackend backend(profile);
  CHECK_THROWS_AS(backend.infer(request_with_frame()), TransportError);
}

TEST_CASE("http backend refuses frames without pixels")
{
  HttpBackend backend(http_profile("http://127.0.0.1:9/v1"));
  InferenceRequest req = request_with_frame();
  req.frames[0].base64.clear();
  CHECK_THROWS_AS(backend.infer(req), TransportError);
  CHECK_THROWS_AS(HttpBackend(http_profile("ftp://nowhere")), std::invalid_argument);
}

// -----------------------------------------------------------------------------
// Decorators
// -----------------------------------------------------------------------------

TEST_CASE("auditing backend mirrors requests and responses")
{
  const fs::path dir = fs::temp_directory_path() / "accvlm_test_audit";
  fs::remove_all(dir);
  const GroundTruth gt{"c1", 5.0, Box(0.4, 0.4, 0.6, 0.6), CollisionType::kHeadOn};
  auto inner = make_backend(BackendProfile{}, {{"c1", gt}});
  AuditingBackend audit(inner, dir);
  InferenceRequest req;
  req.prompt_text = "prompt";
  req.context.clip_id = "c1";
  req.context.stage = Stage::kStage2;
  const std::string answer = audit.infer(req);
  req.context.clip_id = "missing";
  CHECK_THROWS_AS(audit.infer(req), BackendError);

  std::vector<fs::path> files;
  for (const auto & e : fs::directory_iterator(dir)) {
    files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  REQUIRE(files.size() == 2);
  const Json first = Json::parse(std::ifstream(files[0]));
  const Json second = Json::parse(std::ifstream(files[1]));
  const Json & ok = first.contains("response") ? first : second;
  const Json & failed = first.contains("response") ? second : first;
  CHECK(ok["response"] == answer);
  CHECK(ok["prompt"] == "prompt");
  CHECK(failed.contains("error"));
  fs::remove_all(dir);
}

TEST_CASE("counting backend counts every call")
{
  const GroundTruth gt{"c1", 5.0, Box(0.4, 0.4, 0.6, 0.6), CollisionType::kHeadOn};
  CountingBackend counter(make_backend(BackendProfile{}, {{"c1", gt}}));
  InferenceRequest req;
  req.context.clip_id = "c1";
  for (int i = 0; i < 5; ++i) {
    counter.infer(req);
  }
  CHECK(counter.calls() == 5);
}
