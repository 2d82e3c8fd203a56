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

#include "accvlm/prompts.hpp"

#include "accvlm/io.hpp"
#include "accvlm/prompts_embedded.hpp"

#include <fmt/format.h>

namespace accvlm
{
namespace
{

std::string replace_all(std::string text, const std::string & key, const std::string & value)
{
  std::size_t pos = 0;
  while ((pos = text.find(key, pos)) != std::string::npos) {
    text.replace(pos, key.size(), value);
    pos += value.size();
  }
  return text;
}

std::string type_list()
{
  std::string out;
  for (CollisionType type : kAllCollisionTypes) {
    if (!out.empty()) {
      out += ", ";
    }
    out += "\"" + std::string(to_string(type)) + "\"";
  }
  return out;
}

}  // namespace

PromptTemplates PromptTemplates::defaults()
{
  return PromptTemplates{
    embedded::k_stage1_prompt, embedded::k_stage2_prompt, embedded::k_stage3_prompt,
    embedded::k_reask_prompt};
}

PromptTemplates PromptTemplates::load(const std::filesystem::path & dir)
{
  PromptTemplates out = defaults();
  const auto override_from = [&](const char * name, std::string & slot) {
    const auto path = dir / name;
    if (std::filesystem::exists(path)) {
      slot = read_text_file(path);
    }
  };
  override_from("stage1.txt", out.stage1);
  override_from("stage2.txt", out.stage2);
  override_from("stage3.txt", out.stage3);
  override_from("reask.txt", out.reask);
  return out;
}

std::string build_stage1_prompt(const SceneLayout & layout, const PromptTemplates & templates)
{
  std::string text = replace_all(templates.stage1, "{{scene_layout}}", layout.tag());
  return replace_all(std::move(text), "{{types}}", type_list());
}

std::string build_stage2_prompt(double t_base, const PromptTemplates & templates)
{
  return replace_all(templates.stage2, "{{t_base}}", fmt::format("{:.2f}", t_base));
}

std::string build_stage3_prompt(const PromptTemplates & templates) { return templates.stage3; }

std::string build_reask_prompt(const std::string & original, const PromptTemplates & templates)
{
  return original + "\n" + templates.reask;
}

}  // namespace accvlm
