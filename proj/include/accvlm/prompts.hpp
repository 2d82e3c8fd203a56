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

#ifndef ACCVLM_PROMPTS_HPP_
#define ACCVLM_PROMPTS_HPP_

#include "accvlm/domain.hpp"

#include <filesystem>
#include <string>

namespace accvlm
{

/// Prompt templates. Placeholders: {{scene_layout}}, {{types}} (stage 1) and
/// {{t_base}} (stage 2). The built-in defaults are the files under prompts/.
struct PromptTemplates
{
  std::string stage1;
  std::string stage2;
  std::string stage3;
  std::string reask;

  static PromptTemplates defaults();
  /// Defaults overridden by any of stage1.txt, stage2.txt, stage3.txt, reask.txt in `dir`.
  static PromptTemplates load(const std::filesystem::path & dir);
};

std::string build_stage1_prompt(
  const SceneLayout & layout, const PromptTemplates & templates = PromptTemplates::defaults());

std::string build_stage2_prompt(
  double t_base, const PromptTemplates & templates = PromptTemplates::defaults());

std::string build_stage3_prompt(const PromptTemplates & templates = PromptTemplates::defaults());

/// Prompt re-sent once after an unparseable answer.
std::string build_reask_prompt(
  const std::string & original, const PromptTemplates & templates = PromptTemplates::defaults());

}  // namespace accvlm

#endif  // ACCVLM_PROMPTS_HPP_
