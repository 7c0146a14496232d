// Copyright 2025 The longctx Authors
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

#pragma once

#include <string>
#include <vector>

#include "longctx/packer.hpp"

namespace longctx {

inline constexpr const char* kImStart = "<|im_start|>";
inline constexpr const char* kImEnd = "<|im_end|>";
inline constexpr const char* kVisionStart = "<|vision_start|>";
inline constexpr const char* kPlaceholder = "<|placeholder|>";
inline constexpr const char* kVisionEnd = "<|vision_end|>";

// Renders turns as <|im_start|>ROLE\n[markers]CONTENT<|im_end|>\n, one media
// marker triple per attachment ahead of the content. Content containing any
// reserved marker is rejected so the rendering stays reversible.
std::string serialize_turns(const std::vector<Turn>& turns);

// Concatenates the turns of the pack's samples in pack order. Unknown ids
// throw a missing-sample error.
std::string serialize_chatml(const PackEntry& pack, const std::vector<Sample>& samples);

// Inverse of serialize_turns: recovers roles, turn boundaries, attachment
// counts, and contents. Malformed input throws.
std::vector<Turn> parse_chatml(const std::string& text);

// Strips reserved markers from free text so it can be serialized.
std::string sanitize_content(const std::string& text);

}  // namespace longctx
