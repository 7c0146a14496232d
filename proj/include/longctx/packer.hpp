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

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace longctx {

enum class SampleCategory { TextLong, ImageShortInstruction, ImageInterleave, Video };

inline constexpr std::array<SampleCategory, 4> kAllCategories = {
    SampleCategory::TextLong,
    SampleCategory::ImageShortInstruction,
    SampleCategory::ImageInterleave,
    SampleCategory::Video,
};

std::string category_name(SampleCategory category);
SampleCategory category_from_name(const std::string& name);

struct Turn {
  std::string role;  // system | user | assistant
  std::string content;
  int attachments = 0;  // media placeholder count

  bool operator==(const Turn&) const = default;
};

// A dialogue sample with a precomputed token length. Token counting is the
// caller's concern; no tokenizer is bundled.
struct Sample {
  std::string id;
  SampleCategory category = SampleCategory::TextLong;
  std::int64_t token_len = 0;
  std::vector<Turn> turns;

  bool operator==(const Sample&) const = default;
};

// Throws when turns are empty, token_len < 1, a role is unknown, or the
// user/assistant alternation (after an optional leading system turn) breaks.
void validate_sample(const Sample& sample);

enum class LengthClass { Short, Long };

// Long iff token_len strictly exceeds the threshold.
LengthClass classify_length(const Sample& sample, std::int64_t threshold);

struct RecipeConfig {
  std::map<SampleCategory, double> category_ratios = {
      {SampleCategory::TextLong, 0.20},
      {SampleCategory::ImageShortInstruction, 0.25},
      {SampleCategory::ImageInterleave, 0.25},
      {SampleCategory::Video, 0.30},
  };
  std::int64_t long_threshold = 8192;
  double long_ratio = 0.60;
  std::int64_t target_length = 0;  // used by the packing stage; 0 = unset
  double ratio_tolerance = 0.02;
  bool long_share_by_count = false;  // default measures the long share in tokens
};

void validate_recipe(const RecipeConfig& recipe);

struct SelectionReport {
  std::map<SampleCategory, double> achieved_category_share;  // of selected tokens
  double achieved_long_share = 0.0;
  std::int64_t total_tokens = 0;
  std::vector<std::string> warnings;
};

struct Selection {
  std::vector<Sample> samples;
  SelectionReport report;
};

// Draws a ratio-targeted selection from the corpus: per-category token budgets
// of ratio * token_budget, each split long/short by long_ratio. Shuffling is
// seeded, so identical inputs give identical selections. Unreachable targets
// are reported as warnings with the achieved shares attached.
Selection sample_corpus(const RecipeConfig& recipe,
                        const std::vector<Sample>& corpus,
                        std::int64_t token_budget,
                        std::uint64_t seed);

struct PackEntry {
  std::vector<std::string> sample_ids;  // concatenation order
  std::int64_t total_len = 0;

  bool operator==(const PackEntry&) const = default;
};

struct PackManifest {
  std::int64_t target_length = 0;
  std::vector<PackEntry> packs;
  std::vector<std::string> leftovers;  // samples longer than the target
  std::vector<std::string> warnings;

  bool operator==(const PackManifest&) const = default;
};

// First-fit-decreasing concatenation: samples sorted by token_len descending
// (ties by id ascending) are placed into the first pack with room. Samples
// are never split; oversized ones land in leftovers with a warning.
PackManifest pack_samples(const std::vector<Sample>& samples, std::int64_t target_length);

// floor(duration * fps) frames, at least 1.
std::int64_t video_frame_budget(double duration_seconds, double fps);

// JSON (de)serialization for the CLI surfaces. Output is byte-stable.
std::string manifest_to_json(const PackManifest& manifest, int indent = 2);
PackManifest manifest_from_json(const std::string& text);
std::string sample_to_json_line(const Sample& sample);
Sample sample_from_json_line(const std::string& line);
std::string recipe_to_json(const RecipeConfig& recipe, int indent = 2);
RecipeConfig recipe_from_json(const std::string& text);

}  // namespace longctx
