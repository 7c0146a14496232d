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

#include "longctx/packer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace longctx {

std::string category_name(SampleCategory category) {
  switch (category) {
    case SampleCategory::TextLong: return "text_long";
    case SampleCategory::ImageShortInstruction: return "image_short_instruction";
    case SampleCategory::ImageInterleave: return "image_interleave";
    case SampleCategory::Video: return "video";
  }
  throw std::logic_error("category_name: unknown category");
}

SampleCategory category_from_name(const std::string& name) {
  for (SampleCategory category : kAllCategories)
    if (category_name(category) == name) return category;
  throw std::invalid_argument("category_from_name: unknown category '" + name + "'");
}

void validate_sample(const Sample& sample) {
  if (sample.id.empty()) throw std::invalid_argument("sample: id must be non-empty");
  if (sample.token_len < 1)
    throw std::invalid_argument("sample " + sample.id + ": token_len must be >= 1");
  if (sample.turns.empty())
    throw std::invalid_argument("sample " + sample.id + ": turns must be non-empty");

  std::size_t i = 0;
  if (sample.turns[0].role == "system") i = 1;
  const char* expected = "user";
  for (; i < sample.turns.size(); ++i) {
    const std::string& role = sample.turns[i].role;
    if (role != "system" && role != "user" && role != "assistant")
      throw std::invalid_argument("sample " + sample.id + ": unknown role '" + role + "'");
    if (role != expected)
      throw std::invalid_argument("sample " + sample.id + ": expected role '" + expected +
                                  "' at turn " + std::to_string(i) + ", got '" + role + "'");
    if (sample.turns[i].attachments < 0)
      throw std::invalid_argument("sample " + sample.id + ": negative attachment count");
    expected = std::string(expected) == "user" ? "assistant" : "user";
  }
}

LengthClass classify_length(const Sample& sample, std::int64_t threshold) {
  if (threshold <= 0) throw std::invalid_argument("classify_length: threshold must be positive");
  return sample.token_len > threshold ? LengthClass::Long : LengthClass::Short;
}

void validate_recipe(const RecipeConfig& recipe) {
  double ratio_sum = 0.0;
  for (SampleCategory category : kAllCategories) {
    const auto it = recipe.category_ratios.find(category);
    const double ratio = it == recipe.category_ratios.end() ? 0.0 : it->second;
    if (ratio < 0.0 || ratio > 1.0)
      throw std::invalid_argument("recipe: ratio for " + category_name(category) +
                                  " must lie in [0, 1]");
    ratio_sum += ratio;
  }
  if (std::fabs(ratio_sum - 1.0) > 1e-9)
    throw std::invalid_argument("recipe: category ratios must sum to 1");
  if (recipe.long_ratio < 0.0 || recipe.long_ratio > 1.0)
    throw std::invalid_argument("recipe: long_ratio must lie in [0, 1]");
  if (recipe.long_threshold <= 0)
    throw std::invalid_argument("recipe: long_threshold must be positive");
  if (recipe.ratio_tolerance < 0.0)
    throw std::invalid_argument("recipe: ratio_tolerance must be non-negative");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Greedy closest-approach fill: take samples in order while they improve the
// distance to the target measure. Returns the tokens actually taken.
std::int64_t fill_bucket(const std::vector<const Sample*>& bucket,
                         std::size_t& cursor,
                         double target_tokens,
                         std::int64_t budget,
                         std::vector<Sample>& selected) {
  std::int64_t taken = 0;
  while (cursor < bucket.size()) {
    const Sample* candidate = bucket[cursor];
    if (candidate->token_len > budget) {  // larger than the whole budget
      ++cursor;
      continue;
    }
    const double current_gap = std::fabs(static_cast<double>(taken) - target_tokens);
    const double next_gap =
        std::fabs(static_cast<double>(taken + candidate->token_len) - target_tokens);
    if (next_gap >= current_gap) break;
    selected.push_back(*candidate);
    taken += candidate->token_len;
    ++cursor;
  }
  return taken;
}

std::string share_warning(const std::string& what, double achieved, double target, double tol) {
  std::ostringstream oss;
  oss.precision(4);
  oss << std::fixed << what << " share " << achieved << " misses target " << target << " (tolerance "
      << tol << ")";
  return oss.str();
}

}  // namespace

Selection sample_corpus(const RecipeConfig& recipe,
                        const std::vector<Sample>& corpus,
                        std::int64_t token_budget,
                        std::uint64_t seed) {
  validate_recipe(recipe);
  if (corpus.empty()) throw std::invalid_argument("sample_corpus: corpus is empty");
  if (token_budget <= 0) throw std::invalid_argument("sample_corpus: token budget must be positive");

  // Deterministic order: sort ids, then shuffle each (category, length) bucket
  // with its own seeded engine.
  std::vector<const Sample*> ordered;
  ordered.reserve(corpus.size());
  for (const Sample& sample : corpus) ordered.push_back(&sample);
  std::sort(ordered.begin(), ordered.end(),
            [](const Sample* a, const Sample* b) { return a->id < b->id; });

  std::map<SampleCategory, std::vector<const Sample*>> long_bucket;
  std::map<SampleCategory, std::vector<const Sample*>> short_bucket;
  for (const Sample* sample : ordered) {
    if (classify_length(*sample, recipe.long_threshold) == LengthClass::Long)
      long_bucket[sample->category].push_back(sample);
    else
      short_bucket[sample->category].push_back(sample);
  }
  int bucket_index = 0;
  for (auto* buckets : {&long_bucket, &short_bucket})
    for (auto& [category, bucket] : *buckets) {
      std::mt19937_64 rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(
                              ++bucket_index * 16 + static_cast<int>(category)))));
      std::shuffle(bucket.begin(), bucket.end(), rng);
    }

  Selection result;
  for (SampleCategory category : kAllCategories) {
    const auto ratio_it = recipe.category_ratios.find(category);
    const double ratio = ratio_it == recipe.category_ratios.end() ? 0.0 : ratio_it->second;
    if (ratio <= 0.0) continue;
    const double category_target = ratio * static_cast<double>(token_budget);

    auto& longs = long_bucket[category];
    auto& shorts = short_bucket[category];
    std::size_t long_cursor = 0;
    std::size_t short_cursor = 0;

    if (recipe.long_share_by_count) {
      // Keep the running long/short *count* ratio near long_ratio while the
      // token total closes in on the category target.
      std::int64_t taken = 0;
      std::int64_t long_count = 0;
      std::int64_t total_count = 0;
      while (true) {
        const bool want_long =
            static_cast<double>(long_count) < recipe.long_ratio * static_cast<double>(total_count + 1);
        auto* primary = want_long ? &longs : &shorts;
        auto* primary_cursor = want_long ? &long_cursor : &short_cursor;
        auto* fallback = want_long ? &shorts : &longs;
        auto* fallback_cursor = want_long ? &short_cursor : &long_cursor;
        const Sample* candidate = nullptr;
        bool candidate_is_long = want_long;
        while (*primary_cursor < primary->size() &&
               (*primary)[*primary_cursor]->token_len > token_budget)
          ++*primary_cursor;
        if (*primary_cursor < primary->size()) {
          candidate = (*primary)[*primary_cursor];
        } else {
          while (*fallback_cursor < fallback->size() &&
                 (*fallback)[*fallback_cursor]->token_len > token_budget)
            ++*fallback_cursor;
          if (*fallback_cursor < fallback->size()) {
            candidate = (*fallback)[*fallback_cursor];
            candidate_is_long = !want_long;
          }
        }
        if (candidate == nullptr) break;
        const double current_gap = std::fabs(static_cast<double>(taken) - category_target);
        const double next_gap =
            std::fabs(static_cast<double>(taken + candidate->token_len) - category_target);
        if (next_gap >= current_gap) break;
        result.samples.push_back(*candidate);
        taken += candidate->token_len;
        ++total_count;
        if (candidate_is_long) ++long_count;
        if (candidate_is_long)
          ++long_cursor;
        else
          ++short_cursor;
      }
    } else {
      const double long_target = category_target * recipe.long_ratio;
      const std::int64_t long_taken =
          fill_bucket(longs, long_cursor, long_target, token_budget, result.samples);
      const double short_target = category_target - static_cast<double>(long_taken);
      const std::int64_t short_taken =
          fill_bucket(shorts, short_cursor, short_target, token_budget, result.samples);
      // Top up from the long bucket when shorts ran out below the category target.
      const double remainder = category_target - static_cast<double>(long_taken + short_taken);
      if (remainder > 0.0) fill_bucket(longs, long_cursor, remainder, token_budget, result.samples);
    }
  }

  // Achieved shares and feasibility warnings.
  std::map<SampleCategory, std::int64_t> category_tokens;
  std::int64_t long_tokens = 0;
  std::int64_t long_count = 0;
  for (const Sample& sample : result.samples) {
    category_tokens[sample.category] += sample.token_len;
    result.report.total_tokens += sample.token_len;
    if (classify_length(sample, recipe.long_threshold) == LengthClass::Long) {
      long_tokens += sample.token_len;
      ++long_count;
    }
  }
  if (result.samples.empty()) {
    result.report.warnings.push_back("selection is empty: no sample fits the token budget");
  }
  for (SampleCategory category : kAllCategories) {
    const auto ratio_it = recipe.category_ratios.find(category);
    const double target = ratio_it == recipe.category_ratios.end() ? 0.0 : ratio_it->second;
    const double achieved =
        result.report.total_tokens == 0
            ? 0.0
            : static_cast<double>(category_tokens[category]) /
                  static_cast<double>(result.report.total_tokens);
    result.report.achieved_category_share[category] = achieved;
    if (std::fabs(achieved - target) > recipe.ratio_tolerance)
      result.report.warnings.push_back(
          share_warning(category_name(category), achieved, target, recipe.ratio_tolerance));
  }
  result.report.achieved_long_share =
      recipe.long_share_by_count
          ? (result.samples.empty()
                 ? 0.0
                 : static_cast<double>(long_count) / static_cast<double>(result.samples.size()))
          : (result.report.total_tokens == 0
                 ? 0.0
                 : static_cast<double>(long_tokens) / static_cast<double>(result.report.total_tokens));
  if (std::fabs(result.report.achieved_long_share - recipe.long_ratio) > recipe.ratio_tolerance)
    result.report.warnings.push_back(share_warning("long-data", result.report.achieved_long_share,
                                                   recipe.long_ratio, recipe.ratio_tolerance));
  return result;
}

PackManifest pack_samples(const std::vector<Sample>& samples, std::int64_t target_length) {
  if (target_length <= 0)
    throw std::invalid_argument("pack_samples: target length must be positive");
  std::set<std::string> seen;
  for (const Sample& sample : samples) {
    if (sample.token_len < 1)
      throw std::invalid_argument("pack_samples: sample " + sample.id + " has token_len < 1");
    if (!seen.insert(sample.id).second)
      throw std::invalid_argument("pack_samples: duplicate sample id '" + sample.id + "'");
  }

  std::vector<const Sample*> order;
  order.reserve(samples.size());
  for (const Sample& sample : samples) order.push_back(&sample);
  std::sort(order.begin(), order.end(), [](const Sample* a, const Sample* b) {
    if (a->token_len != b->token_len) return a->token_len > b->token_len;
    return a->id < b->id;
  });

  PackManifest manifest;
  manifest.target_length = target_length;
  for (const Sample* sample : order) {
    if (sample->token_len > target_length) {
      manifest.leftovers.push_back(sample->id);
      manifest.warnings.push_back("sample " + sample->id + " (" +
                                  std::to_string(sample->token_len) + " tokens) exceeds target " +
                                  std::to_string(target_length) + "; left unpacked");
      continue;
    }
    bool placed = false;
    for (PackEntry& pack : manifest.packs) {
      if (pack.total_len + sample->token_len <= target_length) {
        pack.sample_ids.push_back(sample->id);
        pack.total_len += sample->token_len;
        placed = true;
        break;
      }
    }
    if (!placed) {
      manifest.packs.push_back(PackEntry{{sample->id}, sample->token_len});
    }
  }
  return manifest;
}

std::int64_t video_frame_budget(double duration_seconds, double fps) {
  if (!(duration_seconds > 0.0) || !(fps > 0.0))
    throw std::invalid_argument("video_frame_budget: duration and fps must be positive");
  const std::int64_t frames = static_cast<std::int64_t>(std::floor(duration_seconds * fps));
  return std::max<std::int64_t>(frames, 1);
}

namespace {

nlohmann::ordered_json turn_to_json(const Turn& turn) {
  return nlohmann::ordered_json{
      {"role", turn.role}, {"content", turn.content}, {"attachments", turn.attachments}};
}

Turn turn_from_json(const nlohmann::json& doc) {
  Turn turn;
  turn.role = doc.at("role").get<std::string>();
  turn.content = doc.at("content").get<std::string>();
  turn.attachments = doc.value("attachments", 0);
  return turn;
}

}  // namespace

std::string manifest_to_json(const PackManifest& manifest, int indent) {
  nlohmann::ordered_json doc;
  doc["target_length"] = manifest.target_length;
  doc["packs"] = nlohmann::ordered_json::array();
  for (const PackEntry& pack : manifest.packs)
    doc["packs"].push_back(
        nlohmann::ordered_json{{"samples", pack.sample_ids}, {"total_len", pack.total_len}});
  doc["leftovers"] = manifest.leftovers;
  doc["warnings"] = manifest.warnings;
  return doc.dump(indent);
}

PackManifest manifest_from_json(const std::string& text) {
  const nlohmann::json doc = nlohmann::json::parse(text);
  PackManifest manifest;
  manifest.target_length = doc.at("target_length").get<std::int64_t>();
  for (const auto& pack_doc : doc.at("packs")) {
    PackEntry pack;
    pack.sample_ids = pack_doc.at("samples").get<std::vector<std::string>>();
    pack.total_len = pack_doc.at("total_len").get<std::int64_t>();
    manifest.packs.push_back(std::move(pack));
  }
  manifest.leftovers = doc.value("leftovers", std::vector<std::string>{});
  manifest.warnings = doc.value("warnings", std::vector<std::string>{});
  return manifest;
}

std::string sample_to_json_line(const Sample& sample) {
  nlohmann::ordered_json doc;
  doc["id"] = sample.id;
  doc["category"] = category_name(sample.category);
  doc["token_len"] = sample.token_len;
  doc["turns"] = nlohmann::ordered_json::array();
  for (const Turn& turn : sample.turns) doc["turns"].push_back(turn_to_json(turn));
  return doc.dump();
}

Sample sample_from_json_line(const std::string& line) {
  const nlohmann::json doc = nlohmann::json::parse(line);
  Sample sample;
  sample.id = doc.at("id").get<std::string>();
  sample.category = category_from_name(doc.at("category").get<std::string>());
  sample.token_len = doc.at("token_len").get<std::int64_t>();
  for (const auto& turn_doc : doc.at("turns")) sample.turns.push_back(turn_from_json(turn_doc));
  validate_sample(sample);
  return sample;
}

std::string recipe_to_json(const RecipeConfig& recipe, int indent) {
  nlohmann::ordered_json ratios;
  for (SampleCategory category : kAllCategories) {
    const auto it = recipe.category_ratios.find(category);
    ratios[category_name(category)] = it == recipe.category_ratios.end() ? 0.0 : it->second;
  }
  nlohmann::ordered_json doc;
  doc["category_ratios"] = ratios;
  doc["long_threshold"] = recipe.long_threshold;
  doc["long_ratio"] = recipe.long_ratio;
  doc["target_length"] = recipe.target_length;
  doc["ratio_tolerance"] = recipe.ratio_tolerance;
  doc["long_share_by_count"] = recipe.long_share_by_count;
  return doc.dump(indent);
}

RecipeConfig recipe_from_json(const std::string& text) {
  const nlohmann::json doc = nlohmann::json::parse(text);
  RecipeConfig recipe;
  if (doc.contains("category_ratios")) {
    recipe.category_ratios.clear();
    for (const auto& [name, value] : doc.at("category_ratios").items())
      recipe.category_ratios[category_from_name(name)] = value.get<double>();
  }
  recipe.long_threshold = doc.value("long_threshold", recipe.long_threshold);
  recipe.long_ratio = doc.value("long_ratio", recipe.long_ratio);
  recipe.target_length = doc.value("target_length", recipe.target_length);
  recipe.ratio_tolerance = doc.value("ratio_tolerance", recipe.ratio_tolerance);
  recipe.long_share_by_count = doc.value("long_share_by_count", recipe.long_share_by_count);
  validate_recipe(recipe);
  return recipe;
}

}  // namespace longctx
