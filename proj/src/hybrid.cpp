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

#include "longctx/hybrid.hpp"

#include <stdexcept>

#include "json.hpp"

namespace longctx {

namespace {

void validate_config(const HybridConfig& config) {
  if (config.group_size < 1)
    throw std::invalid_argument("hybrid config: group_size must be >= 1");
  if (config.hi_res_tokens < 1)
    throw std::invalid_argument("hybrid config: hi_res_tokens must be >= 1");
  if (config.compression_ratio < 1)
    throw std::invalid_argument("hybrid config: compression_ratio must be >= 1");
  if (config.hi_res_tokens % config.compression_ratio != 0)
    throw std::invalid_argument("hybrid config: hi_res_tokens must be divisible by compression_ratio");
}

}  // namespace

FramePlan plan_hybrid(std::int64_t frames, const HybridConfig& config) {
  validate_config(config);
  if (frames < 1) throw std::invalid_argument("plan_hybrid: frames must be >= 1");

  const std::int64_t low_res_tokens = config.hi_res_tokens / config.compression_ratio;
  FramePlan plan;
  plan.frames = frames;
  plan.groups = (frames + config.group_size - 1) / config.group_size;
  plan.per_frame_tokens.reserve(static_cast<std::size_t>(frames));
  for (std::int64_t f = 0; f < frames; ++f) {
    const bool group_leader = f % config.group_size == 0;
    const std::int64_t tokens = group_leader ? config.hi_res_tokens : low_res_tokens;
    plan.per_frame_tokens.push_back(tokens);
    plan.total_tokens += tokens;
  }
  plan.avg_tokens_per_frame = static_cast<double>(plan.total_tokens) / static_cast<double>(frames);
  return plan;
}

std::vector<TradeoffRow> tradeoff_table(std::int64_t token_budget,
                                        const std::vector<std::int64_t>& frame_counts) {
  if (token_budget <= 0) throw std::invalid_argument("tradeoff_table: budget must be positive");
  if (frame_counts.empty()) throw std::invalid_argument("tradeoff_table: no frame counts given");
  std::vector<TradeoffRow> rows;
  rows.reserve(frame_counts.size());
  for (std::int64_t frames : frame_counts) {
    if (frames <= 0) throw std::invalid_argument("tradeoff_table: frame counts must be positive");
    rows.push_back(TradeoffRow{frames, token_budget / frames});
  }
  return rows;
}

BudgetComparison compare_budgets(std::int64_t uniform_frames,
                                 std::int64_t uniform_tokens_per_frame,
                                 std::int64_t hybrid_frames,
                                 const HybridConfig& config) {
  if (uniform_frames < 1 || uniform_tokens_per_frame < 1)
    throw std::invalid_argument("compare_budgets: uniform layout must have positive frames and tokens");
  const FramePlan hybrid = plan_hybrid(hybrid_frames, config);

  BudgetComparison cmp;
  cmp.uniform_frames = uniform_frames;
  cmp.uniform_tokens_per_frame = uniform_tokens_per_frame;
  cmp.uniform_total = uniform_frames * uniform_tokens_per_frame;
  cmp.hybrid_frames = hybrid_frames;
  cmp.hybrid_total = hybrid.total_tokens;
  cmp.hybrid_avg_tokens_per_frame = hybrid.avg_tokens_per_frame;
  cmp.hi_res_tokens = config.hi_res_tokens;
  cmp.total_ratio = static_cast<double>(cmp.hybrid_total) / static_cast<double>(cmp.uniform_total);
  return cmp;
}

std::string frame_plan_to_json(const FramePlan& plan, int indent) {
  nlohmann::ordered_json doc;
  doc["frames"] = plan.frames;
  doc["groups"] = plan.groups;
  doc["total_tokens"] = plan.total_tokens;
  doc["avg_tokens_per_frame"] = plan.avg_tokens_per_frame;
  doc["per_frame_tokens"] = plan.per_frame_tokens;
  return doc.dump(indent);
}

}  // namespace longctx
