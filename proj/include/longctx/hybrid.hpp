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

#include <cstdint>
#include <string>
#include <vector>

namespace longctx {

// Hybrid-resolution grouping: frames are split into groups of group_size; the
// first frame of each group carries hi_res_tokens, the rest
// hi_res_tokens / compression_ratio. hi_res_tokens must be divisible by
// compression_ratio so per-frame counts stay integral.
struct HybridConfig {
  std::int64_t group_size = 1;         // L
  std::int64_t hi_res_tokens = 1;      // m
  std::int64_t compression_ratio = 1;  // c
};

struct FramePlan {
  std::int64_t frames = 0;
  std::int64_t groups = 0;  // N = ceil(frames / L)
  std::vector<std::int64_t> per_frame_tokens;
  std::int64_t total_tokens = 0;
  double avg_tokens_per_frame = 0.0;
};

// For frames divisible by L the total is exactly (1 + (L-1)/c) * N * m; a
// trailing partial group keeps the hi-res-first rule.
FramePlan plan_hybrid(std::int64_t frames, const HybridConfig& config);

struct TradeoffRow {
  std::int64_t frames = 0;
  std::int64_t tokens_per_frame = 0;  // floor(budget / frames)

  bool operator==(const TradeoffRow&) const = default;
};

std::vector<TradeoffRow> tradeoff_table(std::int64_t token_budget,
                                        const std::vector<std::int64_t>& frame_counts);

// Uniform layout vs hybrid layout at a glance: totals, averages, and the
// per-frame token count the hybrid's hi-res frames enjoy over the uniform one.
struct BudgetComparison {
  std::int64_t uniform_frames = 0;
  std::int64_t uniform_tokens_per_frame = 0;
  std::int64_t uniform_total = 0;
  std::int64_t hybrid_frames = 0;
  std::int64_t hybrid_total = 0;
  double hybrid_avg_tokens_per_frame = 0.0;
  std::int64_t hi_res_tokens = 0;
  double total_ratio = 0.0;  // hybrid_total / uniform_total
};

BudgetComparison compare_budgets(std::int64_t uniform_frames,
                                 std::int64_t uniform_tokens_per_frame,
                                 std::int64_t hybrid_frames,
                                 const HybridConfig& config);

std::string frame_plan_to_json(const FramePlan& plan, int indent = 2);

}  // namespace longctx
