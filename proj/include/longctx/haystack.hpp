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
#include <optional>
#include <vector>

#include "longctx/attention.hpp"

namespace longctx {

// Synthetic needle retrieval: every item contributes one unit-norm key, the
// needle's key is set to the query direction, and a trial succeeds when the
// rotated query scores highest against the needle. Items occupy image spans
// so all three position components grow with context; the query sits on the
// text position right after the last item. Chance level is 1/num_items.
//
// The needle depth is drawn uniformly per trial unless needle_index pins it.
// A pinned depth exposes a single relative distance, whose rotary phase makes
// individual curve points oscillate.
struct HaystackConfig {
  std::int64_t num_items = 1;
  std::int64_t tokens_per_item = 64;  // controls position spread, not key count
  int head_dim = 64;
  std::optional<std::int64_t> needle_index;  // unset = random depth per trial
  int trials = 1;
  std::uint64_t seed = 0;
  EmbeddingMode mode = NoEmbedding{};
};

struct HaystackCurve {
  struct Point {
    std::int64_t context_items = 0;
    double success_rate = 0.0;
  };
  std::vector<Point> points;
};

// Fraction of successful trials; deterministic given the seed. Each trial
// draws its randomness from (seed, trial_index) only.
double run_haystack(const HaystackConfig& config);

// Sweeps num_items over a strictly increasing list, keeping everything else
// in the config fixed.
HaystackCurve run_haystack_curve(const HaystackConfig& config,
                                 const std::vector<std::int64_t>& item_counts);

// Largest context_items whose success rate meets the threshold, if any.
// threshold must lie in (0, 1); the curve must be non-empty.
std::optional<std::int64_t> effective_length(const HaystackCurve& curve, double threshold);

}  // namespace longctx
