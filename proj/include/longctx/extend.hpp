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

#include "longctx/mrope.hpp"
#include "longctx/rope.hpp"

namespace longctx {

enum class ExtensionMethod { Extrapolation, PI, NTK, MRoPEpp };

std::string method_name(ExtensionMethod method);
ExtensionMethod method_from_name(const std::string& name);

// A per-dimension scaled angle table theta'_d for extending a model from
// original_length to target_length positions. scale = target / original and
// is always >= 1; no method ever increases an angle.
struct ExtensionPlan {
  ExtensionMethod method = ExtensionMethod::Extrapolation;
  std::int64_t original_length = 0;  // L_V
  std::int64_t target_length = 0;   // L'
  double scale = 1.0;               // s = L' / L_V
  double effective_base = 0.0;      // differs from the input base only under NTK
  std::vector<double> scaled_angles;

  bool operator==(const ExtensionPlan&) const = default;
};

// Per-dimension coverage ratio r_d = target_length / lambda_d. Values above 1
// mean the dimension completes at least one full rotation inside the target
// window; strictly decreasing in d for base > 1.
struct RatioProfile {
  std::int64_t target_length = 0;
  std::vector<double> ratios;
};

double scale_factor(std::int64_t target_length, std::int64_t original_length);

RatioProfile ratio_profile(const FrequencyBasis& basis, std::int64_t target_length);

// Keeps every angle untouched; positions beyond original_length extrapolate.
ExtensionPlan extend_extrapolation(const FrequencyBasis& basis,
                                   std::int64_t original_length,
                                   std::int64_t target_length);

// Position interpolation: theta'_d = theta_d / s uniformly.
ExtensionPlan extend_pi(const FrequencyBasis& basis,
                        std::int64_t original_length,
                        std::int64_t target_length);

// Fixed-scale NTK-aware base rescaling: base' = base * s^(D/(D-2)), with the
// angle table recomputed from base'. Leaves the lowest dimension nearly
// untouched and interpolates the highest by exactly 1/s.
ExtensionPlan extend_ntk(const FrequencyBasis& basis,
                         std::int64_t original_length,
                         std::int64_t target_length);

// Piecewise per-segment transform over a 2:3:3 layout: temporal blocks keep
// theta (extrapolation), width blocks take theta/s (interpolation), and
// height blocks ramp between the two with the clamped coverage-ratio weight
// returned by mropepp_ramp.
ExtensionPlan extend_mropepp(const FrequencyBasis& basis,
                             const DimensionLayout& layout,
                             std::int64_t original_length,
                             std::int64_t target_length);

// The height-segment ramp weight gamma(block) =
// clamp((r_block - r_{5x}) / (r_{2x} - r_{5x}), 0, 1), where r_d is the
// coverage ratio at block d. Equals 1 at block 2x and 0 at block 5x.
double mropepp_ramp(const FrequencyBasis& basis,
                    const DimensionLayout& layout,
                    std::int64_t target_length,
                    int block);

// A context-length keyed rotary-base recommendation.
struct BaseRecommendation {
  std::int64_t context_length = 0;
  double recommended_base = 0.0;
  std::string provenance;

  bool operator==(const BaseRecommendation&) const = default;
};

// Benchmark measurements behind a recommendation, kept as metadata.
struct MeasuredBaseRow {
  double base = 0.0;
  double videomme_long = 0.0;
  double videomme_avg = 0.0;
  double mme_sum = 0.0;
  double mmbench = 0.0;
  std::string note;

  bool operator==(const MeasuredBaseRow&) const = default;
};

struct BaseTable {
  std::vector<BaseRecommendation> entries;     // lookup targets, sorted by context_length
  std::vector<BaseRecommendation> references;  // recommendations not selected for lookup
  std::vector<MeasuredBaseRow> measured;       // 128K-context benchmark rows
};

// The built-in table: default-base rows at the native context lengths of the
// bundled profiles plus the selected 500,000 base for 128K, with the external
// blog recommendation and the measured benchmark rows attached as metadata.
const BaseTable& bundled_base_table();

// Returns the entry with the smallest context_length >= context (first such
// entry when several share a context_length), or the last entry when the
// query exceeds every context_length. The table must be non-empty and sorted.
BaseRecommendation recommend_base(std::int64_t context_length,
                                  const std::vector<BaseRecommendation>& table);

// Stable JSON rendering of the full table; byte-identical across runs.
std::string serialize_base_table(const BaseTable& table);

struct ScheduleStage {
  int index = 0;
  std::int64_t target_length = 0;
  double scale = 1.0;  // vs the previous stage; 1 for stage 0

  bool operator==(const ScheduleStage&) const = default;
};

// Expands a strictly increasing stage-length list, e.g.
// [8192, 32768, 65536, 131072] -> scales [1, 4, 2, 2].
std::vector<ScheduleStage> progressive_schedule(const std::vector<std::int64_t>& stage_lengths);

}  // namespace longctx
