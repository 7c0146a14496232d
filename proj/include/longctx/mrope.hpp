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

#include "longctx/rope.hpp"

namespace longctx {

// Splits the rotary blocks of a head into temporal/height/width segments in
// a 2:3:3 ratio. With granularity x the head has 8x blocks, i.e. 16x real
// dimensions, so head_dim must be divisible by 16.
struct DimensionLayout {
  int granularity = 0;  // x

  int temporal_begin() const { return 0; }
  int temporal_end() const { return 2 * granularity; }
  int height_begin() const { return 2 * granularity; }
  int height_end() const { return 5 * granularity; }
  int width_begin() const { return 5 * granularity; }
  int width_end() const { return 8 * granularity; }
  int total_blocks() const { return 8 * granularity; }
  int head_dim() const { return 16 * granularity; }

  bool operator==(const DimensionLayout&) const = default;
};

DimensionLayout layout_for_head_dim(int head_dim);

// Which segment a block index falls in, as a label ("temporal", "height",
// "width"). Out-of-range indices throw.
std::string segment_name(const DimensionLayout& layout, int block);

struct Position3D {
  std::int64_t t = 0;
  std::int64_t h = 0;
  std::int64_t w = 0;

  bool operator==(const Position3D&) const = default;
};

// One contiguous run of same-modality tokens in an input sequence.
struct ModalitySpan {
  enum class Kind { Text, Image, Video };

  Kind kind = Kind::Text;
  std::int64_t length = 0;  // text tokens (Text only)
  std::int64_t frames = 0;  // Video only
  std::int64_t grid_h = 0;  // Image/Video
  std::int64_t grid_w = 0;  // Image/Video

  static ModalitySpan text(std::int64_t tokens);
  static ModalitySpan image(std::int64_t grid_h, std::int64_t grid_w);
  static ModalitySpan video(std::int64_t frames, std::int64_t grid_h, std::int64_t grid_w);

  std::int64_t token_count() const;
};

// Assigns (t, h, w) position triples span by span. Text tokens carry one id
// on all three components; image tokens keep t fixed while (h, w) scan the
// grid row-major; video tokens additionally step t per frame. Each span
// starts at 1 + the largest component emitted so far.
std::vector<Position3D> assign_positions(const std::vector<ModalitySpan>& spans);

// Rotates v with per-segment position indices: temporal blocks turn by
// pos.t * angles[d], height blocks by pos.h * angles[d], width blocks by
// pos.w * angles[d]. The frequency table is shared across segments.
std::vector<double> apply_mrope(const std::vector<double>& angles,
                                const DimensionLayout& layout,
                                const Position3D& pos,
                                const std::vector<double>& v);
std::vector<double> apply_mrope(const FrequencyBasis& basis,
                                const DimensionLayout& layout,
                                const Position3D& pos,
                                const std::vector<double>& v);

// Inner product of the two rotated vectors; depends only on the
// component-wise position deltas.
double mrope_score(const std::vector<double>& angles,
                   const DimensionLayout& layout,
                   const Position3D& pos_m,
                   const Position3D& pos_n,
                   const std::vector<double>& q,
                   const std::vector<double>& k);
double mrope_score(const FrequencyBasis& basis,
                   const DimensionLayout& layout,
                   const Position3D& pos_m,
                   const Position3D& pos_n,
                   const std::vector<double>& q,
                   const std::vector<double>& k);

}  // namespace longctx
