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

#include "longctx/mrope.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace longctx {

DimensionLayout layout_for_head_dim(int head_dim) {
  if (head_dim < 16 || head_dim % 16 != 0)
    throw std::invalid_argument("layout_for_head_dim: head_dim must be a positive multiple of 16, got " +
                                std::to_string(head_dim));
  return DimensionLayout{head_dim / 16};
}

std::string segment_name(const DimensionLayout& layout, int block) {
  if (block < 0 || block >= layout.total_blocks())
    throw std::out_of_range("segment_name: block index out of range");
  if (block < layout.temporal_end()) return "temporal";
  if (block < layout.height_end()) return "height";
  return "width";
}

ModalitySpan ModalitySpan::text(std::int64_t tokens) {
  if (tokens < 1) throw std::invalid_argument("ModalitySpan::text: token count must be >= 1");
  ModalitySpan span;
  span.kind = Kind::Text;
  span.length = tokens;
  return span;
}

ModalitySpan ModalitySpan::image(std::int64_t grid_h, std::int64_t grid_w) {
  if (grid_h < 1 || grid_w < 1)
    throw std::invalid_argument("ModalitySpan::image: grid sides must be >= 1");
  ModalitySpan span;
  span.kind = Kind::Image;
  span.grid_h = grid_h;
  span.grid_w = grid_w;
  return span;
}

ModalitySpan ModalitySpan::video(std::int64_t frames, std::int64_t grid_h, std::int64_t grid_w) {
  if (frames < 1 || grid_h < 1 || grid_w < 1)
    throw std::invalid_argument("ModalitySpan::video: frame count and grid sides must be >= 1");
  ModalitySpan span;
  span.kind = Kind::Video;
  span.frames = frames;
  span.grid_h = grid_h;
  span.grid_w = grid_w;
  return span;
}

std::int64_t ModalitySpan::token_count() const {
  switch (kind) {
    case Kind::Text: return length;
    case Kind::Image: return grid_h * grid_w;
    case Kind::Video: return frames * grid_h * grid_w;
  }
  throw std::logic_error("ModalitySpan::token_count: unknown kind");
}

std::vector<Position3D> assign_positions(const std::vector<ModalitySpan>& spans) {
  if (spans.empty()) throw std::invalid_argument("assign_positions: span list is empty");

  std::vector<Position3D> out;
  std::int64_t total = 0;
  for (const auto& span : spans) total += span.token_count();
  out.reserve(static_cast<std::size_t>(total));

  std::int64_t max_component = -1;  // next span base = 1 + global max
  for (const auto& span : spans) {
    const std::int64_t base = max_component + 1;
    switch (span.kind) {
      case ModalitySpan::Kind::Text:
        for (std::int64_t j = 0; j < span.length; ++j)
          out.push_back(Position3D{base + j, base + j, base + j});
        max_component = std::max(max_component, base + span.length - 1);
        break;
      case ModalitySpan::Kind::Image:
        for (std::int64_t r = 0; r < span.grid_h; ++r)
          for (std::int64_t c = 0; c < span.grid_w; ++c)
            out.push_back(Position3D{base, base + r, base + c});
        max_component = std::max({max_component, base + span.grid_h - 1, base + span.grid_w - 1});
        break;
      case ModalitySpan::Kind::Video:
        for (std::int64_t f = 0; f < span.frames; ++f)
          for (std::int64_t r = 0; r < span.grid_h; ++r)
            for (std::int64_t c = 0; c < span.grid_w; ++c)
              out.push_back(Position3D{base + f, base + r, base + c});
        max_component = std::max({max_component, base + span.frames - 1, base + span.grid_h - 1,
                                  base + span.grid_w - 1});
        break;
    }
  }
  return out;
}

std::vector<double> apply_mrope(const std::vector<double>& angles,
                                const DimensionLayout& layout,
                                const Position3D& pos,
                                const std::vector<double>& v) {
  if (static_cast<std::size_t>(layout.total_blocks()) != angles.size())
    throw std::invalid_argument("apply_mrope: layout expects " +
                                std::to_string(layout.total_blocks()) + " blocks but basis has " +
                                std::to_string(angles.size()));
  if (v.size() != 2 * angles.size())
    throw std::invalid_argument("apply_mrope: vector length does not match head_dim");
  if (pos.t < 0 || pos.h < 0 || pos.w < 0)
    throw std::invalid_argument("apply_mrope: position components must be non-negative");

  std::vector<double> out(v.size());
  for (int d = 0; d < layout.total_blocks(); ++d) {
    const std::int64_t index = d < layout.temporal_end() ? pos.t
                               : d < layout.height_end() ? pos.h
                                                         : pos.w;
    const double angle = static_cast<double>(index) * angles[static_cast<std::size_t>(d)];
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double a = v[2 * static_cast<std::size_t>(d)];
    const double b = v[2 * static_cast<std::size_t>(d) + 1];
    out[2 * static_cast<std::size_t>(d)] = a * c - b * s;
    out[2 * static_cast<std::size_t>(d) + 1] = a * s + b * c;
  }
  return out;
}

std::vector<double> apply_mrope(const FrequencyBasis& basis,
                                const DimensionLayout& layout,
                                const Position3D& pos,
                                const std::vector<double>& v) {
  return apply_mrope(basis.angles, layout, pos, v);
}

double mrope_score(const std::vector<double>& angles,
                   const DimensionLayout& layout,
                   const Position3D& pos_m,
                   const Position3D& pos_n,
                   const std::vector<double>& q,
                   const std::vector<double>& k) {
  const std::vector<double> qm = apply_mrope(angles, layout, pos_m, q);
  const std::vector<double> kn = apply_mrope(angles, layout, pos_n, k);
  double score = 0.0;
  for (std::size_t i = 0; i < qm.size(); ++i) score += qm[i] * kn[i];
  return score;
}

double mrope_score(const FrequencyBasis& basis,
                   const DimensionLayout& layout,
                   const Position3D& pos_m,
                   const Position3D& pos_n,
                   const std::vector<double>& q,
                   const std::vector<double>& k) {
  return mrope_score(basis.angles, layout, pos_m, pos_n, q, k);
}

}  // namespace longctx
