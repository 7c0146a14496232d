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

#include <variant>
#include <vector>

#include "longctx/extend.hpp"
#include "longctx/matrix.hpp"
#include "longctx/mrope.hpp"

namespace longctx {

struct NoEmbedding {};

// 1D rotary over the plan's angle table; the temporal component of each
// Position3D is the scalar position.
struct RopeEmbedding {
  ExtensionPlan plan;
};

// Three-segment rotary over the plan's angle table.
struct MRopeEmbedding {
  ExtensionPlan plan;
  DimensionLayout layout;
};

using EmbeddingMode = std::variant<NoEmbedding, RopeEmbedding, MRopeEmbedding>;

// (p, p, p) triples for scalar positions 0..count-1 starting at `start`.
std::vector<Position3D> text_positions(std::int64_t count, std::int64_t start = 0);

// Single-head attention input: C token embeddings of width model_dim,
// projections into an even head dimension, and one position per token.
struct AttentionInput {
  Matrix X;   // C x model_dim
  Matrix Wq;  // model_dim x head_dim
  Matrix Wk;  // model_dim x head_dim
  Matrix Wv;  // model_dim x head_dim
  std::vector<Position3D> positions;
  EmbeddingMode mode = NoEmbedding{};
};

struct AttentionResult {
  Matrix output;   // C x head_dim
  Matrix weights;  // C x C, rows sum to 1
};

// softmax(Q K^T / sqrt(head_dim)) V with the embedding mode applied to the
// rows of Q and K before the score product.
AttentionResult attention(const AttentionInput& input);

}  // namespace longctx
