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

#include "longctx/attention.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace longctx {

namespace {

void embed_rows(Matrix& m, const std::vector<Position3D>& positions, const EmbeddingMode& mode) {
  if (std::holds_alternative<NoEmbedding>(mode)) return;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const Position3D& pos = positions[i];
    if (const auto* rope = std::get_if<RopeEmbedding>(&mode)) {
      m.set_row(i, apply_rotary(rope->plan.scaled_angles, pos.t, m.row(i)));
    } else {
      const auto& mrope = std::get<MRopeEmbedding>(mode);
      m.set_row(i, apply_mrope(mrope.plan.scaled_angles, mrope.layout, pos, m.row(i)));
    }
  }
}

}  // namespace

std::vector<Position3D> text_positions(std::int64_t count, std::int64_t start) {
  if (count < 0 || start < 0)
    throw std::invalid_argument("text_positions: count and start must be non-negative");
  std::vector<Position3D> out;
  out.reserve(static_cast<std::size_t>(count));
  for (std::int64_t p = start; p < start + count; ++p) out.push_back(Position3D{p, p, p});
  return out;
}

AttentionResult attention(const AttentionInput& input) {
  const std::size_t tokens = input.X.rows();
  const std::size_t model_dim = input.X.cols();
  const std::size_t head_dim = input.Wq.cols();
  if (tokens == 0) throw std::invalid_argument("attention: empty input");
  if (head_dim % 2 != 0) throw std::invalid_argument("attention: head_dim must be even");
  if (input.Wq.rows() != model_dim || input.Wk.rows() != model_dim || input.Wv.rows() != model_dim)
    throw std::invalid_argument("attention: projection row count must equal model_dim");
  if (input.Wk.cols() != head_dim || input.Wv.cols() != head_dim)
    throw std::invalid_argument("attention: projections must share head_dim");
  if (input.positions.size() != tokens)
    throw std::invalid_argument("attention: need one position per token, got " +
                                std::to_string(input.positions.size()) + " for " +
                                std::to_string(tokens) + " tokens");

  Matrix q = input.X * input.Wq;
  Matrix k = input.X * input.Wk;
  const Matrix v = input.X * input.Wv;
  embed_rows(q, input.positions, input.mode);
  embed_rows(k, input.positions, input.mode);

  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(head_dim));
  Matrix scores(tokens, tokens);
  for (std::size_t r = 0; r < tokens; ++r)
    for (std::size_t c = 0; c < tokens; ++c) {
      double dot = 0.0;
      for (std::size_t j = 0; j < head_dim; ++j) dot += q.at(r, j) * k.at(c, j);
      scores.at(r, c) = dot * inv_sqrt_dk;
    }

  AttentionResult result;
  result.weights = Matrix(tokens, tokens);
  for (std::size_t r = 0; r < tokens; ++r) {
    double row_max = scores.at(r, 0);
    for (std::size_t c = 1; c < tokens; ++c) row_max = std::max(row_max, scores.at(r, c));
    double denom = 0.0;
    for (std::size_t c = 0; c < tokens; ++c) {
      const double e = std::exp(scores.at(r, c) - row_max);
      result.weights.at(r, c) = e;
      denom += e;
    }
    for (std::size_t c = 0; c < tokens; ++c) result.weights.at(r, c) /= denom;
  }

  result.output = result.weights * v;
  return result;
}

}  // namespace longctx
