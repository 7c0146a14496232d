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

#include "longctx/haystack.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <utility>

namespace longctx {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Largest factor pair g x (n/g) with g <= sqrt(n), so items stay grid-shaped.
std::pair<std::int64_t, std::int64_t> item_grid(std::int64_t tokens) {
  for (std::int64_t g = static_cast<std::int64_t>(std::sqrt(static_cast<double>(tokens))); g > 1; --g)
    if (tokens % g == 0) return {g, tokens / g};
  return {1, tokens};
}

std::vector<double> random_unit_vector(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(dim));
  double norm_sq = 0.0;
  do {
    norm_sq = 0.0;
    for (double& x : v) {
      x = gauss(rng);
      norm_sq += x * x;
    }
  } while (norm_sq < 1e-24);
  const double inv_norm = 1.0 / std::sqrt(norm_sq);
  for (double& x : v) x *= inv_norm;
  return v;
}

std::vector<double> embed_vector(const EmbeddingMode& mode,
                                 const Position3D& pos,
                                 const std::vector<double>& v) {
  if (std::holds_alternative<NoEmbedding>(mode)) return v;
  if (const auto* rope = std::get_if<RopeEmbedding>(&mode))
    return apply_rotary(rope->plan.scaled_angles, pos.t, v);
  const auto& mrope = std::get<MRopeEmbedding>(mode);
  return apply_mrope(mrope.plan.scaled_angles, mrope.layout, pos, v);
}

}  // namespace

double run_haystack(const HaystackConfig& config) {
  if (config.num_items < 1) throw std::invalid_argument("run_haystack: num_items must be >= 1");
  if (config.tokens_per_item < 1)
    throw std::invalid_argument("run_haystack: tokens_per_item must be >= 1");
  if (config.head_dim < 2 || config.head_dim % 2 != 0)
    throw std::invalid_argument("run_haystack: head_dim must be a positive even integer");
  if (config.needle_index &&
      (*config.needle_index < 0 || *config.needle_index >= config.num_items))
    throw std::invalid_argument("run_haystack: needle_index out of range");
  if (config.trials < 1) throw std::invalid_argument("run_haystack: trials must be >= 1");

  // Positions are layout-determined, shared by every trial: one image span
  // per item plus the text token the query sits on.
  const auto [grid_h, grid_w] = item_grid(config.tokens_per_item);
  std::vector<ModalitySpan> spans(static_cast<std::size_t>(config.num_items),
                                  ModalitySpan::image(grid_h, grid_w));
  spans.push_back(ModalitySpan::text(1));
  const std::vector<Position3D> positions = assign_positions(spans);

  std::vector<Position3D> item_anchor(static_cast<std::size_t>(config.num_items));
  for (std::int64_t j = 0; j < config.num_items; ++j)
    item_anchor[static_cast<std::size_t>(j)] =
        positions[static_cast<std::size_t>(j * config.tokens_per_item)];
  const Position3D query_pos = positions.back();

  int successes = 0;
  for (int trial = 0; trial < config.trials; ++trial) {
    std::mt19937_64 rng(splitmix64(config.seed ^ splitmix64(static_cast<std::uint64_t>(trial) + 1)));
    const std::int64_t needle =
        config.needle_index
            ? *config.needle_index
            : static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(config.num_items));
    const std::vector<double> query = random_unit_vector(rng, config.head_dim);

    std::vector<std::vector<double>> keys;
    keys.reserve(static_cast<std::size_t>(config.num_items));
    for (std::int64_t j = 0; j < config.num_items; ++j)
      keys.push_back(random_unit_vector(rng, config.head_dim));
    keys[static_cast<std::size_t>(needle)] = query;

    const std::vector<double> q_rot = embed_vector(config.mode, query_pos, query);
    std::int64_t best_item = 0;
    double best_score = 0.0;
    for (std::int64_t j = 0; j < config.num_items; ++j) {
      const std::vector<double> k_rot =
          embed_vector(config.mode, item_anchor[static_cast<std::size_t>(j)],
                       keys[static_cast<std::size_t>(j)]);
      double score = 0.0;
      for (std::size_t i = 0; i < q_rot.size(); ++i) score += q_rot[i] * k_rot[i];
      if (j == 0 || score > best_score) {
        best_score = score;
        best_item = j;
      }
    }
    if (best_item == needle) ++successes;
  }
  return static_cast<double>(successes) / static_cast<double>(config.trials);
}

HaystackCurve run_haystack_curve(const HaystackConfig& config,
                                 const std::vector<std::int64_t>& item_counts) {
  if (item_counts.empty())
    throw std::invalid_argument("run_haystack_curve: item count list is empty");
  HaystackCurve curve;
  curve.points.reserve(item_counts.size());
  for (std::size_t i = 0; i < item_counts.size(); ++i) {
    if (i > 0 && item_counts[i] <= item_counts[i - 1])
      throw std::invalid_argument("run_haystack_curve: item counts must be strictly increasing");
    HaystackConfig point_config = config;
    point_config.num_items = item_counts[i];
    curve.points.push_back({item_counts[i], run_haystack(point_config)});
  }
  return curve;
}

std::optional<std::int64_t> effective_length(const HaystackCurve& curve, double threshold) {
  if (curve.points.empty()) throw std::invalid_argument("effective_length: curve is empty");
  if (!(threshold > 0.0 && threshold < 1.0))
    throw std::invalid_argument("effective_length: threshold must lie in (0, 1)");
  std::optional<std::int64_t> best;
  for (const auto& point : curve.points)
    if (point.success_rate >= threshold)
      best = best ? std::max(*best, point.context_items) : point.context_items;
  return best;
}

}  // namespace longctx
