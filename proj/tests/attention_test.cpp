#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "longctx/attention.hpp"

using namespace longctx;

namespace {

Matrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m.at(r, c) = uni(rng);
  return m;
}

// Literal three-step oracle: project, rotate (via dense trig matrices built
// here), score, softmax, weight. No shared code with the library beyond types.
Matrix attention_oracle(const AttentionInput& input) {
  const std::size_t tokens = input.X.rows();
  const std::size_t head_dim = input.Wq.cols();

  auto project = [&](const Matrix& w) {
    Matrix out(tokens, head_dim);
    for (std::size_t r = 0; r < tokens; ++r)
      for (std::size_t c = 0; c < head_dim; ++c) {
        double acc = 0.0;
        for (std::size_t j = 0; j < input.X.cols(); ++j) acc += input.X.at(r, j) * w.at(j, c);
        out.at(r, c) = acc;
      }
    return out;
  };

  auto rotate_row = [&](std::vector<double> row, const Position3D& pos) {
    std::vector<double> angles;
    std::vector<std::int64_t> index_per_block;
    if (const auto* rope = std::get_if<RopeEmbedding>(&input.mode)) {
      angles = rope->plan.scaled_angles;
      index_per_block.assign(angles.size(), pos.t);
    } else if (const auto* mrope = std::get_if<MRopeEmbedding>(&input.mode)) {
      angles = mrope->plan.scaled_angles;
      for (int d = 0; d < mrope->layout.total_blocks(); ++d)
        index_per_block.push_back(d < mrope->layout.temporal_end()  ? pos.t
                                  : d < mrope->layout.height_end() ? pos.h
                                                                   : pos.w);
    } else {
      return row;
    }
    std::vector<double> out(row.size());
    for (std::size_t d = 0; d < angles.size(); ++d) {
      const double angle = static_cast<double>(index_per_block[d]) * angles[d];
      out[2 * d] = std::cos(angle) * row[2 * d] - std::sin(angle) * row[2 * d + 1];
      out[2 * d + 1] = std::sin(angle) * row[2 * d] + std::cos(angle) * row[2 * d + 1];
    }
    return out;
  };

  Matrix q = project(input.Wq);
  Matrix k = project(input.Wk);
  const Matrix v = project(input.Wv);
  for (std::size_t r = 0; r < tokens; ++r) {
    q.set_row(r, rotate_row(q.row(r), input.positions[r]));
    k.set_row(r, rotate_row(k.row(r), input.positions[r]));
  }

  Matrix weights(tokens, tokens);
  for (std::size_t r = 0; r < tokens; ++r) {
    std::vector<double> scores(tokens);
    double row_max = -1e300;
    for (std::size_t c = 0; c < tokens; ++c) {
      double dot = 0.0;
      for (std::size_t j = 0; j < head_dim; ++j) dot += q.at(r, j) * k.at(c, j);
      scores[c] = dot / std::sqrt(static_cast<double>(head_dim));
      row_max = std::max(row_max, scores[c]);
    }
    double denom = 0.0;
    for (std::size_t c = 0; c < tokens; ++c) denom += std::exp(scores[c] - row_max);
    for (std::size_t c = 0; c < tokens; ++c) weights.at(r, c) = std::exp(scores[c] - row_max) / denom;
  }

  Matrix out(tokens, head_dim);
  for (std::size_t r = 0; r < tokens; ++r)
    for (std::size_t c = 0; c < head_dim; ++c) {
      double acc = 0.0;
      for (std::size_t j = 0; j < tokens; ++j) acc += weights.at(r, j) * v.at(j, c);
      out.at(r, c) = acc;
    }
  return out;
}

EmbeddingMode random_mode(std::mt19937_64& rng, int head_dim) {
  const FrequencyBasis basis = make_basis(head_dim, 10000.0);
  switch (rng() % 3) {
    case 0: return NoEmbedding{};
    case 1: return RopeEmbedding{extend_pi(basis, 512, 1024)};
    default:
      return MRopeEmbedding{extend_mropepp(basis, layout_for_head_dim(head_dim), 512, 1024),
                            layout_for_head_dim(head_dim)};
  }
}

}  // namespace

TEST_CASE("a single token attends only to itself") {
  std::mt19937_64 rng(1);
  AttentionInput input;
  input.X = random_matrix(rng, 1, 6);
  input.Wq = random_matrix(rng, 6, 4);
  input.Wk = random_matrix(rng, 6, 4);
  input.Wv = random_matrix(rng, 6, 4);
  input.positions = text_positions(1);

  const AttentionResult result = attention(input);
  CHECK(result.weights.at(0, 0) == 1.0);

  // output row equals its own value row exactly
  for (std::size_t c = 0; c < 4; ++c) {
    double v = 0.0;
    for (std::size_t j = 0; j < 6; ++j) v += input.X.at(0, j) * input.Wv.at(j, c);
    CHECK(result.output.at(0, c) == v);
  }
}

TEST_CASE("identical keys split the weight evenly") {
  AttentionInput input;
  input.X = Matrix(2, 3);
  for (std::size_t c = 0; c < 3; ++c) {
    input.X.at(0, c) = 0.25 * static_cast<double>(c + 1);
    input.X.at(1, c) = 0.25 * static_cast<double>(c + 1);  // identical token rows
  }
  std::mt19937_64 rng(2);
  input.Wq = random_matrix(rng, 3, 4);
  input.Wk = random_matrix(rng, 3, 4);
  input.Wv = random_matrix(rng, 3, 4);
  input.positions = text_positions(2);

  const AttentionResult result = attention(input);
  for (std::size_t r = 0; r < 2; ++r) {
    CHECK(result.weights.at(r, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(result.weights.at(r, 1) == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("attention matches the three-step oracle") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t tokens = 1 + rng() % 6;
    AttentionInput input;
    input.X = random_matrix(rng, tokens, 8);
    input.Wq = random_matrix(rng, 8, 16);
    input.Wk = random_matrix(rng, 8, 16);
    input.Wv = random_matrix(rng, 8, 16);
    input.positions = text_positions(static_cast<std::int64_t>(tokens));
    input.mode = random_mode(rng, 16);

    const AttentionResult result = attention(input);
    const Matrix want = attention_oracle(input);
    CHECK(result.output.max_abs_diff(want) < 1e-9);

    for (std::size_t r = 0; r < tokens; ++r) {
      double row_sum = 0.0;
      for (std::size_t c = 0; c < tokens; ++c) row_sum += result.weights.at(r, c);
      CHECK(row_sum == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("explicit 4x8 case against the oracle") {
  std::mt19937_64 rng(4);
  AttentionInput input;
  input.X = random_matrix(rng, 4, 8);
  input.Wq = random_matrix(rng, 8, 8);
  input.Wk = random_matrix(rng, 8, 8);
  input.Wv = random_matrix(rng, 8, 8);
  input.positions = text_positions(4);

  CHECK(attention(input).output.max_abs_diff(attention_oracle(input)) < 1e-12);
}

TEST_CASE("shape mismatches are rejected") {
  std::mt19937_64 rng(5);
  AttentionInput input;
  input.X = random_matrix(rng, 3, 8);
  input.Wq = random_matrix(rng, 8, 16);
  input.Wk = random_matrix(rng, 8, 16);
  input.Wv = random_matrix(rng, 8, 16);
  input.positions = text_positions(2);  // one short
  CHECK_THROWS_AS(attention(input), std::invalid_argument);

  input.positions = text_positions(3);
  input.Wk = random_matrix(rng, 7, 16);
  CHECK_THROWS_AS(attention(input), std::invalid_argument);

  input.Wk = random_matrix(rng, 8, 14);
  CHECK_THROWS_AS(attention(input), std::invalid_argument);

  input.Wk = random_matrix(rng, 8, 16);
  input.Wq = random_matrix(rng, 8, 9);  // odd head_dim
  CHECK_THROWS_AS(attention(input), std::invalid_argument);
}

TEST_CASE("shifting every position leaves the output unchanged") {
  std::mt19937_64 rng(6);
  const FrequencyBasis basis = make_basis(16, 10000.0);
  const DimensionLayout layout = layout_for_head_dim(16);

  AttentionInput input;
  input.X = random_matrix(rng, 5, 8);
  input.Wq = random_matrix(rng, 8, 16);
  input.Wk = random_matrix(rng, 8, 16);
  input.Wv = random_matrix(rng, 8, 16);

  for (int variant = 0; variant < 2; ++variant) {
    input.mode = variant == 0
                     ? EmbeddingMode{RopeEmbedding{extend_extrapolation(basis, 64, 64)}}
                     : EmbeddingMode{MRopeEmbedding{extend_extrapolation(basis, 64, 64), layout}};
    input.positions = text_positions(5);
    const Matrix base_output = attention(input).output;

    for (std::int64_t shift : {1, 17, 4096}) {
      input.positions = text_positions(5, shift);
      CHECK(attention(input).output.max_abs_diff(base_output) < 1e-9);
    }
  }
}
