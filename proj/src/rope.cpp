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

#include "longctx/rope.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace longctx {

FrequencyBasis make_basis(int head_dim, double base) {
  if (head_dim < 2 || head_dim % 2 != 0)
    throw std::invalid_argument("make_basis: head_dim must be a positive even integer, got " +
                                std::to_string(head_dim));
  if (!(base > 0.0)) throw std::invalid_argument("make_basis: base must be positive");

  FrequencyBasis basis;
  basis.head_dim = head_dim;
  basis.base = base;
  basis.angles.resize(static_cast<std::size_t>(head_dim) / 2);
  const double log_base = std::log(base);
  for (std::size_t d = 0; d < basis.angles.size(); ++d) {
    // exp(-(2d/D) * ln b); keeps angles[0] exactly 1
    basis.angles[d] = std::exp(-(2.0 * static_cast<double>(d) / head_dim) * log_base);
  }
  return basis;
}

double wavelength(const FrequencyBasis& basis, int d) {
  if (d < 0 || static_cast<std::size_t>(d) >= basis.angles.size())
    throw std::out_of_range("wavelength: dimension index " + std::to_string(d) +
                            " out of range [0, " + std::to_string(basis.angles.size()) + ")");
  return 2.0 * std::numbers::pi / basis.angles[static_cast<std::size_t>(d)];
}

Matrix rotation_matrix(const std::vector<double>& angles, std::int64_t position) {
  if (position < 0) throw std::invalid_argument("rotation_matrix: position must be non-negative");
  const std::size_t dim = 2 * angles.size();
  Matrix m(dim, dim);
  for (std::size_t d = 0; d < angles.size(); ++d) {
    const double angle = static_cast<double>(position) * angles[d];
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    m.at(2 * d, 2 * d) = c;
    m.at(2 * d, 2 * d + 1) = -s;
    m.at(2 * d + 1, 2 * d) = s;
    m.at(2 * d + 1, 2 * d + 1) = c;
  }
  return m;
}

Matrix rotation_matrix(const FrequencyBasis& basis, std::int64_t position) {
  return rotation_matrix(basis.angles, position);
}

std::vector<double> apply_rotary(const std::vector<double>& angles,
                                 std::int64_t position,
                                 const std::vector<double>& v) {
  if (position < 0) throw std::invalid_argument("apply_rotary: position must be non-negative");
  if (v.size() != 2 * angles.size())
    throw std::invalid_argument("apply_rotary: vector length " + std::to_string(v.size()) +
                                " does not match head_dim " + std::to_string(2 * angles.size()));
  std::vector<double> out(v.size());
  for (std::size_t d = 0; d < angles.size(); ++d) {
    const double angle = static_cast<double>(position) * angles[d];
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double a = v[2 * d];
    const double b = v[2 * d + 1];
    out[2 * d] = a * c - b * s;
    out[2 * d + 1] = a * s + b * c;
  }
  return out;
}

std::vector<double> apply_rotary(const FrequencyBasis& basis,
                                 std::int64_t position,
                                 const std::vector<double>& v) {
  return apply_rotary(basis.angles, position, v);
}

}  // namespace longctx
