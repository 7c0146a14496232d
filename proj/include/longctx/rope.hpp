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
#include <vector>

#include "longctx/matrix.hpp"

namespace longctx {

// Rotary frequency table: angles[d] = base^(-2d/head_dim) for
// zero-based d in [0, head_dim/2). angles[0] is exactly 1.
struct FrequencyBasis {
  int head_dim = 0;
  double base = 0.0;
  std::vector<double> angles;
};

// head_dim must be even and >= 2; base must be > 0.
// Angles are computed as exp(-(2d/head_dim) * ln base) in double precision.
FrequencyBasis make_basis(int head_dim, double base);

// Position period of rotary dimension d: lambda_d = 2*pi / angles[d].
double wavelength(const FrequencyBasis& basis, int d);

// Dense block-diagonal rotation matrix for a non-negative integer position:
// block d is the planar rotation by position * angles[d].
Matrix rotation_matrix(const std::vector<double>& angles, std::int64_t position);
Matrix rotation_matrix(const FrequencyBasis& basis, std::int64_t position);

// Rotates v by the same matrix without materializing it. v.size() must be
// 2 * angles.size(); adjacent pairs (2d, 2d+1) form the rotation planes.
std::vector<double> apply_rotary(const std::vector<double>& angles,
                                 std::int64_t position,
                                 const std::vector<double>& v);
std::vector<double> apply_rotary(const FrequencyBasis& basis,
                                 std::int64_t position,
                                 const std::vector<double>& v);

}  // namespace longctx
