/*
 * Copyright (c) 2026, The abspec Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <abspec/core_math.hpp>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace abspec {

/// mt19937_64 is specified bit-exactly by the standard; the distributions are
/// not, so variates are derived from raw draws here for cross-platform
/// reproducibility.
using Rng = std::mt19937_64;

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Flat Dirichlet: normalized unit exponentials.
inline ProbVector dirichlet1(std::size_t n, Rng& rng) {
  if (n == 0) throw DomainError("dirichlet1 over an empty alphabet");
  std::vector<double> v(n);
  for (double& x : v) x = -std::log1p(-uniform01(rng)) + 1e-300;
  return normalize(v);
}

}  // namespace abspec
