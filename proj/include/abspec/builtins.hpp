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

#include <abspec/ib_solver.hpp>
#include <abspec/rd_solver.hpp>

#include <array>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace abspec {

using AnyProblem = std::variant<RdProblem, IbProblem>;

/// Thrown for an unknown builtin name; the message lists the valid ones.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names{"binary_hamming", "fig1_like", "fig2"};
  return names;
}

/// Four-point planar RD instance: source points on the unit square corners,
/// squared Euclidean distortion scaled so the largest entry is 1. With
/// p(x) = (0.4, 0.3, 0.2, 0.1) the optimal support grows 1 -> 2 -> 3 -> 4.
inline RdProblem fig1_like_problem() {
  const std::array<std::array<double, 2>, 4> src{{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}}};
  const std::array<std::array<double, 2>, 4> rep{{{0.0, -0.1}, {0.9, 0.1}, {1.2, 1.2}, {0.3, 0.3}}};
  Matrix d(4, 4);
  double mu = 0.0;
  for (std::size_t x = 0; x < 4; ++x)
    for (std::size_t j = 0; j < 4; ++j) {
      const double dx = src[x][0] - rep[j][0], dy = src[x][1] - rep[j][1];
      d(x, j) = dx * dx + dy * dy;
      mu = std::max(mu, d(x, j));
    }
  for (double& v : d.data()) v /= mu;
  return RdProblem(ProbVector{0.4, 0.3, 0.2, 0.1}, std::move(d));
}

/// Binary source, binary relevant variable with p(y=0|x) = (0.2, 0.4, 0.6, 0.8).
inline IbProblem fig2_problem() {
  const double a[4] = {0.2, 0.4, 0.6, 0.8};
  std::vector<std::vector<double>> rows;
  for (double v : a) rows.push_back({v, 1.0 - v});
  return IbProblem::from_conditional(ProbVector{0.7, 0.1, 0.1, 0.1}, Channel::from_rows(rows));
}

inline RdProblem binary_hamming_problem() {
  return RdProblem(ProbVector{0.5, 0.5}, Matrix::from_rows({{0.0, 1.0}, {1.0, 0.0}}));
}

inline AnyProblem builtin_problem(std::string_view name) {
  if (name == "fig1_like") return fig1_like_problem();
  if (name == "fig2") return fig2_problem();
  if (name == "binary_hamming") return binary_hamming_problem();
  std::string msg = "unknown builtin '" + std::string(name) + "'; choices:";
  for (const auto& n : builtin_names()) msg += " " + n;
  throw UsageError(msg);
}

}  // namespace abspec
