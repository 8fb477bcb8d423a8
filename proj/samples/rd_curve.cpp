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

// Traces the rate-distortion curve of an RD problem file by reverse
// annealing, then prints each support transition with the slowest
// eigenvalue just above it.
//
//   sample_rd_curve data/rd_ring5.json [beta_min beta_max steps]

#include <abspec/abspec.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>

int main(int argc, char** argv) {
  using namespace abspec;
  if (argc != 2 && argc != 5) {
    std::fprintf(stderr, "usage: %s problem.json [beta_min beta_max steps]\n", argv[0]);
    return 1;
  }
  try {
    const auto any = load_problem(argv[1]);
    const auto* problem = std::get_if<RdProblem>(&any);
    if (!problem) throw DomainError("expected an RD problem (keys 'px' and 'd')");
    const double lo = argc == 5 ? std::atof(argv[2]) : 0.05;
    const double hi = argc == 5 ? std::atof(argv[3]) : 50.0;
    const std::size_t steps = argc == 5 ? std::strtoul(argv[4], nullptr, 10) : 200;

    SweepConfig cfg;
    cfg.beta_grid = beta_grid(lo, hi, steps);
    std::reverse(cfg.beta_grid.begin(), cfg.beta_grid.end());
    cfg.init_policy = InitPolicy::ReverseAnneal;
    cfg.solver.epsilon = 1e-10;
    const auto records = sorted_by_beta(sweep(*problem, cfg));

    std::printf("beta,rate,distortion,support,lambda0,iterations\n");
    for (const auto& r : records)
      std::printf("%.6g,%.9f,%.9f,%zu,%.3e,%zu\n", r.beta, r.rate, r.distortion_or_info, r.support_size, r.lambda0,
                  r.iterations);

    for (const auto& iv : detect_transitions(records).critical_intervals)
      std::fprintf(stderr, "support %zu -> %zu in [%.5g, %.5g], lambda0 above it %.3e\n", iv.from, iv.to,
                   iv.beta_low, iv.beta_high, records[iv.index_high].lambda0);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
