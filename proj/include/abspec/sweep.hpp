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

/**
 * \file   abspec/sweep.hpp
 * \brief  Beta sweeps with annealing policies, transition detection and the
 *         convergence-rate study.
 */

#pragma once

#include <abspec/ib_solver.hpp>
#include <abspec/rd_solver.hpp>
#include <abspec/spectral.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace abspec {

enum class InitPolicy { Uniform, Dirichlet1, ReverseAnneal, ForwardAnneal };
enum class ProblemKind { RD, IB };

inline const char* to_string(InitPolicy p) {
  switch (p) {
    case InitPolicy::Uniform: return "uniform";
    case InitPolicy::Dirichlet1: return "dirichlet";
    case InitPolicy::ReverseAnneal: return "reverse";
    case InitPolicy::ForwardAnneal: return "forward";
  }
  return "?";
}

/// n points from lo to hi inclusive, log- or linearly spaced, ascending.
inline std::vector<double> beta_grid(double lo, double hi, std::size_t n, bool log_spaced = true) {
  if (n < 2) throw DomainError("a beta grid needs at least 2 points");
  if (!(lo < hi)) throw DomainError("beta grid needs beta_min < beta_max");
  if (log_spaced && !(lo > 0.0)) throw DomainError("a log-spaced grid needs beta_min > 0");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n - 1);
    g[i] = log_spaced ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo))) : lo + t * (hi - lo);
  }
  g.front() = lo;
  g.back() = hi;
  return g;
}

struct SweepConfig {
  std::vector<double> beta_grid;
  InitPolicy init_policy = InitPolicy::Uniform;
  SolverConfig solver;
  ProblemKind problem_kind = ProblemKind::RD;
  std::uint64_t seed = 0;
  /// L-inf tolerance for treating two IB decoders as the same.
  double merge_tol = 1e-3;
  /// Forward annealing mixes this much fresh mass into each warm start so
  /// unused representatives can re-enter.
  double reseed_mix = 1e-3;
  /// Worker count for independent-start policies; 0 picks the hardware count.
  std::size_t threads = 0;

  void validate() const {
    solver.validate();
    if (beta_grid.size() < 2) throw DomainError("beta grid needs at least 2 points");
    bool up = true, down = true;
    for (std::size_t i = 1; i < beta_grid.size(); ++i) {
      up = up && beta_grid[i] > beta_grid[i - 1];
      down = down && beta_grid[i] < beta_grid[i - 1];
    }
    if (!up && !down) throw DomainError("beta grid must be strictly monotone");
    for (double b : beta_grid)
      if (!(b >= 0.0) || !std::isfinite(b)) throw DomainError("beta values must be finite and >= 0");
    if (init_policy == InitPolicy::ReverseAnneal && !down)
      throw DomainError("reverse annealing needs a descending beta grid");
    if (init_policy == InitPolicy::ForwardAnneal && !up)
      throw DomainError("forward annealing needs an ascending beta grid");
    if (!(merge_tol > 0.0)) throw DomainError("merge_tol must be positive");
    if (!(reseed_mix > 0.0 && reseed_mix < 1.0)) throw DomainError("reseed_mix must lie in (0, 1)");
  }
};

struct SweepRecord {
  double beta = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::size_t support_size = 0;
  /// Distinct decoders for IB; equals support_size for RD.
  std::size_t effective_cardinality = 0;
  double lambda0 = 0.0;
  double lambda_max = 0.0;
  double predicted_rate = 0.0;
  /// iterations / (-log epsilon)
  double measured_rate = 0.0;
  double rate = 0.0;
  /// Expected distortion (RD) or I(X^;Y) (IB).
  double distortion_or_info = 0.0;
  ProbVector marginal;
  std::vector<double> eigenvalues;
  bool critical = false;
  /// IB only: p(y = 0 | x^) per representative, NaN for unused ones.
  std::vector<double> decoder0;
};

template <class Solution>
struct SweepResult {
  std::vector<SweepRecord> records;
  std::vector<Solution> solutions;
};

namespace detail {

inline std::uint64_t point_seed(std::uint64_t seed, std::size_t index) {
  // splitmix64 finalizer, so neighbouring indices get unrelated streams.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Runs fn(i) for i in [0, n) on a small pool; the first exception is
/// rethrown after all workers stop.
template <class Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

inline ProbVector drop_below(const ProbVector& p, double zero_tol) {
  std::vector<double> v(p.begin(), p.end());
  for (double& x : v)
    if (x <= zero_tol) x = 0.0;
  return normalize(v);
}

inline ProbVector mix_uniform(const ProbVector& p, double eta) {
  std::vector<double> v(p.begin(), p.end());
  const double u = 1.0 / static_cast<double>(v.size());
  for (double& x : v) x = (1.0 - eta) * x + eta * u;
  return normalize(v);
}

inline void fill_spectral(SweepRecord& rec, const SpectralReport& r) {
  rec.lambda0 = r.lambda0;
  rec.lambda_max = r.lambda_max_ab;
  rec.predicted_rate = r.predicted_rate;
  rec.eigenvalues = r.eigenvalues;
  rec.critical = r.critical;
}

inline SweepRecord rd_record(const RdProblem& problem, const RdSolution& sol, const SweepConfig& cfg) {
  SweepRecord rec;
  rec.beta = sol.beta;
  rec.iterations = sol.iterations;
  rec.converged = sol.converged;
  rec.support_size = support(sol.marginal, cfg.solver.zero_tol).size();
  rec.effective_cardinality = rec.support_size;
  rec.measured_rate = static_cast<double>(sol.iterations) / -std::log(cfg.solver.epsilon);
  rec.rate = sol.rate;
  rec.distortion_or_info = sol.distortion;
  rec.marginal = sol.marginal;
  fill_spectral(rec, spectral_report(problem, sol.marginal, sol.beta, cfg.solver.zero_tol));
  return rec;
}

}  // namespace detail

/// RD problem with one column per decoder class, d = D(p(y|x) || decoder),
/// and the classes' masses as its marginal. An IB fixed point is a fixed
/// point of this frozen problem, so its spectrum describes the IB solution
/// with the decoder held fixed.
struct FrozenRd {
  RdProblem problem;
  ProbVector marginal;
};

inline FrozenRd frozen_decoder_problem(const IbProblem& problem, const IbSolution& sol,
                                       double merge_tol, double zero_tol = kDefaultZeroTol) {
  const auto classes = class_representatives(sol, merge_tol, zero_tol);
  std::vector<std::vector<double>> rows;
  std::vector<double> mass;
  for (const auto& c : classes) {
    rows.push_back(c.decoder);
    mass.push_back(c.mass);
  }
  const Matrix d = ib_distortion(problem, Channel::trusted(Matrix::from_rows(rows)));
  for (double v : d.data())
    if (!std::isfinite(v)) throw DomainError("frozen decoder distortion is infinite");
  return {RdProblem(problem.px(), d), normalize(mass)};
}

namespace detail {

inline SweepRecord ib_record(const IbProblem& problem, const IbSolution& sol, const SweepConfig& cfg) {
  const double zt = cfg.solver.zero_tol;
  SweepRecord rec;
  rec.beta = sol.beta;
  rec.iterations = sol.iterations;
  rec.converged = sol.converged;
  rec.support_size = support(sol.marginal, zt).size();
  rec.effective_cardinality = effective_cardinality(sol, cfg.merge_tol, zt);
  rec.measured_rate = static_cast<double>(sol.iterations) / -std::log(cfg.solver.epsilon);
  rec.rate = sol.rate;
  rec.distortion_or_info = sol.relevant_info;
  rec.marginal = sol.marginal;
  rec.decoder0.assign(sol.marginal.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t j = 0; j < sol.marginal.size(); ++j)
    if (sol.marginal[j] > zt) rec.decoder0[j] = sol.decoder(j, 0);
  const auto frozen = frozen_decoder_problem(problem, sol, cfg.merge_tol, zt);
  fill_spectral(rec, spectral_report(frozen.problem, frozen.marginal, sol.beta, zt));
  return rec;
}

inline Channel zero_columns(const Channel& enc, const ProbVector& marginal, double zero_tol) {
  Matrix e = enc.matrix();
  for (std::size_t x = 0; x < e.rows(); ++x) {
    auto row = e.row(x);
    for (std::size_t j = 0; j < row.size(); ++j)
      if (marginal[j] <= zero_tol) row[j] = 0.0;
    double total = 0.0;
    for (double v : row) total += v;
    if (!(total > 0.0)) throw NumericalError("warm start lost all mass in an encoder row");
    for (double& v : row) v /= total;
  }
  return Channel::trusted(std::move(e));
}

/// (1 - eta) a + eta b. Mixing towards a uniform encoder would not help IB:
/// equal decoders stay equal, so the target must break the symmetry.
inline Channel mix_encoders(const Channel& a, const Channel& b, double eta) {
  Matrix e = a.matrix();
  const auto bd = b.matrix().data();
  auto ed = e.data();
  for (std::size_t i = 0; i < ed.size(); ++i) ed[i] = (1.0 - eta) * ed[i] + eta * bd[i];
  return Channel::trusted(std::move(e));
}

}  // namespace detail

/// Solves the RD problem at every grid point. Records follow grid order.
inline SweepResult<RdSolution> sweep_rd(const RdProblem& problem, const SweepConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.beta_grid.size(), m = problem.reproduction_size();
  SweepResult<RdSolution> out;
  out.records.resize(n);
  out.solutions.resize(n);
  const bool annealing =
      cfg.init_policy == InitPolicy::ReverseAnneal || cfg.init_policy == InitPolicy::ForwardAnneal;

  if (!annealing) {
    detail::parallel_for(n, cfg.threads, [&](std::size_t i) {
      ProbVector init = ProbVector::uniform(m);
      if (cfg.init_policy == InitPolicy::Dirichlet1) {
        Rng rng(detail::point_seed(cfg.seed, i));
        init = dirichlet1(m, rng);
      }
      out.solutions[i] = solve(problem, cfg.beta_grid[i], init, cfg.solver);
      out.records[i] = detail::rd_record(problem, out.solutions[i], cfg);
    });
    return out;
  }

  ProbVector init = ProbVector::uniform(m);
  for (std::size_t i = 0; i < n; ++i) {
    out.solutions[i] = solve(problem, cfg.beta_grid[i], init, cfg.solver);
    out.records[i] = detail::rd_record(problem, out.solutions[i], cfg);
    const auto& p = out.solutions[i].marginal;
    init = cfg.init_policy == InitPolicy::ReverseAnneal ? detail::drop_below(p, cfg.solver.zero_tol)
                                                        : detail::mix_uniform(p, cfg.reseed_mix);
  }
  return out;
}

/// Warm-started IB walk along the grid from `init`. Reverse annealing keeps
/// dropped columns at zero; forward annealing mixes in spread mass.
inline SweepResult<IbSolution> anneal_ib(const IbProblem& problem, const SweepConfig& cfg,
                                         Channel init) {
  cfg.validate();
  const std::size_t n = cfg.beta_grid.size();
  const bool reverse = cfg.init_policy != InitPolicy::ForwardAnneal;
  const Channel spread = ib_near_identity_init(problem, 0.5);
  SweepResult<IbSolution> out;
  out.records.resize(n);
  out.solutions.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.solutions[i] = ib_solve(problem, cfg.beta_grid[i], init, cfg.solver);
    out.records[i] = detail::ib_record(problem, out.solutions[i], cfg);
    const auto& s = out.solutions[i];
    init = reverse ? detail::zero_columns(s.encoder, s.marginal, cfg.solver.zero_tol)
                   : detail::mix_encoders(s.encoder, spread, cfg.reseed_mix);
  }
  return out;
}

/// IB sweep. Reverse annealing starts from a near-identity encoder at the
/// largest beta; the uniform policy starts each point from a uniform
/// marginal with one decoder per source symbol.
inline SweepResult<IbSolution> sweep_ib(const IbProblem& problem, const SweepConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.beta_grid.size();
  SweepResult<IbSolution> out;
  out.records.resize(n);
  out.solutions.resize(n);
  switch (cfg.init_policy) {
    case InitPolicy::Uniform:
    case InitPolicy::Dirichlet1:
      detail::parallel_for(n, cfg.threads, [&](std::size_t i) {
        const double beta = cfg.beta_grid[i];
        Channel init;
        if (cfg.init_policy == InitPolicy::Dirichlet1) {
          Rng rng(detail::point_seed(cfg.seed, i));
          init = ib_dirichlet_init(problem, rng);
        } else {
          init = ib_uniform_init(problem, beta);
        }
        out.solutions[i] = ib_solve(problem, beta, init, cfg.solver);
        out.records[i] = detail::ib_record(problem, out.solutions[i], cfg);
      });
      return out;
    case InitPolicy::ReverseAnneal:
      return anneal_ib(problem, cfg, ib_near_identity_init(problem, 0.1));
    case InitPolicy::ForwardAnneal:
      return anneal_ib(problem, cfg, ib_uniform_init(problem, cfg.beta_grid.front()));
  }
  return out;
}

/// Re-anneals an IB bracket on a finer grid. The walk starts from the
/// solution at `high` and descends through `low` down to `floor`, the grid
/// point below the bracket. A coarse step can land in the basin of a merged
/// local optimum while the split branch survives a little lower; the finer
/// walk follows that branch to its end. The returned sweep is in grid order
/// (descending); sort it before detecting transitions.
inline SweepResult<IbSolution> refine_ib_transition(const IbProblem& problem,
                                                    const IbSolution& high, double floor,
                                                    std::size_t steps, const SweepConfig& cfg) {
  if (!(floor < high.beta)) throw DomainError("refinement floor must lie below the bracket");
  if (steps < 2) throw DomainError("refinement needs at least 2 steps");
  SweepConfig fine = cfg;
  fine.init_policy = InitPolicy::ReverseAnneal;
  fine.beta_grid = beta_grid(floor, high.beta, steps + 1, false);
  std::reverse(fine.beta_grid.begin(), fine.beta_grid.end());
  fine.beta_grid.erase(fine.beta_grid.begin());
  if (fine.beta_grid.size() < 2) throw DomainError("refinement grid too short");
  return anneal_ib(problem, fine, detail::zero_columns(high.encoder, high.marginal, cfg.solver.zero_tol));
}

/// Sweeps a tangent RD problem. The union of two nearby decoder sets is
/// close to degenerate, so plain AB on it may stall for millions of steps.
/// At each beta the problem is first solved on the lower block and on the
/// upper block alone (AB never revives a zero coordinate); a block solution
/// whose optimality gap is at most gap_tol is a certified global minimizer
/// and is taken, the lower Lagrangian winning if both qualify. Otherwise the
/// full problem is solved from the previous solution with reseed_mix of
/// uniform mass mixed in (from uniform under the Uniform policy).
inline SweepResult<RdSolution> tangent_sweep(const TangentProblem& tangent, const SweepConfig& cfg,
                                             double gap_tol = 1e-8) {
  cfg.validate();
  if (!(gap_tol >= 0.0)) throw DomainError("gap_tol must be >= 0");
  const RdProblem& problem = tangent.problem;
  const std::size_t n = cfg.beta_grid.size(), m = problem.reproduction_size();
  const auto block_init = [m](const std::vector<std::size_t>& cols) {
    std::vector<double> v(m, 0.0);
    for (std::size_t j : cols) v[j] = 1.0 / static_cast<double>(cols.size());
    return normalize(v);
  };
  std::vector<std::size_t> minus(tangent.minus_count);
  for (std::size_t j = 0; j < minus.size(); ++j) minus[j] = j;
  const std::vector<ProbVector> blocks{block_init(minus), block_init(tangent.plus_block)};

  SweepResult<RdSolution> out;
  out.records.resize(n);
  out.solutions.resize(n);
  ProbVector warm = ProbVector::uniform(m);
  for (std::size_t i = 0; i < n; ++i) {
    const double beta = cfg.beta_grid[i];
    std::optional<RdSolution> best;
    double best_l = std::numeric_limits<double>::infinity();
    for (const auto& b : blocks) {
      RdSolution s = solve(problem, beta, b, cfg.solver);
      if (!s.converged || optimality_gap(problem, s.marginal, beta) > gap_tol) continue;
      const double l = lagrangian(problem, s.encoder, beta);
      if (l < best_l) {
        best_l = l;
        best = std::move(s);
      }
    }
    if (!best) {
      // Zero coordinates stay zero under AB, so the warm start is reseeded.
      const ProbVector init = cfg.init_policy == InitPolicy::Uniform
                                  ? ProbVector::uniform(m)
                                  : detail::mix_uniform(warm, cfg.reseed_mix);
      best = solve(problem, beta, init, cfg.solver);
    }
    out.solutions[i] = std::move(*best);
    out.records[i] = detail::rd_record(problem, out.solutions[i], cfg);
    const auto& p = out.solutions[i].marginal;
    warm = cfg.init_policy == InitPolicy::ForwardAnneal ? detail::mix_uniform(p, cfg.reseed_mix)
                                                        : detail::drop_below(p, cfg.solver.zero_tol);
  }
  return out;
}

inline std::vector<SweepRecord> sweep(const RdProblem& problem, const SweepConfig& cfg) {
  return sweep_rd(problem, cfg).records;
}

inline std::vector<SweepRecord> sweep(const IbProblem& problem, const SweepConfig& cfg) {
  return sweep_ib(problem, cfg).records;
}

enum class TransitionKind { SupportChange, EffectiveCardinalityChange };

struct TransitionInterval {
  double beta_low = 0.0;
  double beta_high = 0.0;
  std::size_t from = 0;
  std::size_t to = 0;
  /// Record indices of the endpoints in the input sequence.
  std::size_t index_low = 0;
  std::size_t index_high = 0;
};

struct TransitionReport {
  std::vector<TransitionInterval> critical_intervals;
  TransitionKind kind = TransitionKind::SupportChange;
};

inline std::vector<SweepRecord> sorted_by_beta(std::vector<SweepRecord> records) {
  std::sort(records.begin(), records.end(),
            [](const SweepRecord& a, const SweepRecord& b) { return a.beta < b.beta; });
  return records;
}

/// Brackets every change of support size (RD) or effective cardinality (IB)
/// between adjacent converged records.
inline TransitionReport detect_transitions(const std::vector<SweepRecord>& records,
                                           TransitionKind kind = TransitionKind::SupportChange) {
  for (std::size_t i = 1; i < records.size(); ++i)
    if (!(records[i].beta > records[i - 1].beta))
      throw DomainError("detect_transitions needs records sorted by ascending beta");
  TransitionReport rep;
  rep.kind = kind;
  const auto key = [kind](const SweepRecord& r) {
    return kind == TransitionKind::SupportChange ? r.support_size : r.effective_cardinality;
  };
  std::size_t skipped = 0;
  std::size_t prev = records.size();
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!records[i].converged) {
      ++skipped;
      continue;
    }
    if (prev < records.size() && key(records[prev]) != key(records[i]))
      rep.critical_intervals.push_back(
          {records[prev].beta, records[i].beta, key(records[prev]), key(records[i]), prev, i});
    prev = i;
  }
  if (skipped > 0)
    warn("detect_transitions: excluded " + std::to_string(skipped) + " unconverged record(s)");
  return rep;
}

/// Median iteration count over records.
inline double median_iterations(const std::vector<SweepRecord>& records) {
  if (records.empty()) return 0.0;
  std::vector<double> it;
  for (const auto& r : records) it.push_back(static_cast<double>(r.iterations));
  std::sort(it.begin(), it.end());
  const std::size_t h = it.size() / 2;
  return it.size() % 2 ? it[h] : 0.5 * (it[h - 1] + it[h]);
}

struct RatePoint {
  double lambda0 = 0.0;
  double lambda_max = 0.0;
  double epsilon = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  double measured_rate = 0.0;
  double predicted_rate = 0.0;
};

/// For each epsilon, solves at beta and pairs k / (-log epsilon) with
/// 1 / (-log lambda_max). Under ReverseAnneal the start is the solution at
/// 2 beta with its zero coordinates removed; the spectrum is that of a
/// tightly converged solution at beta.
inline std::vector<RatePoint> rate_study(const RdProblem& problem, double beta,
                                         const std::vector<double>& epsilons, InitPolicy policy,
                                         SolverConfig config = {}, std::uint64_t seed = 0) {
  if (!(beta > 0.0)) throw DomainError("rate_study needs beta > 0");
  if (epsilons.empty()) throw DomainError("rate_study needs at least one epsilon");
  config.validate();
  const std::size_t m = problem.reproduction_size();
  SolverConfig tight = config;
  tight.epsilon = 1e-15;
  tight.norm = Norm::L1;

  ProbVector init = ProbVector::uniform(m);
  if (policy == InitPolicy::ReverseAnneal || policy == InitPolicy::ForwardAnneal) {
    const double from = policy == InitPolicy::ReverseAnneal ? 2.0 * beta : 0.5 * beta;
    const auto warm = solve(problem, from, ProbVector::uniform(m), tight);
    init = policy == InitPolicy::ReverseAnneal ? detail::drop_below(warm.marginal, config.zero_tol)
                                               : detail::mix_uniform(warm.marginal, 1e-3);
  } else if (policy == InitPolicy::Dirichlet1) {
    Rng rng(seed);
    init = dirichlet1(m, rng);
  }

  const auto ref = solve(problem, beta, init, tight);
  const auto ref_spectrum = spectral_report(problem, ref.marginal, beta, config.zero_tol);
  std::vector<RatePoint> out;
  for (double eps : epsilons) {
    SolverConfig c = config;
    c.epsilon = eps;
    const auto sol = solve(problem, beta, init, c);
    RatePoint pt;
    pt.lambda0 = ref_spectrum.lambda0;
    pt.lambda_max = ref_spectrum.lambda_max_ab;
    pt.epsilon = eps;
    pt.iterations = sol.iterations;
    pt.converged = sol.converged;
    pt.measured_rate = static_cast<double>(sol.iterations) / -std::log(eps);
    pt.predicted_rate = ref_spectrum.predicted_rate;
    out.push_back(pt);
  }
  return out;
}

/// One IB transition examined through its tangent RD problem.
struct TangentTransition {
  /// Bracket from the IB sweep and after refinement (equal when the
  /// refinement found no matching bracket).
  TransitionInterval coarse;
  TransitionInterval refined;
  TangentProblem tangent;
  /// Tangent sweep over the refined bracket, ascending beta.
  std::vector<SweepRecord> records;
  TransitionReport support_changes;
  /// Smallest lambda0 over the tangent records and where it occurs.
  double min_lambda0 = std::numeric_limits<double>::infinity();
  double min_lambda0_beta = 0.0;
  /// Support of the tangent solution at the bracket's lower end.
  std::size_t support_at_low = 0;
  /// True when that support lies inside the lower-side block.
  bool low_in_minus_block = false;
  /// IB iterations at the bracket's upper end.
  std::size_t ib_iterations_high = 0;
};

struct TangentStudyConfig {
  /// Points in the finer IB walk across each bracket; 0 disables it.
  std::size_t refine_steps = 40;
  /// Points in each tangent sweep, endpoints included.
  std::size_t tangent_steps = 21;
  /// Upper-side decoders this close to a lower-side one are dropped.
  double dedup_tol = 1e-3;
  double gap_tol = 1e-8;
  SolverConfig tangent_solver = [] {
    SolverConfig c;
    c.epsilon = 1e-12;
    c.prune_tol = 1e-5;
    return c;
  }();
};

/// Builds and sweeps the tangent RD problem for every effective-cardinality
/// transition of an IB sweep. `ib` holds records and solutions in grid order.
inline std::vector<TangentTransition> tangent_study(const IbProblem& problem,
                                                    const SweepResult<IbSolution>& ib,
                                                    const SweepConfig& ib_cfg,
                                                    const TangentStudyConfig& tcfg = {}) {
  const std::size_t n = ib.records.size();
  if (ib.solutions.size() != n) throw DomainError("sweep result needs one solution per record");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return ib.records[a].beta < ib.records[b].beta; });
  std::vector<SweepRecord> asc;
  for (std::size_t i : order) asc.push_back(ib.records[i]);
  const auto report = detect_transitions(asc, TransitionKind::EffectiveCardinalityChange);

  std::vector<TangentTransition> out;
  for (const auto& iv : report.critical_intervals) {
    TransitionInterval refined = iv;
    IbSolution lo = ib.solutions[order[iv.index_low]];
    IbSolution hi = ib.solutions[order[iv.index_high]];
    if (tcfg.refine_steps > 0 && iv.index_low > 0) {
      const auto fine = refine_ib_transition(problem, hi, asc[iv.index_low - 1].beta, tcfg.refine_steps, ib_cfg);
      const std::size_t fn = fine.records.size();
      const std::vector<SweepRecord> fa(fine.records.rbegin(), fine.records.rend());
      for (const auto& f : detect_transitions(fa, TransitionKind::EffectiveCardinalityChange).critical_intervals)
        if (f.from == iv.from && f.to == iv.to) {
          lo = fine.solutions[fn - 1 - f.index_low];
          hi = fine.solutions[fn - 1 - f.index_high];
          refined = f;
          break;
        }
    }
    TangentTransition t{iv, refined,
                        tangent_rd(problem, lo, hi, ib_cfg.merge_tol, tcfg.dedup_tol, ib_cfg.solver.zero_tol),
                        {},
                        {}};
    t.ib_iterations_high = hi.iterations;

    SweepConfig sc;
    sc.beta_grid = beta_grid(lo.beta, hi.beta, tcfg.tangent_steps, false);
    std::reverse(sc.beta_grid.begin(), sc.beta_grid.end());
    sc.init_policy = InitPolicy::ReverseAnneal;
    sc.solver = tcfg.tangent_solver;
    sc.merge_tol = ib_cfg.merge_tol;
    auto swept = tangent_sweep(t.tangent, sc, tcfg.gap_tol);
    t.records = sorted_by_beta(std::move(swept.records));
    t.support_changes = detect_transitions(t.records, TransitionKind::SupportChange);
    for (const auto& r : t.records)
      if (r.lambda0 < t.min_lambda0) {
        t.min_lambda0 = r.lambda0;
        t.min_lambda0_beta = r.beta;
      }
    const auto& low = t.records.front();
    t.support_at_low = low.support_size;
    t.low_in_minus_block = true;
    for (std::size_t j = t.tangent.minus_count; j < low.marginal.size(); ++j)
      t.low_in_minus_block = t.low_in_minus_block && !(low.marginal[j] > sc.solver.zero_tol);
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace abspec
