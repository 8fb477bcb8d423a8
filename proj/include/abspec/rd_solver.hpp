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
 * \file   abspec/rd_solver.hpp
 * \brief  Finite rate-distortion problems and the Arimoto-Blahut iteration.
 *
 * The iteration variable is the reproduction marginal p(x^). One step maps
 *
 *     p(x^|x) = p(x^) exp(-beta d(x,x^)) / Z(x),   Z(x) = sum_x^ p(x^) exp(-beta d(x,x^))
 *     p'(x^)  = sum_x p(x) p(x^|x)
 *
 * and fixed points are the zeros of the residual F(p) = p - AB(p).
 */

#pragma once

#include <abspec/core_math.hpp>

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace abspec {

enum class Norm { L1, Linf };

inline double distance(std::span<const double> a, std::span<const double> b, Norm norm) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = std::abs(a[i] - b[i]);
    if (norm == Norm::L1)
      acc += diff;
    else
      acc = std::max(acc, diff);
  }
  return acc;
}

struct SolverConfig {
  double epsilon = 1e-9;
  Norm norm = Norm::Linf;
  std::size_t max_iterations = 10'000'000;
  /// Support threshold: entries at or below it count as zero.
  double zero_tol = kDefaultZeroTol;
  /// After epsilon-convergence, coordinates below this that are still
  /// shrinking are set to exactly zero and the iteration resumes on the
  /// smaller face. Zero disables pruning.
  double prune_tol = 1e-7;

  void validate() const {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in (0, 1)");
    if (max_iterations < 1) throw DomainError("max_iterations must be at least 1");
    if (!(zero_tol >= 0.0 && zero_tol < 1.0)) throw DomainError("zero_tol must lie in [0, 1)");
    if (!(prune_tol >= 0.0 && prune_tol < 1.0)) throw DomainError("prune_tol must lie in [0, 1)");
  }
};

/// Source distribution plus a finite, non-negative distortion matrix d(x, x^).
class RdProblem {
 public:
  RdProblem(ProbVector px, Matrix distortion) : px_(std::move(px)), d_(std::move(distortion)) {
    if (d_.rows() != px_.size())
      throw DomainError("distortion has " + std::to_string(d_.rows()) + " rows but the source has " +
                        std::to_string(px_.size()) + " symbols");
    if (d_.cols() == 0) throw DomainError("reproduction alphabet is empty");
    for (double v : d_.data())
      if (!std::isfinite(v) || v < 0.0)
        throw DomainError("distortion entries must be finite and non-negative");
    for (std::size_t a = 0; a < d_.cols(); ++a)
      for (std::size_t b = a + 1; b < d_.cols(); ++b) {
        bool same = true;
        for (std::size_t x = 0; x < d_.rows() && same; ++x) same = d_(x, a) == d_(x, b);
        if (same)
          throw DomainError("distortion columns " + std::to_string(a) + " and " +
                            std::to_string(b) + " are identical (degenerate reproduction symbols)");
      }
  }

  const ProbVector& px() const noexcept { return px_; }
  const Matrix& distortion() const noexcept { return d_; }
  std::size_t source_size() const noexcept { return d_.rows(); }
  std::size_t reproduction_size() const noexcept { return d_.cols(); }

 private:
  ProbVector px_;
  Matrix d_;
};

struct RdSolution {
  double beta = 0.0;
  ProbVector marginal;
  Channel encoder;
  double rate = 0.0;
  double distortion = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  /// Norm of F at the returned marginal.
  double residual = 0.0;
};

namespace detail {

/// u[j] = exp(-beta d[j]) / Z with Z = sum_j p[j] exp(-beta d[j]), evaluated
/// with a shift by the smallest distortion on the support. Entries with
/// infinite distortion get weight zero. Returns false when no index carries
/// both positive mass and finite distortion.
inline bool boltzmann_weights(std::span<const double> d, std::span<const double> p, double beta,
                              std::span<double> u) {
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < d.size(); ++j)
    if (p[j] > 0.0 && d[j] < dmin) dmin = d[j];
  if (!std::isfinite(dmin)) return false;
  double z = 0.0;
  for (std::size_t j = 0; j < d.size(); ++j) {
    u[j] = std::isfinite(d[j]) ? std::exp(-beta * (d[j] - dmin)) : 0.0;
    if (p[j] > 0.0) z += p[j] * u[j];
  }
  const double inv = 1.0 / z;
  for (double& v : u) v *= inv;
  return true;
}

/// exp(-beta d) with each row shifted by its minimum, cached for one beta.
class GibbsKernel {
 public:
  GibbsKernel(const RdProblem& problem, double beta)
      : d_(problem.distortion()), px_(problem.px().values()), beta_(beta),
        t_(d_.rows(), d_.cols()) {
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw DomainError("beta must be finite and >= 0");
    for (std::size_t x = 0; x < d_.rows(); ++x) {
      double lo = std::numeric_limits<double>::infinity();
      for (double v : d_.row(x)) lo = std::min(lo, v);
      for (std::size_t j = 0; j < d_.cols(); ++j) t_(x, j) = std::exp(-beta * (d_(x, j) - lo));
    }
  }

  std::size_t n() const noexcept { return d_.rows(); }
  std::size_t m() const noexcept { return d_.cols(); }
  double beta() const noexcept { return beta_; }
  std::span<const double> px() const noexcept { return px_; }

  /// u = exp(-beta d(x, .)) / Z(x) at the (possibly unnormalized) point p.
  void weights(std::span<const double> p, std::size_t x, std::span<double> u) const {
    const auto t = t_.row(x);
    double z = 0.0;
    for (std::size_t j = 0; j < t.size(); ++j) z += p[j] * t[j];
    if (z > 1e-290 && std::isfinite(z)) {
      const double inv = 1.0 / z;
      for (std::size_t j = 0; j < t.size(); ++j) u[j] = t[j] * inv;
      return;
    }
    if (!boltzmann_weights(d_.row(x), p, beta_, u))
      throw DomainError("partition function vanishes: marginal has no mass");
  }

  /// One AB step from p: fills the encoder and the next marginal.
  void step(std::span<const double> p, Matrix& encoder, std::span<double> next) const {
    std::vector<double> u(m());
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t x = 0; x < n(); ++x) {
      weights(p, x, u);
      auto row = encoder.row(x);
      for (std::size_t j = 0; j < m(); ++j) {
        row[j] = p[j] > 0.0 ? p[j] * u[j] : 0.0;
        next[j] += px_[x] * row[j];
      }
    }
  }

 private:
  const Matrix& d_;
  std::span<const double> px_;
  double beta_;
  Matrix t_;
};

inline void check_marginal_shape(const RdProblem& problem, std::size_t size) {
  if (size != problem.reproduction_size())
    throw DomainError("marginal has " + std::to_string(size) + " entries, expected " +
                      std::to_string(problem.reproduction_size()));
}

}  // namespace detail

/// Boltzmann encoder p(x^|x) induced by a reproduction marginal.
inline Channel encoder_from_marginal(const RdProblem& problem, const ProbVector& marginal,
                                     double beta) {
  detail::check_marginal_shape(problem, marginal.size());
  detail::GibbsKernel kernel(problem, beta);
  Matrix enc(problem.source_size(), problem.reproduction_size());
  std::vector<double> next(problem.reproduction_size());
  kernel.step(marginal.values(), enc, next);
  return Channel::trusted(std::move(enc));
}

inline ProbVector marginal_from_encoder(const RdProblem& problem, const Channel& encoder) {
  if (encoder.inputs() != problem.source_size() || encoder.outputs() != problem.reproduction_size())
    throw DomainError("encoder shape does not match the problem");
  return output_marginal(problem.px(), encoder);
}

inline ProbVector ab_step(const RdProblem& problem, const ProbVector& marginal, double beta) {
  return marginal_from_encoder(problem, encoder_from_marginal(problem, marginal, beta));
}

/// [F(p)]_j = p_j - sum_x p(x) p_j exp(-beta d(x,j)) / Z(x), for any p in
/// the positive orthant (p need not sum to one).
inline std::vector<double> residual_f(const RdProblem& problem, std::span<const double> p,
                                      double beta) {
  detail::check_marginal_shape(problem, p.size());
  detail::GibbsKernel kernel(problem, beta);
  const std::size_t m = problem.reproduction_size();
  std::vector<double> f(p.begin(), p.end());
  std::vector<double> u(m);
  for (std::size_t x = 0; x < problem.source_size(); ++x) {
    kernel.weights(p, x, u);
    for (std::size_t j = 0; j < m; ++j)
      if (p[j] > 0.0) f[j] -= problem.px()[x] * p[j] * u[j];
  }
  return f;
}

inline std::vector<double> residual_f(const RdProblem& problem, const ProbVector& p, double beta) {
  return residual_f(problem, p.values(), beta);
}

inline double expected_distortion(const RdProblem& problem, const Channel& encoder) {
  const auto& d = problem.distortion();
  double acc = 0.0;
  for (std::size_t x = 0; x < problem.source_size(); ++x)
    for (std::size_t j = 0; j < problem.reproduction_size(); ++j)
      acc += problem.px()[x] * encoder(x, j) * d(x, j);
  return acc;
}

/// I(X;X^) + beta E[d(X,X^)].
inline double lagrangian(const RdProblem& problem, const Channel& encoder, double beta) {
  return mutual_information(problem.px(), encoder) + beta * expected_distortion(problem, encoder);
}

/// max_j c_j - 1 with c_j = sum_x p(x) exp(-beta d(x,j)) / Z(x). A fixed
/// point p is the global minimizer exactly when c_j <= 1 off its support, so
/// a gap at or below zero (up to the solve tolerance) certifies optimality.
inline double optimality_gap(const RdProblem& problem, const ProbVector& marginal, double beta) {
  detail::check_marginal_shape(problem, marginal.size());
  detail::GibbsKernel kernel(problem, beta);
  const std::size_t m = problem.reproduction_size();
  std::vector<double> c(m, 0.0), u(m);
  for (std::size_t x = 0; x < problem.source_size(); ++x) {
    kernel.weights(marginal.values(), x, u);
    for (std::size_t j = 0; j < m; ++j) c[j] += problem.px()[x] * u[j];
  }
  return *std::max_element(c.begin(), c.end()) - 1.0;
}

/// Called after every step with the 1-based iteration count, the new
/// marginal and the encoder that produced it.
using RdObserver =
    std::function<void(std::size_t, std::span<const double>, const Matrix&)>;

/// Runs AB from `init` until successive iterates are closer than epsilon.
///
/// Hitting max_iterations is reported through `converged = false`, not an
/// exception. NaN or Inf in an iterate raises NumericalError.
inline RdSolution solve(const RdProblem& problem, double beta, const ProbVector& init,
                        const SolverConfig& config, const RdObserver& observer = {}) {
  config.validate();
  detail::check_marginal_shape(problem, init.size());
  detail::GibbsKernel kernel(problem, beta);
  const std::size_t m = problem.reproduction_size();

  std::vector<double> p(init.begin(), init.end());
  std::vector<double> next(m);
  Matrix enc(problem.source_size(), m);

  RdSolution sol;
  sol.beta = beta;
  std::size_t k = 0;
  bool fresh = false;  // enc was produced by the step that produced p
  while (k < config.max_iterations) {
    kernel.step(p, enc, next);
    ++k;
    for (double v : next)
      if (!std::isfinite(v))
        throw NumericalError("non-finite iterate at step " + std::to_string(k) +
                             " (beta = " + std::to_string(beta) + ")");
    const double diff = distance(next, p, config.norm);
    if (observer) observer(k, next, enc);
    p.swap(next);
    fresh = true;
    if (diff < config.epsilon) {
      bool pruned = false;
      if (config.prune_tol > 0.0)
        for (std::size_t j = 0; j < m; ++j)
          if (p[j] > 0.0 && p[j] < config.prune_tol && p[j] < next[j]) {
            p[j] = 0.0;
            pruned = true;
          }
      if (!pruned) {
        sol.converged = true;
        break;
      }
      const double total = std::accumulate(p.begin(), p.end(), 0.0);
      for (double& v : p) v /= total;
      fresh = false;
    }
  }
  if (!fresh) {
    kernel.step(p, enc, next);
    p.swap(next);
  }
  sol.iterations = k;
  sol.marginal = normalize(p);
  sol.encoder = Channel::trusted(enc);
  sol.rate = mutual_information(problem.px(), sol.encoder);
  sol.distortion = expected_distortion(problem, sol.encoder);
  const auto f = residual_f(problem, sol.marginal, beta);
  std::vector<double> zero(m, 0.0);
  sol.residual = distance(f, zero, config.norm);
  return sol;
}

}  // namespace abspec
