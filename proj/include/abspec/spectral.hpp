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
 * \file   abspec/spectral.hpp
 * \brief  Linearization of the AB fixed-point map and its spectrum.
 *
 * With u(x, j) = exp(-beta d(x,j)) / Z(x) the transposed Jacobian of the
 * residual at a fixed point is
 *
 *     A(j, k) = p(k) sum_x p(x) u(x, j) u(x, k)
 *
 * which factors as A = B B^T C with B(j, x) = sqrt(p(x)) u(x, j) and
 * C = diag(p). C^{1/2} A C^{-1/2} = C^{1/2} B B^T C^{1/2} is symmetric
 * positive semidefinite, so the spectrum is real and non-negative and can be
 * computed with a symmetric solver.
 */

#pragma once

#include <abspec/rd_solver.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace abspec {

struct JacobianA {
  Matrix entries;
  double beta = 0.0;
  ProbVector at_marginal;
  /// B(j, x) = sqrt(p(x)) exp(-beta d(x,j)) / Z(x), shape (m, n).
  Matrix gram_factor;
  /// Max-norm of the residual F at at_marginal.
  double fixed_point_residual = 0.0;
};

namespace detail {

/// u(x, j) = exp(-beta d(x,j)) / Z(x) at the point p, shape (n, m).
inline Matrix gibbs_weights(const RdProblem& problem, std::span<const double> p, double beta) {
  detail::GibbsKernel kernel(problem, beta);
  Matrix u(problem.source_size(), problem.reproduction_size());
  for (std::size_t x = 0; x < problem.source_size(); ++x) kernel.weights(p, x, u.row(x));
  for (double v : u.data())
    if (!std::isfinite(v)) throw NumericalError("Boltzmann weight overflow in Jacobian");
  return u;
}

}  // namespace detail

/// The matrix A evaluated verbatim at `marginal`. At a point that is not a
/// fixed point this still evaluates the formula, with a warning; the
/// residual is recorded in the result.
inline JacobianA jacobian_a(const RdProblem& problem, const ProbVector& marginal, double beta) {
  detail::check_marginal_shape(problem, marginal.size());
  const std::size_t n = problem.source_size();
  const std::size_t m = problem.reproduction_size();
  const Matrix u = detail::gibbs_weights(problem, marginal.values(), beta);

  JacobianA out;
  out.beta = beta;
  out.at_marginal = marginal;
  out.gram_factor = Matrix(m, n);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t x = 0; x < n; ++x)
      out.gram_factor(j, x) = std::sqrt(problem.px()[x]) * u(x, j);

  out.entries = Matrix(m, m);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t k = 0; k < m; ++k) {
      if (marginal[k] == 0.0) continue;
      double acc = 0.0;
      for (std::size_t x = 0; x < n; ++x) acc += problem.px()[x] * u(x, j) * u(x, k);
      out.entries(j, k) = marginal[k] * acc;
    }

  const auto f = residual_f(problem, marginal, beta);
  for (double v : f) out.fixed_point_residual = std::max(out.fixed_point_residual, std::abs(v));
  if (out.fixed_point_residual > 1e-6)
    warn("jacobian_a evaluated away from a fixed point (residual " +
         std::to_string(out.fixed_point_residual) + ")");
  return out;
}

/// Transposed Jacobian of F as a function on the positive orthant, valid at
/// any point: T(k, j) = dF_j / dp_k. Coincides with A where
/// sum_x p(x) u(x, j) = 1 for every j, which holds at interior fixed points.
inline Matrix residual_jacobian_t(const RdProblem& problem, std::span<const double> p,
                                  double beta) {
  detail::check_marginal_shape(problem, p.size());
  const std::size_t n = problem.source_size();
  const std::size_t m = problem.reproduction_size();
  const Matrix u = detail::gibbs_weights(problem, p, beta);
  Matrix t(m, m);
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t j = 0; j < m; ++j) {
      double acc = 0.0;
      for (std::size_t x = 0; x < n; ++x) acc += problem.px()[x] * u(x, j) * u(x, k);
      t(k, j) = p[j] * acc;
    }
  for (std::size_t j = 0; j < m; ++j) {
    double c = 0.0;
    for (std::size_t x = 0; x < n; ++x) c += problem.px()[x] * u(x, j);
    t(j, j) += 1.0 - c;
  }
  return t;
}

struct FdJacobian {
  /// Central differences, transposed: entries(k, j) ~ dF_j / dp_k.
  Matrix entries;
  /// Max |forward - backward| one-sided difference; large values mean the
  /// step is too coarse for the local curvature.
  double asymmetry = 0.0;
};

/// Finite-difference oracle for the transposed Jacobian of residual_f.
/// Coordinates are perturbed one at a time without renormalization.
inline FdJacobian jacobian_fd_oracle(const RdProblem& problem, std::span<const double> p,
                                     double beta, double step) {
  detail::check_marginal_shape(problem, p.size());
  if (!(step > 0.0 && step <= 1e-3)) throw DomainError("finite-difference step must lie in (0, 1e-3]");
  for (double v : p)
    if (!(v > step)) throw DomainError("finite-difference oracle needs a strictly interior point");
  const std::size_t m = p.size();
  const auto f0 = residual_f(problem, p, beta);
  FdJacobian out{Matrix(m, m), 0.0};
  std::vector<double> q(p.begin(), p.end());
  for (std::size_t k = 0; k < m; ++k) {
    q[k] = p[k] + step;
    const auto fp = residual_f(problem, q, beta);
    q[k] = p[k] - step;
    const auto fm = residual_f(problem, q, beta);
    q[k] = p[k];
    for (std::size_t j = 0; j < m; ++j) {
      out.entries(k, j) = (fp[j] - fm[j]) / (2.0 * step);
      const double fwd = (fp[j] - f0[j]) / step;
      const double bwd = (f0[j] - fm[j]) / step;
      out.asymmetry = std::max(out.asymmetry, std::abs(fwd - bwd));
    }
  }
  return out;
}

inline FdJacobian jacobian_fd_oracle(const RdProblem& problem, const ProbVector& p, double beta,
                                     double step = 1e-6) {
  return jacobian_fd_oracle(problem, p.values(), beta, step);
}

/// C^{1/2} A C^{-1/2} on the coordinates with positive mass, zero elsewhere.
/// Computed from the entries of A, so its symmetry is a genuine check.
inline Matrix similarity_transform(const JacobianA& a) {
  const std::size_t m = a.entries.rows();
  Matrix s(m, m);
  const auto& p = a.at_marginal;
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t k = 0; k < m; ++k)
      if (p[j] > 0.0 && p[k] > 0.0) s(j, k) = std::sqrt(p[j]) * a.entries(j, k) / std::sqrt(p[k]);
  return s;
}

/// Gram form C^{1/2} B B^T C^{1/2} restricted to the positive-mass block,
/// returned together with the block's index list.
inline Matrix symmetrized_gram(const JacobianA& a, std::vector<std::size_t>* block = nullptr) {
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < a.at_marginal.size(); ++j)
    if (a.at_marginal[j] > 0.0) idx.push_back(j);
  const std::size_t k = idx.size();
  const std::size_t n = a.gram_factor.cols();
  Matrix s(k, k);
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t c = r; c < k; ++c) {
      double acc = 0.0;
      for (std::size_t x = 0; x < n; ++x) acc += a.gram_factor(idx[r], x) * a.gram_factor(idx[c], x);
      s(r, c) = s(c, r) = std::sqrt(a.at_marginal[idx[r]] * a.at_marginal[idx[c]]) * acc;
    }
  if (block) *block = std::move(idx);
  return s;
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
inline std::vector<double> symmetric_eigenvalues(Matrix s) {
  const std::size_t n = s.rows();
  if (s.cols() != n) throw DomainError("symmetric_eigenvalues needs a square matrix");
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j) off += s(i, j) * s(i, j);
        scale += s(i, j) * s(i, j);
      }
    if (off <= 1e-30 * scale || off == 0.0) break;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = s(p, q);
        if (apq == 0.0) continue;
        const double theta = (s(q, q) - s(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t r = 0; r < n; ++r) {
          const double srp = s(r, p), srq = s(r, q);
          s(r, p) = c * srp - sn * srq;
          s(r, q) = sn * srp + c * srq;
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double spr = s(p, r), sqr = s(q, r);
          s(p, r) = c * spr - sn * sqr;
          s(q, r) = sn * spr + c * sqr;
        }
        s(p, q) = s(q, p) = 0.0;
      }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = s(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

struct SpectralReport {
  double beta = 0.0;
  /// All m eigenvalues of A, ascending.
  std::vector<double> eigenvalues;
  std::size_t kernel_dim = 0;
  std::size_t support_size = 0;
  /// Smallest eigenvalue above zero_tol.
  double lambda0 = 0.0;
  /// 1 - lambda0, the slowest contracting mode of the AB step.
  double lambda_max_ab = 0.0;
  /// 1 / (-log lambda_max_ab); +inf when critical.
  double predicted_rate = 0.0;
  double zero_tol = kDefaultZeroTol;
  /// A near-zero eigenvalue on the support block: the local rate law fails.
  bool critical = false;
  double fixed_point_residual = 0.0;
};

inline double rate_from_lambda_max(double lambda_max) {
  if (lambda_max >= 1.0) return std::numeric_limits<double>::infinity();
  if (lambda_max <= 0.0) return 0.0;
  return 1.0 / -std::log(lambda_max);
}

inline SpectralReport eigen_spectrum(const JacobianA& a, double zero_tol = kDefaultZeroTol) {
  if (!(zero_tol >= 0.0 && zero_tol < 1.0)) throw DomainError("zero_tol must lie in [0, 1)");
  const std::size_t m = a.entries.rows();
  SpectralReport r;
  r.beta = a.beta;
  r.zero_tol = zero_tol;
  r.fixed_point_residual = a.fixed_point_residual;

  std::vector<std::size_t> block;
  const auto block_ev = symmetric_eigenvalues(symmetrized_gram(a, &block));
  r.eigenvalues.assign(m - block.size(), 0.0);
  r.eigenvalues.insert(r.eigenvalues.end(), block_ev.begin(), block_ev.end());
  std::sort(r.eigenvalues.begin(), r.eigenvalues.end());
  if (r.eigenvalues.front() < -1e-8)
    throw NumericalError("negative eigenvalue " + std::to_string(r.eigenvalues.front()) +
                         " in a positive semidefinite spectrum");

  r.support_size = support(a.at_marginal, zero_tol).size();
  std::size_t below = 0;
  r.lambda0 = std::numeric_limits<double>::infinity();
  for (double v : r.eigenvalues) {
    if (v < zero_tol)
      ++below;
    else
      r.lambda0 = std::min(r.lambda0, v);
  }
  r.kernel_dim = below;
  r.lambda_max_ab = 1.0 - r.lambda0;
  std::size_t block_below = 0;
  for (double v : block_ev)
    if (v < zero_tol) ++block_below;
  r.critical = block_below > 0;
  r.predicted_rate = r.critical ? std::numeric_limits<double>::infinity()
                                : rate_from_lambda_max(r.lambda_max_ab);
  return r;
}

inline SpectralReport spectral_report(const RdProblem& problem, const ProbVector& marginal,
                                      double beta, double zero_tol = kDefaultZeroTol) {
  return eigen_spectrum(jacobian_a(problem, marginal, beta), zero_tol);
}

/// (-log epsilon) / (-log lambda_max): the constant-free iteration count.
inline double predicted_iterations(const SpectralReport& report, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in (0, 1)");
  if (report.critical) return std::numeric_limits<double>::infinity();
  return -std::log(epsilon) * rate_from_lambda_max(report.lambda_max_ab);
}

inline double predicted_iterations(double lambda_max, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in (0, 1)");
  return -std::log(epsilon) * rate_from_lambda_max(lambda_max);
}

struct KernelCheck {
  std::size_t kernel_dim = 0;
  std::size_t support_size = 0;
  bool consistent = false;
};

inline KernelCheck kernel_dimension_check(const RdProblem& problem, const RdSolution& solution,
                                          double zero_tol = kDefaultZeroTol) {
  const auto r = spectral_report(problem, solution.marginal, solution.beta, zero_tol);
  KernelCheck k;
  k.kernel_dim = r.kernel_dim;
  k.support_size = r.support_size;
  k.consistent = k.kernel_dim == problem.reproduction_size() - k.support_size;
  return k;
}

}  // namespace abspec
