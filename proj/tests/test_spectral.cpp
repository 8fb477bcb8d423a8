// Copyright (c) 2026, The abspec Authors.
// SPDX-License-Identifier: Apache-2.0

#include "test_util.hpp"

#include <abspec/spectral.hpp>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace abspec;
using abspec::testing::CaptureWarnings;
using abspec::testing::random_rd_problem;

namespace {

std::vector<double> nonsymmetric_eigenvalues(const Matrix& a, double* max_imag) {
  const auto m = static_cast<Eigen::Index>(a.rows());
  Eigen::MatrixXd e(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) e(i, j) = a(i, j);
  Eigen::EigenSolver<Eigen::MatrixXd> solver(e, false);
  std::vector<double> out;
  *max_imag = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    out.push_back(solver.eigenvalues()[i].real());
    *max_imag = std::max(*max_imag, std::abs(solver.eigenvalues()[i].imag()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Fixed point with full support: random problem at moderate beta, solved
/// tightly, retried until every coordinate is well above zero.
struct InteriorFixedPoint {
  RdProblem problem;
  RdSolution solution;
};

InteriorFixedPoint interior_fixed_point(Rng& rng, std::size_t n, std::size_t m) {
  SolverConfig cfg;
  cfg.epsilon = 1e-14;
  cfg.max_iterations = 100'000;
  for (;;) {
    auto prob = random_rd_problem(n, m, rng);
    const double beta = 2.0 + 20.0 * uniform01(rng);
    auto sol = solve(prob, beta, ProbVector::uniform(m), cfg);
    if (!sol.converged) continue;
    if (*std::min_element(sol.marginal.begin(), sol.marginal.end()) > 1e-3)
      return {std::move(prob), std::move(sol)};
  }
}

}  // namespace

TEST(JacobianA, BetaZeroRowsEqualMarginal) {
  Rng rng(21);
  const auto prob = random_rd_problem(4, 3, rng);
  const ProbVector p{0.2, 0.3, 0.5};
  const auto a = jacobian_a(prob, p, 0.0);
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(a.entries(j, k), p[k], 1e-15);
  const auto r = eigen_spectrum(a);
  EXPECT_EQ(r.kernel_dim, 2u);
  EXPECT_NEAR(r.eigenvalues[0], 0.0, 1e-14);
  EXPECT_NEAR(r.eigenvalues[1], 0.0, 1e-14);
  EXPECT_NEAR(r.eigenvalues[2], 1.0, 1e-14);
}

TEST(JacobianA, SingleRepresentative) {
  const RdProblem prob(ProbVector{0.3, 0.7}, Matrix::from_rows({{0.2}, {0.9}}));
  const auto a = jacobian_a(prob, ProbVector{1.0}, 3.0);
  EXPECT_NEAR(a.entries(0, 0), 1.0, 1e-15);
  const auto r = eigen_spectrum(a);
  EXPECT_EQ(r.kernel_dim, 0u);
  EXPECT_NEAR(r.eigenvalues[0], 1.0, 1e-15);
  const auto fd = jacobian_fd_oracle(prob, ProbVector{1.0}, 3.0, 1e-6);
  EXPECT_NEAR(fd.entries(0, 0), 1.0, 1e-8);
}

TEST(JacobianA, WarnsAwayFromFixedPoint) {
  Rng rng(22);
  const auto prob = random_rd_problem(4, 4, rng);
  CaptureWarnings w;
  const auto a = jacobian_a(prob, ProbVector{0.7, 0.1, 0.1, 0.1}, 8.0);
  EXPECT_EQ(w.seen.size(), 1u);
  EXPECT_GT(a.fixed_point_residual, 1e-6);
}

TEST(JacobianA, ZeroColumnsExactlyAtZeroMass) {
  Rng rng(23);
  for (int t = 0; t < 50; ++t) {
    const auto prob = random_rd_problem(4, 5, rng);
    auto pv = dirichlet1(5, rng).vector();
    pv[t % 5] = 0.0;
    pv[(t + 2) % 5] = 0.0;
    const auto p = normalize(pv);
    CaptureWarnings quiet;
    const auto a = jacobian_a(prob, p, 10.0 * uniform01(rng));
    for (std::size_t k = 0; k < 5; ++k) {
      double col = 0.0;
      for (std::size_t j = 0; j < 5; ++j) col = std::max(col, std::abs(a.entries(j, k)));
      if (p[k] == 0.0)
        EXPECT_EQ(col, 0.0);
      else
        EXPECT_GT(col, 1e-12);
    }
  }
}

TEST(JacobianA, RowStochasticAndEq6AtFullSupportFixedPoint) {
  Rng rng(24);
  for (int t = 0; t < 20; ++t) {
    const auto fp = interior_fixed_point(rng, 2 + t % 4 + (t / 5) % 3, 2 + (t / 5) % 3);
    const auto& sol = fp.solution;
    const auto a = jacobian_a(fp.problem, sol.marginal, sol.beta);
    const std::size_t m = sol.marginal.size();
    for (std::size_t j = 0; j < m; ++j) {
      double row = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        row += a.entries(j, k);
        // Posterior form: sum_x p(k|x) p(x|j), with p(x|j) = p(x) p(j|x) / p(j).
        double alt = 0.0;
        for (std::size_t x = 0; x < fp.problem.source_size(); ++x)
          alt += sol.encoder(x, k) * fp.problem.px()[x] * sol.encoder(x, j) / sol.marginal[j];
        EXPECT_NEAR(a.entries(j, k), alt, 1e-12);
      }
      EXPECT_NEAR(row, 1.0, 1e-10);
    }
  }
}

TEST(JacobianA, MatchesFiniteDifferencesAtInteriorFixedPoints) {
  Rng rng(25);
  for (int t = 0; t < 20; ++t) {
    const auto fp = interior_fixed_point(rng, 2 + t % 4 + (t / 5) % 3, 2 + (t / 5) % 3);
    const auto a = jacobian_a(fp.problem, fp.solution.marginal, fp.solution.beta);
    const auto fd = jacobian_fd_oracle(fp.problem, fp.solution.marginal, fp.solution.beta, 1e-6);
    double err = 0.0;
    for (std::size_t i = 0; i < a.entries.data().size(); ++i)
      err = std::max(err, std::abs(a.entries.data()[i] - fd.entries.data()[i]));
    EXPECT_LE(err, 1e-6);
  }
}

TEST(ResidualJacobian, MatchesFiniteDifferencesAnywhere) {
  Rng rng(26);
  for (int t = 0; t < 40; ++t) {
    const std::size_t m = 2 + t % 5;
    const auto prob = random_rd_problem(2 + (t / 5) % 5, m, rng);
    auto p = dirichlet1(m, rng).vector();
    for (double& v : p) v = 0.05 + v;  // off the simplex on purpose
    const double beta = 10.0 * uniform01(rng);
    const auto g = residual_jacobian_t(prob, p, beta);
    const auto fd = jacobian_fd_oracle(prob, p, beta, 1e-6);
    for (std::size_t i = 0; i < g.data().size(); ++i)
      EXPECT_NEAR(g.data()[i], fd.entries.data()[i], 1e-6);
  }
}

TEST(FdOracle, Preconditions) {
  Rng rng(27);
  const auto prob = random_rd_problem(3, 3, rng);
  EXPECT_THROW(jacobian_fd_oracle(prob, ProbVector::uniform(3), 1.0, 1e-2), DomainError);
  EXPECT_THROW(jacobian_fd_oracle(prob, ProbVector{0.5, 0.5, 0.0}, 1.0, 1e-6), DomainError);
  const auto fd = jacobian_fd_oracle(prob, ProbVector{0.2, 0.3, 0.5}, 0.0, 1e-6);
  for (std::size_t j = 0; j < 3; ++j)
    EXPECT_NEAR(fd.entries(j, 1), 0.3, 1e-8);
  EXPECT_LT(fd.asymmetry, 1e-4);
}

TEST(Spectrum, SymmetryRangeAndOracleAgreement) {
  Rng rng(28);
  for (int t = 0; t < 60; ++t) {
    const std::size_t m = 1 + t % 5;
    const auto prob = random_rd_problem(1 + (t / 5) % 6, m, rng);
    const double beta = 0.5 + 49.5 * uniform01(rng);
    const auto sol = solve(prob, beta, ProbVector::uniform(m), SolverConfig{});
    ASSERT_TRUE(sol.converged);
    const auto a = jacobian_a(prob, sol.marginal, beta);
    const auto s = similarity_transform(a);
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t k = 0; k < m; ++k) EXPECT_NEAR(s(j, k), s(k, j), 1e-10);
    const auto r = eigen_spectrum(a);
    ASSERT_EQ(r.eigenvalues.size(), m);
    for (double v : r.eigenvalues) {
      EXPECT_GE(v, -1e-8);
      EXPECT_LE(v, 1.0 + 1e-8);
    }
    double imag = 0.0;
    const auto ref = nonsymmetric_eigenvalues(a.entries, &imag);
    EXPECT_LT(imag, 1e-7);
    for (std::size_t i = 0; i < m; ++i) EXPECT_NEAR(ref[i], r.eigenvalues[i], 1e-7);
    EXPECT_EQ(r.kernel_dim + r.support_size, m);
  }
}

TEST(Spectrum, OneZeroCoordinateGivesKernelOne) {
  // Three points on a line with unequal weights: the middle and the heavy end
  // are used first, the light end enters at a higher beta.
  const RdProblem prob(ProbVector{0.5, 0.35, 0.15},
                       Matrix::from_rows({{0.0, 0.25, 1.0}, {0.25, 0.0, 0.25}, {1.0, 0.25, 0.0}}));
  std::size_t hits = 0;
  for (double beta = 1.0; beta < 40.0; beta *= 1.05) {
    const auto sol = solve(prob, beta, ProbVector::uniform(3), SolverConfig{});
    ASSERT_TRUE(sol.converged);
    const auto r = spectral_report(prob, sol.marginal, beta);
    ASSERT_EQ(r.kernel_dim + r.support_size, 3u) << "beta " << beta;
    if (r.support_size != 2) continue;
    ++hits;
    EXPECT_EQ(r.kernel_dim, 1u);
    const auto check = kernel_dimension_check(prob, sol);
    EXPECT_TRUE(check.consistent);
    double imag = 0.0;
    const auto ref = nonsymmetric_eigenvalues(jacobian_a(prob, sol.marginal, beta).entries, &imag);
    const auto zeros = std::count_if(ref.begin(), ref.end(), [](double v) { return std::abs(v) < 1e-10; });
    EXPECT_EQ(zeros, 1);
  }
  EXPECT_GT(hits, 0u);
}

TEST(Spectrum, KernelCheckFullSupport) {
  Rng rng(29);
  const auto fp = interior_fixed_point(rng, 5, 4);
  const auto k = kernel_dimension_check(fp.problem, fp.solution);
  EXPECT_EQ(k.kernel_dim, 0u);
  EXPECT_EQ(k.support_size, 4u);
  EXPECT_TRUE(k.consistent);
}

TEST(PredictedIterations, Examples) {
  EXPECT_NEAR(predicted_iterations(std::exp(-1.0), std::exp(-10.0)), 10.0, 1e-12);
  EXPECT_NEAR(predicted_iterations(0.5, 1e-9), 29.897, 1e-3);
  EXPECT_TRUE(std::isinf(predicted_iterations(1.0, 1e-9)));
  SpectralReport crit;
  crit.critical = true;
  crit.lambda_max_ab = 1.0;
  EXPECT_TRUE(std::isinf(predicted_iterations(crit, 1e-9)));
}

TEST(SymmetricEigen, MatchesKnownSpectrum) {
  const auto m = Matrix::from_rows({{2, 1, 0}, {1, 2, 1}, {0, 1, 2}});
  const auto ev = symmetric_eigenvalues(m);
  EXPECT_NEAR(ev[0], 2.0 - std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(ev[1], 2.0, 1e-14);
  EXPECT_NEAR(ev[2], 2.0 + std::sqrt(2.0), 1e-14);
}
