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
 * \file   abspec/core_math.hpp
 * \brief  Simplex vectors, stochastic matrices and information measures.
 *
 * All logarithms are natural; every information quantity is in nats.
 * Conventions: 0 log 0 = 0 and p log(p/0) = +inf for p > 0.
 */

#pragma once

#include <abspec/errors.hpp>
#include <abspec/matrix.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace abspec {

/// Absolute tolerance on the simplex constraint sum(p) = 1.
inline constexpr double kSimplexTol = 1e-12;

/// Default threshold below which a probability counts as zero.
inline constexpr double kDefaultZeroTol = 1e-10;

class ProbVector;
ProbVector normalize(std::span<const double> v);

/// A point on the probability simplex.
///
/// Construction validates entries (finite, non-negative, positive total). A
/// vector whose sum is off by more than kSimplexTol is renormalized with a
/// warning rather than rejected, since iterates accumulate rounding.
class ProbVector {
 public:
  ProbVector() = default;

  explicit ProbVector(std::vector<double> entries) : p_(std::move(entries)) {
    const double total = checked_total(p_);
    if (std::abs(total - 1.0) > kSimplexTol) {
      warn("probability vector sums to " + std::to_string(total) + "; renormalizing");
      for (double& x : p_) x /= total;
    }
  }

  ProbVector(std::initializer_list<double> entries)
      : ProbVector(std::vector<double>(entries)) {}

  static ProbVector uniform(std::size_t n) {
    if (n == 0) throw DomainError("uniform distribution over an empty alphabet");
    return ProbVector(trusted, std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }

  static ProbVector point_mass(std::size_t n, std::size_t at) {
    if (at >= n) throw DomainError("point mass index out of range");
    std::vector<double> v(n, 0.0);
    v[at] = 1.0;
    return ProbVector(trusted, std::move(v));
  }

  std::size_t size() const noexcept { return p_.size(); }
  bool empty() const noexcept { return p_.empty(); }
  double operator[](std::size_t i) const noexcept { return p_[i]; }
  std::span<const double> values() const noexcept { return p_; }
  const std::vector<double>& vector() const noexcept { return p_; }
  auto begin() const noexcept { return p_.begin(); }
  auto end() const noexcept { return p_.end(); }

  friend bool operator==(const ProbVector&, const ProbVector&) = default;

 private:
  struct Trusted {};
  static constexpr Trusted trusted{};
  ProbVector(Trusted, std::vector<double> entries) : p_(std::move(entries)) {}

  friend ProbVector normalize(std::span<const double> v);

  static double checked_total(std::span<const double> v) {
    if (v.empty()) throw DomainError("probability vector must be non-empty");
    double total = 0.0;
    for (double x : v) {
      if (!std::isfinite(x)) throw DomainError("probability entry is not finite");
      if (x < 0.0) throw DomainError("probability entry is negative");
      total += x;
    }
    if (!(total > 0.0)) throw DomainError("probability vector has no positive mass");
    return total;
  }

  std::vector<double> p_;
};

/// Scales a non-negative vector onto the simplex.
///
/// Idempotent: a vector already summing to one within a few ulps is returned
/// entrywise unchanged, so normalize(normalize(v)) == normalize(v) exactly.
inline ProbVector normalize(std::span<const double> v) {
  const double total = ProbVector::checked_total(v);
  std::vector<double> out(v.begin(), v.end());
  const double slack = 4.0 * static_cast<double>(v.size()) * std::numeric_limits<double>::epsilon();
  if (std::abs(total - 1.0) > slack)
    for (double& x : out) x /= total;
  return ProbVector(ProbVector::trusted, std::move(out));
}

inline ProbVector normalize(const std::vector<double>& v) { return normalize(std::span<const double>(v)); }

/// Row-stochastic matrix; row i is a conditional distribution given input i.
class Channel {
 public:
  Channel() = default;

  explicit Channel(Matrix rows) : rows_(std::move(rows)) {
    if (rows_.rows() == 0 || rows_.cols() == 0) throw DomainError("channel must be non-empty");
    for (std::size_t i = 0; i < rows_.rows(); ++i) {
      auto r = rows_.row(i);
      double total = 0.0;
      for (double x : r) {
        if (!std::isfinite(x) || x < 0.0)
          throw DomainError("channel row " + std::to_string(i) + " has an invalid entry");
        total += x;
      }
      if (!(total > 0.0)) throw DomainError("channel row " + std::to_string(i) + " has no mass");
      if (std::abs(total - 1.0) > kSimplexTol) {
        warn("channel row " + std::to_string(i) + " sums to " + std::to_string(total) +
             "; renormalizing");
        for (double& x : r) x /= total;
      }
    }
  }

  static Channel from_rows(const std::vector<std::vector<double>>& rows) {
    return Channel(Matrix::from_rows(rows));
  }

  /// Skips validation; for rows produced by exact normalization internally.
  static Channel trusted(Matrix rows) {
    Channel c;
    c.rows_ = std::move(rows);
    return c;
  }

  std::size_t inputs() const noexcept { return rows_.rows(); }
  std::size_t outputs() const noexcept { return rows_.cols(); }
  std::span<const double> row(std::size_t i) const noexcept { return rows_.row(i); }
  double operator()(std::size_t i, std::size_t j) const noexcept { return rows_(i, j); }
  const Matrix& matrix() const noexcept { return rows_; }

  friend bool operator==(const Channel&, const Channel&) = default;

 private:
  Matrix rows_;
};

/// Ordered alphabet indices carrying mass above a zero threshold.
struct SupportSet {
  std::vector<std::size_t> indices;

  std::size_t size() const noexcept { return indices.size(); }
  bool contains(std::size_t i) const {
    return std::binary_search(indices.begin(), indices.end(), i);
  }
  friend bool operator==(const SupportSet&, const SupportSet&) = default;
};

inline SupportSet support(const ProbVector& p, double zero_tol = kDefaultZeroTol) {
  if (!(zero_tol >= 0.0 && zero_tol < 1.0)) throw DomainError("zero_tol must lie in [0, 1)");
  SupportSet s;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > zero_tol) s.indices.push_back(i);
  return s;
}

inline double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double x : p)
    if (x > 0.0) h -= x * std::log(x);
  return h;
}

inline double entropy(const ProbVector& p) { return entropy(p.values()); }

/// D(p || q) in nats; +inf when p is not absolutely continuous w.r.t. q.
inline double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw DomainError("kl_divergence: length mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
    d += p[i] * std::log(p[i] / q[i]);
  }
  // Rounding can push D(p||p) a hair below zero.
  return std::max(d, 0.0);
}

inline double kl_divergence(const ProbVector& p, const ProbVector& q) {
  return kl_divergence(p.values(), q.values());
}

/// True when supp p is contained in supp q, i.e. D(p||q) is finite.
inline bool absolutely_continuous(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw DomainError("absolutely_continuous: length mismatch");
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0 && q[i] <= 0.0) return false;
  return true;
}

/// Output distribution sum_x px(x) ch(x, .).
inline ProbVector output_marginal(const ProbVector& px, const Channel& ch) {
  if (ch.inputs() != px.size()) throw DomainError("channel input size does not match source");
  std::vector<double> out(ch.outputs(), 0.0);
  for (std::size_t x = 0; x < px.size(); ++x) {
    const auto r = ch.row(x);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += px[x] * r[j];
  }
  return normalize(out);
}

/// I(X;Y) = sum_x p(x) D(ch(x,.) || marginal).
inline double mutual_information(const ProbVector& px, const Channel& ch) {
  const ProbVector q = output_marginal(px, ch);
  double info = 0.0;
  for (std::size_t x = 0; x < px.size(); ++x) {
    if (px[x] <= 0.0) continue;
    const auto r = ch.row(x);
    double d = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j)
      // q[j] == 0 with r[j] > 0 only when p(x) r[j] underflowed; the term is
      // below the denormal range and is dropped.
      if (r[j] > 0.0 && q[j] > 0.0) d += r[j] * std::log(r[j] / q[j]);
    info += px[x] * std::max(d, 0.0);
  }
  return info;
}

}  // namespace abspec
