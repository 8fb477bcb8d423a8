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
 * \file   abspec/ib_solver.hpp
 * \brief  Information bottleneck iteration, effective cardinality and the
 *         tangent rate-distortion problem.
 *
 * The IB iteration is AB with a distortion that moves: each step recomputes
 * the decoder p(y|x^) from the encoder, sets d(x,x^) = D(p(y|x) || p(y|x^)),
 * and then applies the Boltzmann encoder and marginal updates.
 */

#pragma once

#include <abspec/random.hpp>
#include <abspec/rd_solver.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace abspec {

class IbProblem {
 public:
  /// From a joint distribution p(x, y), rows indexed by x.
  static IbProblem from_joint(const Matrix& pxy, std::size_t m_cap = 0) {
    if (pxy.rows() == 0 || pxy.cols() == 0) throw DomainError("joint distribution must be non-empty");
    const ProbVector flat(std::vector<double>(pxy.data().begin(), pxy.data().end()));
    Matrix joint(pxy.rows(), pxy.cols());
    std::copy(flat.begin(), flat.end(), joint.data().begin());
    std::vector<double> px(pxy.rows(), 0.0);
    for (std::size_t x = 0; x < joint.rows(); ++x)
      for (double v : joint.row(x)) px[x] += v;
    Matrix cond(joint.rows(), joint.cols());
    for (std::size_t x = 0; x < joint.rows(); ++x) {
      if (!(px[x] > 0.0)) throw DomainError("marginal p(x) must be strictly positive");
      for (std::size_t y = 0; y < joint.cols(); ++y) cond(x, y) = joint(x, y) / px[x];
    }
    return IbProblem(normalize(px), Channel(std::move(cond)), m_cap);
  }

  static IbProblem from_conditional(ProbVector px, Channel py_given_x, std::size_t m_cap = 0) {
    return IbProblem(std::move(px), std::move(py_given_x), m_cap);
  }

  const ProbVector& px() const noexcept { return px_; }
  const Channel& py_given_x() const noexcept { return pyx_; }
  const ProbVector& py() const noexcept { return py_; }
  std::size_t source_size() const noexcept { return px_.size(); }
  std::size_t relevant_size() const noexcept { return pyx_.outputs(); }
  /// Representation alphabet size.
  std::size_t m() const noexcept { return m_; }
  double relevant_bound() const noexcept { return ixy_; }

  Matrix joint() const {
    Matrix out(source_size(), relevant_size());
    for (std::size_t x = 0; x < source_size(); ++x)
      for (std::size_t y = 0; y < relevant_size(); ++y) out(x, y) = px_[x] * pyx_(x, y);
    return out;
  }

 private:
  IbProblem(ProbVector px, Channel pyx, std::size_t m_cap)
      : px_(std::move(px)), pyx_(std::move(pyx)), m_(m_cap == 0 ? px_.size() : m_cap) {
    if (pyx_.inputs() != px_.size())
      throw DomainError("p(y|x) has " + std::to_string(pyx_.inputs()) + " rows but p(x) has " +
                        std::to_string(px_.size()) + " entries");
    for (double v : px_)
      if (!(v > 0.0)) throw DomainError("marginal p(x) must be strictly positive");
    py_ = output_marginal(px_, pyx_);
    ixy_ = mutual_information(px_, pyx_);
    if (!(ixy_ > 0.0)) throw DomainError("I(X;Y) must be positive");
  }

  ProbVector px_;
  Channel pyx_;
  ProbVector py_;
  std::size_t m_ = 0;
  double ixy_ = 0.0;
};

/// The iterated triple. The marginal is always the p(x)-average of the encoder.
struct IbState {
  Channel encoder;
  ProbVector marginal;
  Channel decoder;
};

struct IbSolution {
  double beta = 0.0;
  Channel encoder;
  ProbVector marginal;
  Channel decoder;
  /// I(X; X^)
  double rate = 0.0;
  /// I(X^; Y)
  double relevant_info = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Bayes decoder p(y|x^) = sum_x p(y|x) p(x^|x) p(x) / p(x^). Rows with zero
/// mass are set to p(y).
inline Channel ib_decoder_step(const IbProblem& problem, const Channel& encoder,
                               const ProbVector& marginal) {
  if (encoder.inputs() != problem.source_size() || encoder.outputs() != marginal.size())
    throw DomainError("encoder shape does not match the problem");
  const std::size_t m = marginal.size(), ny = problem.relevant_size();
  Matrix dec(m, ny);
  for (std::size_t j = 0; j < m; ++j) {
    auto row = dec.row(j);
    double mass = 0.0;
    for (std::size_t x = 0; x < problem.source_size(); ++x) {
      const double w = problem.px()[x] * encoder(x, j);
      if (w == 0.0) continue;
      mass += w;
      for (std::size_t y = 0; y < ny; ++y) row[y] += w * problem.py_given_x()(x, y);
    }
    if (marginal[j] == 0.0 || mass == 0.0) {
      std::copy(problem.py().begin(), problem.py().end(), row.begin());
      continue;
    }
    for (double& v : row) v /= mass;
  }
  return Channel::trusted(std::move(dec));
}

/// d(x, x^) = D(p(y|x) || decoder(x^)); +inf where the decoder misses
/// support of p(y|x).
inline Matrix ib_distortion(const IbProblem& problem, const Channel& decoder) {
  if (decoder.outputs() != problem.relevant_size())
    throw DomainError("decoder rows must be distributions over Y");
  Matrix d(problem.source_size(), decoder.inputs());
  for (std::size_t x = 0; x < problem.source_size(); ++x)
    for (std::size_t j = 0; j < decoder.inputs(); ++j)
      d(x, j) = kl_divergence(problem.py_given_x().row(x), decoder.row(j));
  return d;
}

namespace detail {

/// Boltzmann encoder for a distortion that may contain +inf. Each row is
/// shifted by its smallest distortion on the support of p.
inline Matrix boltzmann_encoder(const Matrix& d, std::span<const double> p, double beta) {
  Matrix enc(d.rows(), d.cols());
  for (std::size_t x = 0; x < d.rows(); ++x) {
    const auto dr = d.row(x);
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < dr.size(); ++j)
      if (p[j] > 0.0) lo = std::min(lo, dr[j]);
    if (!std::isfinite(lo))
      throw DomainError("source symbol " + std::to_string(x) +
                        " has infinite distortion to every used representative");
    auto row = enc.row(x);
    double z = 0.0;
    for (std::size_t j = 0; j < dr.size(); ++j) {
      row[j] = p[j] > 0.0 && std::isfinite(dr[j]) ? p[j] * std::exp(-beta * (dr[j] - lo)) : 0.0;
      z += row[j];
    }
    for (double& v : row) v /= z;
  }
  return enc;
}

inline ProbVector encoder_average(const ProbVector& px, const Matrix& enc) {
  std::vector<double> q(enc.cols(), 0.0);
  for (std::size_t x = 0; x < enc.rows(); ++x)
    for (std::size_t j = 0; j < enc.cols(); ++j) q[j] += px[x] * enc(x, j);
  return normalize(q);
}

}  // namespace detail

inline IbState ib_state_from_encoder(const IbProblem& problem, Channel encoder) {
  if (encoder.inputs() != problem.source_size())
    throw DomainError("encoder has " + std::to_string(encoder.inputs()) + " rows, expected " +
                      std::to_string(problem.source_size()));
  IbState s;
  s.marginal = detail::encoder_average(problem.px(), encoder.matrix());
  s.decoder = ib_decoder_step(problem, encoder, s.marginal);
  s.encoder = std::move(encoder);
  return s;
}

/// One IB step: decoder, then encoder with the decoder's distortion, then
/// marginal. The returned decoder is the one used for the encoder update.
inline IbState ib_step(const IbProblem& problem, const IbState& state, double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw DomainError("beta must be finite and >= 0");
  IbState next;
  next.decoder = ib_decoder_step(problem, state.encoder, state.marginal);
  const Matrix d = ib_distortion(problem, next.decoder);
  next.encoder = Channel::trusted(detail::boltzmann_encoder(d, state.marginal.values(), beta));
  next.marginal = detail::encoder_average(problem.px(), next.encoder.matrix());
  return next;
}

/// Encoder distance: L-inf over all entries, or the largest row-wise L1.
inline double encoder_distance(const Channel& a, const Channel& b, Norm norm) {
  double out = 0.0;
  for (std::size_t x = 0; x < a.inputs(); ++x)
    out = std::max(out, distance(a.row(x), b.row(x), norm));
  return out;
}

/// I(X;X^) - beta I(X^;Y) as a function of the state's encoder. The
/// decoder is recomputed from the encoder, since the one stored by ib_step
/// belongs to the previous encoder.
inline double ib_lagrangian(const IbProblem& problem, const IbState& state, double beta) {
  const Channel dec = ib_decoder_step(problem, state.encoder, state.marginal);
  return mutual_information(problem.px(), state.encoder) - beta * mutual_information(state.marginal, dec);
}

using IbObserver = std::function<void(std::size_t, const IbState&)>;

/// Iterates ib_step until successive encoders are closer than epsilon.
/// Pruning follows the RD solver: after convergence, representatives whose
/// mass is below prune_tol and still falling are removed and the iteration
/// resumes.
inline IbSolution ib_solve(const IbProblem& problem, double beta, const Channel& init_encoder,
                           const SolverConfig& config, const IbObserver& observer = {}) {
  config.validate();
  if (init_encoder.outputs() != problem.m())
    throw DomainError("initial encoder has " + std::to_string(init_encoder.outputs()) +
                      " columns, expected " + std::to_string(problem.m()));
  IbState state = ib_state_from_encoder(problem, init_encoder);
  IbSolution sol;
  sol.beta = beta;
  std::size_t k = 0;
  while (k < config.max_iterations) {
    IbState next = ib_step(problem, state, beta);
    ++k;
    for (double v : next.encoder.matrix().data())
      if (!std::isfinite(v))
        throw NumericalError("non-finite encoder at step " + std::to_string(k) +
                             " (beta = " + std::to_string(beta) + ")");
    const double diff = encoder_distance(next.encoder, state.encoder, config.norm);
    if (observer) observer(k, next);
    const ProbVector prev_marginal = state.marginal;
    state = std::move(next);
    if (diff >= config.epsilon) continue;

    std::vector<std::size_t> drop;
    if (config.prune_tol > 0.0)
      for (std::size_t j = 0; j < problem.m(); ++j)
        if (state.marginal[j] > 0.0 && state.marginal[j] < config.prune_tol &&
            state.marginal[j] < prev_marginal[j])
          drop.push_back(j);
    if (drop.empty()) {
      sol.converged = true;
      break;
    }
    Matrix enc = state.encoder.matrix();
    for (std::size_t x = 0; x < enc.rows(); ++x) {
      auto row = enc.row(x);
      for (std::size_t j : drop) row[j] = 0.0;
      double total = 0.0;
      for (double v : row) total += v;
      for (double& v : row) v /= total;
    }
    state = ib_state_from_encoder(problem, Channel::trusted(std::move(enc)));
  }
  sol.iterations = k;
  // Report a decoder consistent with the returned encoder.
  sol.decoder = ib_decoder_step(problem, state.encoder, state.marginal);
  sol.encoder = std::move(state.encoder);
  sol.marginal = std::move(state.marginal);
  sol.rate = mutual_information(problem.px(), sol.encoder);
  sol.relevant_info = mutual_information(sol.marginal, sol.decoder);
  return sol;
}

/// A group of representatives whose decoders coincide within merge_tol.
struct DecoderClass {
  std::vector<std::size_t> members;
  double mass = 0.0;
  /// Mass-weighted mean of the members' decoders.
  std::vector<double> decoder;
};

/// Greedy L-inf clustering of decoder rows with mass above zero_tol, in
/// index order.
inline std::vector<DecoderClass> class_representatives(const IbSolution& solution, double merge_tol,
                                                       double zero_tol = kDefaultZeroTol) {
  if (!(merge_tol > 0.0)) throw DomainError("merge_tol must be positive");
  std::vector<DecoderClass> classes;
  std::vector<std::size_t> leader;
  for (std::size_t j = 0; j < solution.marginal.size(); ++j) {
    if (!(solution.marginal[j] > zero_tol)) continue;
    const auto row = solution.decoder.row(j);
    std::size_t c = 0;
    for (; c < classes.size(); ++c)
      if (distance(row, solution.decoder.row(leader[c]), Norm::Linf) <= merge_tol) break;
    if (c == classes.size()) {
      classes.push_back({{}, 0.0, std::vector<double>(row.size(), 0.0)});
      leader.push_back(j);
    }
    auto& cls = classes[c];
    cls.members.push_back(j);
    cls.mass += solution.marginal[j];
    for (std::size_t y = 0; y < row.size(); ++y) cls.decoder[y] += solution.marginal[j] * row[y];
  }
  for (auto& cls : classes)
    for (double& v : cls.decoder) v /= cls.mass;
  return classes;
}

/// Number of distinct decoders among representatives with positive mass.
inline std::size_t effective_cardinality(const IbSolution& solution, double merge_tol,
                                         double zero_tol = kDefaultZeroTol) {
  return class_representatives(solution, merge_tol, zero_tol).size();
}

struct TangentProblem {
  RdProblem problem;
  /// -1 for a column taken from the lower-beta solution, +1 for the upper.
  std::vector<int> side;
  /// Decoder behind each column.
  Matrix decoders;
  std::size_t minus_count = 0;
  /// Columns standing for the upper solution's classes, deduplicated ones
  /// included through the lower-side column that replaced them.
  std::vector<std::size_t> plus_block;
};

/// Fixed-distortion RD problem over the union of the class representatives of
/// two IB solutions, d*(x, c) = D(p(y|x) || decoder_c). Upper-side decoders
/// within dedup_tol of a lower-side one are dropped.
inline TangentProblem tangent_rd(const IbProblem& problem, const IbSolution& sol_minus,
                                 const IbSolution& sol_plus, double merge_tol,
                                 double dedup_tol = 0.0, double zero_tol = kDefaultZeroTol) {
  if (!(sol_minus.beta < sol_plus.beta))
    throw DomainError("tangent_rd needs beta_minus < beta_plus");
  if (dedup_tol <= 0.0) dedup_tol = merge_tol;
  const auto lo = class_representatives(sol_minus, merge_tol, zero_tol);
  const auto hi = class_representatives(sol_plus, merge_tol, zero_tol);
  std::vector<std::vector<double>> cols;
  std::vector<int> side;
  for (const auto& c : lo) {
    cols.push_back(c.decoder);
    side.push_back(-1);
  }
  std::vector<std::size_t> plus;
  for (const auto& c : hi) {
    std::size_t dup = lo.size();
    for (std::size_t l = 0; l < lo.size() && dup == lo.size(); ++l)
      if (distance(c.decoder, lo[l].decoder, Norm::Linf) <= dedup_tol) dup = l;
    if (dup < lo.size()) {
      if (std::find(plus.begin(), plus.end(), dup) == plus.end()) plus.push_back(dup);
      continue;
    }
    plus.push_back(cols.size());
    cols.push_back(c.decoder);
    side.push_back(+1);
  }
  std::sort(plus.begin(), plus.end());
  Matrix decoders = Matrix::from_rows(cols);
  const Matrix d = ib_distortion(problem, Channel::trusted(decoders));
  for (double v : d.data())
    if (!std::isfinite(v))
      throw DomainError("tangent distortion is infinite: a decoder misses the support of p(y|x)");
  TangentProblem out{RdProblem(problem.px(), d), std::move(side), std::move(decoders), lo.size(),
                     std::move(plus)};
  return out;
}

/// Uniform marginal with one decoder per source symbol (p(y|x^ = i) =
/// p(y|x = i)), turned into an encoder at the given beta.
inline Channel ib_uniform_init(const IbProblem& problem, double beta) {
  const std::size_t m = problem.m(), n = problem.source_size();
  Matrix dec(m, problem.relevant_size());
  for (std::size_t j = 0; j < m; ++j) {
    const auto src = j < n ? problem.py_given_x().row(j) : problem.py().values();
    std::copy(src.begin(), src.end(), dec.row(j).begin());
  }
  const Matrix d = ib_distortion(problem, Channel::trusted(std::move(dec)));
  const auto q = ProbVector::uniform(m);
  return Channel::trusted(detail::boltzmann_encoder(d, q.values(), beta));
}

/// (1 - mix) * deterministic map x -> x mod m, plus mix spread uniformly.
inline Channel ib_near_identity_init(const IbProblem& problem, double mix = 0.1) {
  if (!(mix > 0.0 && mix <= 1.0)) throw DomainError("mix must lie in (0, 1]");
  const std::size_t m = problem.m();
  Matrix enc(problem.source_size(), m, mix / static_cast<double>(m));
  for (std::size_t x = 0; x < enc.rows(); ++x) enc(x, x % m) += 1.0 - mix;
  return Channel::trusted(std::move(enc));
}

inline Channel ib_dirichlet_init(const IbProblem& problem, Rng& rng) {
  Matrix enc(problem.source_size(), problem.m());
  for (std::size_t x = 0; x < enc.rows(); ++x) {
    const auto r = dirichlet1(problem.m(), rng);
    std::copy(r.begin(), r.end(), enc.row(x).begin());
  }
  return Channel::trusted(std::move(enc));
}

}  // namespace abspec
