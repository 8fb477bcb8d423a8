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
 * \file   abspec/io.hpp
 * \brief  JSON problem files and JSON forms of reports and sweep records.
 *
 * RD files hold `{"px": [...], "d": [[...]]}`. IB files hold either
 * `{"pxy": [[...]]}` or `{"px": [...], "py_given_x": [[...]]}`, with an
 * optional `"m"` capping the representation alphabet. Non-finite numbers
 * are written as null.
 */

#pragma once

#include <abspec/builtins.hpp>
#include <abspec/spectral.hpp>
#include <abspec/sweep.hpp>

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

namespace abspec {

using Json = nlohmann::json;

namespace detail {

inline Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json numbers(std::span<const double> v) {
  Json a = Json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

inline Json matrix_json(const Matrix& m) {
  Json a = Json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) a.push_back(numbers(m.row(r)));
  return a;
}

inline std::vector<double> vector_field(const Json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array()) throw DomainError(std::string("missing array '") + key + "'");
  std::vector<double> v;
  for (const auto& e : j[key]) {
    if (!e.is_number()) throw DomainError(std::string("'") + key + "' must hold numbers");
    v.push_back(e.get<double>());
  }
  return v;
}

inline Matrix matrix_field(const Json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array()) throw DomainError(std::string("missing matrix '") + key + "'");
  std::vector<std::vector<double>> rows;
  for (const auto& r : j[key]) {
    if (!r.is_array()) throw DomainError(std::string("'") + key + "' must be an array of rows");
    std::vector<double> row;
    for (const auto& e : r) {
      if (!e.is_number()) throw DomainError(std::string("'") + key + "' must hold numbers");
      row.push_back(e.get<double>());
    }
    rows.push_back(std::move(row));
  }
  return Matrix::from_rows(rows);
}

}  // namespace detail

inline Json to_json(const RdProblem& p) {
  return {{"px", detail::numbers(p.px().values())}, {"d", detail::matrix_json(p.distortion())}};
}

inline Json to_json(const IbProblem& p) {
  return {{"px", detail::numbers(p.px().values())},
          {"py_given_x", detail::matrix_json(p.py_given_x().matrix())},
          {"m", p.m()}};
}

inline Json to_json(const AnyProblem& p) {
  return std::visit([](const auto& q) { return to_json(q); }, p);
}

/// Decides the problem kind from the keys present.
inline AnyProblem problem_from_json(const Json& j) {
  if (!j.is_object()) throw DomainError("problem JSON must be an object");
  if (j.contains("d")) return RdProblem(ProbVector(detail::vector_field(j, "px")), detail::matrix_field(j, "d"));
  const std::size_t m = j.contains("m") ? j["m"].get<std::size_t>() : 0;
  if (j.contains("pxy")) return IbProblem::from_joint(detail::matrix_field(j, "pxy"), m);
  if (j.contains("py_given_x"))
    return IbProblem::from_conditional(ProbVector(detail::vector_field(j, "px")),
                                       Channel(detail::matrix_field(j, "py_given_x")), m);
  throw DomainError("problem JSON needs 'd' (RD) or 'pxy' / 'py_given_x' (IB)");
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw DomainError("'" + path + "': " + e.what());
  }
}

inline AnyProblem load_problem(const std::string& path) { return problem_from_json(read_json_file(path)); }

inline void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for '" + path + "'");
}

inline Json to_json(const SpectralReport& r) {
  return {{"beta", r.beta},
          {"eigenvalues", detail::numbers(r.eigenvalues)},
          {"kernel_dim", r.kernel_dim},
          {"support_size", r.support_size},
          {"lambda0", detail::number(r.lambda0)},
          {"lambda_max", detail::number(r.lambda_max_ab)},
          {"predicted_rate", detail::number(r.predicted_rate)},
          {"critical", r.critical},
          {"fixed_point_residual", detail::number(r.fixed_point_residual)}};
}

inline Json to_json(const SweepRecord& r) {
  Json j{{"beta", r.beta},
         {"iterations", r.iterations},
         {"converged", r.converged},
         {"support_size", r.support_size},
         {"effective_cardinality", r.effective_cardinality},
         {"lambda0", detail::number(r.lambda0)},
         {"lambda_max", detail::number(r.lambda_max)},
         {"predicted_rate", detail::number(r.predicted_rate)},
         {"measured_rate", detail::number(r.measured_rate)},
         {"rate", detail::number(r.rate)},
         {"distortion_or_info", detail::number(r.distortion_or_info)},
         {"marginal", detail::numbers(r.marginal.values())},
         {"eigenvalues", detail::numbers(r.eigenvalues)},
         {"critical", r.critical}};
  if (!r.decoder0.empty()) j["decoder0"] = detail::numbers(r.decoder0);
  return j;
}

inline Json to_json(const std::vector<SweepRecord>& records) {
  Json a = Json::array();
  for (const auto& r : records) a.push_back(to_json(r));
  return a;
}

inline Json to_json(const TransitionReport& t) {
  Json a = Json::array();
  for (const auto& iv : t.critical_intervals)
    a.push_back({{"beta_low", iv.beta_low}, {"beta_high", iv.beta_high}, {"from", iv.from}, {"to", iv.to}});
  return {{"kind", t.kind == TransitionKind::SupportChange ? "support" : "effective_cardinality"},
          {"critical_intervals", a}};
}

inline Json to_json(const RdSolution& s) {
  return {{"beta", s.beta},
          {"marginal", detail::numbers(s.marginal.values())},
          {"encoder", detail::matrix_json(s.encoder.matrix())},
          {"rate", detail::number(s.rate)},
          {"distortion", detail::number(s.distortion)},
          {"iterations", s.iterations},
          {"converged", s.converged},
          {"residual", detail::number(s.residual)}};
}

inline Json to_json(const IbSolution& s) {
  return {{"beta", s.beta},
          {"marginal", detail::numbers(s.marginal.values())},
          {"encoder", detail::matrix_json(s.encoder.matrix())},
          {"decoder", detail::matrix_json(s.decoder.matrix())},
          {"rate", detail::number(s.rate)},
          {"relevant_info", detail::number(s.relevant_info)},
          {"iterations", s.iterations},
          {"converged", s.converged}};
}

inline Json to_json(const RatePoint& p) {
  return {{"lambda0", detail::number(p.lambda0)},
          {"lambda_max", detail::number(p.lambda_max)},
          {"epsilon", p.epsilon},
          {"iterations", p.iterations},
          {"measured_rate", detail::number(p.measured_rate)},
          {"predicted_rate", detail::number(p.predicted_rate)},
          {"converged", p.converged}};
}

}  // namespace abspec
