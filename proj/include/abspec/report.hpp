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
 * \file   abspec/report.hpp
 * \brief  Writes sweep results as CSV, JSON and SVG panels.
 */

#pragma once

#include <abspec/io.hpp>
#include <abspec/svg.hpp>
#include <abspec/sweep.hpp>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace abspec {

enum class ReportFormat { Csv, Json, Svg };

/// Parses a comma-separated list such as "csv,json,svg". Empty input gives
/// an empty set.
inline std::set<ReportFormat> parse_formats(const std::string& list) {
  std::set<ReportFormat> out;
  std::stringstream ss(list);
  for (std::string item; std::getline(ss, item, ',');) {
    item.erase(std::remove_if(item.begin(), item.end(), [](unsigned char c) { return std::isspace(c); }),
               item.end());
    if (item.empty()) continue;
    if (item == "csv") out.insert(ReportFormat::Csv);
    else if (item == "json") out.insert(ReportFormat::Json);
    else if (item == "svg") out.insert(ReportFormat::Svg);
    else throw DomainError("unknown report format '" + item + "' (choices: csv, json, svg)");
  }
  return out;
}

inline constexpr const char* kSweepCsvHeader =
    "beta,iterations,converged,support_size,effective_cardinality,lambda0,lambda_max,predicted_rate,"
    "measured_rate,rate,distortion_or_info";

inline std::string sweep_csv(const std::vector<SweepRecord>& records) {
  std::string out = kSweepCsvHeader;
  out += '\n';
  char buf[512];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%.17g,%zu,%d,%zu,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.beta,
                  r.iterations, r.converged ? 1 : 0, r.support_size, r.effective_cardinality, r.lambda0,
                  r.lambda_max, r.predicted_rate, r.measured_rate, r.rate, r.distortion_or_info);
    out += buf;
  }
  return out;
}

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline bool wide_range(const std::vector<SweepRecord>& records) {
  double lo = records.front().beta, hi = lo;
  for (const auto& r : records) lo = std::min(lo, r.beta), hi = std::max(hi, r.beta);
  return lo > 0.0 && hi / lo > 10.0;
}

inline svg::Chart beta_chart(const std::vector<SweepRecord>& rs, const TransitionReport& t, std::string title,
                             std::string ylabel) {
  svg::Chart c(std::move(title), "beta", std::move(ylabel));
  c.log_x(wide_range(rs));
  for (const auto& iv : t.critical_intervals)
    c.vline(iv.beta_low > 0.0 ? std::sqrt(iv.beta_low * iv.beta_high) : 0.5 * (iv.beta_low + iv.beta_high));
  return c;
}

template <class Get>
svg::Series indexed_series(const std::vector<SweepRecord>& rs, std::size_t k, std::string label, Get get) {
  svg::Series s{std::move(label), {}, false};
  for (const auto& r : rs) s.points.emplace_back(r.beta, get(r, k));
  return s;
}

}  // namespace detail

/// Writes the requested formats into out_dir (created if missing) and
/// returns the paths written. Records are plotted in ascending beta.
inline std::vector<std::filesystem::path> emit_reports(const std::vector<SweepRecord>& records,
                                                       const TransitionReport& transitions,
                                                       const std::filesystem::path& out_dir,
                                                       const std::set<ReportFormat>& formats) {
  std::vector<std::filesystem::path> manifest;
  if (formats.empty()) return manifest;
  if (records.empty()) throw DomainError("emit_reports needs at least one record");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir))
    throw IoError("cannot create output directory '" + out_dir.string() + "'");
  const auto put = [&](const std::string& name, const std::string& text) {
    const auto path = out_dir / name;
    detail::write_text(path, text);
    manifest.push_back(path);
  };

  if (formats.count(ReportFormat::Csv)) put("sweep.csv", sweep_csv(records));
  if (formats.count(ReportFormat::Json)) {
    put("sweep.json", to_json(records).dump(2) + "\n");
    put("transitions.json", to_json(transitions).dump(2) + "\n");
  }
  if (!formats.count(ReportFormat::Svg)) return manifest;

  const auto rs = sorted_by_beta(records);
  std::size_t m = 0, e = 0, dec = 0;
  for (const auto& r : rs) {
    m = std::max(m, r.marginal.size());
    e = std::max(e, r.eigenvalues.size());
    dec = std::max(dec, r.decoder0.size());
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();

  auto marg = detail::beta_chart(rs, transitions, "Marginal p(x^) against beta", "p(x^)");
  for (std::size_t j = 0; j < m; ++j)
    marg.add(detail::indexed_series(rs, j, "x^ = " + std::to_string(j), [nan](const SweepRecord& r, std::size_t k) {
      return k < r.marginal.size() ? r.marginal[k] : nan;
    }));
  put("marginal.svg", marg.render());

  auto eig = detail::beta_chart(rs, transitions, "Eigenvalues of A against beta", "eigenvalue");
  for (std::size_t j = 0; j < e; ++j)
    eig.add(detail::indexed_series(rs, j, "", [nan](const SweepRecord& r, std::size_t k) {
      return k < r.eigenvalues.size() ? r.eigenvalues[k] : nan;
    }));
  put("eigenvalues.svg", eig.render());

  auto its = detail::beta_chart(rs, transitions, "Iterations to convergence", "iterations");
  its.log_y();
  its.add(detail::indexed_series(rs, 0, "", [](const SweepRecord& r, std::size_t) {
    return static_cast<double>(r.iterations);
  }));
  put("iterations.svg", its.render());

  svg::Chart rate("Measured against predicted rate", "1 / (-log lambda_max)", "k / (-log epsilon)");
  rate.log_x().log_y().diagonal();
  svg::Series pts{"", {}, true};
  for (const auto& r : rs)
    if (r.converged && std::isfinite(r.predicted_rate)) pts.points.emplace_back(r.predicted_rate, r.measured_rate);
  rate.add(std::move(pts));
  put("rate.svg", rate.render());

  if (dec > 0) {
    auto d = detail::beta_chart(rs, transitions, "Decoders p(y = 0 | x^) against beta", "p(y = 0 | x^)");
    for (std::size_t j = 0; j < dec; ++j)
      d.add(detail::indexed_series(rs, j, "x^ = " + std::to_string(j), [nan](const SweepRecord& r, std::size_t k) {
        return k < r.decoder0.size() ? r.decoder0[k] : nan;
      }));
    put("decoder.svg", d.render());
  }
  return manifest;
}

}  // namespace abspec
