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
 * \file   abspec/svg.hpp
 * \brief  Minimal line and scatter charts written as standalone SVG.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace abspec::svg {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
  /// Draw markers only, no connecting line.
  bool scatter = false;
};

/// A chart with linear or log axes. Points that are non-finite, or not
/// positive on a log axis, are skipped; a line breaks across them.
class Chart {
 public:
  Chart(std::string title, std::string xlabel, std::string ylabel)
      : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)) {}

  Chart& log_x(bool on = true) {
    logx_ = on;
    return *this;
  }
  Chart& log_y(bool on = true) {
    logy_ = on;
    return *this;
  }
  Chart& add(Series s) {
    series_.push_back(std::move(s));
    return *this;
  }
  /// Dashed vertical marker.
  Chart& vline(double x) {
    vlines_.push_back(x);
    return *this;
  }
  /// Dotted y = x line across the plot.
  Chart& diagonal(bool on = true) {
    diagonal_ = on;
    return *this;
  }

  std::string render() const {
    double x0 = kInf, x1 = -kInf, y0 = kInf, y1 = -kInf;
    for (const auto& s : series_)
      for (auto [x, y] : s.points)
        if (usable(x, logx_) && usable(y, logy_)) {
          x0 = std::min(x0, tx(x, logx_));
          x1 = std::max(x1, tx(x, logx_));
          y0 = std::min(y0, tx(y, logy_));
          y1 = std::max(y1, tx(y, logy_));
        }
    if (!(x0 <= x1)) x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
    if (diagonal_) {
      const double lo = std::min(x0, y0), hi = std::max(x1, y1);
      x0 = y0 = lo;
      x1 = y1 = hi;
    }
    pad(x0, x1);
    pad(y0, y1);
    const auto px = [&](double x) { return kLeft + (tx(x, logx_) - x0) / (x1 - x0) * kPlotW; };
    const auto py = [&](double y) { return kTop + kPlotH - (tx(y, logy_) - y0) / (y1 - y0) * kPlotH; };

    std::string out;
    out += fmt("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
               "font-family=\"sans-serif\" font-size=\"12\">\n",
               kWidth, kHeight);
    out += fmt("<rect width=\"%d\" height=\"%d\" fill=\"white\"/>\n", kWidth, kHeight);
    out += fmt("<text x=\"%d\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">%s</text>\n",
               kWidth / 2, escape(title_).c_str());
    out += fmt("<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"none\" stroke=\"black\"/>\n",
               kLeft, kTop, kPlotW, kPlotH);
    out += ticks(x0, x1, logx_, true);
    out += ticks(y0, y1, logy_, false);
    out += fmt("<text x=\"%d\" y=\"%d\" text-anchor=\"middle\">%s</text>\n", kLeft + kPlotW / 2,
               kHeight - 8, escape(xlabel_).c_str());
    out += fmt("<text x=\"14\" y=\"%d\" text-anchor=\"middle\" transform=\"rotate(-90 14 %d)\">%s</text>\n",
               kTop + kPlotH / 2, kTop + kPlotH / 2, escape(ylabel_).c_str());

    if (diagonal_) {
      const double a = logx_ ? std::pow(10.0, x0) : x0, b = logx_ ? std::pow(10.0, x1) : x1;
      out += fmt("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"gray\" "
                 "stroke-dasharray=\"2,3\"/>\n",
                 px(a), py(a), px(b), py(b));
    }
    for (double v : vlines_)
      if (usable(v, logx_) && tx(v, logx_) >= x0 && tx(v, logx_) <= x1)
        out += fmt("<line x1=\"%.2f\" y1=\"%d\" x2=\"%.2f\" y2=\"%d\" stroke=\"gray\" "
                   "stroke-dasharray=\"6,4\"/>\n",
                   px(v), kTop, px(v), kTop + kPlotH);

    for (std::size_t k = 0; k < series_.size(); ++k) {
      const auto& s = series_[k];
      const char* color = kPalette[k % kPaletteSize];
      if (s.scatter) {
        for (auto [x, y] : s.points)
          if (usable(x, logx_) && usable(y, logy_))
            out += fmt("<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2\" fill=\"%s\"/>\n", px(x), py(y), color);
      } else {
        std::string path;
        bool pen = false;
        for (auto [x, y] : s.points) {
          if (!usable(x, logx_) || !usable(y, logy_)) {
            pen = false;
            continue;
          }
          path += fmt("%c%.2f,%.2f ", pen ? 'L' : 'M', px(x), py(y));
          pen = true;
        }
        if (!path.empty())
          out += fmt("<path d=\"%s\" fill=\"none\" stroke=\"%s\" stroke-width=\"1.5\"/>\n", path.c_str(),
                     color);
      }
      if (!s.label.empty())
        out += fmt("<text x=\"%d\" y=\"%d\" fill=\"%s\">%s</text>\n", kLeft + kPlotW + 8,
                   kTop + 14 + 16 * static_cast<int>(k), color, escape(s.label).c_str());
    }
    out += "</svg>\n";
    return out;
  }

 private:
  static constexpr int kWidth = 720, kHeight = 440, kLeft = 70, kTop = 34, kPlotW = 540, kPlotH = 350;
  static constexpr double kInf = std::numeric_limits<double>::infinity();
  static constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                           "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  static constexpr std::size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

  static bool usable(double v, bool log) { return std::isfinite(v) && (!log || v > 0.0); }
  static double tx(double v, bool log) { return log ? std::log10(v) : v; }

  static void pad(double& lo, double& hi) {
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
      return;
    }
    const double m = 0.04 * (hi - lo);
    lo -= m;
    hi += m;
  }

  template <class... Args>
  static std::string fmt(const char* f, Args... args) {
    const int n = std::snprintf(nullptr, 0, f, args...);
    std::string s(static_cast<std::size_t>(n), '\0');
    std::snprintf(s.data(), s.size() + 1, f, args...);
    return s;
  }

  static std::string escape(const std::string& s) {
    std::string o;
    for (char c : s) {
      switch (c) {
        case '<': o += "&lt;"; break;
        case '>': o += "&gt;"; break;
        case '&': o += "&amp;"; break;
        case '"': o += "&quot;"; break;
        default: o += c;
      }
    }
    return o;
  }

  // lo/hi are in transformed units.
  std::string ticks(double lo, double hi, bool log, bool horizontal) const {
    std::vector<double> at;
    if (log) {
      for (double e = std::ceil(lo); e <= hi; e += 1.0) at.push_back(e);
    } else {
      const double raw = (hi - lo) / 5.0, mag = std::pow(10.0, std::floor(std::log10(raw)));
      const double step = raw / mag < 2.0 ? mag : raw / mag < 5.0 ? 2.0 * mag : 5.0 * mag;
      for (double v = std::ceil(lo / step) * step; v <= hi; v += step) at.push_back(v);
    }
    std::string out;
    for (double t : at) {
      const double f = (t - lo) / (hi - lo);
      char label[32];
      if (log)
        std::snprintf(label, sizeof label, "1e%d", static_cast<int>(std::lround(t)));
      else
        std::snprintf(label, sizeof label, "%g", std::abs(t) < 1e-12 ? 0.0 : t);
      if (horizontal) {
        const double x = kLeft + f * kPlotW;
        out += fmt("<line x1=\"%.2f\" y1=\"%d\" x2=\"%.2f\" y2=\"%d\" stroke=\"black\"/>\n", x,
                   kTop + kPlotH, x, kTop + kPlotH + 5);
        out += fmt("<text x=\"%.2f\" y=\"%d\" text-anchor=\"middle\">%s</text>\n", x, kTop + kPlotH + 18,
                   label);
      } else {
        const double y = kTop + kPlotH - f * kPlotH;
        out += fmt("<line x1=\"%d\" y1=\"%.2f\" x2=\"%d\" y2=\"%.2f\" stroke=\"black\"/>\n", kLeft - 5, y,
                   kLeft, y);
        out += fmt("<text x=\"%d\" y=\"%.2f\" text-anchor=\"end\">%s</text>\n", kLeft - 8, y + 4, label);
      }
    }
    return out;
  }

  std::string title_, xlabel_, ylabel_;
  bool logx_ = false, logy_ = false, diagonal_ = false;
  std::vector<Series> series_;
  std::vector<double> vlines_;
};

}  // namespace abspec::svg
