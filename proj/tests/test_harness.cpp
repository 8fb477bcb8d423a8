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

#include <abspec/abspec.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "test_util.hpp"

using namespace abspec;
namespace fs = std::filesystem;

namespace {

SweepConfig config(std::vector<double> grid, InitPolicy policy, double eps = 1e-9) {
  SweepConfig c;
  c.beta_grid = std::move(grid);
  c.init_policy = policy;
  c.solver.epsilon = eps;
  c.solver.max_iterations = 2'000'000;
  return c;
}

std::vector<double> descending(std::vector<double> g) {
  std::reverse(g.begin(), g.end());
  return g;
}

fs::path scratch_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("abspec_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

std::vector<double> flat(std::span<const double> s) { return {s.begin(), s.end()}; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(BetaGrid, Shapes) {
  const auto g = beta_grid(0.1, 10.0, 5);
  EXPECT_EQ(g.front(), 0.1);
  EXPECT_EQ(g.back(), 10.0);
  EXPECT_NEAR(g[2], 1.0, 1e-12);
  const auto l = beta_grid(0.0, 1.0, 3, false);
  EXPECT_EQ(l[1], 0.5);
  EXPECT_THROW(beta_grid(1.0, 1.0, 2), DomainError);
  EXPECT_THROW(beta_grid(0.0, 1.0, 4), DomainError);
  EXPECT_THROW(beta_grid(0.1, 1.0, 1), DomainError);
}

TEST(SweepConfig, Validation) {
  const auto p = abspec::binary_hamming_problem();
  EXPECT_THROW(sweep(p, config({1.0, 1.0}, InitPolicy::Uniform)), DomainError);
  EXPECT_THROW(sweep(p, config({1.0}, InitPolicy::Uniform)), DomainError);
  EXPECT_THROW(sweep(p, config({1.0, 2.0, 1.5}, InitPolicy::Uniform)), DomainError);
  EXPECT_THROW(sweep(p, config({1.0, 2.0}, InitPolicy::ReverseAnneal)), DomainError);
  EXPECT_THROW(sweep(p, config({2.0, 1.0}, InitPolicy::ForwardAnneal)), DomainError);
  EXPECT_THROW(sweep(p, config({-1.0, 1.0}, InitPolicy::Uniform)), DomainError);
  EXPECT_NO_THROW(sweep(p, config({2.0, 1.0}, InitPolicy::Uniform)));
}

TEST(Sweep, HammingKeepsFullSupportUnderEveryPolicy) {
  const auto p = abspec::binary_hamming_problem();
  const auto up = beta_grid(0.1, 5.0, 40);
  for (auto policy : {InitPolicy::Uniform, InitPolicy::Dirichlet1, InitPolicy::ReverseAnneal,
                      InitPolicy::ForwardAnneal}) {
    const auto grid = policy == InitPolicy::ReverseAnneal ? descending(up) : up;
    const auto recs = sweep(p, config(grid, policy));
    ASSERT_EQ(recs.size(), grid.size());
    for (const auto& r : recs) {
      EXPECT_TRUE(r.converged) << to_string(policy) << " " << r.beta;
      EXPECT_EQ(r.support_size, 2u) << to_string(policy) << " " << r.beta;
      EXPECT_GE(r.measured_rate, 0.0);
    }
    EXPECT_TRUE(detect_transitions(sorted_by_beta(recs)).critical_intervals.empty());
  }
}

TEST(Sweep, HammingRecordsMatchClosedForm) {
  const auto p = abspec::binary_hamming_problem();
  const auto recs = sweep(p, config({0.5, 2.0}, InitPolicy::Uniform, 1e-13));
  for (const auto& r : recs) {
    const double d = 1.0 / (1.0 + std::exp(r.beta));
    EXPECT_NEAR(r.distortion_or_info, d, 1e-10);
    EXPECT_NEAR(r.rate, std::log(2.0) + d * std::log(d) + (1 - d) * std::log(1 - d), 1e-10);
  }
}

TEST(Sweep, AnnealingKeepsZeroCoordinatesZero) {
  const auto p = fig1_like_problem();
  auto c = config(descending(beta_grid(0.5, 30.0, 80)), InitPolicy::ReverseAnneal);
  const auto recs = sweep(p, c);
  for (std::size_t i = 1; i < recs.size(); ++i)
    for (std::size_t j = 0; j < 4; ++j)
      if (recs[i - 1].marginal[j] == 0.0) {
        EXPECT_EQ(recs[i].marginal[j], 0.0) << recs[i].beta;
      }
}

TEST(Sweep, Fig1LikeShowsThreeSupportTransitions) {
  const auto p = fig1_like_problem();
  const auto recs = sorted_by_beta(sweep(p, config(descending(beta_grid(1.0, 200.0, 300)),
                                                   InitPolicy::ReverseAnneal)));
  const auto rep = detect_transitions(recs);
  ASSERT_EQ(rep.critical_intervals.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    const auto& iv = rep.critical_intervals[k];
    EXPECT_EQ(iv.from, k + 1);
    EXPECT_EQ(iv.to, k + 2);
    EXPECT_EQ(iv.index_high, iv.index_low + 1);
    EXPECT_NE(recs[iv.index_low].support_size, recs[iv.index_high].support_size);
  }
  EXPECT_EQ(rep.kind, TransitionKind::SupportChange);
}

TEST(Sweep, Fig2ShowsThreeCardinalityTransitions) {
  const auto p = fig2_problem();
  auto c = config(descending(beta_grid(1.0, 200.0, 300)), InitPolicy::ReverseAnneal, 1e-10);
  c.solver.prune_tol = 1e-6;
  const auto rep = detect_transitions(sorted_by_beta(sweep(p, c)), TransitionKind::EffectiveCardinalityChange);
  ASSERT_EQ(rep.critical_intervals.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(rep.critical_intervals[k].to, k + 2);
}

TEST(Sweep, KernelMatchesSupportBelowFirstTransition) {
  const auto p = fig1_like_problem();
  const auto recs = sweep(p, config({1.0, 0.5}, InitPolicy::ReverseAnneal, 1e-13));
  for (const auto& r : recs) {
    EXPECT_EQ(r.support_size, 1u) << r.beta;
    std::size_t zeros = 0;
    for (double e : r.eigenvalues) zeros += std::abs(e) < 1e-10;
    EXPECT_EQ(zeros, 3u) << r.beta;
  }
}

TEST(Sweep, DeterministicCsv) {
  const auto p = fig1_like_problem();
  auto c = config(beta_grid(0.5, 40.0, 30), InitPolicy::Dirichlet1);
  c.seed = 17;
  c.threads = 1;
  const auto a = sweep_csv(sweep(p, c));
  c.threads = 4;
  const auto b = sweep_csv(sweep(p, c));
  EXPECT_EQ(a, b);
  c.seed = 18;
  EXPECT_NE(a, sweep_csv(sweep(p, c)));
}

TEST(DetectTransitions, RequiresAscendingOrder) {
  std::vector<SweepRecord> rs(2);
  rs[0].beta = 2.0;
  rs[1].beta = 1.0;
  EXPECT_THROW(detect_transitions(rs), DomainError);
}

TEST(DetectTransitions, SkipsUnconvergedWithWarning) {
  std::vector<SweepRecord> rs(3);
  for (std::size_t i = 0; i < 3; ++i) rs[i].beta = 1.0 + i, rs[i].converged = true;
  rs[0].support_size = 1;
  rs[1].support_size = 3;
  rs[1].converged = false;
  rs[2].support_size = 2;
  abspec::testing::CaptureWarnings w;
  const auto rep = detect_transitions(rs);
  ASSERT_EQ(rep.critical_intervals.size(), 1u);
  EXPECT_EQ(rep.critical_intervals[0].beta_low, 1.0);
  EXPECT_EQ(rep.critical_intervals[0].beta_high, 3.0);
  EXPECT_EQ(rep.critical_intervals[0].from, 1u);
  EXPECT_EQ(rep.critical_intervals[0].to, 2u);
  ASSERT_EQ(w.seen.size(), 1u);
  EXPECT_NE(w.seen[0].find("1 unconverged"), std::string::npos);
}

TEST(MedianIterations, OddAndEven) {
  std::vector<SweepRecord> rs(3);
  rs[0].iterations = 9, rs[1].iterations = 1, rs[2].iterations = 4;
  EXPECT_EQ(median_iterations(rs), 4.0);
  rs.pop_back();
  EXPECT_EQ(median_iterations(rs), 5.0);
  EXPECT_EQ(median_iterations({}), 0.0);
}

TEST(RateStudy, Preconditions) {
  const auto p = fig1_like_problem();
  EXPECT_THROW(rate_study(p, 0.0, {1e-6}, InitPolicy::Uniform), DomainError);
  EXPECT_THROW(rate_study(p, 5.0, {}, InitPolicy::Uniform), DomainError);
}

TEST(RateStudy, HammingHalfContraction) {
  // For the symmetric binary source lambda_max = tanh(beta / 2)^2, which is 1/2
  // at beta = 2 atanh(sqrt(1/2)).
  const auto p = abspec::binary_hamming_problem();
  const double beta = 2.0 * std::atanh(std::sqrt(0.5));
  const auto pts = rate_study(p, beta, {1e-6, 1e-12}, InitPolicy::Uniform);
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_NEAR(pts[1].lambda_max, 0.5, 1e-9);
  EXPECT_NEAR(pts[1].predicted_rate, 1.0 / std::log(2.0), 1e-8);
}

TEST(Builtins, Numbers) {
  const auto h = abspec::binary_hamming_problem();
  EXPECT_EQ(h.px()[0], 0.5);
  EXPECT_EQ(h.distortion()(0, 1), 1.0);
  EXPECT_EQ(h.distortion()(1, 1), 0.0);

  const auto f = fig1_like_problem();
  double mx = 0.0, mn = 1.0;
  for (double v : f.distortion().data()) mx = std::max(mx, v), mn = std::min(mn, v);
  EXPECT_EQ(mx, 1.0);
  EXPECT_GE(mn, 0.0);
  EXPECT_EQ(f.px()[0], 0.4);
  EXPECT_EQ(f.px()[3], 0.1);

  const auto g = fig2_problem();
  const double px[4] = {0.7, 0.1, 0.1, 0.1}, py0[4] = {0.2, 0.4, 0.6, 0.8};
  for (std::size_t x = 0; x < 4; ++x) {
    EXPECT_EQ(g.px()[x], px[x]);
    EXPECT_EQ(g.py_given_x()(x, 0), py0[x]);
  }
}

TEST(Builtins, UnknownNameListsChoices) {
  try {
    builtin_problem("nope");
    FAIL() << "expected UsageError";
  } catch (const UsageError& e) {
    const std::string msg = e.what();
    for (const auto& n : builtin_names()) EXPECT_NE(msg.find(n), std::string::npos) << n;
  }
  for (const auto& n : builtin_names()) EXPECT_NO_THROW(builtin_problem(n));
}

TEST(Io, ProblemRoundTrip) {
  const AnyProblem rd = fig1_like_problem();
  const auto back = std::get<RdProblem>(problem_from_json(Json::parse(to_json(rd).dump())));
  EXPECT_EQ(flat(back.distortion().data()), flat(std::get<RdProblem>(rd).distortion().data()));

  const AnyProblem ib = fig2_problem();
  const auto ib2 = std::get<IbProblem>(problem_from_json(Json::parse(to_json(ib).dump())));
  EXPECT_EQ(flat(ib2.py_given_x().matrix().data()), flat(std::get<IbProblem>(ib).py_given_x().matrix().data()));
  EXPECT_EQ(ib2.m(), 4u);

  const auto j = IbProblem::from_joint(Matrix::from_rows({{0.4, 0.1}, {0.1, 0.4}}));
  const auto k = std::get<IbProblem>(problem_from_json(Json{{"pxy", {{0.4, 0.1}, {0.1, 0.4}}}, {"m", 2}}));
  EXPECT_NEAR(k.py_given_x()(0, 0), j.py_given_x()(0, 0), 1e-15);

  EXPECT_THROW(problem_from_json(Json{{"px", {0.5, 0.5}}}), DomainError);
  EXPECT_THROW(problem_from_json(Json::array()), DomainError);
  EXPECT_THROW(problem_from_json(Json{{"px", {0.5, 0.5}}, {"d", {{0, "a"}, {1, 0}}}}), DomainError);
  EXPECT_THROW(load_problem("/nonexistent/problem.json"), IoError);
}

TEST(Io, NonFiniteWrittenAsNull) {
  SweepRecord r;
  r.beta = 1.0;
  r.marginal = ProbVector{1.0};
  r.predicted_rate = std::numeric_limits<double>::infinity();
  const auto j = Json::parse(to_json(r).dump());
  EXPECT_TRUE(j["predicted_rate"].is_null());
  EXPECT_EQ(j["beta"].get<double>(), 1.0);
}

TEST(ParseFormats, Lists) {
  EXPECT_TRUE(parse_formats("").empty());
  EXPECT_EQ(parse_formats("csv, svg").size(), 2u);
  EXPECT_EQ(parse_formats("json,json").size(), 1u);
  EXPECT_THROW(parse_formats("csv,png"), DomainError);
}

TEST(EmitReports, EmptyFormatsWriteNothing) {
  const auto dir = scratch_dir("empty");
  std::vector<SweepRecord> rs(1);
  EXPECT_TRUE(emit_reports(rs, {}, dir, {}).empty());
  EXPECT_FALSE(fs::exists(dir));
}

TEST(EmitReports, SingleRecordCsv) {
  const auto dir = scratch_dir("single");
  const auto recs = sweep(abspec::binary_hamming_problem(), config({1.0, 2.0}, InitPolicy::Uniform));
  const std::vector<SweepRecord> one{recs.front()};
  const auto files = emit_reports(one, {}, dir, {ReportFormat::Csv});
  ASSERT_EQ(files.size(), 1u);
  const auto text = slurp(dir / "sweep.csv");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
  EXPECT_EQ(text.substr(0, text.find('\n')), kSweepCsvHeader);
  fs::remove_all(dir);
}

TEST(EmitReports, AllPanels) {
  const auto dir = scratch_dir("all");
  auto c = config(descending(beta_grid(1.0, 50.0, 40)), InitPolicy::ReverseAnneal, 1e-8);
  const auto recs = sweep(fig2_problem(), c);
  const auto rep = detect_transitions(sorted_by_beta(recs), TransitionKind::EffectiveCardinalityChange);
  const auto files = emit_reports(recs, rep, dir, parse_formats("csv,json,svg"));
  std::set<std::string> names;
  for (const auto& f : files) {
    EXPECT_TRUE(fs::exists(f)) << f;
    names.insert(f.filename().string());
  }
  EXPECT_EQ(names, (std::set<std::string>{"sweep.csv", "sweep.json", "transitions.json", "marginal.svg",
                                          "eigenvalues.svg", "iterations.svg", "rate.svg", "decoder.svg"}));
  const auto tj = Json::parse(slurp(dir / "transitions.json"));
  EXPECT_EQ(tj["critical_intervals"].size(), rep.critical_intervals.size());
  EXPECT_EQ(Json::parse(slurp(dir / "sweep.json")).size(), recs.size());
  const auto svg = slurp(dir / "iterations.svg");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("stroke-dasharray=\"6,4\""), std::string::npos);
  fs::remove_all(dir);
}

TEST(EmitReports, UnwritableDirectory) {
  const auto dir = scratch_dir("blocked");
  fs::create_directories(dir);
  { std::ofstream(dir / "file") << "x"; }
  std::vector<SweepRecord> rs(1);
  rs[0].marginal = ProbVector{1.0};
  try {
    emit_reports(rs, {}, dir / "file" / "sub", {ReportFormat::Csv});
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("sub"), std::string::npos);
  }
  EXPECT_THROW(emit_reports({}, {}, dir, {ReportFormat::Csv}), DomainError);
  fs::remove_all(dir);
}
