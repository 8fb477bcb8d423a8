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

// Command-line front end: solve, sweep, spectrum, rate-study, ib-sweep,
// tangent, builtin. Exit codes: 0 ok, 1 usage, 2 numerical failure,
// 3 a single-point solve did not converge.

#include <abspec/abspec.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace abspec;

constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitNotConverged = 3;

struct Options {
  std::string problem_file;
  std::string builtin;
  double beta = 1.0;
  double beta_min = 0.1;
  double beta_max = 100.0;
  std::size_t beta_steps = 600;
  bool log_grid = true;
  double epsilon = 1e-9;
  std::string norm = "linf";
  std::string init = "uniform";
  std::uint64_t seed = 0;
  std::size_t max_iters = 10'000'000;
  double zero_tol = kDefaultZeroTol;
  double prune_tol = 1e-7;
  double merge_tol = 1e-3;
  std::string out;
  std::string formats = "csv,json,svg";
  std::vector<double> epsilons{1e-6, 1e-8, 1e-10, 1e-12};
  std::size_t refine_steps = 40;
  std::size_t tangent_steps = 21;
  std::size_t threads = 0;
};

void add_problem_flags(CLI::App* app, Options& o) {
  auto* f = app->add_option("--problem", o.problem_file, "Problem JSON file");
  auto* b = app->add_option("--builtin", o.builtin, "Builtin problem name");
  f->excludes(b);
}

void add_solver_flags(CLI::App* app, Options& o) {
  app->add_option("--epsilon", o.epsilon, "Stop when successive iterates are this close")->capture_default_str();
  app->add_option("--norm", o.norm, "Iterate distance")
      ->check(CLI::IsMember({"l1", "linf"}))
      ->capture_default_str();
  app->add_option("--max-iters", o.max_iters, "Iteration cap per solve")->capture_default_str();
  app->add_option("--zero-tol", o.zero_tol, "Support threshold")->capture_default_str();
  app->add_option("--prune-tol", o.prune_tol, "Prune shrinking coordinates below this (0 disables)")
      ->capture_default_str();
  app->add_option("--seed", o.seed, "Seed for Dirichlet starts")->capture_default_str();
}

void add_init_flag(CLI::App* app, Options& o) {
  app->add_option("--init", o.init, "Initial condition policy")
      ->check(CLI::IsMember({"uniform", "dirichlet", "reverse", "forward"}))
      ->capture_default_str();
}

void add_grid_flags(CLI::App* app, Options& o) {
  app->add_option("--beta-min", o.beta_min, "Smallest beta")->capture_default_str();
  app->add_option("--beta-max", o.beta_max, "Largest beta")->capture_default_str();
  app->add_option("--beta-steps", o.beta_steps, "Grid points")->capture_default_str();
  app->add_flag("--log-grid,!--linear-grid", o.log_grid, "Log-spaced grid (default) or linear");
  app->add_option("--threads", o.threads, "Workers for independent starts (0 = all cores)");
}

void add_output_flags(CLI::App* app, Options& o) {
  app->add_option("--out", o.out, "Output directory");
  app->add_option("--formats", o.formats, "Comma-separated subset of csv,json,svg")->capture_default_str();
}

InitPolicy policy(const std::string& s) {
  if (s == "dirichlet") return InitPolicy::Dirichlet1;
  if (s == "reverse") return InitPolicy::ReverseAnneal;
  if (s == "forward") return InitPolicy::ForwardAnneal;
  return InitPolicy::Uniform;
}

SolverConfig solver_config(const Options& o) {
  SolverConfig c;
  c.epsilon = o.epsilon;
  c.norm = o.norm == "l1" ? Norm::L1 : Norm::Linf;
  c.max_iterations = o.max_iters;
  c.zero_tol = o.zero_tol;
  c.prune_tol = o.prune_tol;
  c.validate();
  return c;
}

AnyProblem load(const Options& o) {
  if (!o.problem_file.empty()) return load_problem(o.problem_file);
  if (!o.builtin.empty()) return builtin_problem(o.builtin);
  throw UsageError("one of --problem or --builtin is required");
}

RdProblem load_rd(const Options& o) {
  auto p = load(o);
  if (auto* rd = std::get_if<RdProblem>(&p)) return *rd;
  throw UsageError("this command needs an RD problem (use ib-sweep or tangent for IB input)");
}

IbProblem load_ib(const Options& o) {
  auto p = load(o);
  if (auto* ib = std::get_if<IbProblem>(&p)) return *ib;
  throw UsageError("this command needs an IB problem");
}

SweepConfig sweep_config(const Options& o, ProblemKind kind) {
  SweepConfig c;
  c.init_policy = policy(o.init);
  c.beta_grid = beta_grid(o.beta_min, o.beta_max, o.beta_steps, o.log_grid);
  if (c.init_policy == InitPolicy::ReverseAnneal) std::reverse(c.beta_grid.begin(), c.beta_grid.end());
  c.solver = solver_config(o);
  c.problem_kind = kind;
  c.seed = o.seed;
  c.merge_tol = o.merge_tol;
  c.threads = o.threads;
  c.validate();
  return c;
}

void print(const Json& j) { std::cout << j.dump(2) << '\n'; }

void emit(const Options& o, const std::vector<SweepRecord>& records, const TransitionReport& t) {
  if (o.out.empty()) {
    std::cout << sweep_csv(records);
    return;
  }
  for (const auto& path : emit_reports(records, t, o.out, parse_formats(o.formats)))
    std::cerr << "wrote " << path.string() << '\n';
}

Json transitions_summary(const TransitionReport& t) { return to_json(t); }

int cmd_solve(const Options& o) {
  const auto problem = load(o);
  const auto cfg = solver_config(o);
  Rng rng(o.seed);
  if (const auto* rd = std::get_if<RdProblem>(&problem)) {
    const std::size_t m = rd->reproduction_size();
    const ProbVector init = o.init == "dirichlet" ? dirichlet1(m, rng) : ProbVector::uniform(m);
    const auto sol = solve(*rd, o.beta, init, cfg);
    Json j = to_json(sol);
    j["spectrum"] = to_json(spectral_report(*rd, sol.marginal, o.beta, cfg.zero_tol));
    print(j);
    if (!o.out.empty()) {
      std::filesystem::create_directories(o.out);
      write_json_file((std::filesystem::path(o.out) / "solution.json").string(), j);
    }
    return sol.converged ? 0 : kExitNotConverged;
  }
  const auto& ib = std::get<IbProblem>(problem);
  const Channel init = o.init == "dirichlet" ? ib_dirichlet_init(ib, rng)
                       : o.init == "uniform" ? ib_uniform_init(ib, o.beta)
                                             : ib_near_identity_init(ib, 0.1);
  const auto sol = ib_solve(ib, o.beta, init, cfg);
  Json j = to_json(sol);
  j["effective_cardinality"] = effective_cardinality(sol, o.merge_tol, cfg.zero_tol);
  print(j);
  if (!o.out.empty()) {
    std::filesystem::create_directories(o.out);
    write_json_file((std::filesystem::path(o.out) / "solution.json").string(), j);
  }
  return sol.converged ? 0 : kExitNotConverged;
}

int cmd_sweep(const Options& o) {
  const auto problem = load_rd(o);
  const auto cfg = sweep_config(o, ProblemKind::RD);
  const auto records = sweep(problem, cfg);
  const auto t = detect_transitions(sorted_by_beta(records), TransitionKind::SupportChange);
  std::cerr << "transitions: " << transitions_summary(t).dump() << '\n'
            << "median iterations: " << median_iterations(records) << '\n';
  emit(o, records, t);
  return 0;
}

int cmd_ib_sweep(const Options& o) {
  const auto problem = load_ib(o);
  const auto cfg = sweep_config(o, ProblemKind::IB);
  const auto records = sweep(problem, cfg);
  const auto t = detect_transitions(sorted_by_beta(records), TransitionKind::EffectiveCardinalityChange);
  std::cerr << "transitions: " << transitions_summary(t).dump() << '\n'
            << "median iterations: " << median_iterations(records) << '\n';
  emit(o, records, t);
  return 0;
}

int cmd_spectrum(const Options& o) {
  const auto problem = load_rd(o);
  auto cfg = solver_config(o);
  const auto sol = solve(problem, o.beta, ProbVector::uniform(problem.reproduction_size()), cfg);
  if (!sol.converged) std::cerr << "warning: solve did not converge; spectrum is at the last iterate\n";
  print(to_json(spectral_report(problem, sol.marginal, o.beta, cfg.zero_tol)));
  return 0;
}

int cmd_rate_study(const Options& o) {
  const auto problem = load_rd(o);
  const auto pts = rate_study(problem, o.beta, o.epsilons, policy(o.init), solver_config(o), o.seed);
  Json a = Json::array();
  for (const auto& p : pts) a.push_back(to_json(p));
  print(a);
  return 0;
}

int cmd_tangent(const Options& o) {
  const auto problem = load_ib(o);
  Options ib_opts = o;
  ib_opts.init = "reverse";
  const auto cfg = sweep_config(ib_opts, ProblemKind::IB);
  const auto ib = sweep_ib(problem, cfg);
  TangentStudyConfig tc;
  tc.refine_steps = o.refine_steps;
  tc.tangent_steps = o.tangent_steps;
  tc.dedup_tol = o.merge_tol;
  const auto study = tangent_study(problem, ib, cfg, tc);
  Json a = Json::array();
  for (std::size_t k = 0; k < study.size(); ++k) {
    const auto& t = study[k];
    Json cols = Json::array();
    for (std::size_t j = 0; j < t.tangent.side.size(); ++j)
      cols.push_back({{"side", t.tangent.side[j] < 0 ? "low" : "high"},
                      {"decoder", detail::numbers(t.tangent.decoders.row(j))}});
    a.push_back({{"ib_interval", {t.coarse.beta_low, t.coarse.beta_high}},
                 {"refined_interval", {t.refined.beta_low, t.refined.beta_high}},
                 {"from", t.refined.from},
                 {"to", t.refined.to},
                 {"columns", cols},
                 {"support_changes", to_json(t.support_changes)},
                 {"min_lambda0", detail::number(t.min_lambda0)},
                 {"min_lambda0_beta", t.min_lambda0_beta},
                 {"support_at_low", t.support_at_low},
                 {"low_in_lower_block", t.low_in_minus_block}});
    if (!o.out.empty()) {
      const auto dir = std::filesystem::path(o.out) / ("transition_" + std::to_string(k + 1));
      emit_reports(t.records, t.support_changes, dir, parse_formats(o.formats));
      write_json_file((dir / "tangent_problem.json").string(), to_json(t.tangent.problem));
    }
  }
  print(a);
  return 0;
}

int cmd_builtin(const std::vector<std::string>& names, const std::string& out) {
  if (names.empty() || names.front() == "list") {
    for (const auto& n : builtin_names()) std::cout << n << '\n';
    return 0;
  }
  const Json j = to_json(builtin_problem(names.front()));
  if (out.empty())
    print(j);
  else
    write_json_file(out, j);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rate-distortion and information-bottleneck solvers with spectral diagnostics"};
  app.require_subcommand(1);
  Options o;

  auto* solve_cmd = app.add_subcommand("solve", "Solve one problem at one beta");
  add_problem_flags(solve_cmd, o);
  solve_cmd->add_option("--beta", o.beta, "Trade-off parameter")->required();
  add_solver_flags(solve_cmd, o);
  add_init_flag(solve_cmd, o);
  solve_cmd->add_option("--merge-tol", o.merge_tol, "IB decoder merge tolerance")->capture_default_str();
  solve_cmd->add_option("--out", o.out, "Directory for solution.json");

  auto* sweep_cmd = app.add_subcommand("sweep", "Sweep an RD problem over a beta grid");
  add_problem_flags(sweep_cmd, o);
  add_grid_flags(sweep_cmd, o);
  add_solver_flags(sweep_cmd, o);
  add_init_flag(sweep_cmd, o);
  add_output_flags(sweep_cmd, o);

  auto* spec_cmd = app.add_subcommand("spectrum", "Spectral report of the RD solution at one beta");
  add_problem_flags(spec_cmd, o);
  spec_cmd->add_option("--beta", o.beta, "Trade-off parameter")->required();
  add_solver_flags(spec_cmd, o);

  auto* rate_cmd = app.add_subcommand("rate-study", "Measured against predicted convergence rate");
  add_problem_flags(rate_cmd, o);
  rate_cmd->add_option("--beta", o.beta, "Trade-off parameter")->required();
  rate_cmd->add_option("--epsilons", o.epsilons, "Tolerances to run")->delimiter(',');
  add_solver_flags(rate_cmd, o);
  add_init_flag(rate_cmd, o);

  auto* ib_cmd = app.add_subcommand("ib-sweep", "Sweep an IB problem over a beta grid");
  add_problem_flags(ib_cmd, o);
  add_grid_flags(ib_cmd, o);
  add_solver_flags(ib_cmd, o);
  add_init_flag(ib_cmd, o);
  add_output_flags(ib_cmd, o);
  ib_cmd->add_option("--merge-tol", o.merge_tol, "Decoder merge tolerance")->capture_default_str();

  auto* tan_cmd = app.add_subcommand("tangent", "Tangent RD problems at each IB transition");
  add_problem_flags(tan_cmd, o);
  add_grid_flags(tan_cmd, o);
  add_solver_flags(tan_cmd, o);
  add_output_flags(tan_cmd, o);
  tan_cmd->add_option("--merge-tol", o.merge_tol, "Decoder merge and dedup tolerance")->capture_default_str();
  tan_cmd->add_option("--refine-steps", o.refine_steps, "Finer IB walk per bracket (0 = off)")
      ->capture_default_str();
  tan_cmd->add_option("--tangent-steps", o.tangent_steps, "Tangent sweep points")->capture_default_str();

  auto* builtin_cmd = app.add_subcommand("builtin", "List builtins or print one as JSON");
  std::vector<std::string> builtin_args;
  std::string builtin_out;
  builtin_cmd->add_option("name", builtin_args, "'list' or a builtin name");
  builtin_cmd->add_option("--out", builtin_out, "Write the JSON here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*solve_cmd) return cmd_solve(o);
    if (*sweep_cmd) return cmd_sweep(o);
    if (*spec_cmd) return cmd_spectrum(o);
    if (*rate_cmd) return cmd_rate_study(o);
    if (*ib_cmd) return cmd_ib_sweep(o);
    if (*tan_cmd) return cmd_tangent(o);
    if (*builtin_cmd) return cmd_builtin(builtin_args, builtin_out);
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
