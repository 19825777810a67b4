#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "uotlab/asymptotics.hpp"
#include "uotlab/error.hpp"
#include "uotlab/exact_solver.hpp"
#include "uotlab/experiments.hpp"
#include "uotlab/io.hpp"
#include "uotlab/plot.hpp"
#include "uotlab/reg_solver.hpp"

namespace uotlab::cli {
namespace {

const std::vector<std::string> kDatasets{"point-clouds", "gaussians-1d"};
const std::vector<std::string> kDivergences{"kl", "quadratic"};

// Where a command gets its problem from: a JSON file or a generated dataset.
struct ProblemSource {
  std::string path;
  std::string dataset;
  std::string divergence;  // empty: keep the file's / default kl
  std::uint64_t seed = 0;
  DatasetSpec spec;
};

void add_dataset_flags(CLI::App* app, ProblemSource& src) {
  app->add_option("--seed", src.seed, "Seed of the dataset generator")->capture_default_str();
  app->add_option("--grid-nodes", src.spec.grid_nodes, "gaussians-1d: number of grid nodes")
      ->capture_default_str();
  app->add_option("--n-x", src.spec.n_x, "point-clouds: size of X")->capture_default_str();
  app->add_option("--n-y", src.spec.n_y, "point-clouds: size of Y")->capture_default_str();
  app->add_option("--outliers", src.spec.n_outliers,
                  "point-clouds: points of Y shifted away as outliers")
      ->capture_default_str();
}

void add_problem_source(CLI::App* app, ProblemSource& src) {
  auto* p = app->add_option("--problem", src.path, "Problem JSON file");
  auto* d = app->add_option("--dataset", src.dataset, "Generate a dataset instead of --problem")
                ->check(CLI::IsMember(kDatasets));
  p->excludes(d);
  app->add_option("--divergence", src.divergence, "Override the divergence kind")
      ->check(CLI::IsMember(kDivergences));
  add_dataset_flags(app, src);
}

Problem load_problem(ProblemSource src) {
  if (!src.path.empty()) {
    Problem p = read_problem(src.path);
    if (!src.divergence.empty()) p.divergence.kind = parse_divergence_kind(src.divergence);
    p.validate();
    return p;
  }
  if (src.dataset.empty()) throw_invalid("one of --problem or --dataset is required");
  src.spec.kind = parse_dataset_kind(src.dataset);
  src.spec.seed = src.seed;
  if (!src.divergence.empty()) src.spec.divergence = parse_divergence_kind(src.divergence);
  return gen_dataset(src.spec);
}

std::string stem_of(const ProblemSource& src) {
  if (!src.path.empty()) return std::filesystem::path(src.path).stem().string();
  return src.dataset + "_" + (src.divergence.empty() ? "kl" : src.divergence);
}

void write_or_print(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_file(path, text);
  }
}

std::string fit_text(const std::optional<RateFit>& f) {
  if (!f) return "n/a";
  std::ostringstream s;
  s << f->slope << " (r2 " << f->r2 << ", " << f->n_used << " pts)";
  return s.str();
}

struct SweepOpts {
  ProblemSource src;
  SweepConfig cfg;
  bool no_warm = false;
  std::string out_dir = ".";
  std::string stem;
  std::string title;
};

void add_sweep_flags(CLI::App* app, SweepOpts& o) {
  add_problem_source(app, o.src);
  app->add_option("--t-min", o.cfg.t_min, "Smallest t of the grid")->capture_default_str();
  app->add_option("--t-max", o.cfg.t_max, "Largest t of the grid")->capture_default_str();
  app->add_option("--points", o.cfg.n_points, "Grid size (geometric, >= 8)")
      ->capture_default_str();
  app->add_flag("--no-warm-start", o.no_warm, "Cold-start every grid point");
  app->add_option("--fd-ratio", o.cfg.fd_ratio,
                  "Ratio of the finite-difference stencil for xi'(t); 0 disables the ODE column")
      ->capture_default_str();
  app->add_option("--fd-points", o.cfg.fd_points, "Stencil size, 3 or 5")
      ->capture_default_str();
  app->add_option("--tol", o.cfg.solver.grad_tol, "Gradient tolerance of the Newton solver")
      ->capture_default_str();
  app->add_option("--max-iters", o.cfg.solver.max_newton_iters, "Newton iteration cap per t")
      ->capture_default_str();
}

SweepResult do_sweep(const Problem& problem, SweepOpts& o) {
  o.cfg.warm_start = !o.no_warm;
  o.cfg.threads = threads_from_env();
  return run_sweep(problem, o.cfg);
}

int cmd_gen(const ProblemSource& src, const std::string& cost, const std::string& out_path,
            std::ostream& out) {
  DatasetSpec spec = src.spec;
  spec.kind = parse_dataset_kind(src.dataset);
  spec.seed = src.seed;
  if (!src.divergence.empty()) spec.divergence = parse_divergence_kind(src.divergence);
  spec.cost = parse_cost_kind(cost);
  write_or_print(out_path, problem_to_json(gen_dataset(spec)), out);
  return kExitOk;
}

int cmd_solve(const ProblemSource& src, double t, RegSolveConfig cfg,
              const std::string& out_path, std::ostream& out, std::ostream& err) {
  if (!(t > 0.0) || !std::isfinite(t)) throw_invalid("--t must be positive and finite");
  const Problem problem = load_problem(src);
  const RegSolution sol = solve_dual_t(problem, t, cfg);
  write_or_print(out_path, solution_to_json(sol), out);
  if (!sol.converged) {
    err << "solve: Newton did not converge (grad_norm " << sol.grad_norm << ")\n";
    return kExitNonConvergence;
  }
  return kExitOk;
}

int cmd_exact(const ProblemSource& src, const std::string& out_path, std::ostream& out,
              std::ostream& err) {
  const Problem problem = load_problem(src);
  const ExactSolution ex = solve_exact(problem);
  write_or_print(out_path, exact_to_json(ex), out);
  if (!ex.converged()) {
    err << "exact: solver did not converge (kkt " << ex.barrier.kkt_residual << ")\n";
    return kExitNonConvergence;
  }
  return kExitOk;
}

int cmd_sweep(SweepOpts& o, std::ostream& out, std::ostream& err) {
  const Problem problem = load_problem(o.src);
  const SweepResult r = do_sweep(problem, o);
  const std::filesystem::path dir(o.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create " + o.out_dir + ": " + ec.message());
  const std::string stem = o.stem.empty() ? stem_of(o.src) : o.stem;
  const std::string title = o.title.empty() ? stem : o.title;
  const std::string csv = (dir / (stem + ".csv")).string();
  const std::string svg = (dir / (stem + ".svg")).string();
  const std::string diag = (dir / (stem + "_diagnostics.json")).string();
  emit_csv(r.points, csv);
  emit_svg(r.points, r.primal_fit, r.dual_fit, svg, title);
  write_file(diag, diagnostics_to_json(r, problem));

  const SweepSummary s = summarize_sweep(r, problem);
  out << "dual slope:   " << fit_text(r.dual_fit) << "\n"
      << "primal slope: " << fit_text(r.primal_fit) << "\n"
      << "wrote " << csv << ", " << svg << ", " << diag << "\n";
  if (s.nonconverged_rows > 0) {
    err << "sweep: " << s.nonconverged_rows << " rows did not converge (flagged)\n";
  }
  if (!r.exact.converged()) {
    err << "sweep: exact solver did not converge\n";
    return kExitNonConvergence;
  }
  return kExitOk;
}

int cmd_check(SweepOpts& o, std::ostream& out, std::ostream& err) {
  const Problem problem = load_problem(o.src);
  const SweepResult r = do_sweep(problem, o);
  const SweepSummary s = summarize_sweep(r, problem);

  bool all = true;
  auto report = [&](const char* name, bool ok, const std::string& detail) {
    out << (ok ? "PASS " : "FAIL ") << name << ": " << detail << "\n";
    all = all && ok;
  };
  auto num = [](double v) {
    std::ostringstream ss;
    ss << v;
    return ss.str();
  };

  report("exact-converged", r.exact.converged(),
         "kkt " + num(r.exact.barrier.kkt_residual));
  report("feasibility", s.min_slack >= -1e-9, "min slack " + num(s.min_slack));
  report("duality-gap", std::abs(s.duality_gap) <= 1e-8, num(s.duality_gap));
  report("complementarity", s.max_complementarity <= 1e-10, num(s.max_complementarity));
  report("E0-projection", r.e0.residual <= 1e-8, "relative residual " + num(r.e0.residual));
  report("dual-slope", r.dual_fit && r.dual_fit->slope >= -1.6 && r.dual_fit->slope <= -0.9,
         fit_text(r.dual_fit) + ", want [-1.6, -0.9]");
  report("primal-slope", r.primal_fit && r.primal_fit->slope <= -0.5,
         fit_text(r.primal_fit) + ", want <= -0.5");
  report("entropy", s.max_entropy_excess <= 1e-9,
         "max H(gamma(t)) - H(gamma*) " + num(s.max_entropy_excess));
  if (o.cfg.fd_ratio > 0.0) {
    report("ode-residual",
           s.ode_max_ratio && *s.ode_max_ratio <= 1e-3 && s.ode_missing_rows == 0,
           "max relative " + (s.ode_max_ratio ? num(*s.ode_max_ratio) : std::string("n/a")) +
               ", missing rows " + std::to_string(s.ode_missing_rows));
  }
  report("sweep-converged", s.nonconverged_rows == 0,
         std::to_string(s.nonconverged_rows) + " non-converged rows");

  if (!r.exact.converged()) return kExitNonConvergence;
  if (!all) {
    err << "check: some invariants failed\n";
    return kExitCheckFailed;
  }
  return kExitOk;
}

int cmd_plot(const std::string& csv_path, const std::string& out_path, const std::string& title) {
  const std::vector<CsvRow> rows = parse_csv(read_file(csv_path));
  if (rows.empty()) throw_invalid("plot: " + csv_path + " has no rows");
  PlotSeries primal, dual;
  std::vector<std::pair<double, double>> ps, ds;
  for (const CsvRow& row : rows) {
    primal.t.push_back(row.t);
    primal.err.push_back(row.primal_err);
    dual.t.push_back(row.t);
    dual.err.push_back(row.dual_err);
    if (row.flags & kFlagNonConverged) continue;
    ps.emplace_back(row.t, row.primal_err);
    ds.emplace_back(row.t, row.dual_err);
  }
  try {
    primal.fit = fit_rate(ps);
  } catch (const Error&) {
  }
  try {
    dual.fit = fit_rate(ds);
  } catch (const Error&) {
  }
  write_file(out_path, svg_string(primal, dual, title));
  return kExitOk;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInternal: return kExitNonConvergence;
    default: return kExitInvalid;
  }
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Entropic and unregularized unbalanced optimal transport toolkit", "uotlab"};
  app.require_subcommand(1);

  ProblemSource gen_src;
  std::string gen_cost = "sqeuclidean", gen_out;
  auto* gen = app.add_subcommand("gen", "Generate a seeded dataset as problem JSON");
  gen->add_option("--dataset", gen_src.dataset, "Dataset kind")
      ->required()
      ->check(CLI::IsMember(kDatasets));
  gen->add_option("--divergence", gen_src.divergence, "Divergence kind (default kl)")
      ->check(CLI::IsMember(kDivergences));
  gen->add_option("--cost", gen_cost, "Ground cost")
      ->check(CLI::IsMember({"sqeuclidean", "euclidean"}))
      ->capture_default_str();
  gen->add_option("-o,--out", gen_out, "Output file (stdout when omitted)");
  add_dataset_flags(gen, gen_src);

  ProblemSource solve_src;
  double solve_t = 0.0;
  RegSolveConfig solve_cfg;
  std::string solve_out;
  auto* solve = app.add_subcommand("solve", "Solve the regularized dual at one t");
  add_problem_source(solve, solve_src);
  solve->add_option("--t", solve_t, "Inverse regularization strength (> 0)")->required();
  solve->add_option("--tol", solve_cfg.grad_tol, "Gradient tolerance")->capture_default_str();
  solve->add_option("--max-iters", solve_cfg.max_newton_iters, "Newton iteration cap")
      ->capture_default_str();
  solve->add_option("-o,--out", solve_out, "Solution JSON (stdout when omitted)");

  ProblemSource exact_src;
  std::string exact_out;
  auto* exact = app.add_subcommand("exact", "Solve the unregularized problem");
  add_problem_source(exact, exact_src);
  exact->add_option("-o,--out", exact_out, "Exact-solution JSON (stdout when omitted)");

  SweepOpts sweep_opts;
  auto* sweep = app.add_subcommand("sweep", "Sweep t on a geometric grid; write CSV, SVG and diagnostics");
  add_sweep_flags(sweep, sweep_opts);
  sweep->add_option("-o,--out-dir", sweep_opts.out_dir, "Output directory")->capture_default_str();
  sweep->add_option("--stem", sweep_opts.stem,
                    "Output file stem (default: problem file stem or <dataset>_<divergence>)");
  sweep->add_option("--title", sweep_opts.title, "Plot title");

  std::string plot_csv, plot_out = "sweep.svg", plot_title;
  auto* plot = app.add_subcommand("plot", "Plot a sweep CSV as a two-panel log-log SVG");
  plot->add_option("--csv", plot_csv, "Sweep CSV")->required();
  plot->add_option("-o,--out", plot_out, "Output SVG")->capture_default_str();
  plot->add_option("--title", plot_title, "Plot title");

  SweepOpts check_opts;
  auto* check = app.add_subcommand("check", "Run the invariant suite on a problem");
  add_sweep_flags(check, check_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitInvalid;
  }

  try {
    if (*gen) return cmd_gen(gen_src, gen_cost, gen_out, out);
    if (*solve) return cmd_solve(solve_src, solve_t, solve_cfg, solve_out, out, err);
    if (*exact) return cmd_exact(exact_src, exact_out, out, err);
    if (*sweep) return cmd_sweep(sweep_opts, out, err);
    if (*plot) return cmd_plot(plot_csv, plot_out, plot_title);
    if (*check) return cmd_check(check_opts, out, err);
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNonConvergence;
  }
  return kExitInvalid;
}

int cli_main(int argc, const char* const* argv) {
  return cli_main(argc, argv, std::cout, std::cerr);
}

}  // namespace uotlab::cli
