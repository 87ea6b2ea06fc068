#include "vocovar/cli.hpp"

#include <CLI11.hpp>
#include <iostream>

#include "vocovar/analysis.hpp"
#include "vocovar/dataset.hpp"
#include "vocovar/errors.hpp"
#include "vocovar/exports.hpp"
#include "vocovar/graph.hpp"
#include "vocovar/marginals.hpp"
#include "vocovar/simulator.hpp"

namespace vocovar {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;
constexpr int kExitNumerical = 4;
constexpr int kExitIo = 5;

struct CommonOptions {
  SolverConfig solver;
  GaugeConfig gauge;
};

void add_solver_options(CLI::App* cmd, CommonOptions* opts) {
  cmd->add_option("--tol", opts->solver.tol,
                  "convergence tolerance on |step|_inf");
  cmd->add_option("--max-iters", opts->solver.max_iters,
                  "maximum Gauss-Newton iterations");
  cmd->add_flag("--no-lm", [opts](std::size_t) { opts->solver.use_lm = false; },
                "disable Levenberg-Marquardt damping");
}

void add_gauge_options(CLI::App* cmd, CommonOptions* opts) {
  cmd->add_option("--gauge-rot-sigma", opts->gauge.rot_sigma,
                  "prior sigma on anchor rotations, radians");
  cmd->add_option("--gauge-trans-sigma", opts->gauge.trans_sigma,
                  "prior sigma on anchor translations, meters");
  cmd->add_flag("--no-gauge",
                [opts](std::size_t) { opts->gauge.add_priors = false; },
                "omit the gauge priors (diagnostic use; the system "
                "becomes singular)");
}

// Solve and factorize at the solution; shared by marginals and solve.
struct SolvedGraph {
  FactorGraph graph;
  Values solution;
  SolveReport report;
};

SolvedGraph solve_dataset(const KeyframeDataset& ds,
                          const CommonOptions& opts) {
  SolvedGraph out;
  auto [graph, init] = build_graph(ds, opts.gauge);
  out.graph = std::move(graph);
  auto [solution, report] = gauss_newton_solve(out.graph, init, opts.solver);
  out.solution = std::move(solution);
  out.report = report;
  return out;
}

void print_report(const SolveReport& report) {
  std::cout << "iterations: " << report.iterations
            << (report.converged ? " (converged)" : " (not converged)")
            << "\ninitial cost: " << report.cost_history.front()
            << "\nfinal cost:   " << report.cost_history.back() << "\n";
}

int dispatch(const std::vector<std::string>& args) {
  CLI::App app{"factor-graph covariance recovery for monocular "
               "visual-odometry keyframe data"};
  app.require_subcommand(1);
  app.set_config("--config");

  CommonOptions opts;

  // simulate
  auto* sim = app.add_subcommand(
      "simulate", "generate a synthetic keyframe dataset from a scenario");
  std::string sim_spec_path;
  std::string sim_out = "dataset.vds";
  ScenarioSpec spec;
  std::string sim_kind;
  sim->add_option("spec", sim_spec_path,
                  "scenario file (key value lines); flags override");
  sim->add_option("-o,--output", sim_out, "output dataset path");
  sim->add_option("--kind", sim_kind, "line | arc | loop | revisit");
  sim->add_option("--keyframes", spec.keyframes, "number of keyframes");
  sim->add_option("--landmarks", spec.landmarks, "number of landmarks");
  sim->add_option("--noise-sigma", spec.noise_sigma, "pixel noise sigma");
  sim->add_option("--covis-span", spec.covis_span,
                  "max keyframe gap producing measurements");
  sim->add_option("--seed", spec.seed, "RNG seed");
  sim->add_option("--samples-per-pair", spec.samples_per_pair,
                  "pixel samples per directed co-visible pair");

  // validate
  auto* val = app.add_subcommand("validate", "parse and validate a dataset");
  std::string val_path;
  val->add_option("dataset", val_path, "dataset file")->required();

  // solve
  auto* sol = app.add_subcommand("solve", "optimize poses and depths");
  std::string sol_path, sol_out = "poses.csv";
  sol->add_option("dataset", sol_path, "dataset file")->required();
  sol->add_option("-o,--output", sol_out, "optimized poses CSV");
  add_solver_options(sol, &opts);
  add_gauge_options(sol, &opts);

  // marginals
  auto* mar = app.add_subcommand(
      "marginals", "recover per-keyframe pose marginal covariances");
  std::string mar_path, mar_out = "marginals.csv";
  mar->add_option("dataset", mar_path, "dataset file")->required();
  mar->add_option("-o,--output", mar_out, "marginal covariance CSV");
  add_solver_options(mar, &opts);
  add_gauge_options(mar, &opts);

  // trend
  auto* trd = app.add_subcommand(
      "trend", "per-keyframe D-opt trend over growing windows");
  std::string trd_path, trd_out = "trend.csv", trd_plot;
  trd->add_option("dataset", trd_path, "dataset file")->required();
  trd->add_option("-o,--output", trd_out, "trend CSV");
  trd->add_option("--plot", trd_plot, "also write an SVG plot here");
  add_solver_options(trd, &opts);
  add_gauge_options(trd, &opts);

  // covis
  auto* cov = app.add_subcommand("covis", "co-visibility adjacency counts");
  std::string cov_path, cov_out = "covis.csv";
  cov->add_option("dataset", cov_path, "dataset file")->required();
  cov->add_option("-o,--output", cov_out, "adjacency CSV");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (sim->parsed()) {
    if (!sim_spec_path.empty()) {
      ScenarioSpec from_file = parse_scenario_file(sim_spec_path);
      // Flags given on the command line win over the file.
      if (sim->count("--kind") == 0) spec.kind = from_file.kind;
      if (sim->count("--keyframes") == 0) spec.keyframes = from_file.keyframes;
      if (sim->count("--landmarks") == 0) spec.landmarks = from_file.landmarks;
      if (sim->count("--noise-sigma") == 0) spec.noise_sigma = from_file.noise_sigma;
      if (sim->count("--covis-span") == 0) spec.covis_span = from_file.covis_span;
      if (sim->count("--seed") == 0) spec.seed = from_file.seed;
      if (sim->count("--samples-per-pair") == 0) {
        spec.samples_per_pair = from_file.samples_per_pair;
      }
    }
    if (!sim_kind.empty()) spec.kind = trajectory_kind_from_string(sim_kind);
    auto [ds, gt] = simulate_scenario(spec);
    save_dataset(sim_out, ds);
    std::cout << "wrote " << sim_out << ": " << ds.keyframes.size()
              << " keyframes, " << ds.measurements.size() << " measurements\n";
    return kExitOk;
  }

  if (val->parsed()) {
    const KeyframeDataset ds = load_dataset(val_path);
    std::size_t samples = 0;
    for (const auto& kf : ds.keyframes) samples += kf.samples.size();
    std::cout << "ok: " << ds.keyframes.size() << " keyframes, " << samples
              << " samples, " << ds.measurements.size() << " measurements\n";
    return kExitOk;
  }

  if (sol->parsed()) {
    const KeyframeDataset ds = load_dataset(sol_path);
    const SolvedGraph solved = solve_dataset(ds, opts);
    write_text_file(sol_out, poses_csv(solved.solution));
    print_report(solved.report);
    std::cout << "wrote " << sol_out << "\n";
    return kExitOk;
  }

  if (mar->parsed()) {
    const KeyframeDataset ds = load_dataset(mar_path);
    const SolvedGraph solved = solve_dataset(ds, opts);
    const LinearSystem sys = linearize(solved.graph, solved.solution);
    const SpMat info = information_matrix(sys);
    const auto ordering = default_elimination_ordering(solved.graph, info);
    const SquareRootInformation sri = sparse_cholesky(info, ordering);

    std::vector<VarKey> pose_vars;
    for (const auto& key : solved.graph.layout.order) {
      if (key.kind == VarKind::Pose) pose_vars.push_back(key);
    }
    const auto blocks = recover_marginals(sri, solved.graph.layout, pose_vars);
    write_text_file(mar_out, marginals_csv(blocks));
    print_report(solved.report);
    std::cout << "wrote " << mar_out << "\n";
    return kExitOk;
  }

  if (trd->parsed()) {
    const KeyframeDataset ds = load_dataset(trd_path);
    const TrendSeries series = trend_series(ds, opts.solver, opts.gauge);
    write_text_file(trd_out, trend_csv(series));
    std::cout << "wrote " << trd_out << "\n";
    if (!trd_plot.empty()) {
      write_text_file(trd_plot, trend_svg(series));
      std::cout << "wrote " << trd_plot << "\n";
    }
    return kExitOk;
  }

  if (cov->parsed()) {
    const KeyframeDataset ds = load_dataset(cov_path);
    auto [graph, init] = build_graph(ds);
    write_text_file(cov_out, covis_csv(covisibility(graph)));
    std::cout << "wrote " << cov_out << "\n";
    return kExitOk;
  }

  return kExitUsage;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  try {
    return dispatch(args);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const DegenerateScenario& e) {
    std::cerr << "error: degenerate scenario: " << e.what() << "\n";
    return kExitValidation;
  } catch (const UnknownVariable& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    // CheiralityViolation, SingularSystem, NotPositiveDefinite,
    // InvalidInverseDepth, DimensionTooLarge.
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace vocovar
