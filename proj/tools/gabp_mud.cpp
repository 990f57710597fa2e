#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "gabp/detectors.hpp"
#include "gabp/diagnostics.hpp"
#include "gabp/engine.hpp"
#include "gabp/io.hpp"
#include "gabp/matrix.hpp"
#include "gabp/montanari.hpp"
#include "gabp/rng.hpp"
#include "gabp/simulator.hpp"
#include "gabp/vector.hpp"
#include "run_config.hpp"

namespace {

using namespace gabp;
using cli::RunConfig;

const char* bool_text(bool v) { return v ? "true" : "false"; }

struct SolverFlags {
  double tolerance = 1e-10;
  int max_iterations = 10000;
  std::string schedule = "synchronous";
  double damping = 0.0;
  std::string tolerance_mode = "absolute";
  std::string kernel = "parallel";
  CLI::Option* tolerance_opt = nullptr;
  CLI::Option* max_iterations_opt = nullptr;
  CLI::Option* schedule_opt = nullptr;
  CLI::Option* damping_opt = nullptr;
  CLI::Option* tolerance_mode_opt = nullptr;
};

void add_solver_flags(CLI::App* cmd, SolverFlags& f) {
  f.tolerance_opt =
      cmd->add_option("--tolerance", f.tolerance, "max message delta declaring convergence");
  f.max_iterations_opt = cmd->add_option("--max-iterations", f.max_iterations, "sweep budget");
  f.schedule_opt = cmd->add_option("--schedule", f.schedule, "message update order")
                       ->check(CLI::IsMember({"synchronous", "sequential"}));
  f.damping_opt = cmd->add_option("--damping", f.damping, "blend factor for old messages, [0,1)");
  f.tolerance_mode_opt =
      cmd->add_option("--tolerance-mode", f.tolerance_mode, "absolute or scaled message deltas")
          ->check(CLI::IsMember({"absolute", "scaled"}));
  cmd->add_option("--kernel", f.kernel, "sweep implementation")
      ->check(CLI::IsMember({"parallel", "serial"}));
}

SolverConfig to_solver_config(const SolverFlags& f) {
  SolverConfig cfg;
  cfg.tolerance = f.tolerance;
  cfg.max_iterations = f.max_iterations;
  cfg.schedule = f.schedule == "sequential" ? Schedule::sequential : Schedule::synchronous;
  cfg.damping = f.damping;
  cfg.tolerance_mode =
      f.tolerance_mode == "scaled" ? ToleranceMode::scaled : ToleranceMode::absolute;
  cfg.kernel = f.kernel == "serial" ? Kernel::serial_reference : Kernel::parallel;
  return cfg;
}

void overlay_solver_flags(const SolverFlags& f, SolverConfig& cfg) {
  if (f.tolerance_opt->count()) cfg.tolerance = f.tolerance;
  if (f.max_iterations_opt->count()) cfg.max_iterations = f.max_iterations;
  if (f.schedule_opt->count()) {
    cfg.schedule = f.schedule == "sequential" ? Schedule::sequential : Schedule::synchronous;
  }
  if (f.damping_opt->count()) cfg.damping = f.damping;
  if (f.tolerance_mode_opt->count()) {
    cfg.tolerance_mode =
        f.tolerance_mode == "scaled" ? ToleranceMode::scaled : ToleranceMode::absolute;
  }
}

void write_vector_file(const std::string& path, const Vector& v) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path, 0);
  write_vector(out, v);
}

void write_history_file(const std::string& path, const std::vector<double>& history) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path, 0);
  for (double r : history) out << format_g17(r) << '\n';
}

NoiseCovariance lift_zeros(const NoiseCovariance& psi) {
  std::vector<double> lifted(static_cast<std::size_t>(psi.size()));
  for (int i = 0; i < psi.size(); ++i) {
    lifted[static_cast<std::size_t>(i)] = psi[i] == 0.0 ? kPinvEta : psi[i];
  }
  return NoiseCovariance(Vector(std::move(lifted)));
}

// ---- solve ----

struct SolveArgs {
  std::string matrix_path;
  std::string rhs_path;
  std::string output = "solution.txt";
  std::string precisions_path;
  std::string residuals_path;
  SolverFlags solver;
};

int run_solve(const SolveArgs& args) {
  const SparseSymmetricMatrix A = read_symmetric_file(args.matrix_path);
  const Vector b = read_vector_file(args.rhs_path);
  const SolveResult result = run(A, b, to_solver_config(args.solver));

  write_vector_file(args.output, result.means);
  if (!args.precisions_path.empty()) write_vector_file(args.precisions_path, result.precisions);
  if (!args.residuals_path.empty()) write_history_file(args.residuals_path, result.residual_history);

  std::cout << "converged " << bool_text(result.converged) << '\n'
            << "iterations " << result.iterations << '\n'
            << "residual "
            << format_g17(result.residual_history.empty() ? 0.0 : result.residual_history.back())
            << '\n';
  return result.converged ? 0 : 2;
}

// ---- detect ----

struct DetectArgs {
  std::string spreading_path;
  std::string observations_path;
  std::string detector = "mmse";
  double noise = 0.0;
  CLI::Option* noise_opt = nullptr;
  std::string noise_file;
  std::string clip = "sign";
  CLI::Option* clip_opt = nullptr;
  std::string output = "estimates.txt";
  std::string raw_output = "raw_estimates.txt";
  SolverFlags solver;
};

int run_detect(DetectArgs& args) {
  const RectangularMatrix S = read_rectangular_file(args.spreading_path);
  const Vector y = read_vector_file(args.observations_path);
  const DetectorKind kind = cli::parse_detector_name(args.detector);

  NoiseCovariance psi = NoiseCovariance::uniform(S.rows(), 0.0);
  if (!args.noise_file.empty()) {
    psi = NoiseCovariance(read_vector_file(args.noise_file));
  } else if (args.noise_opt->count()) {
    psi = NoiseCovariance::uniform(S.rows(), args.noise);
  }
  if (kind != DetectorKind::mmse && !psi.is_zero()) {
    throw std::invalid_argument(
        "only the mmse detector uses a noise covariance; drop --noise/--noise-file or pass 0");
  }
  if (kind == DetectorKind::mmse) {
    for (int i = 0; i < psi.size(); ++i) {
      if (psi[i] == 0.0) {
        throw std::invalid_argument(
            "mmse detection needs strictly positive noise variance at chip " + std::to_string(i) +
            " (use zf or pinv at zero noise)");
      }
    }
  }

  if (!args.solver.damping_opt->count() &&
      (kind == DetectorKind::decorrelator || kind == DetectorKind::pseudoinverse)) {
    args.solver.damping = 0.5;   // the near-singular noise block needs it in practice
  }
  const SolverConfig config = to_solver_config(args.solver);

  Vector raw;
  int iterations = 0;
  bool converged = true;
  if (kind == DetectorKind::matched_filter) {
    raw = detect_mf(S, y, Clipping::identity);
  } else {
    AugmentedDetection det = detect_augmented(S, psi, y, Clipping::identity, config);
    iterations = det.solve.iterations;
    converged = det.solve.converged;
    raw = std::move(det.raw);
  }

  Clipping clip = args.clip == "identity" ? Clipping::identity : Clipping::sign;
  if (!args.clip_opt->count() && kind == DetectorKind::pseudoinverse) {
    clip = Clipping::identity;   // least squares is reported unclipped by default
  }
  const Vector clipped = decide(raw, clip);

  write_vector_file(args.output, clipped);
  write_vector_file(args.raw_output, raw);

  const DdResult dd = check_diagonal_dominance(build_augmented(S, lift_zeros(psi)));
  std::cout << "detector " << args.detector << '\n'
            << "iterations " << iterations << '\n'
            << "converged " << bool_text(converged) << '\n'
            << "diagonally_dominant " << bool_text(dd.dominant) << '\n'
            << "dd_margin " << format_g17(dd.margin) << '\n';
  return converged ? 0 : 2;
}

// ---- simulate ----

struct SimulateArgs {
  std::string config_path;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  int frames = 0;
  CLI::Option* frames_opt = nullptr;
  std::string detectors;
  std::string csv_path;
  std::string plot_path;
  std::string sweep_key;
  double sweep_from = 0.0;
  double sweep_to = 0.0;
  int sweep_steps = 5;
  CLI::Option* sweep_from_opt = nullptr;
  CLI::Option* sweep_to_opt = nullptr;
  SolverFlags solver;
};

int run_simulate(const SimulateArgs& args) {
  RunConfig cfg = cli::load_run_config(args.config_path);

  if (args.seed_opt->count()) cfg.scenario.rng_seed = args.seed;
  if (args.frames_opt->count()) cfg.scenario.num_frames = args.frames;
  if (!args.detectors.empty()) cfg.detectors = cli::parse_detector_list(args.detectors);
  if (!args.csv_path.empty()) cfg.csv_path = args.csv_path;
  if (!args.plot_path.empty()) cfg.plot_path = args.plot_path;
  overlay_solver_flags(args.solver, cfg.solver);

  if (cfg.detectors.empty()) {
    throw std::invalid_argument("no detectors configured; add '[detectors] use = ...' or pass "
                                "--detectors");
  }
  const bool damping_given = cfg.damping_set || args.solver.damping_opt->count() > 0;
  if (!damping_given) {
    for (const DetectorSpec& spec : cfg.detectors) {
      if (spec.kind == DetectorKind::decorrelator || spec.kind == DetectorKind::pseudoinverse) {
        cfg.solver.damping = 0.5;
        break;
      }
    }
  }

  std::vector<double> sweep_values;
  if (!args.sweep_key.empty()) {
    if (args.sweep_key != "sigma2" && args.sweep_key != "users" && args.sweep_key != "chips") {
      throw std::invalid_argument("invalid sweep key '" + args.sweep_key +
                                  "'; valid: sigma2, users, chips");
    }
    if (!args.sweep_from_opt->count() || !args.sweep_to_opt->count()) {
      throw std::invalid_argument("--sweep needs --sweep-from and --sweep-to");
    }
    if (args.sweep_steps < 1) throw std::invalid_argument("--sweep-steps must be positive");
    for (int i = 0; i < args.sweep_steps; ++i) {
      const double t = args.sweep_steps == 1
                           ? 0.0
                           : static_cast<double>(i) / (args.sweep_steps - 1);
      sweep_values.push_back(args.sweep_from + t * (args.sweep_to - args.sweep_from));
    }
  } else {
    sweep_values.push_back(cfg.scenario.sigma2);
  }

  std::vector<AggregateRow> all_rows;
  std::vector<SweepPoint> points;
  for (double value : sweep_values) {
    Scenario sc = cfg.scenario;
    if (args.sweep_key == "sigma2") {
      sc.sigma2 = value;
    } else if (args.sweep_key == "users") {
      sc.users = static_cast<int>(std::llround(value));
    } else if (args.sweep_key == "chips") {
      sc.chips = static_cast<int>(std::llround(value));
    }
    const GeneratedScenario generated = generate_scenario(sc);
    const std::vector<TrialRecord> records = run_trials(generated, cfg.detectors, cfg.solver);
    std::vector<AggregateRow> rows = aggregate_trials(sc, records);
    points.push_back({value, rows});
    for (AggregateRow& row : rows) all_rows.push_back(std::move(row));
  }

  const std::string csv_path = cfg.csv_path.empty() ? "results.csv" : cfg.csv_path;
  {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + csv_path, 0);
    write_csv(out, all_rows);
  }
  std::cout << "rows " << all_rows.size() << '\n' << "csv " << csv_path << '\n';
  if (!cfg.plot_path.empty()) {
    std::ofstream out(cfg.plot_path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + cfg.plot_path, 0);
    write_plot_data(out, points);
    std::cout << "plot " << cfg.plot_path << '\n';
  }
  return 0;
}

// ---- diagnose ----

struct DiagnoseArgs {
  std::string spreading_path;
  double noise = 0.0;
  CLI::Option* noise_opt = nullptr;
  std::string noise_file;
  double epsilon = 1e-6;
};

int run_diagnose(const DiagnoseArgs& args) {
  const RectangularMatrix S = read_rectangular_file(args.spreading_path);
  NoiseCovariance psi = NoiseCovariance::uniform(S.rows(), 0.0);
  if (!args.noise_file.empty()) {
    psi = NoiseCovariance(read_vector_file(args.noise_file));
  } else if (args.noise_opt->count()) {
    psi = NoiseCovariance::uniform(S.rows(), args.noise);
  }

  const DiagnosticsReport report = diagnose(S, psi);
  double min_noise = psi.size() > 0 ? psi[0] : 0.0;
  for (int i = 1; i < psi.size(); ++i) min_noise = std::min(min_noise, psi[i]);

  const Regularized reg = regularize_dd(build_augmented(S, lift_zeros(psi)), args.epsilon);
  double added = 0.0;
  for (std::size_t i = 0; i < reg.added.size(); ++i) {
    added = std::max(added, std::abs(reg.added[i]));
  }

  std::cout << "diagonally_dominant " << bool_text(report.is_diagonally_dominant) << '\n'
            << "dd_margin " << format_g17(report.dd_margin) << '\n'
            << "noise_threshold_value " << format_g17(report.noise_threshold_value) << '\n'
            << "min_noise " << format_g17(min_noise) << '\n'
            << "noise_threshold_satisfied " << bool_text(report.noise_threshold_satisfied) << '\n'
            << "walk_summable " << bool_text(report.walk_summable) << '\n'
            << "spectral_radius_estimate " << format_g17(report.spectral_radius_estimate) << '\n'
            << "regularization_added " << format_g17(added) << '\n';
  return 0;
}

// ---- montanari-equiv ----

struct MontanariArgs {
  int users = 0;
  int chips = 0;
  double sigma2 = 1.0;
  std::uint64_t seed = 0;
  int iterations = 25;
};

int run_montanari_equiv(const MontanariArgs& args) {
  if (args.users < 1 || args.chips < 1) {
    throw std::invalid_argument("--k and --n must be at least 1");
  }
  if (!(args.sigma2 > 0.0)) {
    throw std::invalid_argument("this equivalence needs sigma2 > 0");
  }
  if (args.iterations < 1) throw std::invalid_argument("--iterations must be positive");

  const int k = args.users;
  const int n = args.chips;
  Rng rng(splitmix64(args.seed ^ 0x4D4F4E5441ULL));
  RectangularMatrix signs(n, k);
  for (int c = 0; c < n; ++c) {
    for (int u = 0; u < k; ++u) signs(c, u) = rng.sign();
  }
  std::vector<double> symbols(static_cast<std::size_t>(k));
  for (int u = 0; u < k; ++u) symbols[static_cast<std::size_t>(u)] = rng.sign();
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  const double sd = std::sqrt(args.sigma2);
  std::vector<double> obs(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) {
    double acc = 0.0;
    for (int u = 0; u < k; ++u) acc += signs(c, u) * symbols[static_cast<std::size_t>(u)];
    obs[static_cast<std::size_t>(c)] = acc * inv_sqrt_n + sd * rng.gaussian();
  }

  const NotationMap map = make_notation_map(signs, args.sigma2, Vector(std::move(obs)));
  const SparseSymmetricMatrix A = mapped_augmented_system(map);
  const Vector b = mapped_augmented_rhs(map);

  SolverConfig config;
  config.schedule = Schedule::synchronous;

  MessageState gabp = initialize(A, b);
  MontanariState mont = montanari_initial_state(map);

  double max_message_disc = 0.0;
  for (int it = 1; it <= args.iterations; ++it) {
    gabp = iterate_once(A, b, gabp, config);
    mont = montanari_iterate(map, mont);
    const MontanariState mirrored = translate_messages(gabp, map);
    for (std::size_t t = 0; t < mont.lambda.size(); ++t) {
      max_message_disc = std::max(max_message_disc,
                                  std::abs(mirrored.lambda[t] - mont.lambda[t]));
      max_message_disc = std::max(max_message_disc,
                                  std::abs(mirrored.lambda_hat[t] - mont.lambda_hat[t]));
      max_message_disc = std::max(max_message_disc, std::abs(mirrored.gamma[t] - mont.gamma[t]));
      max_message_disc = std::max(max_message_disc,
                                  std::abs(mirrored.gamma_hat[t] - mont.gamma_hat[t]));
    }
  }

  // The bipartite rules fold one extra half-step into their inference read,
  // so their estimate at sweep T matches the general engine's at T + 1.
  gabp = iterate_once(A, b, gabp, config);
  Vector means, precisions;
  infer(gabp, means, precisions);
  const auto [mont_means, mont_precisions] = montanari_infer(mont, map.signs, map.sigma2);
  double mean_disc = 0.0;
  for (int u = 0; u < k; ++u) {
    mean_disc = std::max(mean_disc, std::abs(means[u] - mont_means[u]));
  }

  std::cout << "users " << k << '\n'
            << "chips " << n << '\n'
            << "sigma2 " << format_g17(args.sigma2) << '\n'
            << "iterations " << args.iterations << '\n'
            << "max_message_discrepancy " << format_g17(max_message_disc) << '\n'
            << "final_mean_discrepancy " << format_g17(mean_disc) << '\n';
  return max_message_disc < 1e-10 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear multiuser detection by Gaussian belief propagation on the augmented "
               "user/chip system"};
  app.require_subcommand(1);
  app.fallthrough(true);

  int threads = 0;
  app.add_option("--threads", threads, "cap parallel workers (identical results at any count)")
      ->envname("GABP_MUD_THREADS");

  SolveArgs solve_args;
  CLI::App* solve_cmd = app.add_subcommand("solve", "solve A x = b and write the posterior means");
  solve_cmd->add_option("matrix", solve_args.matrix_path, "symmetric system file")->required();
  solve_cmd->add_option("rhs", solve_args.rhs_path, "right-hand side file")->required();
  solve_cmd->add_option("-o,--output", solve_args.output, "solution file, one mean per line");
  solve_cmd->add_option("--precisions", solve_args.precisions_path,
                        "also write posterior precisions to this file");
  solve_cmd->add_option("--residuals", solve_args.residuals_path,
                        "write per-sweep max message deltas to this file");
  add_solver_flags(solve_cmd, solve_args.solver);

  DetectArgs detect_args;
  CLI::App* detect_cmd =
      app.add_subcommand("detect", "detect user symbols from chip observations");
  detect_cmd->add_option("spreading", detect_args.spreading_path, "spreading matrix file")
      ->required();
  detect_cmd->add_option("observations", detect_args.observations_path, "received chips file")
      ->required();
  detect_cmd->add_option("--detector", detect_args.detector, "mf | zf | mmse | pinv")
      ->check(CLI::IsMember({"mf", "zf", "mmse", "pinv"}));
  detect_args.noise_opt =
      detect_cmd->add_option("--noise", detect_args.noise, "uniform noise variance (mmse)");
  detect_cmd->add_option("--noise-file", detect_args.noise_file,
                         "per-chip noise variance file (mmse)")
      ->excludes(detect_args.noise_opt);
  detect_args.clip_opt = detect_cmd->add_option("--clip", detect_args.clip,
                                                "decision rule for the estimates file")
                             ->check(CLI::IsMember({"sign", "identity"}));
  detect_cmd->add_option("-o,--output", detect_args.output, "clipped estimates file");
  detect_cmd->add_option("--raw-output", detect_args.raw_output, "unclipped estimates file");
  add_solver_flags(detect_cmd, detect_args.solver);

  SimulateArgs sim_args;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "run monte-carlo detection trials");
  sim_cmd->add_option("config", sim_args.config_path, "run configuration file")->required();
  sim_args.seed_opt = sim_cmd->add_option("--seed", sim_args.seed, "override scenario seed");
  sim_args.frames_opt = sim_cmd->add_option("--frames", sim_args.frames, "override frame count");
  sim_cmd->add_option("--detectors", sim_args.detectors, "override detector list (comma-separated)");
  sim_cmd->add_option("--csv", sim_args.csv_path, "override CSV output path");
  sim_cmd->add_option("--plot", sim_args.plot_path, "override plot-data output path");
  sim_cmd->add_option("--sweep", sim_args.sweep_key, "parameter to sweep: sigma2 | users | chips");
  sim_args.sweep_from_opt = sim_cmd->add_option("--sweep-from", sim_args.sweep_from);
  sim_args.sweep_to_opt = sim_cmd->add_option("--sweep-to", sim_args.sweep_to);
  sim_cmd->add_option("--sweep-steps", sim_args.sweep_steps, "points in the sweep (default 5)");
  add_solver_flags(sim_cmd, sim_args.solver);

  DiagnoseArgs diag_args;
  CLI::App* diag_cmd =
      app.add_subcommand("diagnose", "convergence diagnostics for a detection problem");
  diag_cmd->add_option("spreading", diag_args.spreading_path, "spreading matrix file")->required();
  diag_args.noise_opt =
      diag_cmd->add_option("--noise", diag_args.noise, "uniform noise variance");
  diag_cmd->add_option("--noise-file", diag_args.noise_file, "per-chip noise variance file")
      ->excludes(diag_args.noise_opt);
  diag_cmd->add_option("--epsilon", diag_args.epsilon,
                       "dominance slack for the reported regularization amount");

  MontanariArgs mont_args;
  CLI::App* mont_cmd = app.add_subcommand(
      "montanari-equiv", "lockstep equivalence of the bipartite CDMA rules and this engine");
  mont_cmd->add_option("--k", mont_args.users, "users")->required();
  mont_cmd->add_option("--n", mont_args.chips, "chips")->required();
  mont_cmd->add_option("--sigma2", mont_args.sigma2, "noise variance, > 0");
  mont_cmd->add_option("--seed", mont_args.seed, "instance seed");
  mont_cmd->add_option("--iterations", mont_args.iterations, "lockstep sweeps (default 25)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (threads > 0) set_worker_count(threads);
    if (solve_cmd->parsed()) return run_solve(solve_args);
    if (detect_cmd->parsed()) return run_detect(detect_args);
    if (sim_cmd->parsed()) return run_simulate(sim_args);
    if (diag_cmd->parsed()) return run_diagnose(diag_args);
    if (mont_cmd->parsed()) return run_montanari_equiv(mont_args);
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 1;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return e.iteration() >= 1 ? 2 : 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
