#include "tripod/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>

#include <json.hpp>

#include "tripod/splitter.hpp"

namespace tripod {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string out_path(const RunConfig& config, const std::string& name) {
  return (fs::path(config.output_dir) / name).string();
}

void write_json(const std::string& path, const json& j) {
  atomic_write(path, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

struct CyclePipeline {
  KernelMatrix mapping;
  KernelMatrix readout;
  KernelMatrix cycle;
};

CyclePipeline build_cycle(const RunConfig& config) {
  const Grid grid = config.grid();
  CyclePipeline p;
  p.mapping = build_mapping_kernel(config.params, grid,
                                   config.params.rabi_base, config.workers);
  p.readout = build_readout_kernel(config.params, grid, Direction::backward,
                                   config.workers);
  p.cycle = compose_full_cycle(p.mapping, p.readout);
  return p;
}

/// Deterministic smooth test envelopes (low-order sine series).
std::vector<FieldEnvelope> smooth_trials(const Grid& grid, std::size_t count,
                                         unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<FieldEnvelope> trials;
  trials.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    FieldEnvelope env(grid);
    for (int mode = 1; mode <= 6; ++mode) {
      const double cr = normal(rng);
      const double ci = normal(rng);
      for (std::size_t j = 0; j < grid.n_t(); ++j) {
        const double s = std::sin(mode * std::numbers::pi *
                                  grid.time_nodes()[j] / grid.duration());
        env.samples[j] += Complex(cr * s, ci * s);
      }
    }
    trials.push_back(std::move(env));
  }
  return trials;
}

json matrix2_json(const Eigen::Matrix2d& m) {
  return json::array(
      {json::array({m(0, 0), m(0, 1)}), json::array({m(1, 0), m(1, 1)})});
}

}  // namespace

int cmd_kernel(const RunConfig& config, std::ostream& log) {
  validate_config(config.params, config.grid(), config.drive());
  const auto pipeline = build_cycle(config);
  const double defect = symmetry_defect(pipeline.cycle);

  write_kernel_csv(out_path(config, "kernel.csv"), pipeline.cycle);
  json meta;
  meta["T"] = config.T;
  meta["L"] = config.L;
  meta["n_t"] = config.n_t;
  meta["n_z"] = config.n_z;
  meta["coupling"] = config.params.coupling;
  meta["rabi_base"] = config.params.rabi_base;
  meta["row_axis"] = "time_out";
  meta["col_axis"] = "time_in";
  meta["input_time_reversed"] = true;
  meta["direction"] = "backward";
  meta["symmetry_defect"] = defect;
  meta["time_weight"] = config.T / static_cast<double>(config.n_t);
  meta["space_weight"] = config.L / static_cast<double>(config.n_z);
  write_json(out_path(config, "kernel_meta.json"), meta);

  log << "wrote kernel.csv (" << config.n_t << "x" << config.n_t
      << "), symmetry defect " << fmt6(defect) << "\n";
  return kExitOk;
}

int cmd_modes(const RunConfig& config, std::ostream& log) {
  validate_config(config.params, config.grid(), config.drive());
  const auto pipeline = build_cycle(config);
  const ModeBasis basis = decompose(pipeline.cycle);

  write_eigenvalues_csv(out_path(config, "eigenvalues.csv"), basis);
  write_modes_csv(out_path(config, "modes.csv"), basis);

  const auto [approx, mercer_residual] = reconstruct(basis, basis.size());
  (void)approx;
  double gram_defect = 0.0;
  {
    const Eigen::Index n = basis.eigenvalues.size();
    const Eigen::VectorXd s =
        Eigen::Map<const Eigen::VectorXd>(basis.grid.time_weights().data(), n)
            .cwiseSqrt();
    const Eigen::MatrixXd psi = s.asDiagonal() * basis.modes;
    gram_defect = (psi.transpose() * psi - Eigen::MatrixXd::Identity(n, n))
                      .cwiseAbs()
                      .maxCoeff();
  }

  json summary;
  summary["lambda1"] = basis.eigenvalues.size() > 0 ? basis.eigenvalues[0] : 0.0;
  summary["lambda2"] = basis.eigenvalues.size() > 1 ? basis.eigenvalues[1] : 0.0;
  summary["lambda3"] = basis.eigenvalues.size() > 2 ? basis.eigenvalues[2] : 0.0;
  summary["symmetry_defect"] = basis.symmetry_defect;
  summary["gram_defect"] = gram_defect;
  summary["mercer_residual"] = mercer_residual;
  json centroids = json::array();
  for (std::size_t i = 0; i < std::min<std::size_t>(basis.size(), 4); ++i) {
    centroids.push_back(basis.centroid(i));
  }
  summary["mode_centroids"] = centroids;
  write_json(out_path(config, "modes_summary.json"), summary);

  log << "wrote eigenvalues.csv, modes.csv; lambda1 = "
      << fmt6(summary["lambda1"].get<double>())
      << ", lambda2 = " << fmt6(summary["lambda2"].get<double>()) << "\n";
  return kExitOk;
}

int cmd_sweep(const RunConfig& config, std::ostream& log) {
  const SweepTable table =
      sweep(config.params, {config.sweep_t_min, config.sweep_t_max,
                            config.sweep_t_points},
            {config.sweep_l_min, config.sweep_l_max, config.sweep_l_points},
            config.sweep_n, config.workers);

  write_sweep_csv(out_path(config, "sweep.csv"), table);
  const SweepRow& best = table.best();
  json summary;
  summary["n_bins"] = config.sweep_n;
  summary["t_points"] = table.t_points;
  summary["l_points"] = table.l_points;
  summary["best"] = {{"T", best.T},
                     {"L", best.L},
                     {"lambda1", best.lambda1},
                     {"lambda2", best.lambda2},
                     {"lambda3", best.lambda3}};
  write_json(out_path(config, "sweep_summary.json"), summary);

  log << "wrote sweep.csv (" << table.rows.size()
      << " points); best lambda1 = " << fmt6(best.lambda1) << " at T = "
      << fmt6(best.T) << ", L = " << fmt6(best.L) << "\n";
  return kExitOk;
}

int cmd_split(const RunConfig& config, const SplitInputs& inputs,
              std::ostream& log) {
  const Grid grid = config.grid();
  const DriveSetting drive = config.drive();
  validate_config(config.params, grid, drive);

  const bool envelope_form = inputs.a1_path || inputs.a2_path;
  if (envelope_form && inputs.mode_index) {
    throw ConfigError("split takes either envelope files or --mode, not both",
                      {"mode"});
  }

  if (envelope_form) {
    if (!inputs.a1_path || !inputs.a2_path) {
      throw ConfigError("split needs both --a1 and --a2 envelope files",
                        {"a1"});
    }
    const FieldEnvelope a1 = read_envelope_csv(*inputs.a1_path, grid);
    const FieldEnvelope a2 = read_envelope_csv(*inputs.a2_path, grid);
    const ProtocolResult run =
        run_protocol(config.params, grid, drive, a1, a2);
    write_envelope_csv(out_path(config, "a_plus.csv"), run.a_plus);
    write_envelope_csv(out_path(config, "a_minus.csv"), run.a_minus);

    json report;
    report["input_energy"] = run.diag.input_energy;
    report["output_energy"] = run.diag.output_energy;
    report["energy_ratio"] = run.diag.input_energy > 0.0
                                 ? run.diag.output_energy /
                                       run.diag.input_energy
                                 : 0.0;
    report["a_plus_energy"] = run.a_plus.norm2();
    report["a_minus_energy"] = run.a_minus.norm2();
    report["mp1_balance"] = run.diag.mp1_balance;
    report["mp2_balance"] = run.diag.mp2_balance;
    report["mp1_residual_c"] = run.diag.mp1_residual_c;
    report["mp2_residual_c"] = run.diag.mp2_residual_c;
    report["warnings"] = run.diag.warnings;
    write_json(out_path(config, "split_report.json"), report);
    log << "wrote a_plus.csv, a_minus.csv; energy ratio "
        << fmt6(report["energy_ratio"].get<double>()) << "\n";
    return kExitOk;
  }

  const std::size_t mode = inputs.mode_index.value_or(config.mode_index);
  const auto pipeline = build_cycle(config);
  const ModeBasis basis = decompose(pipeline.cycle);
  const SplitterMatrix empirical =
      empirical_matrix(config.params, grid, drive, basis, mode);
  const double theta_dir = std::atan2(drive.omega_r2, drive.omega_r1);
  const SplitterMatrix ideal =
      ideal_matrix(theta_dir, empirical.lambda, static_cast<int>(mode));
  const CompareReport report = compare(empirical, ideal);

  json j;
  j["mode_index"] = mode;
  j["lambda"] = empirical.lambda;
  j["theta"] = theta_dir;
  j["vacuum_budget"] = empirical.vacuum_budget;
  j["empirical"] = matrix2_json(empirical.entries);
  j["ideal"] = matrix2_json(ideal.entries);
  j["max_entry_error"] = report.max_entry_error;
  j["energy_ratio"] = report.empirical_energy_ratio;
  j["energy_ratio_expected"] = report.expected_energy_ratio;
  j["orthogonality_defect"] = report.orthogonality_defect;
  j["row_completeness_defect"] = report.row_completeness_defect;
  j["leakage_warning"] = empirical.leakage_warning;
  write_json(out_path(config, "split_report.json"), j);

  log << "mode " << mode << ": lambda = " << fmt6(empirical.lambda)
      << ", theta = " << fmt6(theta_dir) << "\n";
  log << "  empirical        ideal\n";
  for (int r = 0; r < 2; ++r) {
    log << "  [" << std::setw(9) << fmt6(empirical.entries(r, 0)) << " "
        << std::setw(9) << fmt6(empirical.entries(r, 1)) << "]   ["
        << std::setw(9) << fmt6(ideal.entries(r, 0)) << " " << std::setw(9)
        << fmt6(ideal.entries(r, 1)) << "]\n";
  }
  log << "  max entry error " << fmt6(report.max_entry_error)
      << ", energy ratio " << fmt6(report.empirical_energy_ratio) << " vs "
      << fmt6(report.expected_energy_ratio) << ", orthogonality defect "
      << fmt6(report.orthogonality_defect) << "\n";
  return kExitOk;
}

namespace {

struct CheckOutcome {
  std::string name;
  bool pass = false;
  std::string detail;
};

void run_check(std::vector<CheckOutcome>& results, const std::string& name,
               const std::function<std::pair<bool, std::string>()>& body) {
  CheckOutcome outcome;
  outcome.name = name;
  try {
    auto [ok, detail] = body();
    outcome.pass = ok;
    outcome.detail = std::move(detail);
  } catch (const std::exception& e) {
    outcome.pass = false;
    outcome.detail = std::string("error: ") + e.what();
  }
  results.push_back(std::move(outcome));
}

}  // namespace

int cmd_validate(const RunConfig& config, std::ostream& log) {
  std::vector<CheckOutcome> results;

  Grid grid = config.grid();
  const DriveSetting drive = config.drive();

  run_check(results, "config", [&] {
    validate_config(config.params, grid, drive);
    return std::make_pair(true, std::string("all invariants hold"));
  });

  run_check(results, "conservation", [&] {
    const FieldEnvelope pulse = gaussian_envelope(
        grid, grid.duration() / 2.0, grid.duration() / 12.0);
    StageOptions opts;
    opts.check_balance = false;
    const auto stage = run_mapping_stage(config.params, grid,
                                         config.params.rabi_base, pulse, opts);
    const double residual = stage.balance_residual;
    return std::make_pair(residual < config.balance_tol,
                          "balance residual " + fmt6(residual) + " (tol " +
                              fmt6(config.balance_tol) + ")");
  });

  CyclePipeline pipeline;
  ModeBasis basis;
  bool pipeline_ok = false;
  run_check(results, "kernel-symmetry", [&] {
    pipeline = build_cycle(config);
    const double defect = symmetry_defect(pipeline.cycle);
    basis = decompose(pipeline.cycle);
    pipeline_ok = true;
    return std::make_pair(defect < 1e-3,
                          "weighted asymmetry " + fmt6(defect));
  });

  run_check(results, "composition-oracle", [&] {
    if (!pipeline_ok) return std::make_pair(false, std::string("skipped: no kernel"));
    const auto trials = smooth_trials(grid, 10, 20240521u);
    const double worst =
        verify_composition(pipeline.cycle, config.params, grid, trials);
    return std::make_pair(worst < 1e-10,
                          "worst pipeline-vs-simulation error " + fmt6(worst));
  });

  run_check(results, "passivity", [&] {
    if (!pipeline_ok) return std::make_pair(false, std::string("skipped: no kernel"));
    const double max_lambda =
        basis.eigenvalues.size() > 0 ? basis.eigenvalues[0] : 0.0;
    const double min_lambda =
        basis.eigenvalues.size() > 0
            ? basis.eigenvalues[basis.eigenvalues.size() - 1]
            : 0.0;
    const bool ok = max_lambda <= 1.0 + 1e-6 && min_lambda >= 0.0;
    return std::make_pair(ok, "lambda in [" + fmt6(min_lambda) + ", " +
                                  fmt6(max_lambda) + "]");
  });

  run_check(results, "mode-orthonormality", [&] {
    if (!pipeline_ok) return std::make_pair(false, std::string("skipped: no kernel"));
    const Eigen::Index n = basis.eigenvalues.size();
    const Eigen::VectorXd s =
        Eigen::Map<const Eigen::VectorXd>(grid.time_weights().data(), n)
            .cwiseSqrt();
    const Eigen::MatrixXd psi = s.asDiagonal() * basis.modes;
    const double defect =
        (psi.transpose() * psi - Eigen::MatrixXd::Identity(n, n))
            .cwiseAbs()
            .maxCoeff();
    return std::make_pair(defect < 1e-6, "weighted Gram defect " + fmt6(defect));
  });

  run_check(results, "mode-completeness", [&] {
    if (!pipeline_ok) return std::make_pair(false, std::string("skipped: no kernel"));
    const double residual = reconstruct(basis, basis.size()).second;
    return std::make_pair(residual < 1e-9,
                          "full-rank reconstruction residual " + fmt6(residual));
  });

  run_check(results, "grid-convergence", [&] {
    if (!pipeline_ok) return std::make_pair(false, std::string("skipped: no kernel"));
    const Grid fine =
        Grid::uniform(grid.duration(), grid.length(), 2 * grid.n_t(),
                      2 * grid.n_z());
    const auto mapping = build_mapping_kernel(config.params, fine,
                                              config.params.rabi_base,
                                              config.workers);
    const auto readout = build_readout_kernel(config.params, fine,
                                              Direction::backward,
                                              config.workers);
    const ModeBasis fine_basis = decompose(compose_full_cycle(mapping, readout));
    double drift = 0.0;
    for (Eigen::Index i = 0; i < 3 && i < basis.eigenvalues.size() &&
                             i < fine_basis.eigenvalues.size();
         ++i) {
      drift = std::max(drift, std::abs(basis.eigenvalues[i] -
                                       fine_basis.eigenvalues[i]));
    }
    return std::make_pair(drift < 1e-3,
                          "top-eigenvalue drift under refinement " +
                              fmt6(drift));
  });

  run_check(results, "splitter-fidelity", [&] {
    if (!pipeline_ok) return std::make_pair(false, std::string("skipped: no kernel"));
    const SplitterMatrix empirical =
        empirical_matrix(config.params, grid, drive, basis, 0);
    const double theta_dir = std::atan2(drive.omega_r2, drive.omega_r1);
    const SplitterMatrix ideal = ideal_matrix(theta_dir, empirical.lambda, 0);
    const CompareReport report = compare(empirical, ideal);
    const bool ok =
        report.max_entry_error < 1e-2 && report.energy_ratio_error < 1e-2;
    return std::make_pair(ok, "max entry error " +
                                  fmt6(report.max_entry_error) +
                                  ", energy-ratio error " +
                                  fmt6(report.energy_ratio_error));
  });

  run_check(results, "splitter-unitarity", [&] {
    if (!pipeline_ok) return std::make_pair(false, std::string("skipped: no kernel"));
    const SplitterMatrix empirical =
        empirical_matrix(config.params, grid, drive, basis, 0);
    const double defect =
        (empirical.entries * empirical.entries.transpose() -
         empirical.lambda * Eigen::Matrix2d::Identity())
            .norm();
    const double gate = 0.05 * std::max(empirical.lambda, 1e-6);
    return std::make_pair(defect <= gate,
                          "orthogonality defect " + fmt6(defect) + " (gate " +
                              fmt6(gate) + ")");
  });

  run_check(results, "protocol-linearity", [&] {
    const auto trials = smooth_trials(grid, 4, 777u);
    StageOptions opts;
    opts.check_balance = false;
    const Complex alpha(0.6, -0.3), beta(-0.8, 0.45);
    FieldEnvelope a1(grid), a2(grid);
    for (std::size_t j = 0; j < grid.n_t(); ++j) {
      a1.samples[j] =
          alpha * trials[0].samples[j] + beta * trials[1].samples[j];
      a2.samples[j] =
          alpha * trials[2].samples[j] + beta * trials[3].samples[j];
    }
    const auto lhs = run_protocol(config.params, grid, drive, a1, a2, opts);
    const auto u = run_protocol(config.params, grid, drive, trials[0],
                                trials[2], opts);
    const auto v = run_protocol(config.params, grid, drive, trials[1],
                                trials[3], opts);
    double diff2 = 0.0, ref2 = 0.0;
    const auto& w = grid.time_weights();
    for (std::size_t j = 0; j < grid.n_t(); ++j) {
      const Complex dp = lhs.a_plus.samples[j] -
                         (alpha * u.a_plus.samples[j] +
                          beta * v.a_plus.samples[j]);
      const Complex dm = lhs.a_minus.samples[j] -
                         (alpha * u.a_minus.samples[j] +
                          beta * v.a_minus.samples[j]);
      diff2 += w[j] * (std::norm(dp) + std::norm(dm));
      ref2 += w[j] * (std::norm(lhs.a_plus.samples[j]) +
                      std::norm(lhs.a_minus.samples[j]));
    }
    const double err = ref2 > 0.0 ? std::sqrt(diff2 / ref2) : std::sqrt(diff2);
    return std::make_pair(err < 1e-12, "superposition error " + fmt6(err));
  });

  bool all_ok = true;
  log << "check                 result  detail\n";
  for (const auto& r : results) {
    all_ok = all_ok && r.pass;
    log << std::left << std::setw(22) << r.name
        << (r.pass ? "PASS    " : "FAIL    ") << r.detail << "\n";
  }
  log << (all_ok ? "all checks passed\n" : "some checks FAILED\n");
  return all_ok ? kExitOk : kExitCheckFailed;
}

}  // namespace tripod
