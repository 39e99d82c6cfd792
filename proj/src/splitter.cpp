#include "tripod/splitter.hpp"

#include <cmath>
#include <numbers>

namespace tripod {

namespace {

Complex weighted_projection(const ModeBasis& basis, std::size_t mode,
                            const FieldEnvelope& env) {
  const auto& w = basis.grid.time_weights();
  Complex acc(0.0, 0.0);
  for (std::size_t j = 0; j < basis.grid.n_t(); ++j) {
    acc += w[j] * basis.modes(static_cast<Eigen::Index>(j),
                              static_cast<Eigen::Index>(mode)) *
           env.samples[j];
  }
  return acc;
}

}  // namespace

ProtocolResult run_protocol(const PhysicalParams& params, const Grid& grid,
                            const DriveSetting& drive,
                            const FieldEnvelope& a1, const FieldEnvelope& a2,
                            const StageOptions& opts) {
  validate_config(params, grid, drive);
  if (!a1.grid.same_as(grid) || !a2.grid.same_as(grid)) {
    throw GridMismatch("input envelopes do not share the protocol grid");
  }

  const auto mp1 = run_mapping_stage(params, grid, drive.omega_w1, a1, opts);
  const auto mp2 = run_mapping_stage(params, grid, drive.omega_w2, a2, opts);

  // inter-stage storage keeps only the ground-state spin wave
  SpinWaveState b1 = mp1.stored;
  SpinWaveState b2 = mp2.stored;
  b1.c.assign(grid.n_z(), Complex(0.0, 0.0));
  b2.c.assign(grid.n_z(), Complex(0.0, 0.0));

  ProtocolResult result;
  result.a_plus = run_readout_stage(params, grid,
                                    {drive.omega_r1, drive.omega_r2},
                                    Sign::plus, b1, b2, Direction::backward,
                                    opts);
  result.a_minus = run_readout_stage(params, grid,
                                     {drive.omega_r3, drive.omega_r4},
                                     Sign::minus, b1, b2, Direction::backward,
                                     opts);

  result.diag.mp1_balance = mp1.balance_residual;
  result.diag.mp2_balance = mp2.balance_residual;
  result.diag.mp1_residual_c = mp1.residual_c_norm;
  result.diag.mp2_residual_c = mp2.residual_c_norm;
  result.diag.input_energy = a1.norm2() + a2.norm2();
  result.diag.output_energy = result.a_plus.norm2() + result.a_minus.norm2();
  if (!drive.unitary_mode(params.rabi_base)) {
    result.diag.warnings.push_back(
        "drive is not unitary-mode: the counter-phase mixture read by RP2 "
        "is not the combination left untouched by RP1");
  }
  return result;
}

double SplitterMatrix::row_completeness_defect() const {
  double worst = 0.0;
  for (int k = 0; k < 2; ++k) {
    const double row2 =
        entries(k, 0) * entries(k, 0) + entries(k, 1) * entries(k, 1);
    worst = std::max(worst,
                     std::abs(row2 + vacuum_budget * vacuum_budget - 1.0));
  }
  return worst;
}

SplitterMatrix empirical_matrix(const PhysicalParams& params, const Grid& grid,
                                const DriveSetting& drive,
                                const ModeBasis& basis, std::size_t mode_index,
                                const StageOptions& opts) {
  if (mode_index >= basis.size()) {
    throw OutOfRange("mode index out of range");
  }
  if (!basis.grid.same_as(grid)) {
    throw GridMismatch("mode basis grid does not match protocol grid");
  }

  const FieldEnvelope mode_in = mode_input_envelope(basis, mode_index);
  const FieldEnvelope zero(grid);

  SplitterMatrix m;
  m.mode_index = static_cast<int>(mode_index);
  m.lambda = basis.eigenvalues[static_cast<Eigen::Index>(mode_index)];
  m.vacuum_budget = std::sqrt(std::max(0.0, 1.0 - m.lambda));
  m.theta = std::atan2(drive.omega_r2, drive.omega_r1);

  double on_mode = 0.0;
  double off_mode = 0.0;
  double in_energy = 0.0;
  double out_energy = 0.0;
  for (int port = 0; port < 2; ++port) {
    const auto run = port == 0
                         ? run_protocol(params, grid, drive, mode_in, zero, opts)
                         : run_protocol(params, grid, drive, zero, mode_in, opts);
    const Complex ep = weighted_projection(basis, mode_index, run.a_plus);
    const Complex em = weighted_projection(basis, mode_index, run.a_minus);
    m.entries(0, port) = ep.real();
    m.entries(1, port) = em.real();
    const double plus2 = run.a_plus.norm2();
    const double minus2 = run.a_minus.norm2();
    on_mode += std::norm(ep) + std::norm(em);
    off_mode += std::max(0.0, plus2 - std::norm(ep)) +
                std::max(0.0, minus2 - std::norm(em));
    in_energy += run.diag.input_energy;
    out_energy += plus2 + minus2;
  }
  m.energy_ratio = in_energy > 0.0 ? out_energy / in_energy : 0.0;
  m.leakage_warning = off_mode > 0.05 * on_mode && on_mode > 0.0;
  return m;
}

SplitterMatrix ideal_matrix(double theta, double lambda_i, int mode_index) {
  if (!(theta >= 0.0 && theta <= std::numbers::pi / 2.0) ||
      !std::isfinite(theta)) {
    throw OutOfRange("theta must lie in [0, pi/2]");
  }
  if (!(lambda_i >= 0.0 && lambda_i <= 1.0)) {
    throw OutOfRange("lambda must lie in [0, 1]");
  }
  SplitterMatrix m;
  const double root = std::sqrt(lambda_i);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  m.entries << root * c, root * s, root * s, -root * c;
  m.mode_index = mode_index;
  m.lambda = lambda_i;
  m.vacuum_budget = std::sqrt(1.0 - lambda_i);
  m.theta = theta;
  m.energy_ratio = lambda_i;
  return m;
}

CompareReport compare(const SplitterMatrix& empirical,
                      const SplitterMatrix& ideal) {
  if (empirical.mode_index >= 0 && ideal.mode_index >= 0 &&
      empirical.mode_index != ideal.mode_index) {
    throw OutOfRange("matrices describe different modes");
  }
  CompareReport r;
  r.max_entry_error =
      (empirical.entries - ideal.entries).cwiseAbs().maxCoeff();
  r.empirical_energy_ratio = empirical.energy_ratio;
  r.expected_energy_ratio = ideal.lambda;
  r.energy_ratio_error =
      std::abs(empirical.energy_ratio - ideal.lambda);
  const Eigen::Matrix2d gram =
      empirical.entries * empirical.entries.transpose();
  r.orthogonality_defect =
      (gram - empirical.lambda * Eigen::Matrix2d::Identity()).norm();
  r.row_completeness_defect = empirical.row_completeness_defect();
  r.leakage_warning = empirical.leakage_warning;
  return r;
}

}  // namespace tripod
