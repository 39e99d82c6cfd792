#include "tripod/solver.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

namespace tripod {

namespace {

// 2-stage Gauss-Legendre Butcher tableau. The stage system is solved by
// diagonalizing the tableau: with mu = 1/4 + i sqrt(3)/12 and
// rho = 2 - sqrt(3), U = K1 + i rho K2 satisfies (I - h mu A) U = f,
// and the A-block structure reduces the solve to a lower-triangular
// recurrence in z (the slaved-field quadrature is cumulative).
constexpr double kSqrt3 = 1.7320508075688772;
constexpr double kA11 = 0.25;
constexpr double kA12 = 0.25 - kSqrt3 / 6.0;
constexpr double kA21 = 0.25 + kSqrt3 / 6.0;
constexpr double kA22 = 0.25;
constexpr double kRho = 2.0 - kSqrt3;

bool all_finite(const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i])) return false;
  }
  return true;
}

}  // namespace

StagePropagator::StagePropagator(const Grid& grid, double coupling,
                                 double omega)
    : grid_(grid), g_(coupling), om_(omega) {
  const double h = grid.time_step();
  const double hz = grid.space_step();
  const std::complex<double> mu(0.25, kSqrt3 / 12.0);
  const std::complex<double> hmo = h * mu * om_;
  const std::complex<double> beta = 1.0 + hmo * hmo;
  const std::complex<double> gamma = h * mu * g_ * g_;
  const std::complex<double> ghz = gamma * hz;
  const std::complex<double> invD = 1.0 / (beta + gamma * hz / 2.0);
  k_.om = om_;
  k_.g = g_;
  k_.g2hz = g_ * g_ * hz;
  k_.g2hz_half = g_ * g_ * hz / 2.0;
  k_.rho = kRho;
  k_.inv_rho = 1.0 / kRho;
  k_.half_h = h / 2.0;
  k_.hmo_re = hmo.real();
  k_.hmo_im = hmo.imag();
  k_.ghz_re = ghz.real();
  k_.ghz_im = ghz.imag();
  k_.invD_re = invD.real();
  k_.invD_im = invD.imag();
  k_.alpha1 = h * kA11;
  k_.beta1 = h * kA12 / kRho;
  k_.alpha2 = h * kA21;
  k_.beta2 = h * kA22 / kRho;
}

void StagePropagator::run(std::size_t m, const double* input, const double* b0,
                          bool reflect, double* emitted, double* b_out,
                          double* c_out) const {
  const std::size_t n_z = grid_.n_z();
  const std::size_t n_t = grid_.n_t();
  const double hz = grid_.space_step();
  const auto& ops = simd::active();

  if (b0 == nullptr) {
    std::fill(b_out, b_out + n_z * m, 0.0);
  } else if (reflect) {
    for (std::size_t row = 0; row < n_z; ++row) {
      const double* src = b0 + (n_z - 1 - row) * m;
      std::copy(src, src + m, b_out + row * m);
    }
  } else {
    std::copy(b0, b0 + n_z * m, b_out);
  }
  std::fill(c_out, c_out + n_z * m, 0.0);

  std::vector<double> zeros(input == nullptr ? m : 0, 0.0);
  std::vector<double> sum_c(m), su_re(m), su_im(m), z1(m), z2(m);

  const std::size_t n_steps = n_t / 2;
  for (std::size_t s = 0; s < n_steps; ++s) {
    const double* a1 = input ? input + (2 * s) * m : zeros.data();
    const double* a2 = input ? input + (2 * s + 1) * m : zeros.data();
    std::fill(sum_c.begin(), sum_c.end(), 0.0);
    std::fill(su_re.begin(), su_re.end(), 0.0);
    std::fill(su_im.begin(), su_im.end(), 0.0);
    std::fill(z1.begin(), z1.end(), 0.0);
    std::fill(z2.begin(), z2.end(), 0.0);
    ops.gauss_step(k_, n_z, m, a1, a2, b_out, c_out, sum_c.data(),
                   su_re.data(), su_im.data(), z1.data(), z2.data());
    double* e1 = emitted + (2 * s) * m;
    double* e2 = emitted + (2 * s + 1) * m;
    for (std::size_t i = 0; i < m; ++i) {
      e1[i] = a1[i] - g_ * hz * z1[i];
      e2[i] = a2[i] - g_ * hz * z2[i];
    }
  }
}

namespace {

// Runs the propagator on the real and imaginary channels of a complex
// problem (the stage equations have real coefficients). A channel that is
// identically zero is skipped.
struct ComplexStageRun {
  FieldEnvelope emitted;
  SpinWaveState final_state;
};

ComplexStageRun run_complex(const StagePropagator& prop, const Grid& grid,
                            const FieldEnvelope* input,
                            const SpinWaveState* initial, bool reflect) {
  const std::size_t n_t = grid.n_t();
  const std::size_t n_z = grid.n_z();

  bool need_im = false;
  std::vector<double> in_re, in_im;
  if (input != nullptr) {
    in_re.resize(n_t);
    in_im.resize(n_t);
    for (std::size_t j = 0; j < n_t; ++j) {
      in_re[j] = input->samples[j].real();
      in_im[j] = input->samples[j].imag();
      need_im = need_im || in_im[j] != 0.0;
    }
  }
  std::vector<double> b0_re, b0_im;
  if (initial != nullptr) {
    b0_re.resize(n_z);
    b0_im.resize(n_z);
    for (std::size_t k = 0; k < n_z; ++k) {
      b0_re[k] = initial->b[k].real();
      b0_im[k] = initial->b[k].imag();
      need_im = need_im || b0_im[k] != 0.0;
    }
  }

  std::vector<double> em_re(n_t), bT_re(n_z), cT_re(n_z);
  prop.run(1, input ? in_re.data() : nullptr,
           initial ? b0_re.data() : nullptr, reflect, em_re.data(),
           bT_re.data(), cT_re.data());
  std::vector<double> em_im(n_t, 0.0), bT_im(n_z, 0.0), cT_im(n_z, 0.0);
  if (need_im) {
    prop.run(1, input ? in_im.data() : nullptr,
             initial ? b0_im.data() : nullptr, reflect, em_im.data(),
             bT_im.data(), cT_im.data());
  }

  if (!all_finite(em_re.data(), n_t) || !all_finite(bT_re.data(), n_z) ||
      !all_finite(cT_re.data(), n_z) ||
      (need_im && (!all_finite(em_im.data(), n_t) ||
                   !all_finite(bT_im.data(), n_z) ||
                   !all_finite(cT_im.data(), n_z)))) {
    throw NonFiniteState("stage integration produced a non-finite state");
  }

  ComplexStageRun out{FieldEnvelope(grid), SpinWaveState(grid)};
  for (std::size_t j = 0; j < n_t; ++j) {
    out.emitted.samples[j] = Complex(em_re[j], em_im[j]);
  }
  for (std::size_t k = 0; k < n_z; ++k) {
    out.final_state.b[k] = Complex(bT_re[k], bT_im[k]);
    out.final_state.c[k] = Complex(cT_re[k], cT_im[k]);
  }
  return out;
}

}  // namespace

StageResult run_mapping_stage(const PhysicalParams& params, const Grid& grid,
                              double omega_w, const FieldEnvelope& input,
                              const StageOptions& opts) {
  auto gv = grid.violations();
  if (!gv.empty()) throw InvalidGrid("invalid grid", gv);
  if (!input.grid.same_as(grid)) {
    throw GridMismatch("input envelope grid does not match stage grid");
  }
  StagePropagator prop(grid, params.coupling, omega_w);
  auto run = run_complex(prop, grid, &input, nullptr, false);

  StageResult result;
  result.stored = std::move(run.final_state);
  result.transmitted = std::move(run.emitted);
  result.residual_c_norm = std::sqrt(result.stored.c_norm2());
  result.balance_residual = excitation_balance(input, result);
  if (opts.check_balance && result.balance_residual > opts.balance_tol) {
    throw GridTooCoarse("excitation-balance residual " +
                        std::to_string(result.balance_residual) +
                        " exceeds tolerance " +
                        std::to_string(opts.balance_tol));
  }
  return result;
}

FieldEnvelope run_readout_stage(const PhysicalParams& params, const Grid& grid,
                                std::pair<double, double> omega_pair,
                                Sign sign, const SpinWaveState& stored_1,
                                const SpinWaveState& stored_2,
                                Direction direction, const StageOptions&) {
  auto gv = grid.violations();
  if (!gv.empty()) throw InvalidGrid("invalid grid", gv);
  if (!stored_1.grid.same_as(grid) || !stored_2.grid.same_as(grid)) {
    throw GridMismatch("stored spin waves do not share the stage grid");
  }
  const double om = params.rabi_base;
  const double sum = omega_pair.first * omega_pair.first +
                     omega_pair.second * omega_pair.second;
  if (std::abs(sum - om * om) > 1e-12 * om * om) {
    throw InvalidDrive("readout pair violates the Rabi normalization",
                       {"omega_a^2 + omega_b^2 must equal rabi_base^2"});
  }

  const double s = (sign == Sign::plus) ? 1.0 : -1.0;
  SpinWaveState mixed(grid);
  const double wa = omega_pair.first / om;
  const double wb = s * omega_pair.second / om;
  for (std::size_t k = 0; k < grid.n_z(); ++k) {
    mixed.b[k] = wa * stored_1.b[k] + wb * stored_2.b[k];
    mixed.c[k] = wa * stored_1.c[k] + wb * stored_2.c[k];
  }

  StagePropagator prop(grid, params.coupling, om);
  auto run = run_complex(prop, grid, nullptr, &mixed,
                         direction == Direction::backward);
  return std::move(run.emitted);
}

std::pair<SpinWaveState, SpinWaveState> mix_spin_waves(
    const SpinWaveState& b1, const SpinWaveState& b2,
    const DriveSetting& drive) {
  if (!b1.grid.same_as(b2.grid)) {
    throw GridMismatch("spin waves do not share a grid");
  }
  const double om = drive.omega_w1;
  SpinWaveState plus(b1.grid), minus(b1.grid);
  for (std::size_t k = 0; k < b1.grid.n_z(); ++k) {
    plus.b[k] = (drive.omega_r1 * b1.b[k] + drive.omega_r2 * b2.b[k]) / om;
    plus.c[k] = (drive.omega_r1 * b1.c[k] + drive.omega_r2 * b2.c[k]) / om;
    minus.b[k] = (drive.omega_r3 * b1.b[k] - drive.omega_r4 * b2.b[k]) / om;
    minus.c[k] = (drive.omega_r3 * b1.c[k] - drive.omega_r4 * b2.c[k]) / om;
  }
  return {std::move(plus), std::move(minus)};
}

double excitation_balance(const FieldEnvelope& input,
                          const StageResult& result) {
  const double in2 = input.norm2();
  const double out2 = result.transmitted.norm2();
  const double stored2 = result.stored.excitation_norm2();
  const double denom =
      std::max(in2, std::numeric_limits<double>::epsilon());
  return std::abs(in2 - out2 - stored2) / denom;
}

}  // namespace tripod
