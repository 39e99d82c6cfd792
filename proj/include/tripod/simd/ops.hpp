#pragma once

#include <cstddef>

namespace tripod::simd {

/// Precomputed per-stage constants of one Gauss-collocation time step.
/// The step advances the spin-wave state (b, c) of every batch column and
/// accumulates the two collocation-node values needed for the emitted
/// field samples. See solver.cpp for the derivation.
struct GaussStepConstants {
  double om = 0.0;        // drive Rabi frequency
  double g = 0.0;         // coupling g*sqrt(N)
  double g2hz = 0.0;      // g^2 * dz
  double g2hz_half = 0.0; // g^2 * dz / 2
  double inv_rho = 0.0;   // 1/(2 - sqrt(3))
  double rho = 0.0;       // 2 - sqrt(3)
  double half_h = 0.0;    // dt/2
  double hmo_re = 0.0;    // dt * mu * om (mu = 1/4 + i sqrt(3)/12)
  double hmo_im = 0.0;
  double ghz_re = 0.0;    // dt * mu * g^2 * dz
  double ghz_im = 0.0;
  double invD_re = 0.0;   // 1 / (1 + (dt mu om)^2 + dt mu g^2 dz/2)
  double invD_im = 0.0;
  double alpha1 = 0.0;    // dt * a11
  double beta1 = 0.0;     // dt * a12 / rho
  double alpha2 = 0.0;    // dt * a21
  double beta2 = 0.0;     // dt * a22 / rho
};

/// One batched collocation step over all n_z rows and m batch columns.
/// b, c are (n_z x m) row-major state arrays updated in place. a1, a2
/// hold the boundary-input samples of the step's two collocation nodes
/// (m values each). The five carry/accumulator buffers (m values each)
/// must be zeroed by the caller before the call; on return z1_acc/z2_acc
/// hold sum_k Z1c[k], sum_k Z2c[k] for the emitted-sample formula.
///
/// Columns are independent: no arithmetic crosses batch lanes, so the
/// result of a column never depends on how the batch is partitioned.
using GaussStepFn = void (*)(const GaussStepConstants& k, std::size_t n_z,
                             std::size_t m, const double* a1, const double* a2,
                             double* b, double* c, double* sum_c,
                             double* su_re, double* su_im, double* z1_acc,
                             double* z2_acc);

using AxpyFn = void (*)(double* dst, const double* x, double a, std::size_t n);
using DotFn = double (*)(const double* x, const double* y, std::size_t n);
/// sum_i w[i] * (re[i]^2 + im[i]^2); im may be nullptr.
using WeightedNorm2Fn = double (*)(const double* w, const double* re,
                                   const double* im, std::size_t n);

struct Ops {
  const char* name;
  GaussStepFn gauss_step;
  AxpyFn axpy;
  DotFn dot;
  WeightedNorm2Fn weighted_norm2;
};

/// Scalar reference implementation (always available).
const Ops& scalar_ops();

/// AVX2 implementation, or nullptr when not compiled in or not supported
/// by the CPU.
const Ops* avx2_ops();

/// The implementation selected at startup: AVX2 when available, else
/// scalar. Override with TRIPOD_SIMD=scalar|avx2|auto.
const Ops& active();

}  // namespace tripod::simd
